import csv
import hashlib
from collections.abc import Iterable, Sequence
from pathlib import Path

from pydantic import BaseModel

from trustshape.core.errors import OutputError


def canonical_hash(model: BaseModel) -> str:
    return hashlib.sha256(model.model_dump_json().encode("utf-8")).hexdigest()


def ensure_directory(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"Cannot create output directory {path}: {exc.strerror}") from exc
    return path


def _cell(value):
    return repr(value) if isinstance(value, float) else value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[BaseModel]) -> Path:
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                values = row.model_dump()
                writer.writerow([_cell(values[column]) for column in columns])
    except OSError as exc:
        raise OutputError(f"Cannot write {path}: {exc.strerror}") from exc
    return path


def write_json(path: Path, model: BaseModel) -> Path:
    try:
        path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Cannot write {path}: {exc.strerror}") from exc
    return path


def write_jsonl(path: Path, lines: Iterable[str]) -> Path:
    try:
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            for line in lines:
                handle.write(line + "\n")
    except OSError as exc:
        raise OutputError(f"Cannot write {path}: {exc.strerror}") from exc
    return path
