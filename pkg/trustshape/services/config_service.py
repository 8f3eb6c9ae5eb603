import json
import logging
import re
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from trustshape.core.errors import ConfigInvalidError, ConfigParseError
from trustshape.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def _line_of(text: str, loc: tuple) -> int | None:
    # Walk the key path so a nested key is found inside its parent object
    position, start = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        match = re.compile(rf'"{re.escape(part)}"\s*:').search(text, position)
        if match is None:
            return None
        position, start = match.end(), match.start()

    return None if start is None else text.count("\n", 0, start) + 1


def _validate(data: dict[str, Any], text: str = "") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()

        unknown = [error for error in errors if error["type"] == "extra_forbidden"]
        if unknown:
            location = ".".join(str(part) for part in unknown[0]["loc"])
            line = _line_of(text, unknown[0]["loc"])
            where = f" (line {line})" if line else ""
            raise ConfigParseError(f"Unknown key '{location}'{where}") from exc

        details = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}"
            for error in errors
        )
        raise ConfigInvalidError(details) from exc


def parse_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"Cannot read config {path}: {exc.strerror}") from exc

    if not text.strip():
        logger.info("Config %s is empty, using defaults", path)
        return ExperimentConfig()

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc

    if not isinstance(data, dict):
        raise ConfigParseError(f"{path}: top level must be a JSON object")

    return _validate(data, text)


def parse_epsilons(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise ConfigParseError(f"Cannot parse epsilon list {value!r}") from exc


def parse_grid(value: str) -> dict[str, float]:
    parts = value.split(",")
    if len(parts) != 5:
        raise ConfigParseError(
            f"Grid must be a_min,a_max,b_min,b_max,step, got {value!r}"
        )

    try:
        alpha_min, alpha_max, beta_min, beta_max, step = (float(part) for part in parts)
    except ValueError as exc:
        raise ConfigParseError(f"Cannot parse grid {value!r}") from exc

    return {
        "alpha_min": alpha_min,
        "alpha_max": alpha_max,
        "beta_min": beta_min,
        "beta_max": beta_max,
        "step": step,
    }


def apply_overrides(
    config: ExperimentConfig,
    *,
    output_dir: str | None = None,
    seed: int | None = None,
    epsilons: str | None = None,
    grid: str | None = None,
    mode: str | None = None,
    samples: int | None = None,
) -> ExperimentConfig:
    data = config.model_dump()

    if output_dir is not None:
        data["output_dir"] = output_dir
    if seed is not None:
        data["seed"] = seed
    if epsilons is not None:
        data["epsilons"] = parse_epsilons(epsilons)
    if grid is not None:
        data["grid"] = parse_grid(grid)
    if mode is not None:
        data["sar"]["threat_mode"] = "bayes" if mode == "bayes" else "plugin"
    if samples is not None:
        data["samples"] = samples

    return _validate(data)


def config_schema() -> dict[str, Any]:
    return ExperimentConfig.model_json_schema()
