import functools
from pathlib import Path

import click

from trustshape.core.errors import TrustShapeError
from trustshape.core.logging import configure_logging
from trustshape.schemas.experiment import ExperimentConfig
from trustshape.services.config_service import apply_overrides, parse_config


def _default_help() -> dict[str, str]:
    defaults = ExperimentConfig()
    grid = defaults.grid

    return {
        "config": "built-in defaults",
        "out": defaults.output_dir,
        "seed": str(defaults.seed),
        "epsilon": ",".join(f"{epsilon:g}" for epsilon in defaults.epsilons),
        "grid": f"{grid.alpha_min:g},{grid.alpha_max:g},{grid.beta_min:g},{grid.beta_max:g},{grid.step:g}",
        "mode": defaults.threat_mode,
        "samples": str(defaults.samples),
    }


def experiment_options(command):
    """Flags shared by every experiment command; unset flags fall back to the config file, then to the defaults shown."""
    shown = _default_help()
    decorators = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), show_default=shown["config"], help="JSON experiment config."),
        click.option("--out", "output_dir", type=click.Path(file_okay=False), show_default=shown["out"], help="Output directory."),
        click.option("--seed", type=click.IntRange(min=0), show_default=shown["seed"], help="Base seed for every random stream."),
        click.option("--epsilon", "epsilons", show_default=shown["epsilon"], help="Comma-separated shaping budgets."),
        click.option("--grid", show_default=shown["grid"], help="Initial-trust grid as a_min,a_max,b_min,b_max,step."),
        click.option("--mode", type=click.Choice(["plugin", "bayes"]), show_default=shown["mode"], help="Threat-probability mode."),
        click.option("--samples", type=click.IntRange(min=1), show_default=shown["samples"], help="Monte-Carlo rollouts per estimate."),
        click.option("--quiet", is_flag=True, help="Only log warnings and errors."),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


def load_experiment(
    config_path: str | None,
    output_dir: str | None,
    seed: int | None,
    epsilons: str | None,
    grid: str | None,
    mode: str | None,
    samples: int | None,
) -> ExperimentConfig:
    config = parse_config(config_path) if config_path else ExperimentConfig()
    return apply_overrides(
        config,
        output_dir=output_dir,
        seed=seed,
        epsilons=epsilons,
        grid=grid,
        mode=mode,
        samples=samples,
    )


def reports_errors(command):
    """Configure logging, build the config, and turn domain errors into exit status 1."""

    @functools.wraps(command)
    def wrapper(config_path, output_dir, seed, epsilons, grid, mode, samples, quiet, **kwargs):
        configure_logging(quiet=quiet)
        try:
            config = load_experiment(config_path, output_dir, seed, epsilons, grid, mode, samples)
            return command(config, Path(config.output_dir), **kwargs)
        except TrustShapeError as exc:
            click.echo(f"error[{exc.code}]: {exc.detail}", err=True)
            raise SystemExit(1) from exc

    return wrapper
