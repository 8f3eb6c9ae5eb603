import click

from trustshape.cli.options import experiment_options, reports_errors
from trustshape.services.experiment_service import run_sweep, write_sweep


@click.command("sweep")
@experiment_options
@reports_errors
def command(config, out_dir):
    """Solve the original and shaped games over the initial-trust grid for every epsilon."""
    result = run_sweep(config)
    write_sweep(result, out_dir)

    for item in result.summary.epsilons:
        click.echo(
            f"epsilon={item.epsilon:g} action0_fraction={item.action0_fraction:.4f} "
            f"max_loss={item.max_loss:.6g} within_budget={item.loss_within_budget}"
        )

    if not all(item.loss_within_budget for item in result.summary.epsilons):
        raise SystemExit(1)
