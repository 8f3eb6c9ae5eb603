import click

from trustshape.cli.options import experiment_options, reports_errors
from trustshape.services.experiment_service import run_lp


@click.command("lp")
@experiment_options
@reports_errors
def command(config, out_dir):
    """Print the designed linear potential and its loss-constraint certificate per epsilon."""
    report = run_lp(config)
    click.echo(report.model_dump_json(indent=2))

    if not all(row.loss_constraint.satisfied for row in report.rows):
        raise SystemExit(1)
