import click

from trustshape.cli.options import experiment_options, reports_errors
from trustshape.services.experiment_service import run_verify, write_verify


@click.command("verify")
@experiment_options
@reports_errors
def command(config, out_dir):
    """Check the loss-bound certificates and the DP / Monte-Carlo agreement."""
    report = run_verify(config)
    path = write_verify(report, out_dir)

    for item in report.epsilons:
        click.echo(f"epsilon={item.epsilon:g} {'PASS' if item.passed else 'FAIL'}")
    click.echo(f"{'PASS' if report.passed else 'FAIL'} -> {path}")

    if not report.passed:
        raise SystemExit(1)
