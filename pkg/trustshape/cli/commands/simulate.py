import click

from trustshape.cli.options import experiment_options, reports_errors
from trustshape.services.experiment_service import run_simulate, write_simulation


@click.command("simulate")
@experiment_options
@click.option(
    "--policy",
    type=click.Choice(["optimal", "shaped-optimal", "always-0", "always-1"]),
    default="optimal",
    show_default=True,
)
@reports_errors
def command(config, out_dir, policy):
    """Roll out a policy and estimate its task value and final expected trust."""
    result = run_simulate(config, policy)
    path = write_simulation(result, out_dir)

    for run in result.report.runs:
        label = policy if run.epsilon is None else f"{policy} epsilon={run.epsilon:g}"
        click.echo(
            f"{label}: value={run.value.mean:.4f}+/-{run.value.std_error:.4f} "
            f"(exact {run.value_exact:.4f}) final_trust={run.final_trust.mean:.4f} "
            f"(exact {run.final_trust_exact:.4f})"
        )
    click.echo(f"-> {path}")
