import click

from trustshape import __version__

# Import all command modules once
from trustshape.cli.commands import (
    config_schema,
    lp,
    simulate,
    sweep,
    verify,
)


@click.group(help="Trust-aware reward shaping: sweeps, certificates and simulations.")
@click.version_option(__version__, prog_name="trustshape")
def cli():
    pass


# ===============================
# REGISTER COMMANDS
# ===============================
cli.add_command(sweep.command)
cli.add_command(verify.command)
cli.add_command(simulate.command)
cli.add_command(lp.command)
cli.add_command(config_schema.command)


def main():
    cli()


if __name__ == "__main__":
    main()
