import json

import click

from trustshape.services.config_service import config_schema


@click.command("config-schema")
def command():
    """Print the JSON schema of the experiment config, defaults included."""
    click.echo(json.dumps(config_schema(), indent=2, sort_keys=True))
