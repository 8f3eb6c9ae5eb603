import logging
import logging.config
from pathlib import Path

from trustshape.core.config import settings


def configure_logging(quiet: bool = False) -> None:
    config_path = Path(settings.LOG_CONFIG)

    if config_path.is_file():
        logging.config.fileConfig(config_path, disable_existing_loggers=False)
        logging.getLogger("trustshape").setLevel(settings.LOG_LEVEL.upper())
    else:
        logging.basicConfig(
            level=settings.LOG_LEVEL.upper(),
            format="%(levelname)-5.5s [%(name)s] %(message)s",
        )

    if quiet:
        logging.getLogger().setLevel(logging.WARNING)
        logging.getLogger("trustshape").setLevel(logging.WARNING)
