"""
Package: shearlab
Numerical laboratory for the linearized Euler equations around monotone
shear flows. This module creates and configures the Flask app, whose CLI
hosts the laboratory commands, and sets up logging.
"""
from flask import Flask
from shearlab import config
from shearlab.common import log_handlers

__version__ = config.VERSION

# Create Flask application
app = Flask(__name__)
app.config.from_object(config)

# Import the commands After the Flask app is created
# pylint: disable=wrong-import-position, cyclic-import, wrong-import-order
from shearlab import models  # noqa: F401 E402

# pylint: disable=wrong-import-position
from shearlab.common import error_handlers, cli_commands  # noqa: F401 E402

log_handlers.init_logging(app, config.LOGGER_NAME, config.LOG_LEVEL)

app.logger.debug(70 * "*")
app.logger.debug("  S H E A R L A B   R E A D Y  ".center(70, "*"))
app.logger.debug(70 * "*")
