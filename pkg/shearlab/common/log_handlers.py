"""
Log Handlers

This module contains utility functions to set up logging
consistently
"""
import logging
import sys


def init_logging(app, logger_name: str, level: str = None):
    """Set up logging for command-line runs"""
    app.logger.propagate = False
    parent_logger = logging.getLogger(logger_name)
    handlers = list(parent_logger.handlers)
    if not handlers:
        handlers = [logging.StreamHandler(sys.stderr)]
    app.logger.handlers = handlers
    app.logger.setLevel(level or parent_logger.level or logging.INFO)
    # Make all log formats consistent
    formatter = logging.Formatter(
        "[%(asctime)s] [%(levelname)s] [%(module)s] %(message)s", "%Y-%m-%d %H:%M:%S %z"
    )
    for handler in app.logger.handlers:
        handler.setFormatter(formatter)
    app.logger.debug("Logging handler established")
