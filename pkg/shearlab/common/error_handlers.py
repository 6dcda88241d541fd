"""
Module: error_handlers

Maps laboratory exceptions to process exit codes. Handlers are registered
with @error_handler(ExceptionType) and looked up along the exception's MRO,
so the most specific handler wins.
"""
import functools
import sys

import click

from shearlab import app
from shearlab.exceptions import (
    ConfigParseError,
    DataValidationError,
    DegenerateIndexPair,
    GridMismatch,
    IllConditionedBoundarySystem,
    InsufficientSamples,
    InversionFailure,
    LabError,
    NonFiniteState,
    NonMonotoneProfile,
    NonPositiveValue,
    SingularSystem,
    UnsupportedGeometry,
)
from . import status

HANDLERS = {}


def error_handler(exception_type):
    """Registers a handler returning the exit code for exception_type"""

    def register(function):
        HANDLERS[exception_type] = function
        return function

    return register


def dispatch(error: Exception) -> int:
    """Runs the most specific registered handler and returns its exit code"""
    for kind in type(error).__mro__:
        if kind in HANDLERS:
            return HANDLERS[kind](error)
    return internal_error(error)


def handle_errors(command):
    """Wraps a CLI command so that laboratory errors end the process with a mapped code"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            code = command(*args, **kwargs)
        except LabError as error:
            code = dispatch(error)
        except click.exceptions.Exit:
            raise
        except Exception as error:  # pylint: disable=broad-except
            code = internal_error(error)
        sys.exit(code or status.EXIT_OK)

    return wrapper


######################################################################
# Error Handlers
######################################################################
@error_handler(ConfigParseError)
def config_parse_error(error):
    """Handles unreadable scenario files with EXIT_BAD_CONFIG"""
    where = []
    if error.line is not None:
        where.append(f"line {error.line}")
    if error.key is not None:
        where.append(f"key {error.key!r}")
    suffix = f" ({', '.join(where)})" if where else ""
    app.logger.warning("Cannot parse config%s: %s", suffix, error)
    return status.EXIT_BAD_CONFIG


@error_handler(DataValidationError)
def request_validation_error(error):
    """Handles invalid scenarios with EXIT_BAD_CONFIG"""
    app.logger.warning(str(error))
    return status.EXIT_BAD_CONFIG


@error_handler(NonMonotoneProfile)
def non_monotone_profile(error):
    """A profile that is not strictly increasing is a configuration error"""
    app.logger.warning("Profile rejected: %s", error)
    return status.EXIT_BAD_CONFIG


@error_handler(NonFiniteState)
def non_finite_state(error):
    """Handles blow-up of the numerical state with EXIT_NON_FINITE"""
    app.logger.error("Run aborted at t=%s: %s", error.t, error)
    return status.EXIT_NON_FINITE


@error_handler(InversionFailure)
@error_handler(SingularSystem)
@error_handler(IllConditionedBoundarySystem)
@error_handler(GridMismatch)
@error_handler(UnsupportedGeometry)
def solver_failure(error):
    """Handles numerical failures with EXIT_SOLVER_FAILURE"""
    app.logger.error("%s: %s", type(error).__name__, error)
    return status.EXIT_SOLVER_FAILURE


@error_handler(InsufficientSamples)
@error_handler(NonPositiveValue)
@error_handler(DegenerateIndexPair)
def analysis_failure(error):
    """Handles fits and formulas that cannot be evaluated"""
    app.logger.warning("%s: %s", type(error).__name__, error)
    return status.EXIT_SOLVER_FAILURE


@error_handler(LabError)
def lab_error(error):
    """Handles any other laboratory error"""
    app.logger.error(str(error))
    return status.EXIT_INTERNAL_ERROR


def internal_error(error):
    """Handles unexpected errors with EXIT_INTERNAL_ERROR"""
    app.logger.error("Internal error: %s", error)
    return status.EXIT_INTERNAL_ERROR
