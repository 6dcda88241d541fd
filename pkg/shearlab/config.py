"""
Global Configuration for the Laboratory
"""
import os


# Get configuration from environment
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOGGER_NAME = os.getenv("SHEARLAB_LOGGER", "shearlab.cli")

# Worker pool size used when --threads is not given
THREADS = int(os.getenv("SHEARLAB_THREADS", str(os.cpu_count() or 1)))

# Root directory for run artifacts when neither --out nor output_dir is set
OUTPUT_DIR = os.getenv("SHEARLAB_OUTPUT_DIR", "runs")

# Numerical defaults filled in by RunConfig.deserialize
DEFAULT_DT = 0.01
DEFAULT_STRIDE = 10
DEFAULT_WEIGHT_C = 1.0
DEFAULT_BETA = 0.3
DEFAULT_GAMMA = 0.3

# Solver and fitting thresholds
PIVOT_TOLERANCE = 1.0e-14
DETERMINANT_TOLERANCE = 1.0e-14
INVERSION_TOLERANCE = 1.0e-12
MONOTONICITY_FLOOR = 1.0e-8
MIN_FIT_SAMPLES = 8
QUADRATURE_TOLERANCE = 1.0e-10

# Recorded in every run manifest
VERSION = "1.0.0"
