"""
Descriptive process exit codes, for code readability.
"""

# Success
EXIT_OK = 0

# The run finished but at least one PASS/FAIL line failed (only with --strict)
EXIT_CHECKS_FAILED = 1

# Scenario file unreadable or invalid
EXIT_BAD_CONFIG = 2

# NaN or Inf appeared in the evolved vorticity
EXIT_NON_FINITE = 3

# Profile inversion, elliptic solve or a fit could not be completed
EXIT_SOLVER_FAILURE = 4

# Anything else (EX_SOFTWARE)
EXIT_INTERNAL_ERROR = 70
