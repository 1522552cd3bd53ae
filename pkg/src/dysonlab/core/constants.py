"""
Constants for Dyson Lab.

Application-wide constants shared by the numerical modules, the harness
and the command line. Tunable defaults live in the configuration layer;
the values here are fixed conventions.
"""

import math

# Encoding
DEFAULT_ENCODING = "utf-8"

# Environment
ENV_VAR_ENVIRONMENT = "DYSON_LAB_ENV"
ENV_VAR_THREADS = "DYSON_LAB_THREADS"
ENV_DEVELOPMENT = "development"
ENV_TESTING = "testing"
ENV_PRODUCTION = "production"
DEFAULT_CONFIG_DIR = "config"

# Logging
DEFAULT_LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Matching
MAX_BRUTE_FORCE_POINTS = 8
TIE_TOLERANCE_FACTOR = 64.0

# Determinantal point processes
MIN_QUADRATURE_NODES = 20
DEFAULT_QUADRATURE_NODES = 80
EIGENVALUE_SLACK = 1e-8
GAP_BOUND_SLACK = 1e-9
AIRY_TRUNCATION = 10.0

# Dynamics
DEFAULT_DT = 1e-3
DEFAULT_MAX_SUBSTEPS = 40
DEFAULT_GAP_FACTOR = 10.0
CONTRACTION_SLACK_PER_DT = 1e-6

# Sampling
DEFAULT_MCMC_STEPS = 2000
DEFAULT_MCMC_STEP_SIZE = 0.05
MIN_MCMC_ACCEPTANCE = 0.05

# Quantile JKO solver
MIN_QUANTILE_GRID = 16
DEFAULT_QUANTILE_GRID = 512
MAX_NEWTON_ITERATIONS = 200
NEWTON_GRADIENT_TOLERANCE = 1e-10

# Harness
STANDARD_ERRORS = 3.0
CLOSED_FORM_TOLERANCE = 1e-8
QUADRATURE_TOLERANCE = 1e-6
GAUSS_HERMITE_ORDER = 80
MONTE_CARLO_BIAS_FLOOR = 0.05

# Rigidity diagnostics
MAX_SHELLS = 50
SHELL_COST_BOUND = math.pi**2 / 6.0

# Extension operator
MAX_EXTENSION_K = 4
MAX_EXTENSION_LEVEL = 4
TIE_EXCLUSION = 1e-9
LIPSCHITZ_SLACK = 1e-9

# CLI exit codes
EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2

# CSV metadata
CSV_METADATA_PREFIX = "# "
