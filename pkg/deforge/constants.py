"""Engine constants replacing magic numbers throughout the codebase."""

# Scalar backends
DEFAULT_BACKEND = "exact"
DEFAULT_TOLERANCE = 1e-9

# Deformation series
DEFAULT_ORDER = 3
DEFAULT_SEED = 0
DEFAULT_PARAMETER_COUNT = 1
MAX_SERIES_ORDER = 12

# Identity fuzzing
DEFAULT_FUZZ_CASES = 500
FUZZ_COEFFICIENT_RANGE = 3
FUZZ_DENOMINATOR_RANGE = 3

# Positivity sampling
DEFAULT_SAMPLES = 2000
DEFAULT_MARGIN = 1e-9
DEFAULT_REFINE_ROUNDS = 3
DEFAULT_REFINE_STEPS = 40
DEFAULT_EXTREMAL_RETRIES = 5
PERSISTENCE_GRID_RADII = 8
PERSISTENCE_GRID_ANGLES = 4
PERSISTENCE_MAX_RADIUS = 0.5
PERSISTENCE_SAMPLES = 200
EXTREMAL_DENOMINATOR = 10**6

# Majorant series
DEFAULT_MAJORANT_ORDER = 20
MAX_MAJORANT_ORDER = 200

# Reports
REPORT_SCHEMA = "deform-forge-report/1"
DEFAULT_REPORT_INDENT = 2

# CLI exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# Logging Constants
DEFAULT_LOG_LEVEL = "WARNING"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Environment
ENV_PREFIX = "DEFORGE_"
THREADS_ENV_VAR = "DEFORGE_THREADS"

# File Paths (relative to project root)
DEFAULT_CONFIG_FILE = "config.yaml"
