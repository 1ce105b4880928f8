"""
Application-wide constants for the CoDD lab.

These are fixed protocol values, format strings and capacity limits. They are
NOT configurable settings (those belong in config.py): changing any of them
changes the meaning of stored artifacts.
"""

from fractions import Fraction

# =============================================================================
# Logging
# =============================================================================

LOGGER_NAME = "codd_lab"

LOG_FORMAT_DETAILED = (
    "%(asctime)s - %(levelname)s - %(module)s - %(funcName)s - %(message)s"
)
LOG_FORMAT_CONSOLE = "%(asctime)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# =============================================================================
# Input spaces and exhaustive search
# =============================================================================

MAX_INPUT_BITS = 16
MAX_OPTIMAL_TREE_BITS = 12
MAX_CORRELATION_BITS = 6

# gains closer than this are treated as tied
GAIN_TIE_TOLERANCE = 1e-12

# =============================================================================
# CoDD bit codec
# =============================================================================

HEADER_BITS = 16
TAG_BITS = 3
FIELD_BITS = 16
FIELD_MAX = (1 << FIELD_BITS) - 1

# =============================================================================
# Evaluation
# =============================================================================

DEFAULT_FUEL = 10_000

# =============================================================================
# Experiments
# =============================================================================

DEFAULT_SEED = 0
DEFAULT_TRACE_ALPHABET = 2
CONCENTRATION_DELTA = Fraction(1, 10)
PROFILE_HISTOGRAM_BINS = 20
ENSEMBLE_QUANTILES = (0.1, 0.5, 0.9)
DEFAULT_FLIP_MAX = Fraction(1, 2)

# =============================================================================
# Artifacts
# =============================================================================

RATIONAL_SEPARATOR = "/"
JSON_INDENT = 2
CSV_TRACE_COLUMNS = ("step", "size", "entropy_num", "entropy_den")
