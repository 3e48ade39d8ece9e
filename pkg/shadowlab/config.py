"""
Centralized configuration for ShadowLab
Defaults can be overridden through environment variables (or a .env file).
"""
import os

from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"❌ {name} must be an integer, got {raw!r}")
    if value < 0:
        raise ConfigError(f"❌ {name} must be non-negative, got {value}")
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"❌ {name} must be a number, got {raw!r}")
    if not value > 0:
        raise ConfigError(f"❌ {name} must be positive, got {value}")
    return value


# Experiment defaults (overridable)
DEFAULT_N = _env_int('SHADOWLAB_N', 128)
DEFAULT_L = _env_int('SHADOWLAB_L', 200)
DEFAULT_DELTA = _env_float('SHADOWLAB_DELTA', 0.1)
DEFAULT_EPSILON = _env_float('SHADOWLAB_EPSILON', 1.0)
DEFAULT_GRID = _env_int('SHADOWLAB_GRID', 4096)
DEFAULT_T_MAX = _env_float('SHADOWLAB_T_MAX', 40.0)
DEFAULT_TOL = _env_float('SHADOWLAB_TOL', 1e-9)
DEFAULT_SEED = _env_int('SHADOWLAB_SEED', 0)
QUADRATURE_M = _env_int('SHADOWLAB_QUADRATURE_M', 1024)
MAX_WORKERS = _env_int('SHADOWLAB_MAX_WORKERS', 4)

# Output locations
OUT_DIR = os.getenv('SHADOWLAB_OUT_DIR', 'out')
LOG_DIR = os.getenv('SHADOWLAB_LOG_DIR', 'logs')
LOG_LEVEL = os.getenv('SHADOWLAB_LOG_LEVEL', 'INFO').upper()
LOG_WEEKS_TO_KEEP = _env_int('SHADOWLAB_LOG_WEEKS', 4)

if LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR'):
    raise ConfigError(f"❌ SHADOWLAB_LOG_LEVEL must be DEBUG/INFO/WARNING/ERROR, got {LOG_LEVEL!r}")
if DEFAULT_N < 1 or DEFAULT_L < 2 or DEFAULT_GRID < 16:
    raise ConfigError("❌ SHADOWLAB_N >= 1, SHADOWLAB_L >= 2 and SHADOWLAB_GRID >= 16 are required")

# Moebius arithmetic tolerances
DET_FLOOR = 1e-14          # |ad - bc| below this is degenerate
IDENTITY_TOL = 1e-12       # normalized matrix vs +-I
ON_CIRCLE_TOL = 1e-9       # ||p| - 1| for "lies on the unit circle"
DOUBLE_ROOT_TOL = 1e-10    # |trace^2 - 4| for a parabolic double root
BOUNDARY_SAMPLES = 64      # self-map validation grid on the unit circle

# Operator / shadow limits
POLE_MARGIN = 1e-9         # symbol pole must satisfy |pole| > 1 + margin
HORIZON_CAP = 512
CONDITION_LIMIT = 1e12
CONVERGENCE_GAP = 1e-3
RESIDUAL_SLACK = 1e-12     # allowed excess of a pseudo-orbit residual over delta

# Boundary-touching symbols get a longer truncation
BOUNDARY_TRUNCATION = 512

# Grid operator norms
POWER_ITERS = 500
LOG_GRID_CELLS = 32        # cells per log(1/a) on the V shift grid
LOG_GRID_TAIL = 8          # extra dilation steps kept past the last iterate
