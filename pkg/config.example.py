"""
Configuration Template for ShadowLab
Every setting is read from the environment by shadowlab/config.py.
Copy the assignments you want to change into a .env file (NAME=value) or
export them before running the CLI.
"""

# =============================================================================
# TRUNCATION AND HORIZONS
# =============================================================================

SHADOWLAB_N = 128              # Maclaurin truncation of H^2
SHADOWLAB_L = 200              # pseudo-orbit length
SHADOWLAB_DELTA = 0.1          # pseudo-orbit step error
SHADOWLAB_EPSILON = 1.0        # shadowing target

# =============================================================================
# HALF-PLANE GRID
# =============================================================================

SHADOWLAB_GRID = 4096          # midpoint cells on (0, T_max)
SHADOWLAB_T_MAX = 40.0

# =============================================================================
# NUMERICS
# =============================================================================

SHADOWLAB_TOL = 1e-9           # classification tolerance
SHADOWLAB_QUADRATURE_M = 1024  # boundary samples for H^p norms
SHADOWLAB_SEED = 0
SHADOWLAB_MAX_WORKERS = 4      # thread pool for sweeps and trials

# =============================================================================
# OUTPUT AND LOGGING
# =============================================================================

SHADOWLAB_OUT_DIR = "out"
SHADOWLAB_LOG_DIR = "logs"     # run logs go to logs/YYYY-Www/
SHADOWLAB_LOG_LEVEL = "INFO"   # DEBUG, INFO, WARNING, ERROR
SHADOWLAB_LOG_WEEKS = 4        # week folders older than this are pruned at startup

# =============================================================================
# NOTES
# =============================================================================

"""
QUICK START:

1. Install dependencies:
   pip install -r requirements.txt

2. Classify a symbol:
   python -m shadowlab classify --coeffs 1,0.5,0.5,1

3. Run an experiment:
   python -m shadowlab experiment shadow --symbol parabolic --N 64 --L 100

4. Run the tests (add -m "not slow" to skip the long sweeps):
   pytest
"""
