"""
Constants for the Transversality Lab.

Centralizes tolerances, default resolutions and column names used across the
codebase. Numerical tolerances are tuned to double-precision SVD accuracy and
should only be changed here.
"""

# Tolerances for analytic identities and frames
ANALYTIC_TOL = 1e-9             # Identities that hold exactly in exact arithmetic
ORTHONORMAL_TOL = 1e-10         # frame^T frame = I
COMPLEX_STRUCTURE_TOL = 1e-12   # J^2 = -I
SPACING_TOL = 1e-12             # Net spacing certificates

# Exponent clamp for Gaussian magnitudes (values below e^-700 are flushed to zero)
LOG_UNDERFLOW = -700.0

# Monte Carlo
MC_CHUNK_SIZE = 4096            # Samples per RNG stream; fixed so results do not depend on workers
ENV_THREADS = "TRANSLAB_THREADS"
DEFAULT_N_JOBS = 1

# Slice counting
SLICE_GRID_RESOLUTION = 256     # 2D slice grid (cells per side)
ROOT_CLUSTER_FACTOR = 1e-7      # 1D roots closer than this times the ball radius merge
ROOT_IMAG_TOL = 1e-7            # Companion roots with |Im| below this (relative) are real
REGION_TOL = 1e-9               # |q| below this means "on the zero set" for region tests
CURVE_RESOLUTION = 512          # Samples along a parametric curve

# Projections onto zero sets
NEWTON_MAX_ITER = 30
NEIGHBORHOOD_MAX_ITER = 20
GRADIENT_FLOOR = 1e-12
ZERO_TOL = 1e-12

# Separated sets
SEPARATED_PROBE_BUDGET = 2000
SEPARATED_MAX_ROUNDS = 400
SEPARATED_EMPTY_ROUNDS = 5
MAXIMALITY_REJECTION_RATE = 0.999

# Good regular values
REFINEMENT_PASSES = 5
GOOD_VALUE_BUDGET = 128

# Elimination
RELATION_SINGULAR_RATIO = 1e-8
RELATION_RESIDUAL = 1e-6

# Model geometry
NET_SIZE_GUARD = 1e4            # window diameter * sqrt(k)
NET_GRID_SUBDIVISION = 4        # candidate/verification grid pitch = k^-1/2 / 4
ENVELOPE_U_MAX = 6.0
ENVELOPE_U_POINTS = 241

# Donaldson procedure
D_INITIAL = 2.0
D_MAX_DOUBLINGS = 10
DOMINATION_N0_MAX = 10**6
LOCAL_RADIUS = 1.0              # local step ball radius in units of k^-1/2
BARYCENTER_THETAS = 11          # theta in {0, 0.1, ..., 1}
CROSSTALK_D_RANGE = (1.0, 10.0)
CROSSTALK_D_STEP = 0.05

# Results CSV columns
COL_EXPERIMENT = "experiment"
COL_PARAMS = "params"
COL_ESTIMATE = "estimate"
COL_ESTIMATE_HEX = "estimate_hex"
COL_STDERR = "stderr"
COL_N_SAMPLES = "n_samples"
COL_SEED = "seed"
COL_CONTRACT = "contract"
COL_TIMESTAMP = "timestamp"
RESULT_COLUMNS = [
    COL_EXPERIMENT, COL_PARAMS, COL_ESTIMATE, COL_ESTIMATE_HEX, COL_STDERR,
    COL_N_SAMPLES, COL_SEED, COL_CONTRACT, COL_TIMESTAMP,
]
REPLAY_REQUIRED_COLUMNS = {COL_EXPERIMENT, COL_PARAMS, COL_SEED, COL_ESTIMATE_HEX}

# Process exit codes
EXIT_OK = 0
EXIT_CONTRACT_VIOLATION = 1
EXIT_USAGE = 2
