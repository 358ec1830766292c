# Array parameters
ANTENNA_SPACING = 0.5
UPA_SHAPE = (10, 10)
NB_TX_ANTENNAS = 10
NB_RX_ANTENNAS = 10

# Channel parameters
NB_PATHS = 10

# Blockage parameters
BLOCKAGE_PROBABILITY = 0.1
BLOCKAGE_MODES = ["partial", "complete"]

# Sounding parameters
PHASE_ALPHABET = [1 + 1j, 1 - 1j, -1 - 1j, -1 + 1j]
NB_MEASUREMENTS = 50
SNR_DB = 5.0

# Cross-entropy solver parameters
NB_CANDIDATES = 400
NB_ELITES = 50
NB_ITERATIONS = 20
EPSILON = 0.6
BLOCK_ROWS = 2
BLOCK_COLS = 2
SMOOTHING_ALPHA = 1.0

# Baseline parameters
OMP_SPARSITY_RATIO = 0.25

# Numerics
CHANNEL_NULL_TOL = 1e-12
RIDGE_FACTOR = 1e-10

# Harness parameters
METHODS = ["ce-aad", "plain-ce", "omp", "oracle"]
SCENARIOS = ["tx", "joint"]
SWEEP_NAMES = ["measurements", "snr"]
NB_TRIALS = 100
MASTER_SEED = 20190101
SEED_ENV_VAR = "AAD_MASTER_SEED"

# Output formats
RESULT_FORMATS = ["csv", "json", "gnuplot-dat"]
RESULT_COLUMNS = [
    "method",
    "sweep_name",
    "sweep_value",
    "mean_nmse",
    "median_nmse",
    "std_nmse",
    "trials",
    "failures",
    "wall_ms",
]
FIXTURE_FORMAT = "aad-fixture/1"
PARAM_DIGITS = 17

# Plotting
PLOT_STYLE = "seaborn-v0_8-darkgrid"
