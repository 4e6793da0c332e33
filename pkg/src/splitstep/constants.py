"""Constants and defaults for splitstep."""

# Relaxation (2x2) problem
DEFAULT_LAMBDA1: float = 0.25
DEFAULT_LAMBDA2: float = 0.5
DEFAULT_T0: float = 0.0
DEFAULT_T_END: float = 1.0

# Integration grid and study layout
DEFAULT_STEP: float = 1e-3
DEFAULT_ITERATIONS: tuple[int, ...] = (2, 3, 4, 5, 6)
DEFAULT_PARTITIONS: tuple[int, ...] = (1, 10, 100)

# Error level below which a cell is treated as quadrature/precision noise
TRAPEZOID_FLOOR: float = 1e-8
SIMPSON_FLOOR: float = 1e-8
BODE_FLOOR: float = 1e-12

# Fine reference solve: partitions multiplier and extra iterations
FINE_PARTITION_FACTOR: int = 16
FINE_EXTRA_ITERATIONS: int = 2

# Linear algebra
SINGULAR_THRESHOLD: float = 1e-12
GRID_TOLERANCE: float = 1e-9

# Romberg sample counts are 2**k + 1
PHI_ROMBERG_LEVEL: int = 10
SEMIGROUP_ROMBERG_LEVEL: int = 10

# Radial oscillator
DEFAULT_ENERGY: float = 0.5
DEFAULT_ANGULAR: int = 0
DEFAULT_R0: float = 1.0
DEFAULT_R_END: float = 6.0
DEFAULT_Q0: float = 1.0
DEFAULT_P0: float = 0.0
DEFAULT_OSCILLATOR_ITERATIONS: int = 4
DEFAULT_OSCILLATOR_PARTITIONS: int = 100

# Property checks
CHECK_SEED: int = 12345
CHECK_SAMPLES: int = 20
PHI_TOLERANCE: float = 1e-9
SEMIGROUP_TOLERANCE: float = 1e-8
LAPLACE_TOLERANCE: float = 1e-6

THREADS_ENV_VAR: str = "SPLITSTEP_THREADS"
DEFAULT_MAX_THREADS: int = 4

DEFAULT_LOG_DIR: str = "logs"
LOG_FILENAME: str = "splitstep.log"
