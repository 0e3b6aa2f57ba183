# cr_determinant/config.py
import math
from pathlib import Path


class Config:
    # File paths
    PROJECT_ROOT = Path(__file__).parent
    DATA_DIR = PROJECT_ROOT / "data"
    SYNTHETIC_MODEL_FILE = DATA_DIR / "synthetic_a0.json"

    # Standard contact form on S^3 (R = 2, A_11 = 0, Vol(theta ^ d theta) = 4 pi^2)
    VOLUME = 4.0 * math.pi ** 2
    WEBSTER_R = 2.0
    QPRIME = 4.0  # Q' = R^2 on the sphere
    QPRIME_TOTAL = 16.0 * math.pi ** 2
    C1 = -1.0 / (24.0 * math.pi ** 2)

    # Truncation and grid
    DEFAULT_DEGREE = 4
    MAX_DEGREE = 40  # cap on total degree of symbolic polynomials
    GRID_N_ETA = 16
    GRID_N_XI = 40
    MIN_GRID_SIZE = 4

    # Operator normalization: spectrum kappa * j(j+1)
    KAPPA = 1.0
    PPRIME_KAPPA = 4.0  # 4 Delta_b^2 + 4 Delta_b on pluriharmonics

    # Free constants of the determinant formula
    DEFAULT_C2 = 1.0
    DEFAULT_C3 = 0.0
    DEFAULT_SEED = 20240617

    # Projection
    MAX_GRAM_CONDITION = 1e12
    REALITY_TOLERANCE = 1e-10

    # Zeta engine
    ZETA_TAIL_MAX_K = 100_000  # cap on k in the binomial remainder
    CONTINUATION_ORDER = 20  # binomial expansion order M
    MIN_CONTINUATION_ORDER = 3
    MIN_ZETA_PRIME_ORDER = 5
    DIRECT_TERMS = 100_000
    RICHARDSON_LEVELS = 3
    TAIL_CUTOFF = 1e-18

    # Ascent policy
    ASCENT_INITIAL_STEP = 1.0
    ASCENT_CONTRACTION = 0.5
    ASCENT_SLOPE_FRACTION = 1e-4
    ASCENT_MAX_ITER = 5000
    ASCENT_MAX_BACKTRACKS = 60
    ASCENT_GRAD_TOL = 1e-8  # converged threshold; grad_F sits near 1e-10 from roundoff
    ASCENT_EL_TOL = 1e-6
    ASCENT_STAGNATION_TOL = 1e-18  # |dF| per step below which an accepted step counts as no progress
    ASCENT_STAGNATION_PATIENCE = 5
    ASCENT_MEMORY = 8
    ASCENT_INIT_SUP = 0.1
    ASCENT_LOG_EVERY = 50

    # Finite differences
    VARIATION_STEP = 1e-4
    GRADIENT_FD_STEP = 1e-5

    # Verification suites (sample counts at verify_scale = 1)
    VERIFY_SAMPLES = {
        "calibration": 50,
        "projection": 200,
        "qprime": 20,
        "beckner_onofri": 100,
        "scaling": 50,
        "gradient": 20,
        "cocycle": 10,
        "optimizer": 10,
        "variation": 4,
    }

    # Output
    SCHEMA_VERSION = 1
    OUTPUT_FORMATS = ["json", "csv"]
    FLOAT_DIGITS = 17
