"""Configuration module for pathcalc."""

import os
from dotenv import load_dotenv

load_dotenv()

# Parallelism for seed ensembles
PATHCALC_THREADS = int(os.getenv("PATHCALC_THREADS", str(os.cpu_count() or 1)))
if PATHCALC_THREADS < 1:
    raise ValueError("PATHCALC_THREADS must be at least 1")

# Convergence verdicts (Cauchy criterion over the last levels)
CAUCHY_RTOL = float(os.getenv("PATHCALC_CAUCHY_RTOL", "1e-2"))
CAUCHY_ATOL = float(os.getenv("PATHCALC_CAUCHY_ATOL", "1e-12"))
CAUCHY_LEVELS = int(os.getenv("PATHCALC_CAUCHY_LEVELS", "3"))
if CAUCHY_LEVELS < 2:
    raise ValueError("PATHCALC_CAUCHY_LEVELS must be at least 2")

# Index estimator
INDEX_WINDOW = int(os.getenv("PATHCALC_INDEX_WINDOW", "4"))

# Hedging
BRACKET_RTOL = float(os.getenv("PATHCALC_BRACKET_RTOL", "0.05"))

# Logging
LOG_LEVEL = os.getenv("PATHCALC_LOG_LEVEL", "INFO").upper()

# Numerical constants
CLAMP_ATOL = 1e-9
FD_STEP = 1e-5
FBM_MAX_N = 4096
FBM_JITTER = 1e-12
BROWNIAN_MAX_DEPTH = 24
CSV_FLOAT_FORMAT = "%.17g"

# First-passage skeletons: mesh at most 2**(-2m - margin)
SKELETON_LINEAR_MARGIN = 8
SKELETON_BRIDGE_MARGIN = 4
BRIDGE_TOL = 1e-8
BRIDGE_REFINEMENTS = 10
