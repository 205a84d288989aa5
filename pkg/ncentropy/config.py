#!/usr/bin/env python3
"""
Configuration settings for the neuronal-correlation / entropy toolkit
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

TOOL_VERSION = "1.0.0"
REPORT_SCHEMA_VERSION = 1

# Output and runtime settings
OUTPUT_DIR = os.getenv("NCENTROPY_OUTPUT_DIR", "reports")
LOG_LEVEL = os.getenv("NCENTROPY_LOG_LEVEL", "INFO").upper()
WORKERS = int(os.getenv("NCENTROPY_WORKERS", "4"))
KERNEL_MAX_SAMPLES = int(os.getenv("NCENTROPY_KERNEL_MAX_SAMPLES", "1000"))
if WORKERS < 1:
    raise ValueError("NCENTROPY_WORKERS must be at least 1")
if KERNEL_MAX_SAMPLES < 2:
    raise ValueError("NCENTROPY_KERNEL_MAX_SAMPLES must be at least 2")

# Numerical tolerances
EIGENVALUE_TOLERANCE = 1e-10  # below -tol is indefinite, below +tol is a dropped dimension
DEGENERATE_STD = 1e-12  # Pearson is undefined under this standard deviation
SYMMETRY_TOLERANCE = 1e-12

# Kernel defaults
DEFAULT_KERNEL = "gaussian"
DEFAULT_BETA = 0.5
DEFAULT_GRID_SIZE = 20
GRID_LOW_FACTOR = 0.1  # times the median pairwise distance
GRID_HIGH_FACTOR = 10.0

# Entropy estimator defaults
DEFAULT_BINS = 30
DEFAULT_K = 3
KNN_JITTER = 1e-10  # relative to the data range
NATS_PER_BIT = 0.6931471805599453

# Structure-correlation default
DEFAULT_GAMMA = 1.0

# Training defaults (desk scale)
DEFAULT_LR = 0.05
DEFAULT_BATCH = 64
DEFAULT_SUBSET = 5000
DEFAULT_SEEDS = (0, 1, 2)

# Experiment defaults: desk scale / paper scale
LINEAR_EPOCHS = 100
LINEAR_RECORD_EVERY = 10
LINEAR_STRUCTURE = "I-20-20-20-20-20-O"
LINEAR_EVAL_SAMPLES = 500

GROUNDTRUTH_SAMPLES = 5000
GROUNDTRUTH_DIM = 5
GROUNDTRUTH_VARIANCES = (0.3, 0.7, 1.0)

GE_EPOCHS = 300
GE_RECORD_EVERY = 10
GE_ARCHITECTURES = {
    "N3": "I-110-10-O",
    "N4": "I-40-40-40-O",
    "N5": "I-30-30-30-30-O",
}

EPSILON_EPOCHS = 100
EPSILON_STRUCTURE = "I-30-30-30-30-O"
EPSILON_LAYERS = (2, 3)

SWEEP_SIZES = (10, 50, 100, 200, 300, 500)
SWEEP_FIXED = 100
SWEEP_SEEDS = 20
SWEEP_INITS = ("random", "truncated_normal", "xavier", "he_normal")

PAPER_SCALE_EPOCHS = 10000
PAPER_SCALE_SEEDS = (0, 1, 2, 3, 4)
PAPER_SCALE_SUBSET = 60000

# Synthetic stand-in for MNIST when no IDX files are given
SYNTHETIC_DIM = 64
SYNTHETIC_CLASSES = 10
SYNTHETIC_CLUSTER_STD = 2.0
SYNTHETIC_CENTER_BOX = (-1.0, 1.0)
