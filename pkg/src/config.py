"""
Configuration module for spinchain-qst
What to learn here: Environment variable management, centralized config patterns,
and how to keep numerical tolerances and resource limits out of the algorithms.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Config:
    """
    Centralized configuration class that loads settings from environment variables.
    Every tolerance used by the simulation code is read from here so that a run
    can be tightened or relaxed without touching the algorithms.
    """

    # Paths
    OUTPUT_DIR = Path(os.getenv("QST_OUTPUT_DIR", "./results"))

    # Resource limits
    DENSE_MAX_QUBITS = int(os.getenv("QST_DENSE_MAX_QUBITS", "12"))

    # Tolerances
    STRUCT_TOL = float(os.getenv("QST_STRUCT_TOL", "1e-10"))
    ALGEBRA_TOL = float(os.getenv("QST_ALGEBRA_TOL", "1e-12"))
    PSD_TOL = float(os.getenv("QST_PSD_TOL", "1e-9"))
    FIDELITY_TOL = float(os.getenv("QST_FIDELITY_TOL", "1e-9"))
    IDENTITY_THRESHOLD = float(os.getenv("QST_IDENTITY_THRESHOLD", "1e-8"))
    ZERO_PROBABILITY = 1e-12

    # Experiments
    DEFAULT_SEED = int(os.getenv("QST_DEFAULT_SEED", "1234"))
    HOMOGENEOUS_T_MAX = float(os.getenv("QST_HOMOGENEOUS_T_MAX", "400.0"))
    HOMOGENEOUS_GRID = int(os.getenv("QST_HOMOGENEOUS_GRID", "40001"))

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def ensure_directories(cls):
        """Create necessary directories if they don't exist"""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
