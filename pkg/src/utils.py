"""
Utility functions for spinchain-qst
What to learn here: Logging setup, reproducible random generators and the
atomic file writes that keep experiment outputs byte-identical across runs.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from .config import Config


def setup_logging() -> logging.Logger:
    """
    Set up structured logging for the application.
    Every module logs through the shared "spinchain-qst" logger.
    """
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler()  # Console output
        ]
    )
    return logging.getLogger("spinchain-qst")


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """
    Seedable generator shared by every stochastic routine.

    The bit generator is numpy's PCG64 (``np.random.default_rng``), so a given
    seed replays bit-identically on every platform numpy supports.
    """
    return np.random.default_rng(Config.DEFAULT_SEED if seed is None else seed)


def _atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except Exception:
        # Never leave a half-written temp file behind
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """
    Write a DataFrame as CSV: comma separated, '.' decimals, header row,
    floats with 17 significant digits.
    """
    text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    return _atomic_write_text(path, text)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into JSON-ready values"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(np.real(value)), "im": float(np.imag(value))}
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json(payload: Any, path: Path) -> Path:
    """Write a JSON document with sorted keys so reruns are byte-identical"""
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"
    return _atomic_write_text(path, text)
