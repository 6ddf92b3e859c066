"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np


def check_radii(rho, name: str = "rho") -> np.ndarray:
    """Return ``rho`` as a finite, strictly positive 1-d float array."""
    arr = np.asarray(rho, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-d or a single column (got shape {arr.shape})")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(arr < 0.0):
        raise ValueError(f"{name} contains negative radii")
    return arr


def check_samples(rho, values) -> tuple[np.ndarray, np.ndarray]:
    """Paired radii and positive samples of equal length."""
    rho = check_radii(rho)
    values = np.asarray(values, dtype=float).ravel()
    if values.shape != rho.shape:
        raise ValueError(f"rho and values differ in length ({rho.size} vs {values.size})")
    if np.any(rho == 0.0):
        raise ValueError("decay fits need strictly positive radii")
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise ValueError("decay fits need finite, strictly positive samples")
    return rho, values


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be positive (got {value})")
    return value
