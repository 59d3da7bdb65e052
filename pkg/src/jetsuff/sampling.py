"""Deterministic low-discrepancy point sets for annuli and balls."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm as _norm
from scipy.stats import qmc


def _sobol(d: int, count: int, seed: int) -> np.ndarray:
    # draw a power-of-two block to keep Sobol balance (and silence the warning)
    sob = qmc.Sobol(d=d, scramble=True, seed=seed)
    return sob.random_base2(max(1, math.ceil(math.log2(count))))[:count]


def unit_shell_sample(n: int, count: int, seed: int) -> np.ndarray:
    """Quasi-uniform points in the shell 1/2 <= |x| <= 1 of R^n.

    One fixed pattern per (n, count, seed); callers scale it per annulus so
    that annulus statistics are exactly scale-equivariant.
    """
    u = _sobol(n + 1, count, seed)
    dirs = _norm.ppf(np.clip(u[:, :n], 1e-12, 1 - 1e-12))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    lo, hi = 0.5 ** n, 1.0
    r = (lo + u[:, n] * (hi - lo)) ** (1.0 / n)
    return dirs * r[:, None]


def ball_sample(n: int, count: int, seed: int, radius: float = 1.0) -> np.ndarray:
    """Quasi-uniform points in the ball of given radius."""
    u = _sobol(n + 1, count, seed)
    dirs = _norm.ppf(np.clip(u[:, :n], 1e-12, 1 - 1e-12))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = u[:, n] ** (1.0 / n)
    return radius * dirs * r[:, None]


def sphere_sample(m: int, count: int, seed: int) -> np.ndarray:
    """Quasi-uniform unit vectors in R^m (Sobol-driven Gaussian map)."""
    if m == 1:
        return np.array([[1.0], [-1.0]])
    u = _sobol(m, count, seed)
    g = _norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
