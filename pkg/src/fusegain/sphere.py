"""Unit-sphere geometry for the intrinsic search.

Matrices are flattened row by row, so ``vectorize([[1, 2], [3, 4]])`` is
``(1, 2, 3, 4)``.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np

from .errors import LengthMismatch

__all__ = [
    "vectorize",
    "devectorize",
    "tangent_project",
    "retract",
    "line_search",
    "GRID_POINTS",
    "GOLDEN_ITERS",
]

GRID_POINTS = 64
GOLDEN_ITERS = 41
ZERO_TANGENT = 1e-14
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def vectorize(G: np.ndarray) -> np.ndarray:
    return np.asarray(G, dtype=float).reshape(-1).copy()


def devectorize(g: np.ndarray, t: int, q: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size != t * q:
        raise LengthMismatch(f"vector of length {g.size} cannot form a {t}x{q} matrix")
    return g.reshape(t, q).copy()


def tangent_project(g: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Component of ``grad`` orthogonal to the unit vector ``g``."""
    g = np.asarray(g, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if g.shape != grad.shape:
        raise LengthMismatch(f"lengths differ: {g.shape} vs {grad.shape}")
    eta = grad - np.dot(grad, g) * g
    # one correction pass removes the residual left by cancellation
    return eta - np.dot(eta, g) * g


def retract(g: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Great-circle retraction ``g cos|eta| + (eta/|eta|) sin|eta|``."""
    g = np.asarray(g, dtype=float)
    n = float(np.linalg.norm(eta))
    if n == 0.0:
        return g.copy()
    out = g * np.cos(n) + (np.asarray(eta) / n) * np.sin(n)
    return out / np.linalg.norm(out)


def line_search(
    g: np.ndarray,
    eta: np.ndarray,
    objective: Callable[[np.ndarray], float],
    grid_points: int = GRID_POINTS,
    golden_iters: int = GOLDEN_ITERS,
) -> Tuple[float, float]:
    """Maximize ``objective(retract(g, delta * eta))`` over one period of delta.

    The restriction to the great circle has period ``2 pi / |eta|``. A
    uniform grid locates the best basin, golden-section search refines it,
    and the best value ever evaluated is returned, so the result is never
    below the value at ``delta = 0``.
    """
    n = float(np.linalg.norm(eta))
    if n < ZERO_TANGENT:
        return 0.0, objective(g)
    period = 2.0 * np.pi / n

    def f(delta):
        return objective(retract(g, delta * eta))

    deltas = np.arange(grid_points) * (period / grid_points)
    values = [f(x) for x in deltas]
    k = int(np.argmax(values))
    best_delta, best_val = float(deltas[k]), float(values[k])

    h = period / grid_points
    lo, hi = best_delta - h, best_delta + h
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(golden_iters):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
        for x, v in ((x1, f1), (x2, f2)):
            if v > best_val:
                best_delta, best_val = float(x), float(v)
    # may be slightly negative when refining the delta = 0 basin; the curve is periodic
    return best_delta, best_val
