"""Iterative designs for a general conditional covariance.

Two ascent schemes on the power sphere ``tr(G G^T) = P``:

* extrinsic: an ordinary gradient step in matrix space followed by radial
  rescaling back to Frobenius norm ``sqrt(P)``;
* intrinsic: the gradient is projected onto the tangent plane of the unit
  sphere in scaled coordinates ``g = vec(G) / sqrt(P)`` and the step follows
  a great circle, with either a constant step or a line search over one
  period of the circle.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import ZeroIterate
from .gain import ChannelMatrix, gradient, information_gain
from .model import DerivedQuantities, TwoChannelSystem
from .sphere import ZERO_TANGENT, devectorize, line_search, retract, tangent_project, vectorize

__all__ = [
    "OptimConfig",
    "IterRecord",
    "OptimTrace",
    "init_matrix",
    "extrinsic_step",
    "intrinsic_step",
    "run",
    "run_multistart",
    "ALGORITHMS",
]

ALGORITHMS = ("extrinsic", "intrinsic")
STEP_MODES = ("constant", "line_search")


@dataclass(frozen=True)
class OptimConfig:
    max_iters: int = 2000
    step_mode: str = "constant"
    step: float = 0.1
    tol_grad: float = 1e-8
    tol_stall: float = 1e-12
    stall_window: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step_mode not in STEP_MODES:
            raise ValueError(f"step_mode must be one of {STEP_MODES}")


@dataclass(frozen=True)
class IterRecord:
    iter: int
    gain: float
    grad_norm: float
    tangent_norm: float
    step: float
    power: float


@dataclass
class OptimTrace:
    algorithm: str
    records: List[IterRecord] = field(default_factory=list)
    status: str = "MaxIters"
    best_iter: int = 0
    iterates: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def gains(self) -> np.ndarray:
        return np.array([r.gain for r in self.records])

    @property
    def best_gain(self) -> float:
        return self.records[self.best_iter].gain

    @property
    def final_gain(self) -> float:
        return self.records[-1].gain

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "gain_nats", "grad_norm", "step"])
        for r in self.records:
            w.writerow([r.iter, repr(r.gain), repr(r.grad_norm), repr(r.step)])
        return buf.getvalue()


def init_matrix(t: int, q: int, P: float = 1.0, seed: int = 0) -> ChannelMatrix:
    """Standard-normal ``t x q`` matrix scaled to power ``P``."""
    G = np.random.default_rng(seed).standard_normal((t, q))
    return ChannelMatrix(G * (np.sqrt(P) / np.linalg.norm(G)))


def _radial(G: np.ndarray, P: float) -> np.ndarray:
    n = np.linalg.norm(G)
    if n == 0.0:
        raise ZeroIterate("cannot rescale a zero matrix onto the power sphere")
    return G * (np.sqrt(P) / n)


def _tangent_norm_matrix(G: np.ndarray, grad: np.ndarray) -> float:
    u = vectorize(G)
    u /= np.linalg.norm(u)
    return float(np.linalg.norm(tangent_project(u, vectorize(grad))))


def extrinsic_step(G, d: DerivedQuantities, step: float, P: float, grad=None) -> np.ndarray:
    """``G + step * grad D`` rescaled to power ``P``."""
    G = G.G if isinstance(G, ChannelMatrix) else np.asarray(G, dtype=float)
    if grad is None:
        grad = gradient(G, d)
    if not np.any(grad):
        return G.copy()
    return _radial(G + step * grad, P)


def _sphere_objective(d: DerivedQuantities, t: int, q: int, P: float):
    root = np.sqrt(P)

    def f(g):
        return information_gain(devectorize(root * g, t, q), d)

    return f


def intrinsic_step(
    g: np.ndarray,
    d: DerivedQuantities,
    config: OptimConfig,
    P: float = 1.0,
    shape: Optional[Tuple[int, int]] = None,
    grad=None,
) -> Tuple[np.ndarray, float, float]:
    """One great-circle step from the unit vector ``g``.

    Returns ``(g_next, step, tangent_norm)``; a vanishing tangent gradient
    returns ``g`` itself with step 0.
    """
    t, q = shape if shape is not None else (d.t, d.q)
    root = np.sqrt(P)
    if grad is None:
        grad = gradient(devectorize(root * g, t, q), d)
    eta = tangent_project(g, root * vectorize(grad))
    tn = float(np.linalg.norm(eta))
    if tn < ZERO_TANGENT:
        return g.copy(), 0.0, tn
    if config.step_mode == "line_search":
        delta, _ = line_search(g, eta, _sphere_objective(d, t, q, P))
    else:
        delta = config.step
    return retract(g, delta * eta), float(delta), tn


def run(
    sys: TwoChannelSystem,
    d: DerivedQuantities,
    algorithm: str = "intrinsic",
    config: OptimConfig = OptimConfig(),
    G0=None,
    keep_iterates: bool = False,
) -> Tuple[ChannelMatrix, OptimTrace]:
    """Iterate until the tangent gradient vanishes, progress stalls or the
    iteration budget runs out. Returns the best iterate seen and the trace.

    With ``keep_iterates`` the trace also stores every iterate (as the unit
    vector ``g`` for the intrinsic algorithm, as ``G`` otherwise).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    t, q, P = sys.t, sys.q, sys.P
    root = np.sqrt(P)
    if G0 is None:
        G = init_matrix(t, q, P, config.seed).G.copy()
    else:
        G = _radial(np.array(G0.G if isinstance(G0, ChannelMatrix) else G0, dtype=float), P)
    g = vectorize(G) / root
    if algorithm == "intrinsic":
        G = devectorize(root * g, t, q)

    trace = OptimTrace(algorithm)
    best_G, best_gain = G, -np.inf
    step = 0.0
    for k in range(config.max_iters + 1):
        grad = gradient(G, d)
        gain = information_gain(G, d)
        tn = _tangent_norm_matrix(G, grad)
        if algorithm == "intrinsic":
            tn *= root
        trace.records.append(
            IterRecord(k, gain, float(np.linalg.norm(grad)), tn, step, float(np.sum(G * G)))
        )
        if keep_iterates:
            trace.iterates.append(g.copy() if algorithm == "intrinsic" else G.copy())
        if gain > best_gain:
            best_G, best_gain, trace.best_iter = G, gain, k

        if tn < config.tol_grad:
            trace.status = "Converged"
            break
        w = config.stall_window
        if k >= w and abs(gain - trace.records[k - w].gain) < config.tol_stall:
            trace.status = "Stalled"
            break
        if k == config.max_iters:
            trace.status = "MaxIters"
            break

        if algorithm == "extrinsic":
            step = config.step
            G = extrinsic_step(G, d, step, P, grad=grad)
        else:
            g, step, _ = intrinsic_step(g, d, config, P, (t, q), grad=grad)
            G = devectorize(root * g, t, q)
    return ChannelMatrix(best_G), trace


def run_multistart(
    sys: TwoChannelSystem,
    d: DerivedQuantities,
    algorithm: str = "intrinsic",
    config: OptimConfig = OptimConfig(),
    restarts: int = 5,
) -> Tuple[ChannelMatrix, OptimTrace]:
    """Best of ``restarts`` runs seeded ``config.seed, config.seed + 1, ...``."""
    best = None
    for i in range(max(1, restarts)):
        G, tr = run(sys, d, algorithm, replace(config, seed=config.seed + i))
        if best is None or tr.best_gain > best[1].best_gain:
            best = (G, tr)
    return best
