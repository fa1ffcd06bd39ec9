"""Rank reduction under white secondary noise and output-dimension selection."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import UnsupportedNoise, ZeroMatrix
from .model import TwoChannelSystem, derive
from .optimize import OptimConfig, run_multistart
from .waterfill import analytic_design

__all__ = [
    "white_noise_variance",
    "reduce_rank",
    "numerical_rank",
    "SweepRecord",
    "DimensionSweep",
    "dimension_sweep",
    "select_dimension",
]

RANK_RTOL = 1e-10
SOLVERS = ("analytic", "extrinsic", "intrinsic")


def white_noise_variance(Q_vv: np.ndarray, tol: float = 1e-8) -> float:
    s2 = float(np.mean(np.diag(Q_vv)))
    if np.max(np.abs(Q_vv - s2 * np.eye(Q_vv.shape[0]))) > tol * max(1.0, s2):
        raise UnsupportedNoise("secondary noise covariance is not proportional to the identity")
    return s2


def numerical_rank(G: np.ndarray, rtol: float = RANK_RTOL) -> int:
    sv = np.linalg.svd(np.atleast_2d(G), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def reduce_rank(G: np.ndarray, sys: TwoChannelSystem) -> Tuple[np.ndarray, int]:
    """Equivalent ``r x q`` channel for a rank-``r`` design under white noise.

    With ``G = U Diag(s) V^T`` the reduced channel is ``Diag(s_1..s_r) V_r^T``;
    it keeps the power and, with noise ``sigma^2 I_r``, the information gain.
    """
    white_noise_variance(sys.Q_vv)
    G = np.asarray(G, dtype=float)
    U, sv, Vt = np.linalg.svd(G, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise ZeroMatrix("zero channel matrix has rank 0")
    r = int(np.sum(sv > RANK_RTOL * sv[0]))
    return sv[:r, None] * Vt[:r], r


@dataclass(frozen=True)
class SweepRecord:
    k: int
    gain: float
    rank: int
    solver: str


@dataclass
class DimensionSweep:
    records: List[SweepRecord] = field(default_factory=list)
    c: float = 1e-3
    t_hat: int = 0

    @property
    def gains(self) -> np.ndarray:
        return np.array([r.gain for r in self.records])

    @property
    def ranks(self) -> np.ndarray:
        return np.array([r.rank for r in self.records])

    @property
    def max_rank(self) -> int:
        return int(self.ranks.max()) if self.records else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "gain_nats", "rank"])
        for r in self.records:
            w.writerow([r.k, repr(r.gain), r.rank])
        return buf.getvalue()


def select_dimension(gains, c: float = 1e-3) -> int:
    """Smallest ``k`` (1-based) whose gain is within ``c`` of the last one."""
    gains = np.asarray(gains, dtype=float)
    ok = np.flatnonzero(gains[-1] - gains <= c)
    return int(ok[0]) + 1


def _solve_k(sys_k: TwoChannelSystem, solver: str, config: OptimConfig, restarts: int):
    d = derive(sys_k)
    if solver == "analytic":
        design = analytic_design(sys_k, d)
        return design.gain, design.G_star
    G, trace = run_multistart(sys_k, d, solver, config, restarts)
    return trace.best_gain, G.G


def dimension_sweep(
    sys_family: Callable[[int], TwoChannelSystem] | TwoChannelSystem,
    solver: str = "analytic",
    c: float = 1e-3,
    q: Optional[int] = None,
    config: OptimConfig = OptimConfig(),
    restarts: int = 5,
    workers: int = 1,
) -> DimensionSweep:
    """Solve the design for each output dimension ``k = 1..q`` and pick ``t_hat``.

    ``sys_family`` maps ``k`` to an instance with a ``k``-dimensional output;
    a plain system is expanded with white noise of its mean noise variance.
    """
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    if isinstance(sys_family, TwoChannelSystem):
        base = sys_family
        sys_family = base.with_output_dim
        q = base.q if q is None else q
    if q is None:
        q = sys_family(1).q
    ks = list(range(1, q + 1))

    def job(k):
        return _solve_k(sys_family(k), solver, config, restarts)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, ks))
    else:
        results = [job(k) for k in ks]

    sweep = DimensionSweep(c=c)
    for k, (gain, G) in zip(ks, results):
        sweep.records.append(SweepRecord(k, float(gain), numerical_rank(G), solver))
    sweep.t_hat = select_dimension(sweep.gains, c)
    return sweep
