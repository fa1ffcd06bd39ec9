"""Closed-form design when the conditional covariance of phi is ``sigma^2 I``.

The optimal channel is ``G* = U_v Lambda* U_xi^T``: eigenvectors of the
secondary noise (ascending eigenvalues) are paired with eigenvectors of
``S = M Q_thth|x M^T`` (descending eigenvalues), and the subchannel powers
``lambda_i^2`` follow a mercury/waterfilling rule with a single Lagrange
multiplier ``mu`` chosen so that the powers sum to ``P``.

Per active subchannel the stationarity condition is

    a_i b_i = 2 mu ((s2 + a_i) x + b_i) (s2 x + b_i),    x = lambda_i^2,

with ``a_i`` the i-th eigenvalue of ``S``, ``b_i`` the i-th noise eigenvalue
and ``s2`` the conditional variance. A subchannel is active iff
``mu < a_i / (2 b_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import NoInformativeChannel, UnsupportedStructure
from .gain import information_gain
from .model import DerivedQuantities, TwoChannelSystem, sym

__all__ = [
    "EigenStructure",
    "Vessel",
    "WaterfillDesign",
    "eigen_structure",
    "power_at_mu",
    "solve_mu",
    "analytic_design",
    "vessel_report",
    "separable_gain",
    "conditional_variance",
]

SCALAR_ID_TOL = 1e-8
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class EigenStructure:
    U_v: np.ndarray
    sigma2_v: np.ndarray  # ascending
    U_xi: np.ndarray
    sigma2_xi: np.ndarray  # descending
    rank: int
    sigma2_cond: float


@dataclass(frozen=True)
class Vessel:
    index: int
    a: float
    b: float
    base: float
    mercury: float
    water: float

    @property
    def top(self) -> float:
        return self.base + self.mercury + self.water


@dataclass(frozen=True)
class WaterfillDesign:
    lambda2: np.ndarray
    mu: float
    kappa: int
    G_star: np.ndarray
    gain: float
    eig: EigenStructure
    P: float
    vessels: List[Vessel] = field(default_factory=list)

    @property
    def a(self) -> np.ndarray:
        return self.eig.sigma2_xi[: self.lambda2.size]

    @property
    def b(self) -> np.ndarray:
        return self.eig.sigma2_v[: self.lambda2.size]

    @property
    def water_top(self) -> float:
        return 1.0 / self.mu

    def to_dict(self) -> dict:
        return {
            "solver": "analytic",
            "P": self.P,
            "mu": self.mu,
            "kappa": self.kappa,
            "gain_nats": self.gain,
            "lambda2": self.lambda2.tolist(),
            "G": self.G_star.tolist(),
            "vessels": [vars(v) for v in self.vessels],
        }


def _sign_fix(U: np.ndarray) -> np.ndarray:
    # first nonzero component of each eigenvector positive
    U = U.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            U[:, j] = -col
    return U


def _ordered_eigh(a: np.ndarray, descending: bool) -> Tuple[np.ndarray, np.ndarray]:
    a = sym(a)
    off = a - np.diag(np.diag(a))
    if not np.any(off):
        w = np.diag(a).copy()
        U = np.eye(a.shape[0])
    else:
        w, U = np.linalg.eigh(a)
    key = -w if descending else w
    order = np.argsort(key, kind="stable")
    return w[order], _sign_fix(U[:, order])


def conditional_variance(d: DerivedQuantities, tol: float = SCALAR_ID_TOL) -> float:
    """``sigma^2`` when ``Q_phph|th = sigma^2 I``, else :class:`UnsupportedStructure`."""
    Q = d.Q_phph_th
    s2 = float(np.mean(np.diag(Q)))
    if np.max(np.abs(Q - s2 * np.eye(Q.shape[0]))) > tol * max(1.0, s2):
        raise UnsupportedStructure(
            "conditional covariance of phi given theta is not a multiple of the "
            "identity; use an iterative solver (extrinsic or intrinsic)"
        )
    return s2


def eigen_structure(d: DerivedQuantities, sys: TwoChannelSystem | None = None) -> EigenStructure:
    s2 = conditional_variance(d)
    Q_vv = d.Q_vv if sys is None else sys.Q_vv
    sigma2_v, U_v = _ordered_eigh(Q_vv, descending=False)
    sigma2_xi, U_xi = _ordered_eigh(d.S, descending=True)
    sigma2_xi = np.clip(sigma2_xi, 0.0, None)
    top = sigma2_xi[0] if sigma2_xi.size else 0.0
    rank = int(np.sum(sigma2_xi > RANK_RTOL * top)) if top > 0 else 0
    return EigenStructure(U_v, sigma2_v, U_xi, sigma2_xi, rank, s2)


def _unit_lambda2(mu: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # positive root of (1+a) x^2 + b(2+a) x + b^2 - a b/(2 mu) = 0
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    active = mu < a / (2.0 * b)
    out = np.zeros(a.shape)
    if not np.any(active):
        return out
    aa, bb = a[active], b[active]
    c = bb * bb - aa * bb / (2.0 * mu)  # negative when active
    disc = (bb * (2.0 + aa)) ** 2 - 4.0 * (1.0 + aa) * c
    # -2c / (B + sqrt(disc)) avoids cancellation of the textbook root
    out[active] = -2.0 * c / (bb * (2.0 + aa) + np.sqrt(disc))
    return out


def power_at_mu(mu: float, a, b, sigma2: float = 1.0) -> Tuple[np.ndarray, float]:
    """Subchannel powers and their total at multiplier ``mu``.

    Handles ``sigma2 != 1`` by the substitution ``G -> sigma G``, which
    maps the problem to unit conditional variance with ``a / sigma2``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lam2 = _unit_lambda2(mu / sigma2, a / sigma2, b) / sigma2
    return lam2, float(np.sum(lam2))


def solve_mu(a, b, sigma2: float, P: float, tol: float = 1e-12) -> Tuple[float, int]:
    """Bisection for the multiplier that spends exactly ``P``.

    Returns ``(mu, kappa)`` with ``kappa`` the number of active subchannels.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    amax = float(np.max(a)) if a.size else 0.0
    if amax <= 0 or not np.any(a > RANK_RTOL * amax):
        raise NoInformativeChannel("no subchannel carries information about theta")
    hi = float(np.max(a / (2.0 * b)))
    lo = 0.5 * hi
    while power_at_mu(lo, a, b, sigma2)[1] < P:
        hi = lo
        lo *= 0.5
    while True:
        mid = 0.5 * (lo + hi)
        total = power_at_mu(mid, a, b, sigma2)[1]
        if abs(total - P) <= tol * P or hi - lo <= 1e-15 * hi:
            break
        if total > P:
            lo = mid
        else:
            hi = mid
    lam2, _ = power_at_mu(mid, a, b, sigma2)
    return mid, int(np.sum(lam2 > 0))


def separable_gain(lam2, a, b, sigma2: float = 1.0) -> float:
    """``1/2 sum log(1 + a x / (s2 x + b))`` for diagonal allocations ``x``."""
    lam2 = np.asarray(lam2, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * float(np.sum(np.log1p(a * lam2 / (sigma2 * lam2 + b))))


def vessel_report(design: WaterfillDesign) -> List[Vessel]:
    """Per-subchannel base, mercury and water heights stacking to ``1/mu``."""
    top = 1.0 / design.mu
    out = []
    for i, (x, a, b) in enumerate(zip(design.lambda2, design.a, design.b)):
        base = 2.0 * b / a if a > 0 else np.inf
        if x > 0:
            mercury = max(top - x, base) - base
            water = x
        else:
            mercury = water = 0.0
        out.append(Vessel(i + 1, float(a), float(b), float(base), float(mercury), float(water)))
    return out


def analytic_design(sys: TwoChannelSystem, d: DerivedQuantities) -> WaterfillDesign:
    """Optimal ``G*`` for a conditional covariance proportional to the identity."""
    eig = eigen_structure(d, sys)
    t, q = sys.t, sys.q
    n = min(t, q)
    a = eig.sigma2_xi[:n].copy()
    a[np.arange(n) >= eig.rank] = 0.0
    b = eig.sigma2_v[:n]
    mu, kappa = solve_mu(a, b, eig.sigma2_cond, sys.P)
    lam2, _ = power_at_mu(mu, a, b, eig.sigma2_cond)
    Lam = np.zeros((t, q))
    Lam[np.arange(n), np.arange(n)] = np.sqrt(lam2)
    G = eig.U_v @ Lam @ eig.U_xi.T
    design = WaterfillDesign(
        lambda2=lam2,
        mu=mu,
        kappa=kappa,
        G_star=G,
        gain=information_gain(G, d),
        eig=eig,
        P=sys.P,
    )
    object.__setattr__(design, "vessels", vessel_report(design))
    return design
