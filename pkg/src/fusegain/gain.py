"""Information-gain objective, its upper bound and its gradient.

All values are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import NumericalFailure, ShapeMismatch, SingularMatrix
from .model import DerivedQuantities, sym

__all__ = [
    "ChannelMatrix",
    "information_gain",
    "information_gain_snr_form",
    "snr_covariances",
    "upper_bound",
    "gradient",
    "fd_gradient",
    "logdet_spd",
]


@dataclass(frozen=True)
class ChannelMatrix:
    """A candidate secondary channel matrix and its power ``tr(G G^T)``."""

    G: np.ndarray

    def __post_init__(self):
        G = np.array(np.atleast_2d(self.G), dtype=float, copy=True)
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @property
    def power(self) -> float:
        return float(np.sum(self.G * self.G))

    def is_feasible(self, P: float, atol: float = 1e-9) -> bool:
        return self.power <= P + atol


def _as_array(G) -> np.ndarray:
    return G.G if isinstance(G, ChannelMatrix) else np.asarray(G, dtype=float)


def _check_shape(G: np.ndarray, d: DerivedQuantities) -> None:
    if G.ndim != 2 or G.shape != (d.t, d.q):
        raise ShapeMismatch(f"G has shape {G.shape}, expected {(d.t, d.q)}")


def logdet_spd(a: np.ndarray) -> float:
    """``log det`` of a symmetric positive-definite matrix via Cholesky."""
    try:
        L = sla.cholesky(sym(a), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("log-det argument is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def information_gain(G, d: DerivedQuantities) -> float:
    """``D(G) = 1/2 log det[I_p + M^T G^T (G Q G^T + Q_vv)^{-1} G M Q_thth|x]``.

    ``Q`` is the conditional covariance of phi given theta. The p x p
    argument is made symmetric by the similarity transform with the
    Cholesky factor of ``Q_thth|x``.
    """
    G = _as_array(G)
    _check_shape(G, d)
    Z = G @ d.Q_phph_th @ G.T + d.Q_vv
    K = G @ d.M @ d.L_thth_x  # t x p
    try:
        W = K.T @ sla.cho_solve(sla.cho_factor(sym(Z), lower=True), K)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("G Q G^T + Q_vv is not positive definite") from exc
    return 0.5 * logdet_spd(np.eye(d.p) + W)


def snr_covariances(G, d: DerivedQuantities):
    """Signal and noise covariances ``(Q_ww, Q_zz)`` of the secondary channel."""
    G = _as_array(G)
    _check_shape(G, d)
    Q_ww = sym(G @ d.S @ G.T)
    Q_zz = sym(G @ d.Q_phph_th @ G.T + d.Q_vv)
    return Q_ww, Q_zz


def information_gain_snr_form(G, d: DerivedQuantities) -> float:
    """Generalized-SNR form ``1/2 log det[I + Q_zz^{-1/2} Q_ww Q_zz^{-1/2}]``."""
    Q_ww, Q_zz = snr_covariances(G, d)
    w, V = np.linalg.eigh(Q_zz)
    if w[0] <= 0:
        raise NumericalFailure("noise covariance Q_zz is not positive definite")
    R = (V / np.sqrt(w)) @ V.T
    return 0.5 * logdet_spd(np.eye(d.t) + R @ Q_ww @ R)


def upper_bound(d: DerivedQuantities) -> float:
    """Gain from observing phi itself: ``1/2 log det[I_q + Q^{-1} S]``."""
    return 0.5 * (logdet_spd(d.Q_phph_th + d.S) - logdet_spd(d.Q_phph_th))


def gradient(G, d: DerivedQuantities) -> np.ndarray:
    """Euclidean gradient of :func:`information_gain` with respect to ``G``.

    ``Q_vv^{-1} G (A - B)^{-1} B A^{-1}`` with
    ``A = Q^{-1} + G^T Q_vv^{-1} G``.
    """
    G = _as_array(G)
    _check_shape(G, d)
    A = sym(d.Q_phph_th_inv + G.T @ d.Q_vv_inv @ G)
    try:
        left = np.linalg.solve(A - d.B, d.B)  # (A - B)^{-1} B
        right = np.linalg.solve(A, left.T).T  # ... A^{-1}, A symmetric
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("gradient system is singular") from exc
    return d.Q_vv_inv @ G @ right


def fd_gradient(G, d: DerivedQuantities, h: float | None = None) -> np.ndarray:
    """Central finite-difference gradient, step ``h`` per entry."""
    G = np.array(_as_array(G), dtype=float)
    _check_shape(G, d)
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(G))
    if h <= 0:
        raise ValueError("h must be positive")
    out = np.empty_like(G)
    for idx in np.ndindex(*G.shape):
        Gp = G.copy()
        Gm = G.copy()
        Gp[idx] += h
        Gm[idx] -= h
        out[idx] = (information_gain(Gp, d) - information_gain(Gm, d)) / (2.0 * h)
    return out
