"""Two-channel linear Gaussian measurement systems.

The primary channel ``x = F theta + u`` is fixed; the secondary channel
``y = G phi + v`` is the design variable. A :class:`TwoChannelSystem` holds
every covariance block needed to score a candidate ``G``, and
:func:`derive` precomputes the quantities shared by every evaluation of the
objective and its gradient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionMismatch,
    JointCovarianceInvalid,
    NotPositiveDefinite,
    SingularConditionalCovariance,
    SingularMatrix,
)

__all__ = [
    "TwoChannelSystem",
    "DerivedQuantities",
    "validate_system",
    "derive",
    "gen_example1",
    "gen_ar_system",
    "gen_random_system",
    "gen_scalar_system",
    "EXAMPLE1_WEIGHTS",
]

PSD_RTOL = 1e-10
SPD_JITTER = 1e-3

EXAMPLE1_WEIGHTS = {
    1: (1.0, 1.0, 1.0, 1.0, 1.0),
    2: (25.0, 16.0, 9.0, 4.0, 1.0),
    3: (81.0, 64.0, 49.0, 4.0, 1.0),
}


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part ``(A + A^T) / 2``."""
    return 0.5 * (a + a.T)


def _min_eig_ok(a: np.ndarray, rtol: float = PSD_RTOL) -> bool:
    w = np.linalg.eigvalsh(sym(a))
    scale = max(float(np.max(np.abs(w))), 1.0) if w.size else 1.0
    return bool(w.size == 0 or w[0] >= -rtol * scale)


def _chol(a: np.ndarray, name: str) -> np.ndarray:
    try:
        return sla.cholesky(sym(a), lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"Cholesky factorization of {name} failed") from exc


def _spd_inv(a: np.ndarray, name: str) -> np.ndarray:
    try:
        c = sla.cho_factor(sym(a), lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"{name} is not invertible") from exc
    return sym(sla.cho_solve(c, np.eye(a.shape[0])))


@dataclass(frozen=True)
class TwoChannelSystem:
    """Problem instance.

    Dimensions are ``p = dim(theta)``, ``q = dim(phi)``, ``s = dim(x)`` and
    ``t = dim(y)``. ``Q_thph`` is the ``p x q`` cross-covariance of theta and
    phi. ``P`` bounds the design power ``tr(G G^T)``.
    """

    F: np.ndarray
    Q_uu: np.ndarray
    Q_vv: np.ndarray
    Q_thth: np.ndarray
    Q_thph: np.ndarray
    Q_phph: np.ndarray
    P: float = 1.0

    def __post_init__(self):
        for name in ("F", "Q_uu", "Q_vv", "Q_thth", "Q_thph", "Q_phph"):
            object.__setattr__(self, name, _frozen(np.atleast_2d(getattr(self, name))))
        object.__setattr__(self, "P", float(self.P))

    @property
    def p(self) -> int:
        return self.Q_thth.shape[0]

    @property
    def q(self) -> int:
        return self.Q_phph.shape[0]

    @property
    def s(self) -> int:
        return self.Q_uu.shape[0]

    @property
    def t(self) -> int:
        return self.Q_vv.shape[0]

    def with_output_dim(self, k: int, noise_var: Optional[float] = None) -> "TwoChannelSystem":
        """Copy of the system with a ``k``-dimensional white-noise secondary output."""
        if noise_var is None:
            noise_var = float(np.mean(np.diag(self.Q_vv)))
        return replace(self, Q_vv=noise_var * np.eye(k))

    def with_power(self, P: float) -> "TwoChannelSystem":
        return replace(self, P=P)

    # serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "s": self.s,
            "t": self.t,
            "P": self.P,
            "F": self.F.tolist(),
            "Q_uu": self.Q_uu.tolist(),
            "Q_vv": self.Q_vv.tolist(),
            "Q_thth": self.Q_thth.tolist(),
            "Q_thph": self.Q_thph.tolist(),
            "Q_phph": self.Q_phph.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TwoChannelSystem":
        sys = cls(
            F=doc["F"],
            Q_uu=doc["Q_uu"],
            Q_vv=doc["Q_vv"],
            Q_thth=doc["Q_thth"],
            Q_thph=doc["Q_thph"],
            Q_phph=doc["Q_phph"],
            P=doc.get("P", 1.0),
        )
        for key in ("p", "q", "s", "t"):
            if key in doc and int(doc[key]) != getattr(sys, key):
                raise DimensionMismatch(
                    f"declared {key}={doc[key]} but matrices imply {getattr(sys, key)}"
                )
        return sys

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "TwoChannelSystem":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DerivedQuantities:
    """Quantities shared by every objective and gradient evaluation.

    ``S = M Q_thth|x M^T`` and ``B = Q_phph|th^{-1} - (Q_phph|th + S)^{-1}``,
    which is the same matrix as ``Q^{-1} S (I + Q^{-1} S)^{-1} Q^{-1}``.
    """

    M: np.ndarray
    Q_thth_x: np.ndarray
    Q_phph_th: np.ndarray
    S: np.ndarray
    B: np.ndarray
    Q_vv_inv: np.ndarray
    Q_vv: np.ndarray
    Q_phph_th_inv: np.ndarray
    L_thth_x: np.ndarray = field(repr=False)
    P: float = 1.0

    @property
    def p(self) -> int:
        return self.M.shape[1]

    @property
    def q(self) -> int:
        return self.M.shape[0]

    @property
    def t(self) -> int:
        return self.Q_vv.shape[0]


def validate_system(sys: TwoChannelSystem) -> TwoChannelSystem:
    """Check shapes, definiteness and joint-covariance validity.

    Returns the instance unchanged when every check passes.
    """
    p, q, s, t = sys.p, sys.q, sys.s, sys.t
    expected = {
        "F": (s, p),
        "Q_uu": (s, s),
        "Q_vv": (t, t),
        "Q_thth": (p, p),
        "Q_thph": (p, q),
        "Q_phph": (q, q),
    }
    for name, shape in expected.items():
        got = getattr(sys, name).shape
        if got != shape:
            raise DimensionMismatch(f"{name} has shape {got}, expected {shape}")
    if not (sys.P > 0 and np.isfinite(sys.P)):
        raise DimensionMismatch(f"power budget must be positive, got {sys.P}")

    for name in ("Q_uu", "Q_vv", "Q_thth", "Q_phph"):
        a = getattr(sys, name)
        if not np.allclose(a, a.T, rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(a)))):
            raise NotPositiveDefinite(name, "not symmetric")
        w = np.linalg.eigvalsh(sym(a))
        if w[0] <= 0:
            raise NotPositiveDefinite(name, f"min eigenvalue {w[0]:.3g}")

    joint = np.block([[sys.Q_thth, sys.Q_thph], [sys.Q_thph.T, sys.Q_phph]])
    if not _min_eig_ok(joint):
        raise JointCovarianceInvalid("joint covariance of (theta, phi) is not PSD")
    cond = sys.Q_phph - sys.Q_thph.T @ np.linalg.solve(sys.Q_thth, sys.Q_thph)
    if not _min_eig_ok(cond):
        raise JointCovarianceInvalid("conditional covariance Q_phph|th is not PSD")
    return sys


def derive(sys: TwoChannelSystem) -> DerivedQuantities:
    """Precompute ``M``, the conditional covariances, ``S`` and ``B``."""
    Q_thth_inv = _spd_inv(sys.Q_thth, "Q_thth")
    Q_uu_inv = _spd_inv(sys.Q_uu, "Q_uu")
    M = sys.Q_thph.T @ Q_thth_inv
    Q_thth_x = _spd_inv(Q_thth_inv + sys.F.T @ Q_uu_inv @ sys.F, "Q_thth^-1 + F^T Q_uu^-1 F")
    Q_phph_th = sym(sys.Q_phph - M @ sys.Q_thph)
    S = sym(M @ Q_thth_x @ M.T)
    try:
        cf = sla.cho_factor(Q_phph_th, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularConditionalCovariance("Q_phph|th is singular") from exc
    Q_phph_th_inv = sym(sla.cho_solve(cf, np.eye(sys.q)))
    B = sym(Q_phph_th_inv - _spd_inv(Q_phph_th + S, "Q_phph|th + S"))
    return DerivedQuantities(
        M=_frozen(M),
        Q_thth_x=_frozen(Q_thth_x),
        Q_phph_th=_frozen(Q_phph_th),
        S=_frozen(S),
        B=_frozen(B),
        Q_vv_inv=_frozen(_spd_inv(sys.Q_vv, "Q_vv")),
        Q_vv=sys.Q_vv,
        Q_phph_th_inv=_frozen(Q_phph_th_inv),
        L_thth_x=_frozen(_chol(Q_thth_x, "Q_thth|x")),
        P=sys.P,
    )


# generators ------------------------------------------------------------------


def _from_regression(M, Q_thth, cond, **kw) -> TwoChannelSystem:
    # phi = M theta + tau with Cov(tau) = cond
    Q_phth = M @ Q_thth
    return TwoChannelSystem(
        Q_thth=Q_thth,
        Q_thph=Q_phth.T,
        Q_phph=sym(M @ Q_thth @ M.T) + cond,
        **kw,
    )


def gen_scalar_system(P: float = 1.0) -> TwoChannelSystem:
    """All-unit scalar instance: ``M = 1`` and unit conditional variances.

    The primary channel is switched off (``F = 0``) so ``Q_thth|x = 1``.
    """
    one = np.ones((1, 1))
    return _from_regression(one, one, one, F=np.zeros((1, 1)), Q_uu=one, Q_vv=one, P=P)


def gen_example1(scenario: int, P: float = 1.0) -> TwoChannelSystem:
    """The 5x5 three-scenario instance with identity conditional covariance.

    ``M = Diag(sqrt(w))`` so that ``S = (5/6) Diag(w)``.
    """
    if scenario not in EXAMPLE1_WEIGHTS:
        raise ValueError(f"scenario must be 1, 2 or 3, got {scenario}")
    w = np.asarray(EXAMPLE1_WEIGHTS[scenario])
    eye = np.eye(5)
    return _from_regression(
        np.diag(np.sqrt(w)),
        eye,
        eye,
        F=eye / np.sqrt(5.0),
        Q_uu=eye,
        Q_vv=eye,
        P=P,
    )


def ar_mixing(rho: float, n: int = 4) -> np.ndarray:
    """Lower-triangular ``L`` with ``L[i, j] = rho**(i - j + 1)`` for ``j <= i``."""
    i, j = np.indices((n, n))
    expo = np.where(j <= i, i - j + 1.0, 1.0)
    return np.where(j <= i, float(rho) ** expo, 0.0)


def gen_ar_system(rho: float, P: float = 1.0) -> TwoChannelSystem:
    """The p=q=4, s=t=3 autoregressive-mixing instance."""
    L = ar_mixing(rho, 4)
    return _from_regression(
        L,
        2.0 * np.eye(4),
        np.eye(4),
        F=np.eye(3, 4),
        Q_uu=np.eye(3),
        Q_vv=0.1 * np.eye(3),
        P=P,
    )


def banded(q: int, d0: float = 2.0, d1: float = 0.2) -> np.ndarray:
    return d0 * np.eye(q) + d1 * (np.eye(q, k=1) + np.eye(q, k=-1))


def random_spd(rng: np.random.Generator, n: int, eps: float = SPD_JITTER) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return sym(A @ A.T) + eps * np.eye(n)


def gen_random_system(
    seed: int,
    p: int = 20,
    q: int = 20,
    s: int = 10,
    t: Optional[int] = None,
    conditional="identity",
    P: float = 1.0,
) -> TwoChannelSystem:
    """Seeded random instance.

    ``conditional`` is ``"identity"`` or ``("banded", d0, d1)``; a bare
    ``"banded"`` uses ``d0=2, d1=0.2``.
    """
    if t is None:
        t = q
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((s, p))
    F /= np.linalg.norm(F)
    Q_thth = random_spd(rng, p)
    M = rng.standard_normal((q, p))
    if conditional == "identity":
        cond = np.eye(q)
    elif conditional == "banded":
        cond = banded(q)
    elif isinstance(conditional, (tuple, list)) and conditional[0] == "banded":
        cond = banded(q, *conditional[1:])
    else:
        raise ValueError(f"unknown conditional structure {conditional!r}")
    return _from_regression(M, Q_thth, cond, F=F, Q_uu=np.eye(s), Q_vv=np.eye(t), P=P)
