"""Instance generators and brute-force oracles shared by the tests.

The oracles here never call the package's solvers.
"""

import itertools

import numpy as np

from fusegain.model import TwoChannelSystem, random_spd


def random_instance(seed, p=None, q=None, s=None, t=None, max_dim=8, white=False, cond=None):
    """General instance: random conditional covariance and coloured noise."""
    rng = np.random.default_rng(seed)
    p, q, s, t = (
        int(rng.integers(1, max_dim + 1)) if x is None else x for x in (p, q, s, t)
    )
    M = rng.standard_normal((q, p))
    Q_thth = random_spd(rng, p, 0.1)
    if cond is None:
        cond = random_spd(rng, q, 0.1) / q
    Q_vv = (0.5 + rng.random()) * np.eye(t) if white else random_spd(rng, t, 0.1) / t
    return TwoChannelSystem(
        F=rng.standard_normal((s, p)) / np.sqrt(s * p),
        Q_uu=random_spd(rng, s, 0.1) / s,
        Q_vv=Q_vv,
        Q_thth=Q_thth,
        Q_thph=(M @ Q_thth).T,
        Q_phph=M @ Q_thth @ M.T + cond,
        P=float(0.5 + 2 * rng.random()),
    )


def identity_conditional_instance(seed, p=5, q=3, s=3, t=3, sigma2=1.0):
    """``Q_phph|th = sigma2 I`` with coloured noise of distinct eigenvalues."""
    return random_instance(seed, p, q, s, t, cond=sigma2 * np.eye(q))


def random_feasible(rng, t, q, P):
    G = rng.standard_normal((t, q))
    return G * np.sqrt(P * rng.random() ** (1 / (t * q))) / np.linalg.norm(G)


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def direct_gain(G, sys):
    """Difference of conditional log-determinants, computed from scratch."""
    Qth_inv = np.linalg.inv(sys.Q_thth)
    Qx = np.linalg.inv(Qth_inv + sys.F.T @ np.linalg.inv(sys.Q_uu) @ sys.F)
    M = sys.Q_thph.T @ Qth_inv
    Qc = sys.Q_phph - M @ sys.Q_thph
    Qxy = np.linalg.inv(
        np.linalg.inv(Qx) + M.T @ G.T @ np.linalg.inv(G @ Qc @ G.T + sys.Q_vv) @ G @ M
    )
    return 0.5 * (np.linalg.slogdet(Qx)[1] - np.linalg.slogdet(Qxy)[1])


def separable(x, a, b, sigma2=1.0):
    """Vectorized diagonal-allocation gain; ``x`` has shape (..., n)."""
    return 0.5 * np.sum(np.log1p(a * x / (sigma2 * x + b)), axis=-1)


def _project_simplex(x, P):
    x = np.clip(x, 0.0, None)
    tot = x.sum(axis=-1, keepdims=True)
    tot[tot == 0] = 1.0
    return P * x / tot


def simplex_search(fun, n, P, n_points=100_000, seed=0):
    """Random + zooming-grid search for ``max fun(x)`` over ``{x >= 0, sum x = P}``.

    Returns ``(best_value, best_x)``; uses at most ``n_points`` evaluations.
    """
    rng = np.random.default_rng(seed)
    n_rand = n_points // 2
    pts = [P * rng.dirichlet(np.ones(n), size=n_rand), P * np.eye(n)]
    for k in range(2, n + 1):
        for idx in itertools.combinations(range(n), k):
            c = np.zeros(n)
            c[list(idx)] = P / k
            pts.append(c[None])
    X = np.vstack(pts)
    vals = fun(X)
    i = int(np.argmax(vals))
    best_x, best = X[i], float(vals[i])
    used = X.shape[0]

    levels = 5 if n > 2 else 41
    offsets = np.linspace(-1.0, 1.0, levels)
    grid = np.array(list(itertools.product(offsets, repeat=n - 1)))
    radius = P / 4
    r = 0
    while used + grid.shape[0] <= n_points:
        # perturb every coordinate but one; that one restores the budget
        j = r % n
        free = [i for i in range(n) if i != j]
        cand = np.repeat(best_x[None], grid.shape[0], axis=0)
        cand[:, free] += radius * grid
        cand[:, j] = P - cand[:, free].sum(axis=1)
        cand = _project_simplex(cand, P)
        v = fun(cand)
        used += cand.shape[0]
        k = int(np.argmax(v))
        if v[k] > best:
            best, best_x = float(v[k]), cand[k]
        else:
            radius *= 0.7
        r += 1
    return best, best_x
