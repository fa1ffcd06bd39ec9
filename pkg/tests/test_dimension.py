import numpy as np
import pytest

from fusegain.dimension import (
    dimension_sweep,
    numerical_rank,
    reduce_rank,
    select_dimension,
    white_noise_variance,
)
from fusegain.errors import UnsupportedNoise, ZeroMatrix
from fusegain.gain import information_gain
from fusegain.model import derive, gen_example1, gen_random_system
from fusegain.optimize import OptimConfig

from helpers import random_instance


def white(seed, t=4, q=4, s2=1.0):
    sys = random_instance(seed, p=4, q=q, s=3, t=t)
    return sys.with_output_dim(t, s2)


def reduced_gain(G_red, sys):
    return information_gain(G_red, derive(sys.with_output_dim(G_red.shape[0])))


def test_noise_must_be_white():
    with pytest.raises(UnsupportedNoise):
        white_noise_variance(np.diag([1.0, 2.0]))
    assert white_noise_variance(0.3 * np.eye(3)) == pytest.approx(0.3)
    sys = random_instance(0, p=3, q=3, s=2, t=3)
    with pytest.raises(UnsupportedNoise):
        reduce_rank(np.eye(3), sys)


def test_reduce_rank_diagonal_example():
    sys = white(0, t=2, q=2)
    G = np.array([[1.0, 0.0], [0.0, 0.0]])
    G_red, r = reduce_rank(G, sys)
    assert r == 1
    np.testing.assert_allclose(np.abs(G_red), [[1.0, 0.0]], atol=1e-15)
    assert reduced_gain(G_red, sys) == pytest.approx(information_gain(G, derive(sys)), abs=1e-10)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("s2", [1.0, 0.25])
def test_reduce_rank_outer_products(seed, s2):
    rng = np.random.default_rng(seed)
    sys = white(seed, s2=s2)
    G = sum(np.outer(rng.standard_normal(4), rng.standard_normal(4)) for _ in range(2))
    G_red, r = reduce_rank(G, sys)
    assert r == 2 and G_red.shape == (2, 4)
    assert np.sum(G_red**2) == pytest.approx(np.sum(G**2), abs=1e-10)
    assert reduced_gain(G_red, sys) == pytest.approx(information_gain(G, derive(sys)), abs=1e-10)


def test_reduce_rank_full_rank():
    sys = white(3)
    G = np.random.default_rng(3).standard_normal((4, 4))
    G_red, r = reduce_rank(G, sys)
    assert r == 4
    assert reduced_gain(G_red, sys) == pytest.approx(information_gain(G, derive(sys)), abs=1e-10)


def test_reduce_rank_zero():
    with pytest.raises(ZeroMatrix):
        reduce_rank(np.zeros((3, 4)), white(0, t=3))
    assert numerical_rank(np.zeros((2, 2))) == 0


def test_select_dimension():
    gains = [1.0, 1.5, 1.9995, 2.0]
    assert select_dimension(gains, 1e-3) == 3
    assert select_dimension(gains, 0.0) == 4
    assert select_dimension(gains, np.inf) == 1


def test_example1_scenario3_sweep():
    sweep = dimension_sweep(gen_example1(3), "analytic", c=1e-3)
    assert np.all(np.diff(sweep.gains) >= -1e-9)
    # four active channels at P = 1, so the curve flattens from k = 4
    assert sweep.t_hat == 4
    np.testing.assert_array_equal(sweep.ranks, [1, 2, 3, 4, 4])
    assert sweep.gains[4] - sweep.gains[3] <= 1e-9
    assert sweep.gains[4] - sweep.gains[2] > 1e-3
    assert dimension_sweep(gen_example1(3), "analytic", c=np.inf).t_hat == 1


@pytest.mark.parametrize("seed", [0, 1])
def test_random_identity_rank_equality(seed):
    sys = gen_random_system(seed)
    sweep = dimension_sweep(sys, "analytic", workers=4)
    assert [r.k for r in sweep.records] == list(range(1, 21))
    assert np.all(np.diff(sweep.gains) >= -1e-9)
    assert sweep.t_hat == sweep.records[-1].rank
    kappa = sweep.records[-1].rank
    np.testing.assert_allclose(sweep.gains[kappa - 1 :], sweep.gains[-1], atol=1e-9)


def test_iterative_sweep_small():
    sys = gen_random_system(2, p=4, q=4, s=3, conditional="banded")
    cfg = OptimConfig(step_mode="line_search", max_iters=150)
    sweep = dimension_sweep(sys, "intrinsic", config=cfg, restarts=2, workers=2)
    assert np.all(np.diff(sweep.gains) >= -5e-3)
    assert 1 <= sweep.t_hat <= 4
    assert sweep.to_csv().splitlines()[0] == "k,gain_nats,rank"


def test_sweep_rejects_unknown_solver():
    with pytest.raises(ValueError):
        dimension_sweep(gen_example1(1), "newton")
