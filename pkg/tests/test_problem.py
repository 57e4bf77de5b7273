"""LP assembly, constraint operator kernels, and KKT residuals."""

import numpy as np
import pytest

import barylp
from barylp.problem import kkt_terms_raw, project_nonneg

from oracles import dense_wbp_A, random_dims


# Hand-derived miniature: T=1, m=2, m_1=1.  The plan is the column
# (3, 4), the weights are (1, 2); rows of A are the sample marginal
# X11 + X21, the kept tie row X21 - a2, and the normalization a1 + a2.

def test_apply_A_hand_example():
    dims = barylp.Dims(2, (1,))
    x = np.array([3.0, 4.0, 1.0, 2.0])
    np.testing.assert_allclose(barylp.apply_A(dims, x), [7.0, 2.0, 3.0],
                               rtol=0, atol=0)


def test_apply_Astar_hand_example():
    dims = barylp.Dims(2, (1,))
    y = np.array([1.0, 2.0, 3.0])
    out = barylp.apply_Astar(dims, y)
    np.testing.assert_allclose(dims.plan_matrix(out, 0), [[1.0], [3.0]],
                               rtol=0, atol=0)
    np.testing.assert_allclose(dims.bary_view(out), [3.0, 1.0],
                               rtol=0, atol=0)


def test_apply_matches_dense_oracle():
    rng = np.random.default_rng(101)
    for _ in range(200):
        dims = random_dims(rng)
        A = dense_wbp_A(dims.m, dims.m_ts)
        x = rng.standard_normal(dims.N)
        y = rng.standard_normal(dims.M)
        np.testing.assert_allclose(barylp.apply_A(dims, x), A @ x,
                                   rtol=0, atol=1e-12)
        np.testing.assert_allclose(barylp.apply_Astar(dims, y), A.T @ y,
                                   rtol=0, atol=1e-12)


def test_adjoint_identity():
    rng = np.random.default_rng(7)
    for _ in range(100):
        dims = random_dims(rng)
        x = rng.standard_normal(dims.N)
        y = rng.standard_normal(dims.M)
        lhs = np.dot(barylp.apply_A(dims, x), y)
        rhs = np.dot(x, barylp.apply_Astar(dims, y))
        assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(lhs))


def test_apply_with_buffers_matches_and_allocfree():
    dims = barylp.Dims(5, (3, 4))
    rng = np.random.default_rng(3)
    x = rng.standard_normal(dims.N)
    y = rng.standard_normal(dims.M)
    out_m = np.empty(dims.M)
    work_m = np.empty(dims.m)
    res = barylp.apply_A(dims, x, out=out_m, work=work_m)
    assert res is out_m
    np.testing.assert_array_equal(res, barylp.apply_A(dims, x))
    out_n = np.empty(dims.N)
    work_n = np.empty(dims.m - 1)
    res = barylp.apply_Astar(dims, y, out=out_n, work=work_n)
    assert res is out_n
    np.testing.assert_array_equal(res, barylp.apply_Astar(dims, y))


def test_dims_bookkeeping():
    dims = barylp.Dims(4, (2, 5, 1))
    assert dims.T == 3
    assert dims.sum_mt == 8
    assert dims.N == 4 * 8 + 4
    assert dims.M == 8 + 3 * 3 + 1
    assert dims.plan_offsets == (0, 8, 28)
    assert dims.bary_offset == 32
    assert dims.y1_offsets == (0, 2, 7)
    assert dims.y2_offsets == (8, 11, 14)
    assert dims.y3_index == 17
    assert dims == barylp.Dims(4, (2, 5, 1))
    assert dims != barylp.Dims(4, (2, 5, 2))


def test_dims_rejects_degenerate_sizes():
    with pytest.raises(ValueError):
        barylp.Dims(1, (3,))
    with pytest.raises(ValueError):
        barylp.Dims(3, ())
    with pytest.raises(ValueError):
        barylp.Dims(3, (2, 0))


def test_plan_view_is_transposed_matrix():
    dims = barylp.Dims(3, (2,))
    x = np.arange(dims.N, dtype=np.float64)
    P = dims.plan_matrix(x, 0)
    assert P.shape == (3, 2)
    # Column-stacked layout: entry (i, j) lives at flat index j*m + i.
    assert P[1, 0] == x[1]
    assert P[0, 1] == x[3]


def test_lp_data_layout(tiny, tiny_lp):
    b, c, dims = tiny_lp
    for t, dist in enumerate(tiny.distributions):
        np.testing.assert_array_equal(dims.y1_view(b, t), dist.weights)
        np.testing.assert_array_equal(dims.plan_matrix(c, t), tiny.cost[t])
        np.testing.assert_array_equal(dims.y2_view(b, t),
                                      np.zeros(dims.m - 1))
    assert b[dims.y3_index] == 1.0
    np.testing.assert_array_equal(dims.bary_view(c), np.zeros(dims.m))


def test_distribution_validation():
    with pytest.raises(ValueError):
        barylp.DiscreteDistribution([0.5, 0.4], [[0.0], [1.0]])  # sums to 0.9
    with pytest.raises(ValueError):
        barylp.DiscreteDistribution([1.5, -0.5], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        barylp.DiscreteDistribution([1.0], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        barylp.DiscreteDistribution([], [])
    d = barylp.DiscreteDistribution([0.25, 0.75], [0.0, 1.0])
    assert d.support.shape == (2, 1)


def test_instance_validation():
    dist = barylp.DiscreteDistribution([1.0], [[0.0]])
    good = barylp.WbpInstance([dist], [1.0], [np.zeros((2, 1))])
    assert good.m == 2 and good.T == 1 and good.m_ts == (1,)
    with pytest.raises(ValueError):
        barylp.WbpInstance([dist], [1.0], [np.zeros((1, 1))])  # m == 1
    with pytest.raises(ValueError):
        barylp.WbpInstance([dist], [0.5], [np.zeros((2, 1))])  # omega sum
    with pytest.raises(ValueError):
        barylp.WbpInstance([dist], [1.0], [np.zeros((2, 3))])  # cost shape
    with pytest.raises(ValueError):
        barylp.WbpInstance([], [], [])


def test_primal_dual_vector_blocks():
    dims = barylp.Dims(3, (2, 4))
    rng = np.random.default_rng(1)
    plans = [rng.standard_normal((3, 2)), rng.standard_normal((3, 4))]
    bary = rng.standard_normal(3)
    v = barylp.PrimalVector.from_blocks(dims, plans, bary)
    np.testing.assert_array_equal(v.plan(0), plans[0])
    np.testing.assert_array_equal(v.plan(1), plans[1])
    np.testing.assert_array_equal(v.barycenter(), bary)
    dv = barylp.DualVector(dims)
    dv.y1(1)[:] = 2.0
    dv.y3 = 5.0
    assert dv.data[dims.y3_index] == 5.0
    assert dv.data[dims.y1_offsets[1]] == 2.0


def test_project_nonneg():
    x = np.array([-1.0, 0.0, 2.5])
    np.testing.assert_array_equal(project_nonneg(x), [0.0, 0.0, 2.5])


def test_objectives(tiny_lp):
    b, c, dims = tiny_lp
    rng = np.random.default_rng(0)
    x = rng.standard_normal(dims.N)
    y = rng.standard_normal(dims.M)
    assert barylp.primal_objective(c, x) == pytest.approx(float(c @ x))
    assert barylp.dual_objective(b, y) == pytest.approx(float(b @ y))


def test_kkt_residual_zero_at_reference(tiny_lp, tiny_reference):
    b, c, dims = tiny_lp
    x = tiny_reference["x_star"]
    y = tiny_reference["y_star"]
    s = tiny_reference["s_star"]
    res = barylp.kkt_residual(dims, b, c, x, y, s)
    assert res.max <= 1e-10
    assert res.is_finite()


def test_kkt_residual_matches_dense(tiny_lp):
    b, c, dims = tiny_lp
    rng = np.random.default_rng(11)
    A = dense_wbp_A(dims.m, dims.m_ts)
    x = rng.standard_normal(dims.N)
    y = rng.standard_normal(dims.M)
    s = rng.standard_normal(dims.N)
    raw = kkt_terms_raw(dims, b, c, x, y, s)
    expect = (
        np.linalg.norm(A @ x - b),
        np.linalg.norm(np.minimum(x, 0.0)),
        np.linalg.norm(A.T @ y + s - c),
        np.linalg.norm(s - np.maximum(s - x, 0.0)),
    )
    np.testing.assert_allclose(raw, expect, rtol=1e-12)
    res = barylp.kkt_residual(dims, b, c, x, y, s)
    assert res.primal == pytest.approx(
        expect[0] / (1.0 + np.linalg.norm(b)), rel=1e-12)
    assert res.dual == pytest.approx(
        expect[2] / (1.0 + np.linalg.norm(c) + np.linalg.norm(s)), rel=1e-12)
    assert res.max == max(res.primal, res.nonneg, res.dual, res.compl)
