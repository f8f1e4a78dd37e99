import math

import numpy as np
import pytest

from proxsplit import convex_sets as cs
from proxsplit import prox_lib as pl
from proxsplit.hilbert import ConvolutionOp, Identity, MatrixOp
from proxsplit.oracles import (OracleReport, adjoint_report, compare, dense_reference,
                               finite_diff_gradient, gradient_report, prox_bruteforce_1d,
                               prox_bruteforce_nd, prox_report)

DISK = cs.Ball(np.zeros(2), 1.0)


def test_report_pass_iff_within_tol():
    assert compare("q", 1.0, 1.0 + 1e-7, 1e-6).passed
    assert not compare("q", 1.0, 1.0 + 1e-5, 1e-6).passed
    rep = compare("q", [2.0, 4.0], [2.0, 4.4], 0.2, relative=True)
    assert rep.rel_error == pytest.approx(0.1)
    assert rep.passed
    assert rep.line().startswith("PASS q")


def test_report_is_frozen():
    rep = compare("q", 0.0, 0.0, 1.0)
    assert isinstance(rep, OracleReport)
    with pytest.raises(AttributeError):
        rep.passed = False


# -- 1-D brute force ---------------------------------------------------------

def test_1d_square():
    assert prox_bruteforce_1d(lambda y: 0.5 * y * y, 1.0, 2.0) == pytest.approx(1.0, abs=1e-10)


def test_1d_abs_dead_zone():
    assert prox_bruteforce_1d(abs, 1.0, 0.5) == pytest.approx(0.0, abs=1e-10)


def test_1d_log_abs():
    phi = lambda y: abs(y) - math.log1p(abs(y))  # noqa: E731
    assert prox_bruteforce_1d(phi, 1.0, 2.0) == pytest.approx(1.41421356, abs=1e-8)


def test_1d_far_minimizer_expands_bracket():
    assert prox_bruteforce_1d(lambda y: 0.0, 1.0, 1e4, bracket=(0.0, 1.0)) == \
        pytest.approx(1e4, rel=1e-10)


def test_1d_rejects_bad_gamma():
    with pytest.raises(ValueError):
        prox_bruteforce_1d(abs, 0.0, 1.0)


# -- n-D brute force ---------------------------------------------------------

def test_nd_disk_projection():
    p = prox_bruteforce_nd(pl.Indicator(DISK), 1.0, np.array([3.0, 0.0]))
    np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-6)


def test_nd_half_squared_distance():
    F = pl.DistCompose(pl.Square(), DISK)
    p = prox_bruteforce_nd(F, 1.0, np.array([3.0, 0.0]))
    np.testing.assert_allclose(p, [2.0, 0.0], atol=1e-6)


def test_nd_huber_disk():
    F = pl.HuberDist(1.0, DISK)
    p = prox_bruteforce_nd(F, 1.0, np.array([5.0, 0.0]))
    np.testing.assert_allclose(p, [4.0, 0.0], atol=1e-6)


def test_nd_oblique_box_corner():
    # the minimizer sits on a corner approached along a thin wedge
    F = pl.Indicator(cs.HalfSpace([1.0, 3.0], 1.0))
    x = np.array([2.0, 2.0])
    p = prox_bruteforce_nd(F, 1.0, x)
    np.testing.assert_allclose(p, F.prox(1.0, x), atol=1e-6)


def test_nd_three_dimensional():
    F = pl.SeparableSum([pl.Abs(), pl.Square(), pl.Huber(0.5)])
    x = np.array([1.5, -2.0, 3.0])
    np.testing.assert_allclose(prox_bruteforce_nd(F, 0.7, x), F.prox(0.7, x), atol=1e-6)


def test_nd_rejects_large_dimension():
    with pytest.raises(ValueError):
        prox_bruteforce_nd(pl.ZeroFun(), 1.0, np.zeros(4))


def test_prox_report_scalar_and_vector():
    assert prox_report(pl.Huber(1.0), 1.0, 5.0, scalar=True).passed
    assert prox_report(pl.HuberDist(1.0, DISK), 1.0, np.array([5.0, 0.0])).passed


def test_prox_report_detects_wrong_prox():
    class Wrong(pl.Huber):
        def prox(self, gamma, xi):
            return 1.01 * super().prox(gamma, xi)

    assert not prox_report(Wrong(1.0), 1.0, 5.0, scalar=True).passed


# -- finite differences ------------------------------------------------------

def test_fd_half_norm():
    x = np.array([1.0, -2.0, 0.5])
    g = finite_diff_gradient(lambda v: 0.5 * float(v @ v), x)
    np.testing.assert_allclose(g, x, atol=1e-8)


def test_fd_coupled_quadratic():
    phi = lambda v: 9 * v[0] ** 2 - 14 * v[0] * v[1] + 9 * v[1] ** 2  # noqa: E731
    np.testing.assert_allclose(finite_diff_gradient(phi, np.array([1.0, 0.0])),
                               [18.0, -14.0], atol=1e-6)


def test_fd_huber_seam_one_sided():
    F = pl.HuberDist(1.0, DISK)
    x = np.array([2.0, 0.0])  # d_C(x) = rho exactly
    h = 1e-6
    assert np.allclose(finite_diff_gradient(F, x, step=h), F.gradient(x), atol=10 * h)


def test_gradient_report_relative():
    F = pl.LogDist(1.5, DISK)
    assert gradient_report(F, np.array([2.0, -1.0])).passed


# -- dense reference ---------------------------------------------------------

def test_dense_identity():
    np.testing.assert_array_equal(dense_reference(Identity((3, 2))), np.eye(6))


def test_dense_matrix_roundtrip():
    A = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(dense_reference(MatrixOp(A)), A)


def test_dense_convolution_circulant_blocks():
    H = ConvolutionOp(np.arange(1.0, 10.0).reshape(3, 3), (4, 4))
    M = dense_reference(H)
    blocks = [[M[4 * i:4 * i + 4, 4 * j:4 * j + 4] for j in range(4)] for i in range(4)]
    for i in range(4):
        for j in range(4):
            np.testing.assert_array_equal(blocks[i][j], blocks[(i + 1) % 4][(j + 1) % 4])
            B = blocks[i][j]
            np.testing.assert_array_equal(B, np.roll(np.roll(B, 1, 0), 1, 1))


def test_dense_norm_bound_dominates_svd():
    rng = np.random.default_rng(0)
    H = ConvolutionOp(rng.standard_normal((3, 3)), (5, 5))
    smax = np.linalg.svd(dense_reference(H), compute_uv=False).max()
    assert smax <= H.norm_bound * (1 + 1e-10)


def test_dense_rejects_large():
    with pytest.raises(ValueError):
        dense_reference(Identity((100,)))


def test_adjoint_report_catches_wrong_adjoint():
    class Bad(MatrixOp):
        def apply_adjoint(self, y):
            return 2.0 * super().apply_adjoint(y)

    assert adjoint_report(MatrixOp(np.eye(3) + 1)).passed
    assert not adjoint_report(Bad(np.eye(3) + 1)).passed
