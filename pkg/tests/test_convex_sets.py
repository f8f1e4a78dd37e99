import numpy as np
import pytest

from proxsplit import convex_sets as cs
from proxsplit.hilbert import BlockLayout, dft, idft
from proxsplit.oracles import prox_bruteforce_1d, prox_bruteforce_nd
from proxsplit.prox_lib import Indicator


def _sets():
    rng = np.random.default_rng(0)
    sig = rng.standard_normal((4, 4))
    return {
        "box": cs.Box(-1.0, 2.0, (3,)),
        "box_arrays": cs.Box([-1, 0, -np.inf], [0, np.inf, 1], (3,)),
        "hyperplane": cs.Hyperplane([1.0, -2.0, 0.5], 0.7),
        "halfspace": cs.HalfSpace([1.0, 1.0, 1.0], -0.3),
        "ball": cs.Ball([0.5, 0.0, -1.0], 1.3),
        "singleton": cs.Singleton([1.0, 2.0, 3.0]),
        "mask": cs.SubspaceMask([True, False, True]),
        "whole": cs.WholeSpace((3,)),
        "dft_data": cs.DFTDataSet.from_signal(sig, cs.low_frequency_indices((4, 4), 2)),
        "phase": cs.PhaseSet.from_signal(sig),
        "product": cs.ProductSet([cs.Ball(np.zeros(2), 1.0), cs.Box(0.0, 1.0, (2,))],
                                 BlockLayout([(2,), (2,)])),
    }


SETS = _sets()


def _random_point(C, rng, scale=3.0):
    return scale * rng.standard_normal(C.shape)


@pytest.mark.parametrize("name", sorted(SETS))
def test_idempotent_and_member(name):
    C = SETS[name]
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = _random_point(C, rng)
        p = C.project(x)
        np.testing.assert_allclose(C.project(p), p, atol=1e-10)
        assert C.contains(p, 1e-8)


@pytest.mark.parametrize("name", sorted(SETS))
def test_firmly_nonexpansive(name):
    C = SETS[name]
    rng = np.random.default_rng(2)
    for _ in range(100):
        x, y = _random_point(C, rng), _random_point(C, rng)
        d = C.project(x) - C.project(y)
        assert np.sum(d * d) <= np.sum(d * (x - y)) + 1e-10


def _brute_distance_sq(C, x):
    """Nearest point by direct minimization of ||p - x||^2 over C."""
    p = prox_bruteforce_nd(Indicator(C), 1.0, x, grid=31, tol=1e-10)
    return float(np.sum((p - x) ** 2))


@pytest.mark.parametrize("name", ["box", "ball", "halfspace", "box3"])
def test_distance_matches_bruteforce(name):
    rng = np.random.default_rng(3)
    C = {"box": cs.Box(-1.0, 1.0, (2,)), "ball": cs.Ball([0.3, -0.2], 1.1),
         "halfspace": cs.HalfSpace([1.0, 2.0], 0.5),
         "box3": cs.Box([0.2, -0.1, 0.0], [0.9, 0.4, 0.3], (3,))}[name]
    for _ in range(5):
        x = rng.uniform(-3, 3, C.shape)
        assert C.distance(x) ** 2 == pytest.approx(_brute_distance_sq(C, x), abs=1e-6)


def test_box_clamp():
    B = cs.Box(0.0, 255.0, (3,))
    np.testing.assert_array_equal(B.project([-3.0, 10.0, 300.0]), [0.0, 10.0, 255.0])
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(B.project(x), x)


def test_box_distance_coordinatewise():
    B = cs.Box(0.0, 1.0, (4,))
    x = np.array([-2.0, 0.5, 3.0, 1.0])
    per_coord = [min(abs(v - t) for t in np.linspace(0, 1, 100001)) for v in x]
    assert B.distance(x) == pytest.approx(np.linalg.norm(per_coord), abs=1e-5)


def test_box_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        cs.Box(1.0, 0.0)


def test_hyperplane_examples():
    Hp = cs.Hyperplane(np.ones(4), 4.0)
    np.testing.assert_allclose(Hp.project(np.zeros(4)), np.ones(4))
    x = np.array([1.0, 2.0, 0.0, 1.0])
    np.testing.assert_allclose(Hp.project(x), x)
    rng = np.random.default_rng(4)
    a = rng.standard_normal(5)
    Hp = cs.Hyperplane(a, 1.7)
    for _ in range(10):
        assert a @ Hp.project(rng.standard_normal(5)) == pytest.approx(1.7, abs=1e-10)


def test_hyperplane_zero_normal():
    with pytest.raises(ValueError):
        cs.Hyperplane(np.zeros(3), 1.0)


def test_ball_examples():
    B = cs.Ball(np.zeros(2), 1.0)
    np.testing.assert_allclose(B.project([3.0, 4.0]), [0.6, 0.8])
    np.testing.assert_array_equal(B.project([0.1, 0.2]), [0.1, 0.2])
    rng = np.random.default_rng(5)
    for _ in range(20):
        assert np.linalg.norm(B.project(10 * rng.standard_normal(2))) <= 1.0 + 1e-12


def test_ball_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        cs.Ball(np.zeros(2), 0.0)


def test_dft_data_all_and_none():
    rng = np.random.default_rng(6)
    sig = rng.standard_normal((4, 6))
    x = rng.standard_normal((4, 6))
    everything = np.ones((4, 6), dtype=bool)
    C = cs.DFTDataSet.from_signal(sig, everything)
    np.testing.assert_allclose(C.project(x), sig, atol=1e-10)
    empty = cs.DFTDataSet.from_signal(sig, np.zeros((4, 6), dtype=bool))
    np.testing.assert_allclose(empty.project(x), x, atol=1e-12)


def test_dft_data_parseval_distance():
    rng = np.random.default_rng(7)
    sig, x = rng.standard_normal((2, 6, 6))
    C = cs.DFTDataSet.from_signal(sig, cs.low_frequency_indices((6, 6), 3))
    p = C.project(x)
    gap = np.sum(np.abs(dft(x)[C.mask] - C.target[C.mask]) ** 2)
    assert np.sum((x - p) ** 2) == pytest.approx(gap, rel=1e-10)
    np.testing.assert_allclose(C.project(p), p, atol=1e-10)


def test_dft_data_symmetrizes_half_plane():
    C = cs.DFTDataSet((4, 4), [[0, 1]], [1.0 + 2.0j])
    assert C.mask[0, 1] and C.mask[0, 3]
    assert C.target[0, 3] == pytest.approx(1.0 - 2.0j)


def test_dft_data_rejects_inconsistent_values():
    vals = np.zeros((4, 4), dtype=complex)
    vals[0, 1] = 1.0
    vals[0, 3] = 5.0
    mask = np.zeros((4, 4), dtype=bool)
    mask[0, 1] = mask[0, 3] = True
    with pytest.raises(ValueError):
        cs.DFTDataSet((4, 4), mask, vals)


def test_phase_fixed_point():
    rng = np.random.default_rng(8)
    sig = rng.standard_normal(8)
    C = cs.PhaseSet.from_signal(sig)
    np.testing.assert_allclose(C.project(sig), sig, atol=1e-10)
    np.testing.assert_allclose(C.project(3.0 * sig), 3.0 * sig, atol=1e-10)


def test_phase_antialigned_goes_to_zero():
    sig = np.random.default_rng(9).standard_normal(8)
    C = cs.PhaseSet.from_signal(sig)
    np.testing.assert_allclose(C.project(-sig), 0.0, atol=1e-10)


def test_phase_matches_ray_bruteforce():
    rng = np.random.default_rng(10)
    C = cs.PhaseSet.from_signal(rng.standard_normal(8))
    x = rng.standard_normal(8)
    xh = dft(x)
    out = np.zeros(8, dtype=complex)
    for k in range(8):
        u = np.exp(1j * C.theta[k])
        # nearest point on the ray {rho u : rho >= 0}, rho found by 1-D search
        rho = prox_bruteforce_1d(lambda r: 0.0 if r >= 0 else np.inf, 1.0,
                                 float((xh[k] * np.conj(u)).real))
        out[k] = max(rho, 0.0) * u
    np.testing.assert_allclose(C.project(x), idft(out).real, atol=1e-8)


def test_phase_rejects_non_antisymmetric():
    theta = np.zeros(8)
    theta[1] = 0.3
    with pytest.raises(ValueError):
        cs.PhaseSet(theta)


def test_mask_complement():
    mask = np.array([True, False, False, True])
    V = cs.SubspaceMask(mask)
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(V.project(x) + V.complement().project(x), x)
    np.testing.assert_array_equal(cs.SubspaceMask(np.ones(4, bool)).project(x), x)
    np.testing.assert_array_equal(cs.SubspaceMask(np.zeros(4, bool)).project(x), 0.0)


def test_interval_helper():
    C = cs.Interval(2.0, 3.0)
    assert C.project(np.array([5.0]))[0] == 3.0
    assert C.distance(np.array([0.5])) == pytest.approx(1.5)
