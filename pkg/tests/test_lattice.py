import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cubeball import lattice
from cubeball.lattice import (T_MAX, Basis2C, DegenerateBasisError, GaussianInt, lattice_experiment,
                              lattice_shape, marginal_area, normalization_constant,
                              reduce_lagrange_gauss, round_gaussian, sample_sl2c,
                              shortest_vector_cdf, shortest_vector_density, shortest_vector_pdf,
                              v2_overlap)
from cubeball.quad import RngState, integrate_adaptive
from cubeball.volume import cdf_closed_n2


def norm2(v):
    return abs(v[0]) ** 2 + abs(v[1]) ** 2


def test_round_gaussian_examples():
    assert round_gaussian(0.4 + 0.4j) == GaussianInt(0, 0)
    assert round_gaussian(0.6 - 1.2j) == GaussianInt(1, -1)
    assert round_gaussian(0.5 + 0.5j) == GaussianInt(0, 0)
    assert round_gaussian(1.5 - 2.5j) == GaussianInt(2, -2)
    assert not GaussianInt(0, 0) and GaussianInt(0, 1)


def test_reduce_identity():
    b = Basis2C((1, 0), (0, 1))
    red, tr = reduce_lagrange_gauss(b)
    assert red == b
    assert np.array_equal(tr, np.eye(2))


def test_reduce_hand_trace_single_step():
    red, tr = reduce_lagrange_gauss(Basis2C((1, 0), (0.6 + 0.1j, 1)))
    assert red.b1 == (1, 0)
    assert red.b2[0] == pytest.approx(-0.4 + 0.1j, abs=1e-15) and red.b2[1] == 1
    assert norm2(red.b2) == pytest.approx(1.17)
    assert np.array_equal(tr, np.array([[1, -1], [0, 1]]))


def test_reduce_hand_trace_swaps():
    red, _ = reduce_lagrange_gauss(Basis2C((2, 0), (0.9, 0.5)))
    assert np.allclose(red.b1, (0.2, -1.0), atol=1e-15)
    assert np.allclose(red.b2, (0.9, 0.5), atol=1e-15)
    assert norm2(red.b1) == pytest.approx(1.04) and norm2(red.b2) == pytest.approx(1.06)


def test_degenerate_basis():
    with pytest.raises(DegenerateBasisError):
        reduce_lagrange_gauss(Basis2C((1, 1j), (2, 2j)))
    with pytest.raises(DegenerateBasisError):
        reduce_lagrange_gauss(Basis2C((0, 0), (1, 0)))


def _check_reduction(b):
    red, tr = reduce_lagrange_gauss(b)
    u, v = red.b1, red.b2
    mu = (v[0] * u[0].conjugate() + v[1] * u[1].conjugate()) / norm2(u)
    assert norm2(u) <= norm2(v) + 1e-12
    assert abs(mu.real) <= 0.5 + 1e-12 and abs(mu.imag) <= 0.5 + 1e-12
    # integer transform with unit determinant
    assert np.array_equal(tr, np.round(tr))
    det = complex(np.linalg.det(tr))
    assert min(abs(det - w) for w in (1, -1, 1j, -1j)) < 1e-9
    assert np.max(np.abs(b.matrix() @ tr - red.matrix())) <= 1e-10 * max(1.0, np.abs(b.matrix()).max())
    # inverse transform also has Gaussian-integer entries
    inv = np.linalg.inv(tr)
    assert np.allclose(inv, np.round(inv.real) + 1j * np.round(inv.imag), atol=1e-9)
    # norm monotonicity and idempotence
    assert math.sqrt(norm2(u)) <= min(math.sqrt(norm2(b.b1)), math.sqrt(norm2(b.b2))) + 1e-12
    again, tr2 = reduce_lagrange_gauss(red)
    assert again == red and np.array_equal(tr2, np.eye(2))
    return red


def test_reduction_properties_on_random_bases():
    rng = RngState(99, 1)
    for _ in range(2000):
        _check_reduction(sample_sl2c(rng))


@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8))
@settings(max_examples=200, deadline=None)
def test_reduction_properties_arbitrary_bases(xs):
    m = np.array(xs[0::2]) + 1j * np.array(xs[1::2])
    b = Basis2C.from_matrix(m.reshape(2, 2))
    n1, n2 = norm2(b.b1), norm2(b.b2)
    scale = math.sqrt(n1 * n2)
    if scale == 0 or abs(b.det()) <= 1e-6 * scale or min(n1, n2) < 1e-12 * max(n1, n2):
        return
    _check_reduction(b)


def test_badly_scaled_basis_raises_instead_of_looping():
    # columns differ in length by ~1e24; the remainder cannot be resolved in doubles
    m = np.array([[8.044027100773757 + 8.044027100773757j, 3.506960613306486e-24 + 3.506960613306486e-24j],
                  [-1.2228755461266232, 3.506960613306486e-24j]])
    with pytest.raises(DegenerateBasisError, match="scaled"):
        reduce_lagrange_gauss(Basis2C.from_matrix(m))


def test_sampled_determinant_is_one():
    rng = RngState(12)
    for _ in range(1000):
        assert abs(sample_sl2c(rng).det() - 1) <= 1e-12 * 1e6


def test_shape_of_reduced_basis_in_domain():
    rng = RngState(13)
    for _ in range(2000):
        red, _ = reduce_lagrange_gauss(sample_sl2c(rng))
        sh = lattice_shape(red)
        assert sh.y1 ** 2 + sh.y2 ** 2 >= sh.t ** 2 - sh.t ** -2 - 1e-9
        assert abs(sh.y1) <= sh.t / 2 + 1e-12 and abs(sh.y2) <= sh.t / 2 + 1e-12


def test_density_examples():
    assert shortest_vector_density(0.5) == pytest.approx(math.pi ** 2 / 4, abs=1e-14)
    assert shortest_vector_density(T_MAX + 0.01) == 0.0
    z = normalization_constant()
    assert z > math.pi ** 2 / 2
    assert z == pytest.approx(6.026812039691941, rel=1e-12)


def test_density_continuous_at_one_and_vanishes_at_support_end():
    assert shortest_vector_density(1 - 1e-12) == pytest.approx(shortest_vector_density(1.0), abs=1e-9)
    assert shortest_vector_density(T_MAX - 1e-9) < 1e-6


def test_normalized_pdf_and_cdf():
    f = lambda t: shortest_vector_pdf(t)
    mass = integrate_adaptive(f, 0, T_MAX, [1.0], 1e-12, vectorized=True).value
    assert mass == pytest.approx(1.0, abs=1e-10)
    assert shortest_vector_cdf(0.0) == 0.0 and shortest_vector_cdf(T_MAX) == pytest.approx(1.0)
    assert shortest_vector_cdf(1.0) == pytest.approx(math.pi ** 2 / 2 / normalization_constant(), abs=1e-10)


def test_v2_overlap_examples(mc):
    assert v2_overlap(1.5, 1.0) == pytest.approx(4.0, abs=1e-15)
    assert v2_overlap(0.7, 1.0) == pytest.approx(math.pi * 0.49, abs=1e-14)
    assert v2_overlap(1.2, 1.0) == pytest.approx(4 * cdf_closed_n2(1.44).value, abs=1e-15)
    p, se = mc(lambda rng, m: rng.uniform(-1, 1, (m, 2)),
               lambda x: np.einsum("ij,ij->i", x, x) <= 1.44, 10**7, 201)
    assert abs(v2_overlap(1.2, 1.0) - 4 * p) <= 3 * 4 * se


def test_v2_overlap_validation():
    with pytest.raises(ValueError):
        v2_overlap(1.0, 0.0)


@pytest.mark.parametrize("t", [0.8, 1.01, 1.03, 1.1, 1.18])
def test_marginalization(t):
    assert 2 * math.pi ** 2 * t * marginal_area(t) == pytest.approx(shortest_vector_density(t), abs=1e-8)


def test_lengths_bounded_and_moment_matches():
    r = lattice_experiment(20_000, 30, RngState(5))
    lengths = r["lengths"]
    assert r["max_length"] <= T_MAX + 1e-9
    z = normalization_constant()
    mean = integrate_adaptive(lambda t: t * np.vectorize(shortest_vector_density)(t),
                              0, T_MAX, [1.0], 1e-12, vectorized=True).value / z
    assert abs(lengths.mean() - mean) <= 3 * lengths.std(ddof=1) / math.sqrt(lengths.size)
    assert r["centers"].shape == r["empirical"].shape == r["analytic"].shape == (30,)
    width = T_MAX / 30
    assert np.sum(r["empirical"]) * width == pytest.approx(1.0)
    assert np.sum(r["analytic"]) * width == pytest.approx(1.0)


def test_two_streams_indistinguishable():
    a = lattice_experiment(5000, 10, RngState(17, 0))["lengths"]
    b = lattice_experiment(5000, 10, RngState(17, 1))["lengths"]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_ks_against_density():
    r = lattice_experiment(20_000, 20, RngState(8))
    assert r["ks"] < r["ks_critical"]
    assert r["ks_critical"] == pytest.approx(1.628 / math.sqrt(20_000))


def test_experiment_validation():
    with pytest.raises(ValueError):
        lattice_experiment(0, 10, RngState(1))


def test_cdf_table_against_direct_quadrature():
    f = np.vectorize(shortest_vector_density)
    z = normalization_constant()
    for t in (0.3, 0.77, 1.05, 1.15):
        direct = integrate_adaptive(f, 0, t, [1.0] if t > 1 else [], 1e-13, vectorized=True).value / z
        assert shortest_vector_cdf(t) == pytest.approx(direct, abs=1e-6)
