import math

import numpy as np
import pytest
from scipy import stats

from cubeball.lyapunov import (EnsembleId, lyapunov_exact, lyapunov_exact_pieces, lyapunov_mc,
                               sample_matrices, sample_matrix)
from cubeball.quad import RngState


def test_ensemble_parse():
    assert EnsembleId.parse("u2b") is EnsembleId.U2B
    assert EnsembleId.parse("U3S").dim == 3
    with pytest.raises(ValueError):
        EnsembleId.parse("u4x")


def test_shapes():
    assert sample_matrix("u2b", RngState(1)).shape == (2, 2)
    assert sample_matrix("u3s", RngState(1)).shape == (3, 3)


def test_u3s_rows_are_unit():
    x = sample_matrices(EnsembleId.U3S, RngState(2), 10_000)
    assert np.allclose(np.linalg.norm(x, axis=2), 1.0, atol=1e-12)


def test_u2b_rows_inside_unit_disk():
    x = sample_matrices(EnsembleId.U2B, RngState(3), 10_000)
    assert np.all(np.linalg.norm(x, axis=2) <= 1.0 + 1e-15)


@pytest.mark.parametrize("e", ["u2b", "u3s"])
def test_single_entry_uniform(e):
    x = sample_matrices(e, RngState(4), 10**6)[:, 0, 1]
    counts, _ = np.histogram(x, bins=20, range=(-1, 1))
    assert stats.chisquare(counts).pvalue > 0.001


@pytest.mark.parametrize("e", ["u2b", "u3s"])
def test_right_rotation_invariance(e):
    d = EnsembleId.parse(e).dim
    q, _ = np.linalg.qr(np.random.default_rng(77).standard_normal((d, d)))
    x = sample_matrices(e, RngState(5, 0), 10**5)
    y = sample_matrices(e, RngState(5, 1), 10**5) @ q
    a = np.sum(x[:, :, 0] ** 2, axis=1)
    b = np.sum(y[:, :, 0] ** 2, axis=1)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_exact_values():
    assert lyapunov_exact("u2b").two_mu1 == pytest.approx(-0.736056, abs=1e-5)
    assert lyapunov_exact("u3s").two_mu1 == pytest.approx(-0.187705, abs=1e-5)
    r = lyapunov_exact(EnsembleId.U2B)
    assert r.mu1 == 0.5 * r.two_mu1
    assert r.method == "exact"


def test_exact_u2b_closed_form_oracle():
    # 2 mu_1 = (pi/4) int_0^1 log s ds + int_1^2 log s (arcsin(1/sqrt s) - pi/4) ds
    import mpmath as mp
    mp.mp.dps = 30
    v = -mp.pi / 4 + mp.quad(lambda s: mp.log(s) * (mp.asin(1 / mp.sqrt(s)) - mp.pi / 4), [1, 2])
    assert lyapunov_exact("u2b").two_mu1 == pytest.approx(float(v), abs=1e-11)


def test_u3s_first_piece():
    pieces = lyapunov_exact_pieces("u3s")
    assert pieces[0] == pytest.approx(-math.pi / 9, abs=1e-11)
    assert -math.pi / 9 == pytest.approx(-0.349066, abs=1e-6)


@pytest.mark.parametrize("e", ["u2b", "u3s"])
def test_pieces_sum_to_total(e):
    assert sum(lyapunov_exact_pieces(e)) == pytest.approx(lyapunov_exact(e).two_mu1, abs=1e-9)


@pytest.mark.parametrize("e,stream", [("u2b", 0), ("u3s", 1)])
def test_mc_agrees_with_exact(e, stream):
    r = lyapunov_mc(e, 10_000, 100, RngState(20171, stream))
    assert abs(r.two_mu1 - lyapunov_exact(e).two_mu1) <= r.err_est
    assert r.params["trials"] == 100


def test_mc_orthogonal_double_has_zero_exponent():
    def rotations(rng, count):
        th = 2 * math.pi * rng.generator.random(count)
        c, s = np.cos(th), np.sin(th)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)

    r = lyapunov_mc(rotations, 500, 20, RngState(1))
    assert abs(r.two_mu1) <= max(r.err_est, 1e-12)
    assert r.params["ensemble"] == "rotations"


def test_mc_deterministic():
    a = lyapunov_mc("u3s", 200, 10, RngState(3))
    b = lyapunov_mc("u3s", 200, 10, RngState(3))
    assert a == b


def test_mc_argument_checks():
    with pytest.raises(ValueError):
        lyapunov_mc("u2b", 0, 10)
    with pytest.raises(ValueError):
        lyapunov_mc("u2b", 10, 1)
