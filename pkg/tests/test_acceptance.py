"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""

import json
import math
import time

import numpy as np

from cubeball import lattice, lyapunov, volume
from cubeball.cli import run
from cubeball.quad import RngState
from cubeball.selftest import (ASYMMETRIC_BOX, CONSISTENCY_POINTS, laguerre_report,
                               laplace_identity_residual, pdf_moments)

SEED = 20171


def _cli_json(capsys, *argv):
    code = run(list(argv) + ["--format", "json"])
    out, _ = capsys.readouterr()
    return code, json.loads(out)


def test_c01_lyapunov_exact(capsys, criterion):
    rows = []
    ok = True
    for ens, ref in (("u2b", -0.736056), ("u3s", -0.187705)):
        t0 = time.perf_counter()
        code, rec = _cli_json(capsys, "lyapunov", "--ensemble", ens, "--method", "exact")
        dt = time.perf_counter() - t0
        v = rec["results"]["two_mu1"]
        ok &= code == 0 and abs(v - ref) <= 2e-5 and dt < 5
        rows.append(f"{ens}={v:.8f} ({dt:.2f}s)")
    criterion(1, "Lyapunov exact 2mu1 within 2e-5, < 5 s each", ok, ", ".join(rows))


def test_c02_lyapunov_mc(criterion):
    t0 = time.perf_counter()
    rows = []
    ok = True
    for stream, ens in enumerate(("u2b", "u3s")):
        exact = lyapunov.lyapunov_exact(ens).two_mu1
        r = lyapunov.lyapunov_mc(ens, 10_000, 100, RngState(SEED, stream))
        ok &= abs(r.two_mu1 - exact) <= r.err_est
        rows.append(f"{ens}: |{r.two_mu1:.5f}-{exact:.5f}|={abs(r.two_mu1 - exact):.2e} <= {r.err_est:.2e}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    criterion(2, "Lyapunov MC (m=1e4, 100 trials) within 3 sigma of exact, < 60 s", ok,
              "; ".join(rows) + f"; {dt:.1f}s")


def test_c03_closed_fixtures(criterion):
    d = [abs(volume.cdf_closed_n2(1.0).value - math.pi / 4),
         abs(volume.cdf_closed_n3(1.0).value - math.pi / 6),
         abs(volume.vol_sym_cube_ball(1.0, 3) - 4 * math.pi / 3),
         abs(volume.vol_sym_cube_ball(0.5, 3) - 1.0)]
    exact_one = volume.cdf_closed_n2(2.0).value == 1.0 and volume.cdf_closed_n3(3.0).value == 1.0
    ok = max(d) <= 1e-14 and exact_one
    criterion(3, "closed-form fixtures to 1e-14, F2(2)=F3(3)=1 exactly", ok, f"max dev {max(d):.1e}")


def test_c04_consistency_matrix(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for n, points in CONSISTENCY_POINTS.items():
        for s in points:
            ref = volume.cdf(n, s, "closed").value
            for method, kw in (("fourier", {"tol": 1e-5}), ("laplace", {}), ("recursive", {"tol": 1e-7})):
                est = volume.cdf(n, s, method, **kw)
                diff = abs(est.value - ref)
                ok &= diff <= 2 * est.err_est
                worst = max(worst, diff / (2 * est.err_est))
    hi = 0.0
    for n in (5, 10):
        for s in (n / 3, 0.5 * n, n - 0.5):
            d = abs(volume.cdf(n, s, "fourier", tol=1e-6).value - volume.cdf(n, s, "laplace").value)
            hi = max(hi, d)
    ok &= hi <= 1e-5
    dt = time.perf_counter() - t0
    ok &= dt < 30
    criterion(4, "cross-method matrix within 2x err_est; n=5,10 fourier/laplace within 1e-5, < 30 s", ok,
              f"max diff/(2 err) {worst:.2f}, n=5,10 max diff {hi:.1e}, {dt:.1f}s")


def test_c05_monte_carlo_gate(criterion):
    t0 = time.perf_counter()
    ok = True
    parts = []
    for stream, (n, s) in enumerate(((2, 1.0), (3, 2.0))):
        est = volume.cdf_mc(n, s, 10**6, RngState(SEED, stream))
        ref = volume.cdf(n, s, "closed").value
        ok &= abs(est.value - ref) <= est.err_est
        parts.append(f"F{n}({s:g}) |d|={abs(est.value - ref):.1e}<= {est.err_est:.1e}")
    vol = volume.box_ball_volume(ASYMMETRIC_BOX)
    mc = volume.box_ball_volume_mc(ASYMMETRIC_BOX, 10**7, RngState(SEED, 7))
    ok &= abs(vol - mc.value) <= mc.err_est
    parts.append(f"box {vol:.6f} vs {mc.value:.6f} +- {mc.err_est:.1e}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    criterion(5, "MC oracle gate (1e6 cdf samples, 1e7 box samples), < 60 s", ok,
              "; ".join(parts) + f"; {dt:.1f}s")


def test_c06_laplace_identity(criterion):
    res = [laplace_identity_residual(n, p) for n in (2, 3) for p in (0.5, 1.0, 2.0)]
    criterion(6, "Laplace-transform identity to 1e-8 at p in {0.5,1,2}", max(res) <= 1e-8,
              f"max residual {max(res):.1e}")


def test_c07_moments(criterion):
    ok = True
    worst = [0.0, 0.0, 0.0]
    for n in (2, 3):
        mass, mean, var = pdf_moments(n)
        dev = (abs(mass - 1), abs(mean - n / 3), abs(var - 4 * n / 45))
        ok &= dev[0] <= 1e-9 and dev[1] <= 1e-8 and dev[2] <= 1e-8
        worst = [max(a, b) for a, b in zip(worst, dev)]
    clt = abs(volume.clt_approx(30, 10.0).value - volume.cdf(30, 10.0, "laplace").value)
    ok &= clt <= 0.02
    criterion(7, "pdf mass/mean/variance; CLT vs laplace at n=30, s=10 <= 0.02", ok,
              f"mass {worst[0]:.1e}, mean {worst[1]:.1e}, var {worst[2]:.1e}, clt {clt:.4f}")


def test_c08_lattice(criterion):
    t0 = time.perf_counter()
    r = lattice.lattice_experiment(10**5, 40, RngState(SEED))
    marg = max(abs(2 * math.pi ** 2 * t * lattice.marginal_area(t) - lattice.shortest_vector_density(t))
               for t in (0.8, 1.01, 1.03))
    dt = time.perf_counter() - t0
    ok = (r["ks"] < r["ks_critical"] and r["max_length"] <= lattice.T_MAX + 1e-9
          and marg <= 1e-8 and dt < 120)
    criterion(8, "lattice KS below alpha=0.01 critical value, support, marginalization, < 120 s", ok,
              f"KS {r['ks']:.5f} < {r['ks_critical']:.5f}, max |b1| {r['max_length']:.6f}, "
              f"marg {marg:.1e}, {dt:.1f}s")


def test_c09_reduction_algebra(criterion):
    rng = RngState(SEED, 9)
    ok = True
    worst = 0.0
    for _ in range(10**4):
        b = lattice.sample_sl2c(rng)
        red, tr = lattice.reduce_lagrange_gauss(b)
        u, v = np.array(red.b1), np.array(red.b2)
        mu = np.vdot(u, v) / np.vdot(u, u).real
        det = complex(np.linalg.det(tr))
        unit = min(abs(det - w) for w in (1, -1, 1j, -1j)) < 1e-9
        integral = np.array_equal(tr, np.round(tr.real) + 1j * np.round(tr.imag))
        again, tr2 = lattice.reduce_lagrange_gauss(red)
        ok &= (np.vdot(u, u).real <= np.vdot(v, v).real and abs(mu.real) <= 0.5 + 1e-12
               and abs(mu.imag) <= 0.5 + 1e-12 and unit and integral
               and again == red and np.array_equal(tr2, np.eye(2)))
        worst = max(worst, float(np.max(np.abs(b.matrix() @ tr - red.matrix()))))
    ok &= worst <= 1e-10
    criterion(9, "reduction conditions, unimodular transforms, exact idempotence on 1e4 bases", ok,
              f"max rebuild error {worst:.1e}")


def test_c10_laguerre_gate(capsys, criterion):
    rep = laguerre_report()
    code = run(["selftest", "--level", "quick", "--format", "json"])
    out, _ = capsys.readouterr()
    rec = json.loads(out)["results"]
    check = next(c for c in rec["checks"] if c["name"] == "laguerre_series")
    pts = {(p["n"], p["s"]) for p in check["detail"]["points"]}
    ok = (code == 0 and rec["passed"] and pts == {(2, 1.5), (3, 2.5)}
          and check["status"] == rep["status"] and rec["laguerre_status"] in ("PASS", "T1-unconfirmed")
          and all("difference" in p for p in check["detail"]["points"]))
    diffs = ", ".join(f"n={p['n']} diff {p['difference']:+.2e}" for p in rep["points"])
    criterion(10, "Laguerre series consistency report emitted by selftest", ok,
              f"status {rec['laguerre_status']}: {diffs}")
