"""Cross-method consistency matrix and invariant checks behind ``cubeball selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import lattice, lyapunov, specfun, volume
from .quad import ContourParams, RngState, integrate_adaptive

__all__ = ["Check", "run_selftest", "laguerre_report", "laplace_identity_residual",
           "pdf_moments", "CONSISTENCY_POINTS", "ASYMMETRIC_BOX"]

CONSISTENCY_POINTS = {2: (0.25, 0.75, 1.25, 1.75), 3: (0.25, 0.75, 1.25, 1.75, 2.5)}
ASYMMETRIC_BOX = volume.BoxSpec((0.1, -0.5, 0.0), (0.9, 0.3, 0.7))
LYAPUNOV_REFERENCE = {"U2B": -0.736056, "U3S": -0.187705}


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    status: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        if not self.status:
            self.status = "PASS" if self.passed else "FAIL"


def _timed(name: str, fn: Callable[[], tuple[bool, dict] | tuple[bool, dict, str]]) -> Check:
    t0 = time.perf_counter()
    try:
        out = fn()
    except Exception as exc:  # a crashing check is a failed check
        return Check(name, False, {"error": f"{type(exc).__name__}: {exc}"},
                     seconds=time.perf_counter() - t0)
    status = out[2] if len(out) > 2 else ""
    return Check(name, out[0], out[1], status, time.perf_counter() - t0)


def laplace_identity_residual(n: int, p: float) -> float:
    """``|int_0^inf F_n(t) e^{-pt} dt - closed transform|`` by direct quadrature."""
    f = np.vectorize(lambda t: volume.cdf(n, t).value * math.exp(-p * t), otypes=[float])
    body = integrate_adaptive(f, 0.0, float(n), list(range(1, n)), 1e-14,
                              vectorized=True, singular="both").value
    tail = math.exp(-n * p) / p
    return abs(body + tail - volume.laplace_transform_closed(n, p))


def pdf_moments(n: int) -> tuple[float, float, float]:
    """Total mass, mean and variance of ``pdf_closed(n, .)`` by quadrature."""
    out = []
    for k in range(3):
        f = np.vectorize(lambda s, k=k: s ** k * volume.pdf_closed(n, s), otypes=[float])
        out.append(integrate_adaptive(f, 0.0, float(n), list(range(1, n)), 1e-14,
                                      vectorized=True, singular="both").value)
    mass, m1, m2 = out
    return mass, m1, m2 - m1 * m1


def laguerre_report() -> dict:
    """Consistency of the experimental Laguerre series against the closed forms."""
    rows = []
    for n, s in ((2, 1.5), (3, 2.5)):
        est = volume.cdf_laguerre(n, s)
        rows.append({"n": n, "s": s, "value": est.params["raw"],
                     "reference": est.params["reference"],
                     "difference": est.params["difference"],
                     "consistent": est.params["consistent"]})
    confirmed = all(r["consistent"] for r in rows)
    return {"status": "PASS" if confirmed else "T1-unconfirmed",
            "tolerance": volume.LAGUERRE_TOLERANCE, "points": rows}


def _closed_fixtures():
    d = {
        "F2(1)-pi/4": volume.cdf_closed_n2(1.0).value - math.pi / 4,
        "F3(1)-pi/6": volume.cdf_closed_n3(1.0).value - math.pi / 6,
        "F2(2)": volume.cdf_closed_n2(2.0).value,
        "F3(3)": volume.cdf_closed_n3(3.0).value,
        "V(1,3)-4pi/3": volume.vol_sym_cube_ball(1.0, 3) - 4 * math.pi / 3,
        "V(0.5,3)-1": volume.vol_sym_cube_ball(0.5, 3) - 1.0,
    }
    ok = (abs(d["F2(1)-pi/4"]) <= 1e-14 and abs(d["F3(1)-pi/6"]) <= 1e-14
          and d["F2(2)"] == 1.0 and d["F3(3)"] == 1.0
          and abs(d["V(1,3)-4pi/3"]) <= 1e-14 and abs(d["V(0.5,3)-1"]) <= 1e-14)
    return ok, d


def _consistency_matrix():
    rows = []
    ok = True
    for n, points in CONSISTENCY_POINTS.items():
        for s in points:
            ref = volume.cdf(n, s, "closed").value
            for method, kw in (("fourier", {"tol": 1e-5}), ("laplace", {}),
                               ("recursive", {"tol": 1e-7})):
                est = volume.cdf(n, s, method, **kw)
                diff = abs(est.value - ref)
                good = diff <= 2.0 * est.err_est
                ok &= good
                rows.append({"n": n, "s": s, "method": method, "diff": diff,
                             "err_est": est.err_est, "ok": good})
    for n in (5, 10):
        for s in (n / 3.0, 0.5 * n, n - 0.5):
            a = volume.cdf(n, s, "fourier", tol=1e-6).value
            b = volume.cdf(n, s, "laplace").value
            good = abs(a - b) <= 1e-5
            ok &= good
            rows.append({"n": n, "s": s, "method": "fourier-vs-laplace", "diff": abs(a - b), "ok": good})
    return ok, {"rows": rows}


def _laplace_identity():
    res = {f"n={n},p={p}": laplace_identity_residual(n, p) for n in (2, 3) for p in (0.5, 1.0, 2.0)}
    return all(v <= 1e-8 for v in res.values()), res


def _moments():
    out = {}
    ok = True
    for n in (2, 3):
        mass, mean, var = pdf_moments(n)
        out[f"n={n}"] = {"mass": mass, "mean": mean, "var": var}
        ok &= abs(mass - 1) <= 1e-9 and abs(mean - n / 3) <= 1e-8 and abs(var - 4 * n / 45) <= 1e-8
    clt = volume.clt_approx(30, 10.0).value
    lap = volume.cdf(30, 10.0, "laplace").value
    out["clt_vs_laplace_n30"] = abs(clt - lap)
    ok &= abs(clt - lap) <= 0.02
    return ok, out


def _lyapunov_exact():
    out = {}
    ok = True
    for e, ref in LYAPUNOV_REFERENCE.items():
        r = lyapunov.lyapunov_exact(e)
        out[e] = r.two_mu1
        ok &= abs(r.two_mu1 - ref) <= 2e-5
    return ok, out


def _lyapunov_mc(m: int, trials: int):
    out = {}
    ok = True
    for i, e in enumerate(LYAPUNOV_REFERENCE):
        exact = lyapunov.lyapunov_exact(e).two_mu1
        r = lyapunov.lyapunov_mc(e, m, trials, RngState(20171, i))
        out[e] = {"mc": r.two_mu1, "err_est": r.err_est, "exact": exact}
        ok &= abs(r.two_mu1 - exact) <= r.err_est
    return ok, out


def _mc_gate(samples: int, box_samples: int):
    out = {}
    ok = True
    for i, (n, s) in enumerate(((2, 1.0), (3, 2.0))):
        est = volume.cdf_mc(n, s, samples, RngState(4242, i))
        ref = volume.cdf(n, s).value
        out[f"F{n}({s})"] = {"mc": est.value, "err_est": est.err_est, "closed": ref}
        ok &= abs(est.value - ref) <= est.err_est
    vol = volume.box_ball_volume(ASYMMETRIC_BOX)
    mc = volume.box_ball_volume_mc(ASYMMETRIC_BOX, box_samples, RngState(4242, 7))
    out["box"] = {"laplace": vol, "mc": mc.value, "err_est": mc.err_est}
    ok &= abs(vol - mc.value) <= mc.err_est
    return ok, out


def _reduction(count: int):
    rng = RngState(99, 1)
    worst = 0.0
    ok = True
    for _ in range(count):
        b = lattice.sample_sl2c(rng)
        red, tr = lattice.reduce_lagrange_gauss(b)
        u, v = np.array(red.b1), np.array(red.b2)
        mu = np.vdot(u, v) / np.vdot(u, u).real
        det = complex(np.linalg.det(tr))
        units = min(abs(det - w) for w in (1, -1, 1j, -1j))
        rebuilt = np.max(np.abs(b.matrix() @ tr - red.matrix()))
        again, tr2 = lattice.reduce_lagrange_gauss(red)
        ok &= (np.vdot(u, u).real <= np.vdot(v, v).real + 1e-12
               and abs(mu.real) <= 0.5 + 1e-12 and abs(mu.imag) <= 0.5 + 1e-12
               and units < 1e-9 and np.array_equal(tr2, np.eye(2)) and again == red)
        worst = max(worst, rebuilt)
    ok &= worst <= 1e-10
    return ok, {"bases": count, "max_rebuild_error": worst}


def _lattice(samples: int):
    r = lattice.lattice_experiment(samples, 40, RngState(31415))
    marg = {t: abs(2 * math.pi ** 2 * t * lattice.marginal_area(t) - lattice.shortest_vector_density(t))
            for t in (0.8, 1.01, 1.03)}
    ok = (r["ks"] < r["ks_critical"] and r["max_length"] <= lattice.T_MAX + 1e-9
          and all(v <= 1e-8 for v in marg.values()))
    return ok, {"samples": samples, "ks": r["ks"], "ks_critical": r["ks_critical"],
                "max_length": r["max_length"], "marginalization": {str(k): v for k, v in marg.items()}}


def _laguerre():
    rep = laguerre_report()
    return True, rep, rep["status"]


def run_selftest(level: str = "quick") -> dict:
    """Run the check suite; ``full`` uses acceptance-size Monte Carlo runs."""
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    full = level == "full"
    checks = [
        _timed("closed_form_fixtures", _closed_fixtures),
        _timed("consistency_matrix", _consistency_matrix),
        _timed("laplace_transform_identity", _laplace_identity),
        _timed("moments_and_clt", _moments),
        _timed("lyapunov_exact", _lyapunov_exact),
        _timed("lyapunov_mc", lambda: _lyapunov_mc(10_000 if full else 1_000, 100 if full else 50)),
        _timed("monte_carlo_gate", lambda: _mc_gate(10**6 if full else 10**5, 10**7 if full else 10**6)),
        _timed("reduction_algebra", lambda: _reduction(10_000 if full else 1_000)),
        _timed("lattice_experiment", lambda: _lattice(100_000 if full else 10_000)),
        _timed("laguerre_series", _laguerre),
    ]
    return {
        "level": level,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
        "laguerre_status": next(c.status for c in checks if c.name == "laguerre_series"),
    }
