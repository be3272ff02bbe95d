"""Distribution of ``S_N = U_1^2 + ... + U_N^2`` for iid ``U_i ~ Uniform[0, 1]``.

``F_N(s) = Pr(S_N <= s)`` is the volume of ``[0,1]^N`` inside the ball of
radius ``sqrt(s)``.  Scaling gives the centred cube/ball volume
``Vol([-a,a]^N & B_N(1)) = (2a)^N F_N(1/a^2)``.

Methods
-------
closed      exact piecewise formulas, N = 1, 2, 3
fourier     Fourier series over the period ``[0, N]`` with Fresnel coefficients
laplace     inverse Laplace transform of ``2^-N pi^(N/2) erf(sqrt s)^N / s^(N/2+1)``
laguerre    Laguerre-polynomial series (experimental, see :func:`cdf_laguerre`)
recursive   ``F_N(s) = int_0^1 F_{N-1}(s - x^2) dx`` by nested quadrature
mc          Monte Carlo
clt         normal approximation with mean N/3 and variance 4N/45

The N = 2 middle branch used here is ``sqrt(s-1) + s (pi - 4 arccos(1/sqrt s)) / 4``;
the division by four is what makes ``F_2(1) = pi/4`` and ``F_2(2) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
from scipy.special import comb

from . import specfun
from .quad import (ContourParams, ConvergenceError, QuadResult, RngState,
                   integrate_adaptive, invert_laplace_est, invert_laplace_shifted,
                   sum_series)

__all__ = [
    "METHODS",
    "CdfEstimate",
    "BoxSpec",
    "SeriesParams",
    "cdf",
    "cdf_closed_n1",
    "cdf_closed_n2",
    "cdf_closed_n3",
    "cdf_fourier",
    "cdf_laplace",
    "cdf_laguerre",
    "cdf_recursive",
    "cdf_mc",
    "clt_approx",
    "pdf_closed",
    "h_overlap",
    "vol_sym_cube_ball",
    "laplace_transform_closed",
    "box_ball_fraction",
    "box_ball_fraction_est",
    "box_ball_volume",
    "box_ball_volume_est",
    "box_ball_volume_mc",
]

METHODS = ("closed", "fourier", "laplace", "laguerre", "recursive", "mc", "clt")

_EPS = np.finfo(float).eps
KINK_SHIFT = 1e-12
LAGUERRE_TOLERANCE = 1e-3


@dataclass(frozen=True)
class CdfEstimate:
    n: int
    s: float
    value: float
    err_est: float
    method: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SeriesParams:
    max_terms: int = 10**7
    tol: float = 1e-5

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box ``prod_l [lo_l, hi_l]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be non-empty and of equal length")
        for a, b in zip(lo, hi):
            if not a < b:
                raise ValueError(f"box side [{a}, {b}] is empty")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def measure(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    @classmethod
    def parse(cls, text: str) -> "BoxSpec":
        """Parse ``"a1,b1;a2,b2;..."``."""
        lo, hi = [], []
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            a, b = part.split(",")
            lo.append(float(a))
            hi.append(float(b))
        return cls(tuple(lo), tuple(hi))


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _finish(n: int, s: float, raw: float, err: float, method: str, params=None) -> CdfEstimate:
    """Clamp a raw value into [0, 1] if it is within ``err`` of the range."""
    params = dict(params or {})
    lo_slack = max(err, 8 * _EPS)
    if raw < 0.0:
        if raw < -lo_slack:
            raise ArithmeticError(f"{method}: F_{n}({s}) = {raw} is below 0 by more than err_est={err:g}")
        raw = 0.0
    elif raw > 1.0:
        if raw > 1.0 + lo_slack:
            raise ArithmeticError(f"{method}: F_{n}({s}) = {raw} exceeds 1 by more than err_est={err:g}")
        raw = 1.0
    return CdfEstimate(n, float(s), float(raw), float(err), method, params)


def _trivial(n: int, s: float, method: str, params=None):
    if s <= 0:
        return CdfEstimate(n, float(s), 0.0, 0.0, method, dict(params or {}))
    if s >= n:
        return CdfEstimate(n, float(s), 1.0, 0.0, method, dict(params or {}))
    return None


# --------------------------------------------------------------------------
# closed forms

def _f1(s: float) -> float:
    if s <= 0:
        return 0.0
    if s >= 1:
        return 1.0
    return math.sqrt(s)


def _f2(s: float) -> float:
    if s <= 0:
        return 0.0
    if s <= 1:
        return 0.25 * math.pi * s
    if s >= 2:
        return 1.0
    return math.sqrt(s - 1.0) + s * (math.pi - 4.0 * math.acos(1.0 / math.sqrt(s))) / 4.0


def h_overlap(a: float) -> float:
    """Volume of ``[-a,a]^3`` inside the unit ball for ``1/sqrt3 <= a <= 1/sqrt2``."""
    a2 = a * a
    return (8.0 * a2 * math.sqrt(max(1.0 - 2.0 * a2, 0.0))
            + 2.0 * (3.0 * a - a2 * a) * (4.0 * math.asin(min(a / math.sqrt(1.0 - a2), 1.0)) - math.pi)
            - 8.0 * math.asin(min(a2 / (1.0 - a2), 1.0))
            + 4.0 * math.pi / 3.0)


def _f3(s: float) -> float:
    if s <= 0:
        return 0.0
    if s <= 1:
        return math.pi / 6.0 * s ** 1.5
    if s <= 2:
        return math.pi / 8.0 * (6.0 * s - 2.0 - 8.0 / 3.0 * s ** 1.5)
    if s >= 3:
        return 1.0
    return s ** 1.5 / 8.0 * h_overlap(1.0 / math.sqrt(s))


_CLOSED = {1: _f1, 2: _f2, 3: _f3}


def cdf_closed_n1(s: float) -> CdfEstimate:
    return CdfEstimate(1, float(s), _f1(s), 0.0 if s <= 0 or s >= 1 else _EPS, "closed")


def cdf_closed_n2(s: float) -> CdfEstimate:
    """Exact ``F_2(s)``."""
    v = _f2(s)
    return CdfEstimate(2, float(s), v, 0.0 if s <= 0 or s >= 2 else 4 * _EPS, "closed")


def cdf_closed_n3(s: float) -> CdfEstimate:
    """Exact ``F_3(s)``."""
    v = _f3(s)
    return CdfEstimate(3, float(s), v, 0.0 if s <= 0 or s >= 3 else 16 * _EPS, "closed")


def vol_sym_cube_ball(a: float, n: int) -> float:
    """``Vol([-a,a]^n & B_n(1))`` for n = 2 or 3."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if n == 2:
        return (2.0 * a) ** 2 * _f2(1.0 / (a * a))
    if n == 3:
        if a < 1.0 / math.sqrt(3.0):
            return 8.0 * a ** 3
        if a < 1.0 / math.sqrt(2.0):
            return h_overlap(a)
        if a <= 1.0:
            return math.pi * (6.0 * a - 2.0 * a ** 3 - 8.0 / 3.0)
        return 4.0 * math.pi / 3.0
    raise ValueError(f"vol_sym_cube_ball supports n in {{2, 3}}, got {n}; use box_ball_volume")


def pdf_closed(n: int, s: float) -> float:
    """Density ``F_n'(s)`` for n = 2 or 3 (right limit at the kinks)."""
    if n == 2:
        if 0 <= s < 1:
            return 0.25 * math.pi
        if 1 <= s < 2:
            return math.asin(1.0 / math.sqrt(s)) - 0.25 * math.pi
        return 0.0
    if n == 3:
        if 0 <= s < 1:
            return 0.25 * math.pi * math.sqrt(s)
        if 1 <= s < 2:
            return 0.25 * math.pi * (3.0 - 2.0 * math.sqrt(s))
        if 2 <= s < 3:
            return _f32(s)
        return 0.0
    raise ValueError(f"pdf_closed supports n in {{2, 3}}, got {n}")


def _f32(s: float) -> float:
    if s == 2.0:
        # arctan sqrt(1/(s(s-2))) -> pi/2 as s -> 2+
        return 3.0 * (math.asin(1.0) - 0.25 * math.pi) + math.sqrt(2.0) * (0.0 - 0.5 * math.pi)
    return (3.0 * (math.asin(1.0 / math.sqrt(s - 1.0)) - 0.25 * math.pi)
            + math.sqrt(s) * (math.atan(math.sqrt((s - 2.0) / s))
                              - math.atan(math.sqrt(1.0 / (s * (s - 2.0))))))


def laplace_transform_closed(n: int, p):
    """``int_0^inf F_n(t) e^{-pt} dt = 2^-n pi^(n/2) erf(sqrt p)^n / p^(n/2+1)``."""
    p = np.asarray(p)
    val = 2.0 ** -n * math.pi ** (n / 2) * specfun.erf_complex(np.sqrt(p + 0j)) ** n / (p + 0j) ** (n / 2 + 1)
    if np.ndim(val) == 0 and np.isrealobj(p):
        return float(np.real(val))
    return val


# --------------------------------------------------------------------------
# Fourier series

def _fourier_tail(n: int):
    # |phi_k| <= sqrt(n) / (2 sqrt k); sum_{k>K} k^(-n/2-1) <= (2/n) K^(-n/2)
    const = (math.sqrt(n) / 2.0) ** n * (2.0 / n) / math.pi
    return lambda K: const * float(K) ** (-n / 2.0)


def cdf_fourier(n: int, s: float, p: SeriesParams | None = None) -> CdfEstimate:
    """Fourier-series evaluation of ``F_n(s)`` on the period ``[0, n]``.

    ``F_n(s) = 1/6 + s/n + (1/pi) Im sum_k phi_k^n exp(2 pi i k s/n) / k`` with
    ``phi_k = int_0^1 exp(-2 pi i k x^2 / n) dx``, written with normalized
    Fresnel integrals.
    """
    n = _check_n(n)
    p = p or SeriesParams()
    params = {"tol": p.tol, "max_terms": p.max_terms}
    triv = _trivial(n, s, "fourier", params)
    if triv is not None:
        return triv

    def term(k):
        x = 2.0 * np.sqrt(k / n)
        c, sn = specfun.fresnel_normalized(x)
        phi = (c - 1j * sn) / x
        return np.imag(phi ** n * np.exp(2j * math.pi * ((k * s / n) % 1.0))) / (math.pi * k)

    try:
        res = sum_series(term, _fourier_tail(n), p.tol, max_terms=p.max_terms, vectorized=True)
    except ConvergenceError as exc:
        raise ConvergenceError(f"cdf_fourier(n={n}, s={s}): {exc}",
                               estimate=1 / 6 + s / n + exc.estimate, err_est=exc.err_est) from None
    raw = 1.0 / 6.0 + s / n + res.value
    err = res.err_est + 4 * _EPS * res.evaluations ** 0.5
    params["terms"] = res.evaluations
    return _finish(n, s, raw, err, "fourier", params)


# --------------------------------------------------------------------------
# Laplace inversion

def _laplace_terms(n: int):
    """Split ``(erf sqrt s)^n / s^(n/2+1)`` into ``sum_j exp(-j s) g_j(s)``.

    Uses ``erf(z) = 1 - exp(-z^2) erfcx(z)``; every ``g_j`` is bounded by an
    algebraic power of ``1/|s|`` on the Talbot contour.
    """
    pref = 2.0 ** -n * math.pi ** (n / 2)
    terms = []
    for j in range(n + 1):
        coef = pref * float(comb(n, j, exact=True)) * (-1.0) ** j

        def g(z, j=j, coef=coef):
            root = np.sqrt(z)
            base = coef / z ** (n / 2 + 1)
            return base if j == 0 else base * specfun.erfcx_complex(root) ** j
        terms.append((float(j), g))
    return terms


def cdf_laplace(n: int, s: float, params: ContourParams | None = None) -> CdfEstimate:
    """``F_n(s)`` by numerical inversion of its Laplace transform.

    On the Talbot contour the transform is split into delayed pieces (see
    :func:`_laplace_terms`); the Bromwich mode inverts the unsplit transform
    ``2^-n pi^(n/2) erf(sqrt z)^n / z^(n/2+1)`` directly.
    """
    n = _check_n(n)
    params = params or ContourParams()
    info = {"contour": params.kind, "nodes": params.nodes}
    triv = _trivial(n, s, "laplace", info)
    if triv is not None:
        return triv
    if params.kind == "talbot":
        res = invert_laplace_shifted(_laplace_terms(n), s, params)
    else:
        def fhat(z):
            return laplace_transform_closed(n, z)
        res = invert_laplace_est(fhat, s, params)
    return _finish(n, s, res.value, res.err_est, "laplace", info)


# --------------------------------------------------------------------------
# Laguerre series (experimental)

def _laguerre_raw(n: int, s: float, kmax: int):
    sigma = 1.0 / math.sqrt(s)
    big = 2 * n + 4
    lam0 = 1.0 / big
    alpha = n / 2.0
    ivals = specfun.i_smoothed_derivatives(sigma, lam0, max(kmax, 0), n)
    lead = ivals[0] / specfun.gamma_pos(alpha + 1.0)
    terms = []
    for k in range(2, kmax + 1):
        log_den = math.lgamma(k + alpha + 1.0) + k * math.log(big)
        terms.append(specfun.laguerre_gen(k, alpha, alpha + 1.0) * ivals[k] * math.exp(-log_den))
    total = lead + math.fsum(terms)
    scale = s ** (n / 2.0) * 2.0 ** -n * math.pi ** (-n / 2.0)
    if not math.isfinite(total):
        raise OverflowError("Laguerre series terms overflowed")
    return scale * total, [scale * t for t in terms]


def cdf_laguerre(n: int, s: float, p: SeriesParams | None = None,
                 reference: float | None = None) -> CdfEstimate:
    """Experimental Laguerre-series value of ``F_n(s)``.

    With ``sigma = s^(-1/2)`` and ``lambda0 = 1/(2n+4)``,

        2^n sigma^n F_n(1/sigma^2) = pi^(-n/2) [ I(0)/Gamma(n/2+1)
            + sum_{k>=2} L_k^{(n/2)}(n/2+1) I(k) / (Gamma(k+n/2+1) (2n+4)^k) ]

    where ``I(k) = (-1)^k d^k/dlambda^k (pi erf(sigma/(2 sqrt lambda)))^n`` at
    ``lambda0`` (:func:`specfun.i_smoothed_derivatives`).  The ``k = 1`` term
    would carry ``L_1^{(a)}(a+1) = 0``.  At most ``DEFAULT_JET_ORDER`` terms
    are used.

    The result is compared against ``reference`` (default: the dispatcher's
    exact/laplace value); ``params["consistent"]`` records whether they agree
    within 1e-3.  No error is raised on disagreement.
    """
    n = _check_n(n)
    p = p or SeriesParams(max_terms=specfun.DEFAULT_JET_ORDER, tol=LAGUERRE_TOLERANCE)
    kmax = min(p.max_terms, specfun.DEFAULT_JET_ORDER)
    params: dict[str, Any] = {"max_terms": kmax, "experimental": True}
    triv = _trivial(n, s, "laguerre", params)
    if triv is not None:
        return triv
    raw, terms = _laguerre_raw(n, s, kmax)
    err = max((abs(t) for t in terms[-4:]), default=0.0)
    if reference is None:
        reference = cdf(n, s).value
    raw = float(raw)
    diff = raw - reference
    params.update(reference=reference, difference=diff,
                  consistent=bool(abs(diff) <= LAGUERRE_TOLERANCE), raw=float(raw))
    value = min(max(raw, 0.0), 1.0)
    return CdfEstimate(n, float(s), value, float(max(err, abs(raw - value))), "laguerre", params)


# --------------------------------------------------------------------------
# nested quadrature

def _rec_value(n: int, s: float, tol: float) -> float:
    if s <= 0:
        return 0.0
    if s >= n:
        return 1.0
    if n == 1:
        return math.sqrt(s)
    return _rec_integral(n, s, tol).value


def _rec_integral(n: int, s: float, tol: float) -> QuadResult:
    top = min(1.0, math.sqrt(s))
    # where s - x^2 crosses an integer the inner cdf has a kink
    cuts = [math.sqrt(s - j) for j in range(1, n) if 0.0 < s - j and math.sqrt(s - j) < top]
    inner_tol = 0.25 * tol
    if n == 2:
        def f(x):
            return np.sqrt(np.clip(s - x * x, 0.0, 1.0))
    else:
        def f(x):
            return np.array([_rec_value(n - 1, s - xi * xi, inner_tol) for xi in x])
    res = integrate_adaptive(f, 0.0, top, cuts, 0.5 * tol, vectorized=True, singular="both")
    return QuadResult(res.value, res.err_est + (inner_tol if n > 2 else 0.0), res.evaluations)


def cdf_recursive(n: int, s: float, tol: float = 1e-8) -> CdfEstimate:
    """``F_n(s)`` from ``F_n(s) = int_0^1 F_{n-1}(s - x^2) dx`` with ``F_1 = sqrt``.

    Cost grows geometrically with ``n``; limited to ``n <= 6``.
    """
    n = _check_n(n)
    if n > 6:
        raise ValueError(f"cdf_recursive supports n <= 6, got {n}")
    params = {"tol": tol}
    triv = _trivial(n, s, "recursive", params)
    if triv is not None:
        return triv
    if n == 1:
        return CdfEstimate(1, float(s), math.sqrt(s), _EPS, "recursive", params)
    res = _rec_integral(n, s, tol)
    return _finish(n, s, res.value, res.err_est, "recursive", params)


# --------------------------------------------------------------------------
# Monte Carlo and CLT

def cdf_mc(n: int, s: float, samples: int, rng: RngState, chunk: int = 1 << 18) -> CdfEstimate:
    """Fraction of ``samples`` uniform points in ``[0,1]^n`` with squared norm ``<= s``.

    ``err_est`` is three binomial standard errors.
    """
    n = _check_n(n)
    if samples < 1:
        raise ValueError("cdf_mc needs samples >= 1")
    params = {"samples": samples, "seed": rng.seed, "stream": rng.stream}
    triv = _trivial(n, s, "mc", params)
    if triv is not None:
        return triv
    hits = 0
    left = samples
    while left:
        m = min(chunk, left)
        u = rng.generator.random((m, n))
        hits += int(np.count_nonzero(np.einsum("ij,ij->i", u, u) <= s))
        left -= m
    p = hits / samples
    return CdfEstimate(n, float(s), p, 3.0 * math.sqrt(p * (1.0 - p) / samples), "mc", params)


# Berry-Esseen constant (Shevtsova 2011) for i.i.d. summands
BERRY_ESSEEN_C = 0.4748


@lru_cache(maxsize=1)
def _third_abs_moment() -> float:
    # E|U^2 - 1/3|^3, kink at 1/sqrt3
    f = lambda x: np.abs(x * x - 1.0 / 3.0) ** 3
    return integrate_adaptive(f, 0.0, 1.0, [1.0 / math.sqrt(3.0)], 1e-15, vectorized=True).value


def clt_approx(n: int, s: float) -> CdfEstimate:
    """Normal approximation ``Phi((s - n/3) / (2 sqrt(n/45)))``.

    ``err_est`` is the Berry-Esseen bound ``C rho / (sigma^3 sqrt n)``, a
    uniform bound on the approximation error.  Outside ``(0, n)`` the exact
    0 or 1 is returned.
    """
    n = _check_n(n)
    params = {"mean": n / 3.0, "sd": 2.0 * math.sqrt(n / 45.0)}
    triv = _trivial(n, s, "clt", params)
    if triv is not None:
        return triv
    z = (s - n / 3.0) / (2.0 * math.sqrt(n / 45.0))
    value = 0.5 * (1.0 + specfun.erf_real(z / math.sqrt(2.0)))
    bound = BERRY_ESSEEN_C * _third_abs_moment() / ((4.0 / 45.0) ** 1.5 * math.sqrt(n))
    return CdfEstimate(n, float(s), value, min(bound, 1.0), "clt", params)


# --------------------------------------------------------------------------
# dispatcher

_SUPPORTED = {
    "closed": "n in {1, 2, 3}",
    "recursive": "n <= 6",
}


def cdf(n: int, s: float, method: str = "auto", *, tol: float | None = None,
        terms: int | None = None, samples: int | None = None,
        rng: RngState | None = None, contour: ContourParams | None = None) -> CdfEstimate:
    """Evaluate ``F_n(s)`` with the named method.

    ``auto`` uses the closed form for n <= 3 and Laplace inversion otherwise.
    Series methods are evaluated at ``s -/+ 1e-12`` (averaged) when ``s`` is
    an integer inside ``(0, n)``.
    """
    n = _check_n(n)
    s = float(s)
    if math.isnan(s):
        raise ValueError("s is NaN")
    if method == "auto":
        method = "closed" if n <= 3 else "laplace"
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; supported: {', '.join(METHODS)}")
    if method == "closed":
        if n not in _CLOSED:
            raise ValueError(f"closed form available for {_SUPPORTED['closed']}, got n={n}")
        return {1: cdf_closed_n1, 2: cdf_closed_n2, 3: cdf_closed_n3}[n](s)
    if method == "laplace":
        return cdf_laplace(n, s, contour)
    if method == "recursive":
        if n > 6:
            raise ValueError(f"recursive method supports {_SUPPORTED['recursive']}, got n={n}")
        return cdf_recursive(n, s, 1e-8 if tol is None else tol)
    if method == "mc":
        return cdf_mc(n, s, 10**6 if samples is None else samples, rng or RngState(0))
    if method == "clt":
        return clt_approx(n, s)

    def series(x):
        if method == "fourier":
            sp = SeriesParams(10**7 if terms is None else terms, 1e-5 if tol is None else tol)
            return cdf_fourier(n, x, sp)
        sp = SeriesParams(specfun.DEFAULT_JET_ORDER if terms is None else terms, LAGUERRE_TOLERANCE)
        return cdf_laguerre(n, x, sp)

    if 0 < s < n and s == round(s):
        lo, hi = series(s - KINK_SHIFT), series(s + KINK_SHIFT)
        params = dict(lo.params, kink_shift=KINK_SHIFT)
        return CdfEstimate(n, s, 0.5 * (lo.value + hi.value),
                           max(lo.err_est, hi.err_est) + KINK_SHIFT, method, params)
    return series(s)


# --------------------------------------------------------------------------
# box / ball

def _box_terms(box: BoxSpec, t: float = 1.0):
    """Expand ``prod_j (erf(b_j r) - erf(a_j r)) / (2 (b_j - a_j))`` (``r = sqrt s``).

    ``erf(c r) = sgn(c) (1 - exp(-c^2 s) erfcx(|c| r))`` turns each factor into
    a constant plus two delayed pieces.  Products whose total delay reaches
    ``t`` cannot contribute and are dropped.
    Returns ``[(coef, delay, scales)]`` where ``scales`` lists ``|c|`` values
    whose ``erfcx(|c| r)`` appear in the product.
    """
    partial = [(1.0, 0.0, ())]
    for a, b in zip(box.lo, box.hi):
        w = 2.0 * (b - a)
        pieces = []
        const = (np.sign(b) - np.sign(a)) / w
        if const:
            pieces.append((const, 0.0, None))
        if b != 0:
            pieces.append((-np.sign(b) / w, b * b, abs(b)))
        if a != 0:
            pieces.append((np.sign(a) / w, a * a, abs(a)))
        nxt = []
        for coef, delay, scales in partial:
            for pc, pd, ps in pieces:
                d = delay + pd
                if d >= t:
                    continue
                nxt.append((coef * pc, d, scales if ps is None else scales + (ps,)))
        partial = nxt
        if len(partial) > 200_000:
            raise ValueError("box expansion too large; use the Monte Carlo method")
    return partial


def box_ball_fraction_est(box: BoxSpec, params: ContourParams | None = None) -> QuadResult:
    """Probability that a uniform point of ``box`` lies in the unit ball, with error."""
    params = params or ContourParams()
    N = box.dim
    pref = math.pi ** (N / 2)
    if params.kind == "talbot":
        terms = []
        for coef, delay, scales in _box_terms(box):
            def g(z, coef=coef, scales=scales):
                r = np.sqrt(z)
                out = pref * coef / z ** (N / 2 + 1)
                for c in scales:
                    out = out * specfun.erfcx_complex(c * r)
                return out
            terms.append((delay, g))
        res = invert_laplace_shifted(terms, 1.0, params)
    else:
        def fhat(z):
            r = np.sqrt(z)
            out = pref / z ** (N / 2 + 1)
            for a, b in zip(box.lo, box.hi):
                out = out * (specfun.erf_complex(b * r) - specfun.erf_complex(a * r)) / (2.0 * (b - a))
            return out
        res = invert_laplace_est(fhat, 1.0, params)
    slack = max(res.err_est, 1e-9)
    if not -slack <= res.value <= 1.0 + slack:
        raise ArithmeticError(
            f"box-ball fraction {res.value} outside [0, 1]; contour misconfigured?")
    return QuadResult(min(max(res.value, 0.0), 1.0), res.err_est, res.evaluations)


def box_ball_fraction(box: BoxSpec, params: ContourParams | None = None) -> float:
    return box_ball_fraction_est(box, params).value


def box_ball_volume_est(box: BoxSpec, params: ContourParams | None = None) -> QuadResult:
    frac = box_ball_fraction_est(box, params)
    m = box.measure
    return QuadResult(frac.value * m, frac.err_est * m, frac.evaluations)


def box_ball_volume(box: BoxSpec, params: ContourParams | None = None) -> float:
    """``Vol(box & B_N(1))``."""
    return box_ball_volume_est(box, params).value


def box_ball_volume_mc(box: BoxSpec, samples: int, rng: RngState,
                       chunk: int = 1 << 18) -> QuadResult:
    """Rejection-sampling estimate of the box/ball volume (3-sigma error)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lo = np.array(box.lo)
    width = np.array(box.hi) - lo
    hits = 0
    left = samples
    while left:
        m = min(chunk, left)
        x = lo + width * rng.generator.random((m, box.dim))
        hits += int(np.count_nonzero(np.einsum("ij,ij->i", x, x) <= 1.0))
        left -= m
    p = hits / samples
    meas = box.measure
    return QuadResult(p * meas, 3.0 * meas * math.sqrt(p * (1.0 - p) / samples), samples)
