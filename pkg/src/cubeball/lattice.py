"""Rank-2 lattices over the Gaussian integers.

Random unimodular bases of C^2 are reduced with the complex Lagrange-Gauss
algorithm; the length ``t`` of the shortest vector then has the density
(up to normalization)

    rho(t) = 2 pi^2 t^3                              0 < t < 1
    rho(t) = 2 pi^2 t (t^2 - V2(sqrt(t^2 - t^-2), t/2))   1 <= t <= 2^(1/4)

where ``V2(a, b)`` is the area of the disk of radius ``a`` inside the square
``[-b, b]^2`` (``b`` is the half-side).  Beyond ``2^(1/4)`` the disk covers
the square and the density vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quad import RngState, integrate_adaptive
from .volume import _f2

__all__ = [
    "GaussianInt",
    "Basis2C",
    "LatticeShape",
    "DegenerateBasisError",
    "T_MAX",
    "round_gaussian",
    "reduce_lagrange_gauss",
    "sample_sl2c",
    "shortest_vector_density",
    "shortest_vector_pdf",
    "shortest_vector_cdf",
    "normalization_constant",
    "v2_overlap",
    "marginal_area",
    "lattice_experiment",
    "lattice_shape",
]

T_MAX = 2.0 ** 0.25
HAAR_RADIUS = 6.0


class DegenerateBasisError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianInt:
    re: int
    im: int

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __bool__(self) -> bool:
        return bool(self.re or self.im)


@dataclass(frozen=True)
class Basis2C:
    """Two vectors of C^2 stored as the columns of a 2x2 complex matrix."""

    b1: tuple[complex, complex]
    b2: tuple[complex, complex]

    @classmethod
    def from_matrix(cls, m) -> "Basis2C":
        m = np.asarray(m, dtype=complex)
        return cls((complex(m[0, 0]), complex(m[1, 0])), (complex(m[0, 1]), complex(m[1, 1])))

    def matrix(self) -> np.ndarray:
        return np.array([[self.b1[0], self.b2[0]], [self.b1[1], self.b2[1]]], dtype=complex)

    def det(self) -> complex:
        return self.b1[0] * self.b2[1] - self.b1[1] * self.b2[0]


@dataclass(frozen=True)
class LatticeShape:
    t: float
    y1: float
    y2: float


def round_gaussian(z: complex) -> GaussianInt:
    """Nearest Gaussian integer; halves round to even componentwise."""
    z = complex(z)
    return GaussianInt(int(round(z.real)), int(round(z.imag)))


def _inner(u, v) -> complex:
    # <u, v> = sum u_i conj(v_i)
    return u[0] * v[0].conjugate() + u[1] * v[1].conjugate()


def _norm2(u) -> float:
    return (u[0] * u[0].conjugate() + u[1] * u[1].conjugate()).real


def reduce_lagrange_gauss(b: Basis2C, max_iter: int = 10**6):
    """Complex Lagrange-Gauss reduction.

    Returns ``(reduced, transform)`` where ``transform`` is a 2x2 complex
    array with Gaussian-integer entries and
    ``reduced.matrix() == b.matrix() @ transform``.  The output satisfies
    ``|b1| <= |b2|`` and ``|Re mu|, |Im mu| <= 1/2`` for
    ``mu = <b2, b1> / |b1|^2``.  Raises :class:`DegenerateBasisError` for
    (numerically) dependent vectors, or when the column lengths differ so much
    that size reduction stalls in double precision.
    """
    u = list(b.b1)
    v = list(b.b2)
    scale = math.sqrt(_norm2(u) * _norm2(v))
    if abs(b.det()) <= 1e-12 * scale or scale == 0.0:
        raise DegenerateBasisError("basis vectors are (numerically) linearly dependent")
    # transform columns: coefficients of current u, v in the input basis
    tu = [1 + 0j, 0j]
    tv = [0j, 1 + 0j]
    if _norm2(v) < _norm2(u):
        u, v, tu, tv = v, u, tv, tu
    for _ in range(max_iter):
        mu = round_gaussian(_inner(v, u) / _norm2(u))
        if mu:
            m = complex(mu)
            before = _norm2(v)
            v = [v[0] - m * u[0], v[1] - m * u[1]]
            tv = [tv[0] - m * tu[0], tv[1] - m * tu[1]]
            # exact size reduction strictly shortens v; stalling means the
            # projection on u is below the resolution of v
            if not _norm2(v) < before:
                raise DegenerateBasisError(
                    "basis too badly scaled for double-precision reduction")
        if _norm2(v) < _norm2(u):
            u, v, tu, tv = v, u, tv, tu
        elif not mu:
            break
    else:
        raise RuntimeError(f"Lagrange-Gauss reduction did not terminate in {max_iter} steps")
    transform = np.array([[tu[0], tv[0]], [tu[1], tv[1]]], dtype=complex)
    return Basis2C(tuple(u), tuple(v)), transform


def lattice_shape(b: Basis2C) -> LatticeShape:
    """Shape coordinates ``(t, y1 + i y2)`` of a reduced basis after a unitary rotation."""
    t = math.sqrt(_norm2(b.b1))
    y = _inner(b.b2, b.b1) / t
    return LatticeShape(t, y.real, y.imag)


def _haar_su2(gen: np.random.Generator) -> np.ndarray:
    q = gen.standard_normal(4)
    q /= np.linalg.norm(q)
    a = complex(q[0], q[1])
    c = complex(q[2], q[3])
    return np.array([[a, -c.conjugate()], [c, a.conjugate()]])


def sample_sl2c(rng: RngState, radius: float = HAAR_RADIUS) -> Basis2C:
    """Haar-random element of SL(2, C) restricted to the Cartan ball ``a <= radius``.

    With ``M = K1 diag(e^a, e^-a) K2`` (``K1, K2`` Haar in SU(2)) the Haar
    measure has radial density proportional to ``sinh(2a)^2``.  ``a`` is
    drawn by rejection from the ``e^{4a}`` envelope.  As ``radius`` grows
    the lattice ``M Z[i]^2`` becomes equidistributed in the space of
    unimodular lattices.
    """
    gen = rng.generator
    while True:
        a = radius + math.log1p(-gen.random()) / 4.0
        if a < 0:
            continue
        # sinh(2a)^2 / (e^{4a}/4) = (1 - e^{-4a})^2
        if gen.random() < (-math.expm1(-4.0 * a)) ** 2:
            break
    d = np.diag([math.exp(a), math.exp(-a)])
    return Basis2C.from_matrix(_haar_su2(gen) @ d @ _haar_su2(gen))


def v2_overlap(a: float, b: float) -> float:
    """Area of the disk of radius ``a`` inside the square ``[-b, b]^2``."""
    if a < 0 or b <= 0:
        raise ValueError("v2_overlap needs a >= 0 and b > 0")
    return 4.0 * b * b * _f2(a * a / (b * b))


def shortest_vector_density(t: float) -> float:
    """Unnormalized density of the shortest-vector length."""
    if t <= 0 or t >= T_MAX:
        return 0.0
    if t < 1.0:
        return 2.0 * math.pi ** 2 * t ** 3
    return 2.0 * math.pi ** 2 * t ** 3 * (1.0 - _f2(4.0 * (1.0 - t ** -4)))


def marginal_area(t: float, tol: float = 1e-13) -> float:
    """Area of ``{|y|^2 >= t^2 - t^-2, |y1|, |y2| <= t/2}`` by direct quadrature.

    The inner integral over ``y2`` is the length of a union of segments; the
    outer integral over ``y1`` is adaptive with breakpoints at ``+-r``.
    """
    half = 0.5 * t
    r2 = t * t - 1.0 / (t * t)
    if r2 <= 0:
        return t * t

    def length(y1):
        inside = np.sqrt(np.clip(r2 - y1 * y1, 0.0, None))
        return 2.0 * (half - np.minimum(inside, half))

    r = math.sqrt(r2)
    bps = [p for p in (-r, r) if -half < p < half]
    return integrate_adaptive(length, -half, half, bps, tol, vectorized=True, singular="both").value


@lru_cache(maxsize=1)
def _cdf_table(points: int = 4001):
    # t = 1 (density kink) is a grid node
    grid = np.union1d(np.linspace(0.0, T_MAX, points), [1.0])
    f = np.vectorize(shortest_vector_density, otypes=[float])
    cells = [0.0]
    for lo, hi in zip(grid[:-1], grid[1:]):
        cells.append(integrate_adaptive(f, lo, hi, (), 1e-14, vectorized=True).value)
    cum = np.cumsum(cells)
    return grid, cum


def normalization_constant() -> float:
    """``Z = int_0^{2^(1/4)} rho(t) dt`` (exceeds pi^2/2 from the first branch alone)."""
    f = np.vectorize(shortest_vector_density, otypes=[float])
    return integrate_adaptive(f, 0.0, T_MAX, [1.0], 1e-14, vectorized=True, singular="right").value


def shortest_vector_pdf(t):
    return np.vectorize(shortest_vector_density, otypes=[float])(t) / normalization_constant()


def shortest_vector_cdf(t):
    """Normalized CDF (table of exact cell integrals, linear in between)."""
    grid, cum = _cdf_table()
    return np.interp(t, grid, cum / cum[-1], left=0.0, right=1.0)


def _ks_statistic(samples: np.ndarray) -> float:
    x = np.sort(samples)
    n = x.size
    c = shortest_vector_cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - c), np.max(c - (i - 1) / n)))


def lattice_experiment(samples: int, bins: int, rng: RngState) -> dict:
    """Histogram of reduced shortest-vector lengths against the analytic density.

    Returns bin centres, empirical and analytic densities, the raw lengths,
    the KS statistic against the analytic CDF and its 1% critical value.
    """
    if samples < 1 or bins < 1:
        raise ValueError("samples and bins must be positive")
    lengths = np.empty(samples)
    for i in range(samples):
        reduced, _ = reduce_lagrange_gauss(sample_sl2c(rng))
        lengths[i] = math.sqrt(_norm2(reduced.b1))
    edges = np.linspace(0.0, T_MAX, bins + 1)
    counts, _ = np.histogram(lengths, bins=edges)
    width = edges[1] - edges[0]
    centers = 0.5 * (edges[:-1] + edges[1:])
    cdf_edges = shortest_vector_cdf(edges)
    return {
        "centers": centers,
        "empirical": counts / (samples * width),
        "analytic": np.diff(cdf_edges) / width,
        "lengths": lengths,
        "ks": _ks_statistic(lengths),
        "ks_critical": 1.628 / math.sqrt(samples),
        "normalization": normalization_constant(),
        "max_length": float(lengths.max()),
    }
