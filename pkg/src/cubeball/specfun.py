"""Special-function kernel.

Real and complex error functions, normalized Fresnel integrals, Gamma on the
positive reals, generalized Laguerre polynomials and a small truncated
power-series ("Taylor jet") algebra used to take many exact derivatives of
``[pi * erf(a / (2 sqrt(lambda)))]**n`` with respect to ``lambda``.

The elementary kernels delegate to ``math`` and ``scipy.special`` (the latter
wraps the Faddeeva package, a rational/continued-fraction scheme for w(z));
the wrappers here pin the domains and turn silent overflow into errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "ComplexOverflowError",
    "TaylorJet",
    "erf_real",
    "erf_complex",
    "erfcx_complex",
    "fresnel_normalized",
    "gamma_pos",
    "laguerre_gen",
    "i_smoothed_jet",
    "i_smoothed_derivatives",
    "DEFAULT_JET_ORDER",
]

DEFAULT_JET_ORDER = 64
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


class ComplexOverflowError(ArithmeticError):
    """Raised when a complex error-function value overflows double precision."""


def _check_finite_real(x: float, name: str = "x") -> float:
    x = float(x)
    if math.isnan(x):
        raise ValueError(f"{name} is NaN")
    return x


def erf_real(x: float) -> float:
    """Error function of a real argument.

    Odd by construction: the value is computed for ``|x|`` and the sign is
    reapplied, so ``erf_real(-x) == -erf_real(x)`` holds bit for bit.
    """
    x = _check_finite_real(x)
    v = math.erf(abs(x))
    return -v if x < 0 else v


def erf_complex(z):
    """Error function for complex ``z`` (scalar or array).

    Raises
    ------
    ComplexOverflowError
        If any value overflows (``|Im z|`` large), instead of returning inf.
    ValueError
        On non-finite input.
    """
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("erf_complex: non-finite argument")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _sp.erf(arr)
    if not np.all(np.isfinite(out)):
        bad = arr[~np.isfinite(out)].ravel()[0]
        raise ComplexOverflowError(
            f"erf overflows at z={bad!r}; |exp(-z^2)| exceeds double range"
        )
    if np.ndim(z) == 0:
        return complex(out)
    return out


def erfcx_complex(z):
    """Scaled complementary error function ``exp(z^2) erfc(z)``.

    Bounded for ``Re z >= 0``, which is where the Laplace-inversion code
    evaluates it (``z = c * sqrt(s)`` with the principal root).
    """
    arr = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _sp.erfcx(arr)
    if not np.all(np.isfinite(out)):
        bad = arr[~np.isfinite(out)].ravel()[0]
        raise ComplexOverflowError(f"erfcx overflows at z={bad!r}")
    if np.ndim(z) == 0:
        return complex(out)
    return out


def fresnel_normalized(x):
    """Normalized Fresnel integrals ``(C(x), S(x))``.

    ``C(x) = int_0^x cos(pi t^2 / 2) dt`` and ``S(x) = int_0^x sin(pi t^2 / 2) dt``.
    Accepts a scalar or an array of non-negative values.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("fresnel_normalized: NaN argument")
    if np.any(arr < 0):
        raise ValueError("fresnel_normalized: x must be >= 0")
    s, c = _sp.fresnel(arr)
    if np.ndim(x) == 0:
        return float(c), float(s)
    return c, s


def gamma_pos(x: float) -> float:
    """Gamma function for ``0 < x <= 171``."""
    x = _check_finite_real(x)
    if x <= 0:
        raise ValueError(f"gamma_pos requires x > 0, got {x}")
    if x > 171.6:
        raise OverflowError(f"gamma({x}) overflows double precision")
    return math.gamma(x)


def laguerre_gen(k: int, alpha: float, x: float) -> float:
    """Generalized Laguerre polynomial ``L_k^{(alpha)}(x)`` by forward recurrence."""
    if k < 0 or k > 10000:
        raise ValueError(f"laguerre_gen: k must lie in [0, 10000], got {k}")
    if alpha <= -1:
        raise ValueError(f"laguerre_gen: alpha must exceed -1, got {alpha}")
    prev, cur = 1.0, 1.0 + alpha - x
    if k == 0:
        return prev
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


@dataclass(frozen=True)
class TaylorJet:
    """Truncated Taylor series ``c_0 + c_1 h + ... + c_K h^K`` about a point.

    Arithmetic is exact truncated power-series algebra at a common order K.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("TaylorJet needs a non-empty 1-D coefficient list")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def variable(cls, x0: float, order: int) -> "TaylorJet":
        c = np.zeros(order + 1)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value: float, order: int) -> "TaylorJet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    def _coerce(self, other) -> "TaylorJet":
        if isinstance(other, TaylorJet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other
        return TaylorJet.constant(float(other), self.order)

    def __add__(self, other):
        return TaylorJet(self.coeffs + self._coerce(other).coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet(-self.coeffs)

    def __sub__(self, other):
        return TaylorJet(self.coeffs - self._coerce(other).coeffs)

    def __rsub__(self, other):
        return TaylorJet(self._coerce(other).coeffs - self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.coeffs * float(other))
        other = self._coerce(other)
        return TaylorJet(np.convolve(self.coeffs, other.coeffs)[: self.order + 1])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.coeffs / float(other))
        return self * other.power(-1.0)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            return self.ipow(int(p))
        return self.power(float(p))

    def ipow(self, n: int) -> "TaylorJet":
        result = TaylorJet.constant(1.0, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def power(self, p: float) -> "TaylorJet":
        # g = f^p  <=>  f g' = p f' g
        f = self.coeffs
        if f[0] <= 0:
            raise ValueError("real power of a jet needs a positive constant term")
        K = self.order
        g = np.zeros(K + 1)
        g[0] = f[0] ** p
        for k in range(1, K + 1):
            j = np.arange(1, k + 1)
            g[k] = np.dot(((p + 1) * j - k) * f[1 : k + 1], g[k - 1 :: -1][: k]) / (k * f[0])
        return TaylorJet(g)

    def sqrt(self) -> "TaylorJet":
        return self.power(0.5)

    def exp(self) -> "TaylorJet":
        f = self.coeffs
        K = self.order
        g = np.zeros(K + 1)
        g[0] = math.exp(f[0])
        for k in range(1, K + 1):
            j = np.arange(1, k + 1)
            g[k] = np.dot(j * f[1 : k + 1], g[k - 1 :: -1][: k]) / k
        return TaylorJet(g)

    def derivative(self) -> "TaylorJet":
        """d/dh, padded with a zero top coefficient to keep the order."""
        K = self.order
        d = np.zeros(K + 1)
        d[:K] = self.coeffs[1:] * np.arange(1, K + 1)
        return TaylorJet(d)

    def integral(self, c0: float) -> "TaylorJet":
        K = self.order
        out = np.zeros(K + 1)
        out[0] = c0
        out[1:] = self.coeffs[:K] / np.arange(1, K + 1)
        return TaylorJet(out)

    def erf(self) -> "TaylorJet":
        # d/dh erf(u) = (2/sqrt(pi)) exp(-u^2) u'
        dens = (-(self * self)).exp() * _TWO_OVER_SQRT_PI
        return (dens * self.derivative()).integral(math.erf(self.coeffs[0]))

    def derivatives(self) -> np.ndarray:
        """Derivative values ``f^(k)(x0) = k! c_k``."""
        k = np.arange(self.order + 1)
        return self.coeffs * np.array([math.factorial(int(i)) for i in k], dtype=float)


def _smoothed_jet(a: float, lambda0: float, n: int, order: int) -> TaylorJet:
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lam = TaylorJet.variable(lambda0, order)
    u = lam.power(-0.5) * (0.5 * a)
    jet = (u.erf() * math.pi).ipow(n)
    if not np.all(np.isfinite(jet.coeffs)):
        raise OverflowError("jet coefficients overflowed")
    return jet


def i_smoothed_derivatives(a: float, lambda0: float, kmax: int, n: int) -> np.ndarray:
    """All of ``I_a(lambda0, k)`` for ``k = 0..kmax`` from one jet evaluation.

    ``I_a(lambda, k) = (-1)^k d^k/dlambda^k [pi erf(a / (2 sqrt(lambda)))]^n``.
    """
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    jet = _smoothed_jet(a, lambda0, n, kmax)
    signs = (-1.0) ** np.arange(kmax + 1)
    out = signs * jet.derivatives()
    if not np.all(np.isfinite(out)):
        raise OverflowError("derivative values overflowed")
    return out


def i_smoothed_jet(a: float, lambda0: float, k: int, n: int,
                   max_order: int = DEFAULT_JET_ORDER) -> float:
    """``I_a(lambda0, k)`` for a single ``k``; see :func:`i_smoothed_derivatives`."""
    if k < 0 or k > max_order:
        raise ValueError(f"k must lie in [0, {max_order}], got {k}")
    return float(i_smoothed_derivatives(a, lambda0, k, n)[k])
