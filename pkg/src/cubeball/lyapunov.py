"""Top Lyapunov exponent for products of the random-matrix ensembles U2B and U3S.

A U3S matrix has three independent uniform unit vectors of R^3 as rows; a U2B
matrix keeps the first two components of two such rows.  Both laws are
invariant under right multiplication by orthogonal matrices, so

    2 mu_1 = E log |X e_1|^2 = int_0^N log(t) F_N'(t) dt,   N = 2 (U2B), 3 (U3S),

since every entry is uniform on [-1, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Union

import numpy as np

from .quad import RngState, integrate_adaptive, sphere3
from .volume import pdf_closed

__all__ = [
    "EnsembleId",
    "LyapunovResult",
    "sample_matrix",
    "sample_matrices",
    "lyapunov_exact",
    "lyapunov_exact_pieces",
    "lyapunov_mc",
]


class EnsembleId(str, enum.Enum):
    U2B = "U2B"
    U3S = "U3S"

    @property
    def dim(self) -> int:
        return 2 if self is EnsembleId.U2B else 3

    @classmethod
    def parse(cls, text) -> "EnsembleId":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown ensemble {text!r}; expected u2b or u3s") from None


@dataclass(frozen=True)
class LyapunovResult:
    two_mu1: float
    mu1: float
    err_est: float
    method: str
    params: dict[str, Any] = field(default_factory=dict)


def sample_matrices(e: EnsembleId, rng: RngState, count: int) -> np.ndarray:
    """``count`` independent matrices, shape ``(count, d, d)``."""
    e = EnsembleId.parse(e)
    rows = sphere3(rng, 3 * count).reshape(count, 3, 3)
    if e is EnsembleId.U3S:
        return rows
    return rows[:, :2, :2].copy()


def sample_matrix(e: EnsembleId, rng: RngState) -> np.ndarray:
    return sample_matrices(e, rng, 1)[0]


def _log_density(n: int):
    def f(t):
        return np.array([math.log(x) * pdf_closed(n, x) if x > 0 else 0.0 for x in t])
    return f


def lyapunov_exact_pieces(e: EnsembleId, tol: float = 1e-12) -> list[float]:
    """``int_j^{j+1} log(t) F_N'(t) dt`` for ``j = 0..N-1``."""
    n = EnsembleId.parse(e).dim
    f = _log_density(n)
    pieces = []
    for j in range(n):
        # log singularity at 0; sqrt-type kinks at the other integer endpoints
        mode = "left" if j == 0 else "both"
        pieces.append(integrate_adaptive(f, j, j + 1, (), tol / n, vectorized=True, singular=mode).value)
    return pieces


def lyapunov_exact(e: EnsembleId, tol: float = 1e-12) -> LyapunovResult:
    """``2 mu_1 = int_0^N log(t) F_N'(t) dt`` by adaptive quadrature."""
    e = EnsembleId.parse(e)
    n = e.dim
    f = _log_density(n)
    bps = list(range(1, n))
    res = integrate_adaptive(f, 0.0, float(n), bps, tol, vectorized=True, singular="left")
    return LyapunovResult(res.value, 0.5 * res.value, res.err_est, "exact",
                          {"ensemble": e.value, "evaluations": res.evaluations})


Sampler = Callable[[RngState, int], np.ndarray]


def lyapunov_mc(e: Union[EnsembleId, str, Sampler], m: int = 10_000, trials: int = 100,
                rng: RngState | None = None, burn_in: int = 100,
                block: int = 256) -> LyapunovResult:
    """Monte Carlo estimate of ``2 mu_1`` from ``trials`` independent products.

    Each trial multiplies a uniform unit start vector by ``burn_in + m``
    fresh matrices, renormalizing after every step, and averages
    ``log |X v|`` over the last ``m`` steps.  All trials advance together.
    ``e`` may also be a callable ``sampler(rng, count) -> (count, d, d)``.
    """
    if m < 1 or trials < 2:
        raise ValueError("lyapunov_mc needs m >= 1 and trials >= 2")
    rng = rng or RngState(0)
    if callable(e) and not isinstance(e, (EnsembleId, str)):
        sampler = e
        label = getattr(e, "__name__", "custom")
    else:
        ens = EnsembleId.parse(e)
        label = ens.value

        def sampler(r, count):
            return sample_matrices(ens, r, count)

    d = sampler(rng, 1).shape[-1]
    v = rng.generator.standard_normal((trials, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    acc = np.zeros(trials)
    total = burn_in + m
    done = 0
    while done < total:
        steps = min(block, total - done)
        mats = sampler(rng, steps * trials).reshape(steps, trials, d, d)
        for i in range(steps):
            w = np.einsum("tij,tj->ti", mats[i], v)
            norms = np.linalg.norm(w, axis=1)
            if np.any(norms == 0):
                raise ArithmeticError("matrix product collapsed to the zero vector")
            if done + i >= burn_in:
                acc += np.log(norms)
            v = w / norms[:, None]
        done += steps
    slopes = 2.0 * acc / m
    est = float(slopes.mean())
    err = 3.0 * float(slopes.std(ddof=1)) / math.sqrt(trials)
    return LyapunovResult(est, 0.5 * est, err, "mc",
                          {"ensemble": label, "m": m, "trials": trials, "burn_in": burn_in,
                           "seed": rng.seed, "stream": rng.stream})
