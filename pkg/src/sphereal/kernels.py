"""Localized polynomial kernels on the sphere.

Two kernel families are provided: a Chebyshev-type kernel used for support
estimation (a degree n-1 polynomial in cos(theta) concentrated near
theta=0) and a Jacobi-type kernel used by the witness classifier.  Both are
shaped by the same smooth low-pass filter ``filter_h``.

All evaluators are pure and accept scalars or numpy arrays; per-degree
coefficient tables are cached once and returned read-only, so concurrent
callers share immutable state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import NumericError, ParameterError

__all__ = [
    "KernelConfig",
    "filter_h",
    "filter_weights",
    "chebyshev_kernel",
    "jacobi_eval",
    "jacobi_norm",
    "jacobi_kernel",
    "jacobi_weights",
]


@dataclass(frozen=True)
class KernelConfig:
    """Tunable kernel parameters.

    ``degree`` is the kernel degree n, ``theta_cap`` the relative support
    threshold in (0, 1], ``decay_exponent`` the exponent S used only by the
    localization test harness, and ``jacobi_dim`` the sphere dimension q
    for the witness kernel.
    """

    degree: int = 32
    theta_cap: float = 0.1
    decay_exponent: int = 3
    jacobi_dim: int = 2

    def __post_init__(self):
        if self.degree < 2:
            raise ParameterError(f"kernel degree must be >= 2, got {self.degree}")
        if not 0.0 < self.theta_cap <= 1.0:
            raise ParameterError(f"theta_cap must lie in (0, 1], got {self.theta_cap}")
        if self.decay_exponent < 2:
            raise ParameterError(
                f"decay exponent must be >= 2, got {self.decay_exponent}"
            )


def _bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/s) for s > 0, and 0 for s <= 0 (smooth cutoff)."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    pos = s > 0.0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def filter_h(t):
    """Smooth low-pass filter: 1 on [0, 1/2], 0 on [1, inf), C^inf bridge between.

    The bridge is the standard partition-of-unity quotient
    psi(1-t) / (psi(1-t) + psi(t-1/2)) with psi(s) = exp(-1/s) for s > 0,
    which is symmetric about t = 3/4 (so filter_h(0.75) == 0.5) and
    non-increasing everywhere.
    """
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ParameterError("filter_h is defined for t >= 0 only")
    left = _bump(1.0 - arr)
    right = _bump(arr - 0.5)
    denom = left + right
    out = np.empty_like(arr)
    plateau = arr <= 0.5
    out[plateau] = 1.0
    bridge = ~plateau
    # denom > 0 strictly on (1/2, 1); for t >= 1 left == 0 so the quotient is 0.
    with np.errstate(invalid="ignore"):
        out[bridge] = np.where(
            denom[bridge] > 0.0, left[bridge] / denom[bridge], 0.0
        )
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out)
    return out


@lru_cache(maxsize=128)
def filter_weights(n: int) -> np.ndarray:
    """Filter values H(l/n) for l = 1..n-1, cached per degree and read-only."""
    if n < 2:
        raise ParameterError(f"kernel degree must be >= 2, got {n}")
    w = filter_h(np.arange(1, n, dtype=np.float64) / n)
    w.setflags(write=False)
    return w


def chebyshev_kernel(dot, n: int):
    """Localized kernel 1 + 2 * sum_{l=1}^{n-1} H(l/n) cos(l * arccos(dot)).

    ``dot`` is the inner product of two unit vectors; it is clamped to
    [-1, 1] here.  The cosine multiples are accumulated with the
    angle-addition recurrence (one multiply-add per term, no per-term trig),
    which for x = cos(theta) coincides with the Chebyshev recurrence
    T_{l+1}(x) = 2x T_l(x) - T_{l-1}(x).
    """
    weights = filter_weights(n)
    x = np.clip(np.asarray(dot, dtype=np.float64), -1.0, 1.0)
    acc = 1.0 + 2.0 * weights[0] * x
    c_prev = np.ones_like(x)
    c_curr = x
    for ell in range(2, n):
        c_next = 2.0 * x * c_curr - c_prev
        acc = acc + 2.0 * weights[ell - 1] * c_next
        c_prev, c_curr = c_curr, c_next
    if np.isscalar(dot) or np.ndim(dot) == 0:
        return float(acc)
    return acc


def jacobi_eval(k: int, alpha: float, x):
    """Jacobi polynomial P_k^(alpha, alpha)(x) by the three-term recurrence.

    Only the symmetric (ultraspherical) case is needed here.  P_0 = 1,
    P_1 = (alpha + 1) x, and for k >= 2 the standard recurrence with
    beta = alpha (the odd x-free term vanishes since alpha^2 - beta^2 = 0).
    """
    if alpha <= -1.0:
        raise ParameterError(f"jacobi alpha must exceed -1, got {alpha}")
    if k < 0:
        raise ParameterError(f"jacobi degree must be >= 0, got {k}")
    xs = np.asarray(x, dtype=np.float64)
    p_prev = np.ones_like(xs)
    if k == 0:
        result = p_prev
    else:
        p_curr = (alpha + 1.0) * xs
        for m in range(2, k + 1):
            a = 2.0 * m * (m + 2.0 * alpha) * (2.0 * m + 2.0 * alpha - 2.0)
            b = (2.0 * m + 2.0 * alpha - 1.0) * (2.0 * m + 2.0 * alpha) * (
                2.0 * m + 2.0 * alpha - 2.0
            )
            c = 2.0 * (m + alpha - 1.0) ** 2 * (2.0 * m + 2.0 * alpha)
            p_next = (b * xs * p_curr - c * p_prev) / a
            p_prev, p_curr = p_curr, p_next
        result = p_curr
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(result)
    return result


def jacobi_norm(k: int, alpha: float) -> float:
    """Normalization N_k of the symmetric Jacobi polynomials.

    N_k = 2^(2a+1) * Gamma(k+a+1)^2 / (Gamma(k+1) Gamma(k+2a+1)) / (2k+2a+1)
    with a = alpha = beta, evaluated in log-Gamma space so large degrees do
    not overflow.
    """
    if alpha <= -1.0:
        raise ParameterError(f"jacobi alpha must exceed -1, got {alpha}")
    if k < 0:
        raise ParameterError(f"jacobi degree must be >= 0, got {k}")
    log_n = (
        (2.0 * alpha + 1.0) * np.log(2.0)
        + 2.0 * gammaln(k + alpha + 1.0)
        - gammaln(k + 1.0)
        - gammaln(k + 2.0 * alpha + 1.0)
        - np.log(2.0 * k + 2.0 * alpha + 1.0)
    )
    value = float(np.exp(log_n))
    if not np.isfinite(value) or value <= 0.0:
        raise NumericError(f"jacobi normalization over/underflowed at degree {k}")
    return value


def _jacobi_at_one(k: np.ndarray, alpha: float) -> np.ndarray:
    """P_k^(alpha, alpha)(1) = binom(k + alpha, k), via log-Gamma."""
    return np.exp(
        gammaln(k + alpha + 1.0) - gammaln(k + 1.0) - gammaln(alpha + 1.0)
    )


@lru_cache(maxsize=128)
def jacobi_weights(n: int, q: int) -> np.ndarray:
    """Per-degree weights H(k/n) P_k(1) / N_k for k = 0..n-1, cached read-only."""
    if q < 2:
        raise ParameterError(f"witness kernel needs sphere dimension >= 2, got {q}")
    if n < 1:
        raise ParameterError(f"witness kernel degree must be >= 1, got {n}")
    alpha = q / 2.0 - 1.0
    degrees = np.arange(n, dtype=np.float64)
    norms = np.array([jacobi_norm(k, alpha) for k in range(n)])
    w = filter_h(degrees / n) * _jacobi_at_one(degrees, alpha) / norms
    if not np.all(np.isfinite(w)):
        raise NumericError(f"witness kernel weights non-finite for n={n}, q={q}")
    w.setflags(write=False)
    return w


def jacobi_kernel(dot, n: int, q: int):
    """Witness kernel sum_{k=0}^{n-1} H(k/n) P_k(1) P_k(dot) / N_k.

    P_k are the symmetric Jacobi polynomials with parameter q/2 - 1 where q
    is the sphere dimension; the recurrence is streamed over k so arbitrary
    arrays of inner products are handled without storing every degree.
    """
    weights = jacobi_weights(n, q)
    alpha = q / 2.0 - 1.0
    xs = np.clip(np.asarray(dot, dtype=np.float64), -1.0, 1.0)
    p_prev = np.ones_like(xs)
    acc = weights[0] * p_prev
    if n > 1:
        p_curr = (alpha + 1.0) * xs
        acc = acc + weights[1] * p_curr
        for m in range(2, n):
            a = 2.0 * m * (m + 2.0 * alpha) * (2.0 * m + 2.0 * alpha - 2.0)
            b = (2.0 * m + 2.0 * alpha - 1.0) * (2.0 * m + 2.0 * alpha) * (
                2.0 * m + 2.0 * alpha - 2.0
            )
            c = 2.0 * (m + alpha - 1.0) ** 2 * (2.0 * m + 2.0 * alpha)
            p_next = (b * xs * p_curr - c * p_prev) / a
            acc = acc + weights[m] * p_next
            p_prev, p_curr = p_curr, p_next
    if np.isscalar(dot) or np.ndim(dot) == 0:
        return float(acc)
    return acc
