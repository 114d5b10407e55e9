"""Regularized incomplete gamma function.

Series expansion below ``x = a + 1`` and a Lentz continued fraction above it,
both vectorised over ``x`` for a scalar shape ``a``.
"""

import math

import numpy as np

from dataeff.errors import ConvergenceError, DomainError

MAX_ITER = 500
EPS = 1e-14
FPMIN = 1e-300
# convergence is tested every few iterations; extra terms only shrink the error
_CHECK_EVERY = 4


def _check_shape(a):
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise DomainError(f"gamma shape must be finite and > 0, got {a!r}")
    return a


def _log_prefactor(a, x):
    # log(x^a e^-x / Gamma(a)); x > 0
    return a * np.log(x) - x - math.lgamma(a)


def _series(a, x):
    """Lower regularized gamma via the power series, for x < a + 1."""
    out = np.empty(x.shape)
    idx = np.arange(x.size)
    xa = x.copy()
    term = np.full(x.shape, 1.0 / a)
    total = term.copy()
    for n in range(1, MAX_ITER + 1):
        term *= xa / (a + n)
        total += term
        if n % _CHECK_EVERY == 0 or n == MAX_ITER:
            done = np.abs(term) < np.abs(total) * EPS
            out[idx[done]] = total[done]
            keep = ~done
            idx, xa, term, total = idx[keep], xa[keep], term[keep], total[keep]
            if idx.size == 0:
                break
    else:
        raise ConvergenceError(f"incomplete gamma series did not converge (a={a})")
    return out * np.exp(_log_prefactor(a, x))


def _continued_fraction(a, x):
    """Upper regularized gamma via the modified Lentz continued fraction, for x >= a + 1."""
    out = np.empty(x.shape)
    idx = np.arange(x.size)
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / FPMIN)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d[np.abs(d) < FPMIN] = FPMIN
        c = b + an / c
        c[np.abs(c) < FPMIN] = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if i % _CHECK_EVERY == 0 or i == MAX_ITER:
            done = np.abs(delta - 1.0) < EPS
            out[idx[done]] = h[done]
            keep = ~done
            idx, b, c, d, h = idx[keep], b[keep], c[keep], d[keep], h[keep]
            if idx.size == 0:
                break
    else:
        raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a})")
    return np.exp(_log_prefactor(a, x)) * out


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x)``.

    Parameters
    ----------
    a : float
        Shape, finite and > 0.
    x : float or array_like
        Argument(s), finite and >= 0.

    Returns
    -------
    float or ndarray
        ``P(a, x)`` in [0, 1]; a Python float for scalar ``x``.
    """
    a = _check_shape(a)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise DomainError("incomplete gamma argument must be finite and >= 0")
    flat = x.ravel()
    out = np.zeros(flat.shape)
    low = (flat > 0.0) & (flat < a + 1.0)
    high = flat >= a + 1.0
    if low.any():
        out[low] = _series(a, flat[low])
    if high.any():
        out[high] = 1.0 - _continued_fraction(a, flat[high])
    out = np.clip(out, 0.0, 1.0).reshape(x.shape)
    return float(out) if scalar else out


def reg_upper_gamma(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``, accurate in the tail."""
    a = _check_shape(a)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise DomainError("incomplete gamma argument must be finite and >= 0")
    flat = x.ravel()
    out = np.ones(flat.shape)
    low = (flat > 0.0) & (flat < a + 1.0)
    high = flat >= a + 1.0
    if low.any():
        out[low] = 1.0 - _series(a, flat[low])
    if high.any():
        out[high] = _continued_fraction(a, flat[high])
    out = np.clip(out, 0.0, 1.0).reshape(x.shape)
    return float(out) if scalar else out


def gamma_pdf(a, x):
    """Density of the unit-scale gamma distribution with shape ``a``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        logpdf = (a - 1.0) * np.log(x) - x - math.lgamma(a)
    out = np.exp(logpdf)
    if a == 1.0:
        out = np.where(x == 0.0, 1.0, out)
    return out
