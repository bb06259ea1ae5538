"""Shared numerical kernels.

Quadrature is backed by QUADPACK (``scipy.integrate``); root finding,
extrapolation and log-domain differencing are small local routines.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate


class NumericsError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int


@dataclass(frozen=True)
class ExtrapolationTrace:
    raw: tuple
    accelerated: tuple
    converged: bool
    limit: float


def _checked(f):
    def wrapped(x):
        y = f(x)
        if not np.all(np.isfinite(y)):
            raise NumericsError(f"non-finite integrand value at x={x!r}")
        return y
    return wrapped


def adaptive_quadrature(f, a, b, rel_tol=1e-12, abs_tol=0.0, limit=200):
    """Integrate ``f`` over ``[a, b]`` with adaptive Gauss-Kronrod rules.

    A left endpoint of exactly 0 is treated as improper and removed by the
    substitution ``x = b * exp(-s)``, which turns integrable logarithmic
    singularities into exponentially decaying tails. Infinite upper limits
    are passed through to QUADPACK.

    Returns
    -------
    QuadratureResult
    """
    g = _checked(f)
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if a == 0 and 0 < b < math.inf:
        def h(s):
            x = b * math.exp(-s)
            return g(x) * x if x > 0 else 0.0
        val, err, info = integrate.quad(h, 0.0, math.inf, epsrel=rel_tol,
                                        epsabs=abs_tol, limit=limit,
                                        full_output=1)[:3]
    else:
        val, err, info = integrate.quad(g, a, b, epsrel=rel_tol,
                                        epsabs=abs_tol, limit=limit,
                                        full_output=1)[:3]
    return QuadratureResult(float(val), float(abs(err)), int(info["last"]))


def quadrature_vec(f, a, b, rel_tol=1e-12, abs_tol=0.0):
    """Vector-valued counterpart of :func:`adaptive_quadrature`."""
    val, err = integrate.quad_vec(_checked(f), a, b, epsrel=rel_tol,
                                  epsabs=abs_tol)
    return np.asarray(val, dtype=float), float(err)


def bracketed_root(f, lo, hi, tol=1e-14, fprime=None, maxiter=200):
    """Root of ``f`` in ``[lo, hi]``: Newton steps kept inside a shrinking
    bracket, with bisection whenever a step leaves it or ``fprime`` is
    missing.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise NumericsError(f"no sign change on [{lo}, {hi}]")
    if flo > 0:
        lo, hi = hi, lo
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step = None
        if fprime is not None:
            d = fprime(x)
            if d != 0 and np.isfinite(d):
                step = fx / d
                xn = x - step
                if not (min(lo, hi) < xn < max(lo, hi)):
                    step = None
        if step is None:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, abs(xn)):
            return xn
        x = xn
    return x


def richardson(values, ratio=2.0, order=2, gauges=None, window=None):
    """Accelerate a sequence sampled on a geometric grid.

    With no ``gauges`` the error is modelled as a combination of
    ``ratio**(-k*m)`` for ``m = 1..order`` (classic Richardson on a grid
    ``t_k = t_0 * ratio**k``). ``gauges`` may instead give an array of shape
    ``(order, len(values))`` with the sampled error basis functions.

    Each accelerated value is a least-squares fit of ``L + sum a_m e_m`` on
    a trailing window of ``window`` points (default ``order + 1``, which is
    exact interpolation).
    """
    s = np.asarray(values, dtype=float)
    N = len(s)
    if gauges is None:
        k = np.arange(N, dtype=float)
        # normalised so the last sample has unit gauge
        gauges = np.array([ratio ** (-(m + 1) * (k - k[-1])) for m in range(order)])
    gauges = np.atleast_2d(np.asarray(gauges, dtype=float))[:order] if order else np.zeros((0, N))
    m = gauges.shape[0]
    w = window or m + 1
    w = max(w, m + 1)
    acc = []
    for end in range(w, N + 1):
        sl = slice(end - w, end)
        cols = [np.ones(w)]
        for e in gauges:
            col = e[sl]
            scale = np.max(np.abs(col))
            cols.append(col / scale if scale > 0 else col)
        M = np.column_stack(cols)
        sol, *_ = np.linalg.lstsq(M, s[sl], rcond=None)
        acc.append(float(sol[0]))
    if not acc:
        acc = [float(s[-1])] if N else [math.nan]
    limit = acc[-1]
    return ExtrapolationTrace(tuple(s.tolist()), tuple(acc),
                              _converged(acc, limit), limit)


def _converged(acc, limit):
    a = np.asarray(acc)
    if not np.all(np.isfinite(a)):
        return False
    d = np.abs(np.diff(a))
    if len(d) == 0:
        return True
    floor = 1e-9 * (1.0 + abs(limit))
    if d[-1] <= floor:
        return True
    if len(d) < 2:
        return False
    prev = d[-min(4, len(d)):-1]
    return bool(d[-1] < 0.9 * prev.max())


def _central_weights(k, npts):
    offs = np.arange(npts) - npts // 2
    V = np.vander(offs.astype(float), npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[k] = math.factorial(k)
    return offs, np.linalg.solve(V, rhs)


_STENCIL_POINTS = {1: 5, 2: 5, 3: 7, 4: 7, 5: 9}


def log_step(k):
    return max(1e-2, np.finfo(float).eps ** (1.0 / (k + 4)))


def log_domain_derivative(f, t, k, h=None):
    """k-th derivative of ``u -> f(exp(u))`` at ``u = log t``.

    Fourth-order central stencils; orders above 5 are refused because the
    stencil is then dominated by rounding noise.
    """
    if k == 0:
        return f(t)
    if not 1 <= k <= 5:
        raise NumericsError(f"log-domain derivative of order {k} is not supported (max 5)")
    h = log_step(k) if h is None else h
    offs, w = _central_weights(k, _STENCIL_POINTS[k])
    u = np.log(t)
    vals = [f(np.exp(u + o * h)) for o in offs]
    return sum(wi * v for wi, v in zip(w, vals)) / h ** k


def falling_factorial(z, k):
    """(z)_k = z (z-1) ... (z-k+1); (z)_0 = 1."""
    out = 1
    for i in range(k):
        out *= z - i
    return out
