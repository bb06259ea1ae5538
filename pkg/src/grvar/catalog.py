"""Registry of worked examples with known rate vectors and indices.

Each entry packages f, its rate vector g, index matrix B and g-index c,
together with the verification thresholds that suit its convergence
speed (from t^-3 for Stirling-type series down to 1/log log t for
iterated logarithms).
"""
import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math
from typing import Optional

import mpmath as mp
import numpy as np
from scipy.special import gammaln

from .gamma_inverse import GammaClassFunction, inverse_function, q_ladder
from .grv_core import (DecayReport, GrvFunction, RateVector, ScalarFunction, Thresholds,
                       default_t_grid, grv_check, rv_check)
from .numerics import falling_factorial
from .transforms import stirling1
from .trimat import IndexMatrix, jordan_block


class CatalogError(ValueError):
    pass


# convergence like 1/log t; and like 1/log log t for the slowest entries
LOG_THRESHOLDS = Thresholds(slope_min=0.03, ratio_max=0.05)
SLOW_THRESHOLDS = Thresholds(slope_min=0.005, ratio_max=0.15)
# transforms: C_i / L_i - 1 ~ L_{i+1} / L_i, measured on a longer grid
TRANSFORM_THRESHOLDS = Thresholds(slope_min=0.02, ratio_max=0.05)
LOG_POTTER_RANGE = (1e2, 1e30, 60)


# -- special functions ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli_numbers(m):
    """B_0..B_m as Fractions (B_1 = -1/2), from sum_{k<=j} binom(j+1, k) B_k = 0."""
    B = [Fraction(1)]
    for j in range(1, m + 1):
        B.append(-sum(math.comb(j + 1, k) * B[k] for k in range(j)) / (j + 1))
    return tuple(B)


def log_upper_gamma(s, x, rtol=1e-15, maxiter=500):
    """log Gamma(s, x) for s > 0 and x > 0, vectorised over x.

    Power series of the lower function for x < s + 1, modified Lentz
    continued fraction otherwise.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    ser = x < s + 1
    if ser.any():
        xs = x[ser]
        term = np.full_like(xs, 1.0 / s)
        total = term.copy()
        for k in range(1, maxiter):
            term = term * xs / (s + k)
            total = total + term
            if np.all(np.abs(term) < rtol * np.abs(total)):
                break
        lower = np.exp(-xs + s * np.log(xs) + np.log(total) - math.lgamma(s))
        out[ser] = math.lgamma(s) + np.log1p(-lower)
    cf = ~ser
    if cf.any():
        xc = x[cf]
        tiny = 1e-300
        b = xc + 1 - s
        c = np.full_like(xc, 1 / tiny)
        d = 1 / b
        h = d.copy()
        for i in range(1, maxiter):
            an = -i * (i - s)
            b = b + 2
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1 / d
            delta = d * c
            h = h * delta
            if np.all(np.abs(delta - 1) < rtol):
                break
        out[cf] = -xc + s * np.log(xc) + np.log(h)
    return out


def lambert_w(t, tol=1e-13, maxiter=100):
    """Principal branch of W for t > 0 by Halley iteration on w e^w = t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("lambert_w is implemented for t > 0")
    big = t > math.e
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(big, np.log(t) - np.log(np.log(np.maximum(t, math.e))), np.log1p(t) * 0.7)
    for _ in range(maxiter):
        ew = np.exp(w)
        r = w * ew - t
        step = r / (ew * (w + 1) - (w + 2) * r / (2 * w + 2))
        w = w - step
        if np.all(np.abs(w * np.exp(w) - t) <= tol * t):
            break
    return w


# -- derivative helpers ------------------------------------------------------------------

def _chain_log(phi_derivs, n, t):
    """D^n of phi(log t) from phi', phi'', ...: t^-n sum_k s(n, k) phi^(k)(log t)."""
    u = np.log(t)
    return t ** (-n) * sum(stirling1(n, k) * phi_derivs[k - 1](u) for k in range(1, n + 1))


def _exp_compose(psi_derivs, u, n):
    """phi^(0..n) for phi = exp(psi) from psi^(1..n): phi^(m+1) = sum binom(m,k) psi^(k+1) phi^(m-k)."""
    phi = [np.exp(psi_derivs[0](u))]
    ps = [None] + [psi_derivs[k](u) for k in range(1, n + 1)]
    for m in range(n):
        phi.append(sum(math.comb(m, k) * ps[k + 1] * phi[m - k] for k in range(m + 1)))
    return phi


def _hazard_jet_mp(b, p, x, order, dps=60):
    """[q, Dq, ..., D^order q] for q = 1/r, r = w / I with w = x^(b+p-1) e^(-x^p/p),
    I = p^(b/p) Gamma(b/p + 1, x^p/p); uses r' = r (sigma + r)."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        b, p = mp.mpf(b), mp.mpf(p)
        s = b / p + 1
        z = x ** p / p
        logr = (b + p - 1) * mp.log(x) - z - (b / p) * mp.log(p) - mp.log(mp.gammainc(s, z))
        r = [mp.exp(logr)]
        c = b + p - 1

        def sigma(m):
            return c * (-1) ** m * mp.factorial(m) * x ** (-1 - m) - mp.ff(p - 1, m) * x ** (p - 1 - m)

        for k in range(1, order + 1):
            r.append(mp.fsum(mp.binomial(k - 1, m) * r[k - 1 - m] * (sigma(m) + r[m])
                             for m in range(k)))
        q = [1 / r[0]]
        for k in range(1, order + 1):
            q.append(-mp.fsum(mp.binomial(k, m) * r[m] * q[k - m] for m in range(1, k + 1)) / r[0])
        return [float(v) for v in q]


def _vectorize_jet(jet, k):
    def func(t):
        arr = np.asarray(t, dtype=float)
        out = np.array([jet(float(v))[k] for v in arr.ravel()]).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out
    return func


# -- entries -------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """One worked example.

    ``kind`` is ``exact`` (remainder vanishes identically), ``asymptotic``
    or ``rate_vector`` (only g and B; no f).  ``family`` selects the
    estimation tolerance: ``power`` or ``log``.
    """
    name: str
    F: Optional[GrvFunction]
    kind: str
    thresholds: Thresholds = field(default_factory=Thresholds)
    notes: str = ""
    g_only: Optional[RateVector] = None
    B_only: Optional[IndexMatrix] = None
    expected_negative: bool = False
    t_range: tuple = (1e2, 1e8, 40)
    family: str = "log"
    gamma: Optional[GammaClassFunction] = None
    q_range: Optional[tuple] = None
    smooth: bool = False
    estimate_range: Optional[tuple] = None
    jordan_fail_index: Optional[int] = None
    rv_thresholds: Optional[Thresholds] = None
    transform_range: tuple = (1e2, 1e16, 40)
    potter_range: tuple = (1e2, 1e8, 40)
    transform_thresholds: Thresholds = TRANSFORM_THRESHOLDS

    @property
    def g(self):
        return self.F.g if self.F is not None else self.g_only

    @property
    def B(self):
        return self.F.B if self.F is not None else self.B_only

    @property
    def n(self):
        return self.g.n

    def t_grid(self, lo=None, hi=None, points=None):
        a, b, m = self.t_range
        return default_t_grid(lo or a, hi or b, points or m)

    def potter_grid(self):
        return default_t_grid(*self.potter_range)

    def transform_grid(self):
        return default_t_grid(*self.transform_range)

    def estimation_grid(self):
        return default_t_grid(*(self.estimate_range or self.t_range))

    def check(self, t_grid=None, x_probes=None, precise=None):
        """grv_check for function entries, rv_check for rate vectors."""
        from .grv_core import DEFAULT_X_PROBES
        t = self.t_grid() if t_grid is None else t_grid
        xs = DEFAULT_X_PROBES if x_probes is None else x_probes
        if self.F is None:
            return rv_check(self.g, self.B, t, xs, self.rv_thresholds or self.thresholds,
                            self.name, precise)
        return grv_check(self.F, t, xs, self.thresholds, self.name, precise)

    def outcome(self, report: DecayReport):
        """True when the report is what the entry expects (inverted for
        expected-negative entries)."""
        return (not report.passed) if self.expected_negative else report.passed

    def to_dict(self):
        d = {
            "name": self.name,
            "n": self.n,
            "kind": self.kind,
            "B": self.B.tolist(),
            "thresholds": {"slope_min": self.thresholds.slope_min,
                           "ratio_max": self.thresholds.ratio_max},
            "expected_negative": self.expected_negative,
            "notes": self.notes,
        }
        if self.F is not None:
            d["c"] = [float(v) for v in self.F.c]
        return d


def _sf(func, t_min, name, mpf=None):
    return ScalarFunction(func, t_min=t_min, mp=mpf, name=name)


def _const(v, name, t_min=0.0):
    return ScalarFunction(lambda t: np.full_like(np.asarray(t, dtype=float), v) if np.ndim(t) else float(v),
                          t_min=t_min, mp=lambda t: mp.mpf(v), name=name)


def _pi_entry(name, phi_derivs, n, t_min, kind, thresholds, notes, extra_gauges=2, **kw):
    """f(t) = phi(log t) with L_k = phi^(k)(log t), B = J_n, c = e_1.

    ``phi_derivs[k]`` is phi^(k) as a function of u = log t, for k up to
    n + extra_gauges; orders above n serve as remainder gauges.
    """
    def level(k):
        return lambda t: phi_derivs[k](np.log(np.asarray(t, dtype=float)))

    L = tuple(_sf(level(k), t_min, f"L_{k}[{name}]") for k in range(1, n + 1))
    gauges = tuple(level(k) for k in range(n + 1, min(len(phi_derivs), n + 1 + extra_gauges)))
    f = ScalarFunction(level(0), t_min=t_min, log_derivs=L, name=name)
    g = RateVector(L, gauges=gauges)
    F = GrvFunction(f, g, jordan_block(n).entries, np.eye(n)[0])
    kw.setdefault("potter_range", LOG_POTTER_RANGE)
    return CatalogEntry(name, F, kind, thresholds, notes, smooth=True, **kw)


def entry_power_series(a_coeffs, alpha, n, name="power_series"):
    """f(t) = sum_{k>=1} a_k t^{-k alpha} with g_k = t^{-k alpha},
    B = diag(-alpha, ..., -n alpha), c_k = -k a_k alpha.

    ``a_coeffs[0]`` is a_1.  The entry is exact when no coefficient beyond
    index n is non-zero.
    """
    if not alpha > 0:
        raise CatalogError("alpha must be positive")
    a = [float(v) for v in a_coeffs]
    if len(a) < n:
        a = a + [0.0] * (n - len(a))
    if any(a[k] == 0 for k in range(n)):
        raise CatalogError("a_1..a_n must be non-zero for g to be the rate vector of f")
    exact = all(v == 0 for v in a[n:])

    def f(t):
        t = np.asarray(t, dtype=float)
        return sum(ak * t ** (-(k + 1) * alpha) for k, ak in enumerate(a))

    def f_mp(t):
        return mp.fsum(mp.mpf(ak) * t ** (-(k + 1) * mp.mpf(alpha)) for k, ak in enumerate(a))

    comps = tuple(_sf(lambda t, k=k: np.asarray(t, dtype=float) ** (-k * alpha), 0.0, f"t^-{k}a",
                      lambda t, k=k: t ** (-k * mp.mpf(alpha))) for k in range(1, n + 1))
    gauges = () if exact else (lambda t: np.asarray(t, dtype=float) ** (-(n + 1) * alpha),)
    g = RateVector(comps, gauges=gauges)
    B = np.diag([-(k + 1) * alpha for k in range(n)])
    c = [-(k + 1) * a[k] * alpha for k in range(n)]
    F = GrvFunction(_sf(f, 0.0, name, f_mp), g, B, c)
    return CatalogEntry(name, F, "exact" if exact else "asymptotic", Thresholds(),
                        "power series in t^-alpha", family="power")


def entry_log_gamma(n=1, name="log_gamma"):
    """log Gamma with g = (t log t, t, 1, t^-1, t^-3, ...) and n Stirling corrections."""
    if n < 0:
        raise CatalogError("n must be non-negative")
    Bn = bernoulli_numbers(2 * n + 2)
    comps = [
        _sf(lambda t: np.asarray(t, dtype=float) * np.log(t), 0.0, "t log t", lambda t: t * mp.log(t)),
        _sf(lambda t: np.asarray(t, dtype=float), 0.0, "t", lambda t: t),
        _const(1.0, "1"),
    ]
    diag = [1.0, 1.0, 0.0]
    c = [Fraction(1), Fraction(0), Fraction(-1, 2)]
    for m in range(1, n + 1):
        e = -2 * m + 1
        comps.append(_sf(lambda t, e=e: np.asarray(t, dtype=float) ** e, 0.0, f"t^{e}",
                         lambda t, e=e: t ** e))
        diag.append(float(e))
        c.append(-Bn[2 * m] / (2 * m))
    B = np.diag(diag)
    B[0, 1] = 1.0
    e_next = -2 * n - 1
    g = RateVector(tuple(comps), gauges=(lambda t: np.asarray(t, dtype=float) ** e_next,))
    f = _sf(lambda t: gammaln(np.asarray(t, dtype=float)), 0.5, "log_gamma", mp.loggamma)
    F = GrvFunction(f, g, B, [float(v) for v in c], tuple(c))
    return CatalogEntry(name, F, "asymptotic", Thresholds(), "Stirling series",
                        family="power", estimate_range=(1e1, 1e4, 40))


def _gamma_entry(name, G, n, f, thresholds, notes, kind="asymptotic", q_range=None, gauges=2,
                 t_range=(1e2, 1e8, 40)):
    """Entry for f = A^{-1} with L_i = q_i o f, B = J_n, c = e_1."""
    Q = q_ladder(G, min(n + gauges, G.order))
    L = tuple(_sf(lambda t, i=i: Q.evaluate(i, f(t)), f.t_min, f"L_{i}[{name}]")
              for i in range(1, n + 1))
    extra = tuple((lambda t, i=i: Q.evaluate(i, f(t))) for i in range(n + 1, Q.n + 1))
    f = ScalarFunction(f.func, t_min=f.t_min, log_derivs=L, name=name)
    F = GrvFunction(f, RateVector(L, gauges=extra), jordan_block(n).entries, np.eye(n)[0])
    return CatalogEntry(name, F, kind, thresholds, notes, gamma=G, q_range=q_range, smooth=True,
                        t_range=t_range, potter_range=LOG_POTTER_RANGE)


def _lambert_gamma(order):
    def dq(k):
        return lambda t: (-1) ** (k - 1) * math.factorial(k) * (1 + np.asarray(t, dtype=float)) ** (-k - 1)
    q = ScalarFunction(lambda t: 1 - 1 / (1 + np.asarray(t, dtype=float)), t_min=0.0,
                       derivs=tuple(dq(k) for k in range(1, order)), name="q[lambert_w]")
    logA = ScalarFunction(lambda t: np.log(t) + np.asarray(t, dtype=float), t_min=1e-300,
                          derivs=(lambda t: 1 / np.asarray(t, dtype=float) + 1,))
    return GammaClassFunction(q, 1.0, math.e, -1.0, q_inf=1.0, log_A=logA, name="lambert_w")


def entry_lambert_w(n=3, name="lambert_w"):
    if n < 1:
        raise CatalogError("n must be at least 1")
    G = _lambert_gamma(max(n + 2, 5))
    f = _sf(lambert_w, math.e, "W")
    return _gamma_entry(name, G, n, f, Thresholds(slope_min=0.0, ratio_max=0.05),
                        "inverse of t e^t", q_range=(1e1, 1e6, 30))


def _hazard_gamma(b, p, order, name):
    """Gamma-class data for A(x) = 1 / (p^(b/p) Gamma(b/p + 1, x^p / p))."""
    s = b / p + 1

    def log_A(x):
        x = np.asarray(x, dtype=float)
        out = -(b / p) * math.log(p) - log_upper_gamma(s, x ** p / p)
        return out if out.shape == x.shape else out.reshape(x.shape)

    def dlog_A(x):
        x = np.asarray(x, dtype=float)
        lr = (b + p - 1) * np.log(x) - x ** p / p + log_A(x)
        return np.exp(lr)

    @lru_cache(maxsize=4096)
    def jet(x):
        return _hazard_jet_mp(b, p, x, order - 1)

    q = ScalarFunction(_vectorize_jet(jet, 0), t_min=1e-8,
                       derivs=tuple(_vectorize_jet(jet, k) for k in range(1, order)), name=f"q[{name}]")
    logA = ScalarFunction(log_A, t_min=1e-8, derivs=(dlog_A,), name=f"logA[{name}]")
    # q -> 1 with Dq ~ -b t^-2 when p = 1; otherwise Dq ~ (1 - p) t^-p
    if p == 1:
        alpha, q_inf = -1.0, 1.0
    else:
        alpha = 1.0 - p
        q_inf = 0.0 if alpha < 0 else None
    t0 = 1.0
    A0 = float(np.exp(log_A(np.array([t0])))[0])
    return GammaClassFunction(q, t0, A0, alpha, q_inf=q_inf, log_A=logA, name=name)


def entry_compl_gamma(b, n=3, name=None):
    """f = inverse of 1 / Gamma(b + 1, x); f = log when b = 0."""
    name = name or f"compl_gamma[b={b:g}]"
    if b <= -1:
        raise CatalogError("need b > -1")
    G = _hazard_gamma(b, 1.0, max(n + 2, 5), name)
    f = inverse_function(G)
    kind = "exact" if b == 0 else "asymptotic"
    if b == 0 and n != 1:
        raise CatalogError("b = 0 gives f = log, which is of order 1 only")
    return _gamma_entry(name, G, n, f, LOG_THRESHOLDS, "inverse complementary gamma", kind=kind,
                        q_range=(1e1, 1e5, 30), gauges=0 if b == 0 else 2)


def entry_compl_error(b, p, n=3, name=None):
    """f = inverse of 1 / (p^(b/p) Gamma(b/p + 1, x^p/p)); f = (p log t)^(1/p) when b = 0."""
    name = name or f"compl_error[b={b:g},p={p:g}]"
    if not p > 0 or p == 1:
        raise CatalogError("need p > 0 and p != 1")
    if any(math.isclose(p, 1 / k) for k in range(2, n)):
        from .gamma_inverse import DegenerateCaseError
        raise DegenerateCaseError(f"p = {p} is excluded for n = {n}")
    G = _hazard_gamma(b, p, max(n + 2, 5), name)
    f = inverse_function(G)
    exact = b == 0 and float(1 / p).is_integer() and int(round(1 / p)) == n
    q_range = (1e1, 1e4, 30) if p > 1 else (1e2, 1e12, 30)
    return _gamma_entry(name, G, n, f, LOG_THRESHOLDS, "inverse complementary error",
                        kind="exact" if exact else "asymptotic", q_range=q_range,
                        gauges=0 if exact else 2)


def _loglog_derivs(m):
    return [lambda u: np.log(u)] + [
        (lambda u, k=k: (-1) ** (k - 1) * math.factorial(k - 1) * u ** (-k)) for k in range(1, m + 1)]


def _loglog_sq_derivs(m):
    a = [0.0] + [(-1) ** (k - 1) * math.factorial(k - 1) for k in range(1, m + 1)]
    bb = [0.0, 0.0]
    for k in range(2, m + 1):
        bb.append(a[k - 1] - (k - 1) * bb[k - 1])
    return [lambda u: np.log(u) ** 2] + [
        (lambda u, k=k: 2 * u ** (-k) * (a[k] * np.log(u) + bb[k])) for k in range(1, m + 1)]


def logloglog_coefficients(m):
    """a[k][j], j = 1..k: D^k log log u = u^-k sum_j a_kj (log u)^-j."""
    a = {1: {1: 1}}
    for k in range(1, m):
        a[k + 1] = {j: -k * a[k].get(j, 0) - (j - 1) * a[k].get(j - 1, 0) for j in range(1, k + 2)}
    return a


def _logloglog_derivs(m):
    a = logloglog_coefficients(m)
    return [lambda u: np.log(np.log(u))] + [
        (lambda u, k=k: u ** (-k) * sum(c * np.log(u) ** (-j) for j, c in a[k].items()))
        for k in range(1, m + 1)]


def entry_iterated_logs(variant, n=3, name=None):
    table = {
        "loglog": (_loglog_derivs, math.e, LOG_THRESHOLDS),
        "loglog_squared": (_loglog_sq_derivs, math.e, LOG_THRESHOLDS),
        "logloglog": (_logloglog_derivs, math.exp(math.e), LOG_THRESHOLDS),
    }
    if variant not in table:
        raise CatalogError(f"unknown iterated-log variant {variant!r}")
    make, t_min, th = table[variant]
    return _pi_entry(name or variant, make(n + 2), n, t_min, "asymptotic", th, "iterated logarithm")


def _superlog_psi(variant, a, m):
    if variant == "exp_log_alpha":
        return [lambda u: u ** a] + [(lambda u, k=k: falling_factorial(a, k) * u ** (a - k))
                                     for k in range(1, m + 1)]

    # psi(u) = u / log u = u g(u), g = 1/log u; psi^(k) = u g^(k) + k g^(k-1)
    def g(k):
        if k == 0:
            return lambda u: 1 / np.log(u)
        return lambda u: u ** (-k) * sum(stirling1(k, j) * (-1) ** j * math.factorial(j)
                                         * np.log(u) ** (-1 - j) for j in range(1, k + 1))
    return [lambda u: u / np.log(u)] + [(lambda u, k=k: u * g(k)(u) + k * g(k - 1)(u))
                                        for k in range(1, m + 1)]


def _superlog_gamma(a, order):
    """q for A(y) = exp((log y)^(1/a)): q(y) = y psi(log y), psi(l) = a l^(1 - 1/a)."""
    gm = 1 - 1 / a

    def psi(k):
        return lambda l: a * falling_factorial(gm, k) * l ** (gm - k)

    def chi(k):  # k-th derivative of psi + psi' = Dq as a function of l
        return lambda l: psi(k)(l) + psi(k + 1)(l)

    def dq(n):
        if n == 1:
            return lambda y: chi(0)(np.log(y))
        return lambda y: np.asarray(y, dtype=float) ** (-(n - 1)) * sum(
            stirling1(n - 1, k) * chi(k)(np.log(y)) for k in range(1, n))

    q = ScalarFunction(lambda y: np.asarray(y, dtype=float) * psi(0)(np.log(y)), t_min=math.e,
                       derivs=tuple(dq(k) for k in range(1, order)), name="q[superlog]")
    logA = ScalarFunction(lambda y: np.log(y) ** (1 / a), t_min=1.0,
                          derivs=(lambda y: (1 / a) * np.log(y) ** (1 / a - 1) / y,))
    t0 = math.e
    return GammaClassFunction(q, t0, math.e, 1.0, log_A=logA, name="superlog")


def entry_superlog(variant, n=2, a=0.5, name=None):
    if variant not in ("exp_log_alpha", "exp_log_over_loglog"):
        raise CatalogError(f"unknown superlog variant {variant!r}")
    if variant == "exp_log_alpha" and not 0 < a < 1:
        raise CatalogError("need 0 < a < 1")
    m = n + 2
    psi = _superlog_psi(variant, a, m)
    phi = [(lambda u, k=k: _exp_compose(psi, u, k)[k]) for k in range(m + 1)]
    t_min = math.e if variant == "exp_log_alpha" else math.exp(math.e)
    th = LOG_THRESHOLDS if variant == "exp_log_alpha" else SLOW_THRESHOLDS
    # ratios of consecutive L_k decay like (log t)^(a-1) and 1/log log t respectively
    tth = SLOW_THRESHOLDS if variant == "exp_log_alpha" else Thresholds(slope_min=0.003, ratio_max=0.15)
    entry = _pi_entry(name or ("superlog_sqrt" if variant == "exp_log_alpha" and a == 0.5 else variant),
                      phi, n, t_min, "asymptotic", th,
                      "superlogarithmic growth", transform_thresholds=tth)
    if variant == "exp_log_alpha":
        G = _superlog_gamma(a, 6)
        entry = dataclasses.replace(entry, gamma=G, q_range=(1e10, 1e60, 30))
    return entry


def entry_log_power(p, n, name=None):
    """(log t)^p with L_k = (p)_k (log t)^(p-k); exact for integer p = n."""
    if p == 0:
        raise CatalogError("p must be non-zero")
    integer = float(p).is_integer() and p > 0
    if integer and n > p:
        raise CatalogError("for integer p the order cannot exceed p")
    m = n + 2
    phi = [(lambda u, k=k: falling_factorial(p, k) * u ** (p - k)) for k in range(m + 1)]
    exact = integer and n == p
    th = Thresholds() if exact else LOG_THRESHOLDS
    return _pi_entry(name or f"log_power[{p:g}]", phi, n, math.e, "exact" if exact else "asymptotic",
                     th, "power of the logarithm", extra_gauges=0 if exact else 2)


def entry_log_loglog_a(n=2, name="log_loglog_a"):
    """f = log t log log t: L_1 = 1 + log log t, L_k = (-1)^k (k-2)! (log t)^(1-k)."""
    m = n + 2
    phi = [lambda u: u * np.log(u), lambda u: 1 + np.log(u)] + [
        (lambda u, k=k: (-1) ** k * math.factorial(k - 2) * u ** (1 - k)) for k in range(2, m + 1)]
    return _pi_entry(name, phi, n, math.e, "asymptotic", LOG_THRESHOLDS,
                     "log times log log")


def _log_loglog_gamma(order):
    """q(y) = (log y)^2 / (log y - 1) for A(y) = exp(y / log y)."""
    def phi(k):
        if k == 0:
            return lambda l: l ** 2 / (l - 1)
        if k == 1:
            return lambda l: 1 - (l - 1) ** -2.0
        return lambda l: (-1) ** k * math.factorial(k) * (l - 1) ** (-k - 1.0)

    q = ScalarFunction(lambda y: phi(0)(np.log(y)), t_min=math.e * 1.01,
                       derivs=tuple((lambda y, k=k: _chain_log([phi(j) for j in range(1, k + 1)], k,
                                                               np.asarray(y, dtype=float)))
                                    for k in range(1, order)), name="q[log_loglog_b]")
    logA = ScalarFunction(lambda y: np.asarray(y, dtype=float) / np.log(y), t_min=math.e * 1.01,
                          derivs=(lambda y: 1 / np.log(y) - 1 / np.log(y) ** 2,))
    t0 = 5.0
    return GammaClassFunction(q, t0, math.exp(t0 / math.log(t0)), 0.0, log_A=logA, name="log_loglog_b")


def entry_log_loglog_b(n=2, name="log_loglog_b"):
    G = _log_loglog_gamma(max(n + 2, 5))
    f = inverse_function(G)
    return _gamma_entry(name, G, n, f, LOG_THRESHOLDS,
                        "inverse of exp(t / log t)", q_range=(1e10, 1e60, 30))


def entry_log_floor(n=2, name="log_floor"):
    """log floor(t): Pi-varying of order 1 only; for n >= 2 the check must fail."""
    if n not in (1, 2):
        raise CatalogError("log_floor is defined for n in {1, 2}")
    f = _sf(lambda t: np.log(np.floor(t)), 1.0, "log_floor")
    comps = [_const(1.0, "1", 1.0)]
    diag = [0.0]
    if n == 2:
        comps.append(_sf(lambda t: 1 / np.asarray(t, dtype=float), 1.0, "1/t"))
        diag.append(-1.0)
    F = GrvFunction(f, RateVector(tuple(comps)), np.diag(diag), [1.0] + [0.0] * (n - 1))
    return CatalogEntry(name, F, "asymptotic", Thresholds(), "order-1 only",
                        expected_negative=(n >= 2), family="power")


def entry_no_jordan(variant):
    """Rate vectors whose index matrix cannot be reduced to a Jordan block.

    Remainder gauges come from expanding the components in u = log t.
    """
    L = lambda t: np.log(np.asarray(t, dtype=float))  # noqa: E731
    one = _const(1.0, "1", 1.0)
    th = Thresholds(slope_min=0.02, ratio_max=0.05)
    if variant == "a":
        comps = (_sf(L, 1.0, "log"), _sf(lambda t: np.sqrt(L(t)), 1.0, "sqrt log"), one)
        B = [[0, 0, 1], [0, 0, 0], [0, 0, 0]]
        gauges = (lambda t: L(t) ** -0.5, lambda t: L(t) ** -1.5)
        idx = 1
    elif variant == "b":
        comps = (_sf(lambda t: L(t) ** 1.5, 1.0, "log^1.5"), _sf(lambda t: np.sqrt(L(t)), 1.0, "sqrt log"), one)
        B = [[0, 1.5, 0], [0, 0, 0], [0, 0, 0]]
        gauges = (lambda t: L(t) ** -0.5, lambda t: L(t) ** -1.5)
        idx = 2
    elif variant == "c":
        comps = (one, _sf(lambda t: 1 / L(t), math.e, "1/log"), _sf(lambda t: L(t) ** -2.0, math.e, "log^-2"))
        B = [[0, 0, 0], [0, 0, -1], [0, 0, 0]]
        gauges = (lambda t: L(t) ** -3.0, lambda t: L(t) ** -4.0)
        idx = 1
    elif variant == "d":
        comps = (_sf(L, 1.0, "log"), _sf(lambda t: np.log(L(t)), math.e, "log log"))
        B = [[0, 0], [0, 0]]
        gauges = (lambda t: np.ones_like(L(t)), lambda t: 1 / L(t))
        idx = 1
        th = Thresholds(slope_min=0.01, ratio_max=0.05)
    else:
        raise CatalogError(f"unknown variant {variant!r}")
    return CatalogEntry(f"no_jordan_{variant}", None, "rate_vector", th, "no Jordan reduction",
                        g_only=RateVector(comps, gauges=gauges), B_only=IndexMatrix(B),
                        jordan_fail_index=idx, potter_range=LOG_POTTER_RANGE)


# -- registry ------------------------------------------------------------------------------

_FACTORIES = {
    "power_series": (lambda n: entry_power_series((1, 1, 1), 1.0, n or 2), True),
    "power_series_exact": (lambda n: entry_power_series((1, 0.5, 0.25), 0.5, 3, "power_series_exact"), False),
    "log_gamma": (lambda n: entry_log_gamma(1 if n is None else n), True),
    "lambert_w": (lambda n: entry_lambert_w(n or 3), True),
    "compl_gamma_b0": (lambda n: entry_compl_gamma(0.0, 1, "compl_gamma_b0"), False),
    "compl_gamma_b1": (lambda n: entry_compl_gamma(1.0, n or 3, "compl_gamma_b1"), True),
    "compl_gamma_bm05": (lambda n: entry_compl_gamma(-0.5, n or 3, "compl_gamma_bm05"), True),
    "compl_error_p05_b0": (lambda n: entry_compl_error(0.0, 0.5, 2, "compl_error_p05_b0"), False),
    "compl_error_p2_b0": (lambda n: entry_compl_error(0.0, 2.0, n or 3, "compl_error_p2_b0"), True),
    "compl_error_p2_b1": (lambda n: entry_compl_error(1.0, 2.0, n or 3, "compl_error_p2_b1"), True),
    "compl_error_p04_b0": (lambda n: entry_compl_error(0.0, 0.4, n or 3, "compl_error_p04_b0"), True),
    "compl_error_p04_b1": (lambda n: entry_compl_error(1.0, 0.4, n or 3, "compl_error_p04_b1"), True),
    "loglog": (lambda n: entry_iterated_logs("loglog", n or 3), True),
    "loglog_squared": (lambda n: entry_iterated_logs("loglog_squared", n or 3), True),
    "logloglog": (lambda n: entry_iterated_logs("logloglog", n or 3), True),
    "superlog_sqrt": (lambda n: entry_superlog("exp_log_alpha", n or 2), True),
    "superlog_loglog": (lambda n: entry_superlog("exp_log_over_loglog", n or 2, name="superlog_loglog"), True),
    "log_power_1": (lambda n: entry_log_power(1, 1, "log_power_1"), False),
    "log_power_2": (lambda n: entry_log_power(2, 2, "log_power_2"), False),
    "log_power_3": (lambda n: entry_log_power(3, 3, "log_power_3"), False),
    "log_power_half": (lambda n: entry_log_power(0.5, n or 3, "log_power_half"), True),
    "log_loglog_a": (lambda n: entry_log_loglog_a(n or 2), True),
    "log_loglog_b": (lambda n: entry_log_loglog_b(n or 2), True),
    "log_floor": (lambda n: entry_log_floor(n or 2), True),
    "no_jordan_a": (lambda n: entry_no_jordan("a"), False),
    "no_jordan_b": (lambda n: entry_no_jordan("b"), False),
    "no_jordan_c": (lambda n: entry_no_jordan("c"), False),
    "no_jordan_d": (lambda n: entry_no_jordan("d"), False),
}


def entry_names():
    return list(_FACTORIES)


@lru_cache(maxsize=None)
def get_entry(name, n=None):
    """Build a registry entry; ``n`` overrides the order where the entry has one."""
    if name not in _FACTORIES:
        raise CatalogError(f"unknown entry {name!r}")
    factory, takes_n = _FACTORIES[name]
    return factory(n if takes_n else None)


def function_entries():
    """Entries with an f (everything except bare rate vectors and the negative control)."""
    return [k for k in _FACTORIES
            if not k.startswith("no_jordan") and k != "log_floor"]
