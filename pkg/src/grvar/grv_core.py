"""Rate vectors, GRV functions and their numerical verification.

A rate vector ``g`` is regularly varying with index matrix ``B`` when
``g(xt) = x**B g(t) + o(g_n(t))``; a function ``f`` is in ``GRV(g)`` when
``f(xt) - f(t) = h(x) g(t) + o(g_n(t))`` with ``h(x) = c H_B(x)``.  The
``o(.)`` statements are checked on a geometric grid of ``t`` values: the
normalised remainders must either decay (negative log-log slope) or end
below a threshold.

Components may carry an mpmath evaluator.  When every piece of a check has
one, remainders are formed in extended precision, which matters whenever
``|f|`` or ``|g_1|`` is many orders of magnitude above ``|g_n|``.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import json
import math
from typing import Callable, Optional

import mpmath as mp
import numpy as np

from .numerics import NumericsError, quadrature_vec, richardson
from .trimat import (DomainError, IndexMatrix, ReductionError, as_utm, limit_row,
                     mat_H, mat_H_mp, mat_power_mp, mat_power_x, max_norm,
                     UpperTriangularMatrix)

DEFAULT_X_PROBES = (0.25, 0.5, 1 / math.e, 1.0, math.e, 2.0, 4.0)


def default_t_grid(lo=1e2, hi=1e8, points=40):
    return np.geomspace(lo, hi, points)


class EstimationError(NumericsError):
    """A limit estimate did not settle; ``trace`` holds the extrapolation."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# -- function containers ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarFunction:
    """Real function on ``[t_min, inf)``.

    ``func`` must accept numpy arrays.  ``derivs[k-1]`` is the exact k-th
    derivative, ``log_derivs[k-1]`` the exact ``D^k (f o exp) o log``, and
    ``mp`` an optional scalar mpmath evaluator.
    """
    func: Callable
    t_min: float = 1.0
    derivs: tuple = ()
    log_derivs: tuple = ()
    mp: Optional[Callable] = None
    name: str = ""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min):
            raise DomainError(f"{self.name or 'function'}: t below t_min={self.t_min}")
        out = self.func(t)
        return float(out) if np.ndim(out) == 0 else out

    def eval_mp(self, t):
        if self.mp is None:
            raise ValueError(f"{self.name}: no extended-precision evaluator")
        if t < self.t_min:
            raise DomainError(f"{self.name or 'function'}: t below t_min={self.t_min}")
        return self.mp(mp.mpf(t))


@dataclass(frozen=True, eq=False)
class RateVector:
    """Ordered components g_1, ..., g_n with g_{i+1} = o(g_i).

    ``gauges`` optionally lists functions describing the leading behaviour
    of the o(g_n) remainder; they are only used to accelerate limits.
    """
    components: tuple
    signs: tuple = None
    t_min: float = None
    gauges: tuple = ()

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if self.t_min is None:
            object.__setattr__(self, "t_min", max(c.t_min for c in comps))
        if self.signs is None:
            t_end = default_t_grid()[-1]
            object.__setattr__(self, "signs", tuple(int(np.sign(np.ravel(c(t_end))[0])) or 1
                                                    for c in comps))
        if len(self.signs) != len(comps):
            raise ValueError("one sign per component required")

    @property
    def n(self):
        return len(self.components)

    @property
    def has_mp(self):
        return all(c.mp is not None for c in self.components)

    def __call__(self, t):
        return np.array([c(t) for c in self.components])

    def eval_mp(self, t):
        return [c.eval_mp(t) for c in self.components]


def check_rate_vector(g, t_grid):
    """Sign and ordering diagnostics on the tail third of ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    tail = t[len(t) - max(2, len(t) // 3):]
    G = g(tail)
    sign_ok = all(np.all(np.sign(G[i]) == g.signs[i]) for i in range(g.n))
    chain_ok = True
    for i in range(g.n - 1):
        r = np.abs(G[i + 1] / G[i])
        if not r[-1] < r[0] * (1 + 1e-12) and not r[-1] < 1e-12:
            chain_ok = False
    return {"sign_ok": bool(sign_ok), "chain_ok": bool(chain_ok)}


@dataclass(frozen=True, eq=False)
class GrvFunction:
    f: ScalarFunction
    g: RateVector
    B: IndexMatrix
    c: np.ndarray
    c_exact: tuple = None  # optional Fractions, used by the extended-precision route

    def __post_init__(self):
        B = self.B if isinstance(self.B, IndexMatrix) else IndexMatrix(self.B)
        object.__setattr__(self, "B", B)
        c = np.asarray(self.c, dtype=float).ravel()
        object.__setattr__(self, "c", c)
        if not (B.n == self.g.n == len(c)):
            raise ValueError("dimensions of g, B and c disagree")

    @property
    def n(self):
        return self.g.n

    def h(self, x):
        return limit_row(self.B, self.c, x)

    @property
    def has_mp(self):
        return self.f.mp is not None and self.g.has_mp


# -- reports -------------------------------------------------------------------------

@dataclass(frozen=True)
class Thresholds:
    slope_min: float = 0.1
    ratio_max: float = 1e-2


def _label(x):
    return float(x) if isinstance(x, (int, float, np.floating)) else str(x)


@dataclass
class DecayReport:
    entry: str
    n: int
    t_grid: list
    x_probes: list
    ratios: list
    slope: Optional[float]
    final_ratio: float
    passed: bool
    monotone_fraction: float = float("nan")
    thresholds: Thresholds = field(default_factory=Thresholds)

    def to_dict(self):
        return {
            "entry": self.entry,
            "n": self.n,
            "t_grid": [float(t) for t in self.t_grid],
            "x_probes": [_label(x) for x in self.x_probes],
            "ratios": [[float(r) for r in row] for row in self.ratios],
            "slope": None if self.slope is None or not math.isfinite(self.slope) else float(self.slope),
            "final_ratio": float(self.final_ratio),
            "pass": bool(self.passed),
            "monotone_fraction": float(self.monotone_fraction),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def csv_rows(self):
        for t, row in zip(self.t_grid, self.ratios):
            for x, r in zip(self.x_probes, row):
                yield (float(t), _label(x), float(r))


def summarize(entry, n, t_grid, x_probes, ratios, thresholds=None):
    """Fit decay diagnostics to a (t, x) table of normalised remainders."""
    th = thresholds or Thresholds()
    t = np.asarray(t_grid, dtype=float)
    R = np.abs(np.asarray(ratios, dtype=float))
    if not np.all(np.isfinite(R)):
        raise NumericsError(f"{entry}: non-finite remainder ratios")
    curve = R.max(axis=1) if R.ndim == 2 and R.shape[1] else R
    final = float(curve[-1])
    half = len(t) // 2
    tt, cc = t[half:], curve[half:]
    pos = cc > 0
    slope = None
    if pos.sum() >= 3:
        slope = float(np.polyfit(np.log(tt[pos]), np.log(cc[pos]), 1)[0])
    mono = float(np.mean(np.diff(curve) <= 0)) if len(curve) > 1 else 1.0
    passed = (slope is not None and slope < -th.slope_min) or final < th.ratio_max
    return DecayReport(entry, n, list(t), list(x_probes), R.tolist(), slope, final,
                       bool(passed), mono, th)


# -- remainder tables ------------------------------------------------------------------

def _use_mp(precise, available):
    if precise is None:
        return available
    if precise and not available:
        raise ValueError("extended precision requested but evaluators are missing")
    return precise


def _to_mp(v):
    if isinstance(v, Fraction):
        return mp.mpf(v.numerator) / v.denominator
    return mp.mpf(v)


def _dps_for(big, small):
    if small == 0:
        return 50
    return max(50, int(math.log10(max(abs(big), 1.0) / abs(small))) + 30)


def grv_remainder(F, t, x, precise=None):
    """(f(xt) - f(t) - h(x) g(t)) / |g_n(t)|."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if _use_mp(precise, F.has_mp):
        return float(_grv_remainders_mp(F, [t], x)[0])
    g_t = F.g(t)
    num = F.f(x * t) - F.f(t) - F.h(x) @ g_t
    return float(num / abs(g_t[-1]))


def _grv_remainders_mp(F, ts, x):
    ts = [float(t) for t in ts]
    scale = max(_dps_for(max(abs(F.f(t)), abs(F.f(x * t)), max_norm(F.g(t))), F.g(t)[-1])
                for t in ts)
    with mp.workdps(scale):
        H = mat_H_mp(F.B.entries, x, scale)
        exact = F.c_exact if F.c_exact is not None else F.c
        c = mp.matrix([[_to_mp(v)] for v in exact]).T
        h = c * H
        out = []
        for t in ts:
            gt = F.g.eval_mp(t)
            num = F.f.eval_mp(mp.mpf(x) * t) - F.f.eval_mp(t) - sum(h[j] * gt[j] for j in range(F.n))
            out.append(float(num / abs(gt[-1])))
    return np.array(out)


def grv_remainder_table(F, t_grid, x_probes, precise=None):
    t = np.asarray(t_grid, dtype=float)
    use_mp = _use_mp(precise, F.has_mp)
    cols = []
    for x in x_probes:
        if x == 1:
            cols.append(np.zeros(len(t)))
        elif use_mp:
            cols.append(_grv_remainders_mp(F, t, x))
        else:
            G = F.g(t)
            num = F.f(x * t) - F.f(t) - F.h(x) @ G
            cols.append(num / np.abs(G[-1]))
    return np.column_stack(cols)


def rv_remainder_table(g, B, t_grid, x_probes, precise=None):
    """max-abs of g(xt) - x^B g(t), divided by |g_n(t)|."""
    B = as_utm(B)
    t = np.asarray(t_grid, dtype=float)
    use_mp = _use_mp(precise, g.has_mp)
    cols = []
    G = g(t)
    for x in x_probes:
        if x == 1:
            cols.append(np.zeros(len(t)))
            continue
        if not use_mp:
            A = mat_power_x(B, x).entries
            res = g(x * t) - A @ G
            cols.append(np.max(np.abs(res), axis=0) / np.abs(G[-1]))
            continue
        dps = max(_dps_for(max(max_norm(g(x * tt)), max_norm(g(tt))), g(tt)[-1]) for tt in t)
        with mp.workdps(dps):
            A = mat_power_mp(B.entries, x, dps)
            col = []
            for tt in t:
                gx = g.eval_mp(mp.mpf(x) * tt)
                gt = g.eval_mp(tt)
                res = [gx[i] - sum(A[i, j] * gt[j] for j in range(g.n)) for i in range(g.n)]
                col.append(float(max(abs(r) for r in res) / abs(gt[-1])))
            cols.append(np.array(col))
    return np.column_stack(cols)


def limit_matrix(g, B, x):
    """x^B, the limit in g(xt) ~ x^B g(t)."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    return mat_power_x(B, x)


def rv_check(g, B, t_grid=None, x_probes=DEFAULT_X_PROBES, thresholds=None,
             entry="", precise=None):
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    R = rv_remainder_table(g, B, t, x_probes, precise)
    return summarize(entry, g.n, t, x_probes, R, thresholds)


def grv_check(F, t_grid=None, x_probes=DEFAULT_X_PROBES, thresholds=None,
              entry="", precise=None):
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    R = grv_remainder_table(F, t, x_probes, precise)
    return summarize(entry, F.n, t, x_probes, R, thresholds)


# -- estimation ------------------------------------------------------------------------

def _accelerate(values, t, gauges, what):
    t = np.asarray(t, dtype=float)
    ratio = t[1] / t[0]
    if gauges:
        E = np.array(gauges)
        m = E.shape[0]
        w = min(len(t) - 3, max(m + 1, len(t) // 3))
        tr = richardson(values, ratio, order=m, gauges=E, window=w)
    else:
        tr = richardson(values, ratio, order=2)
    if not tr.converged:
        raise EstimationError(f"extrapolation of {what} did not converge", tr)
    return tr.limit


def _components_table(funcs, t, use_mp, x=1.0):
    if use_mp:
        return [[fn.eval_mp(mp.mpf(x) * tt) for tt in t] for fn in funcs]
    return [list(fn(x * t)) for fn in funcs]


def _gauges(g, k, t, G):
    """Error basis for the limit normalised by g_k: later components and the
    remainder gauges, all divided by g_k."""
    gk = np.array([float(v) for v in G[k]])
    out = [np.array([float(v) for v in G[j]]) / gk for j in range(k + 1, g.n)]
    out += [np.asarray(r(t), dtype=float) / gk for r in g.gauges]
    return out


def _peel(target, coeffs, rows, denom, t, gauges, what, use_mp):
    """Extrapolate (target - sum coeffs*rows) / denom along the grid.

    Already-estimated coefficients carry rounding error; their contribution
    grows like |row / denom|, so the grid is cut where that propagated
    error would exceed 1e-9 of the sequence scale.
    """
    N = len(t)
    seq = np.empty(N)
    noise = np.empty(N)
    for m in range(N):
        d = denom[m]
        acc = target[m] - sum(a * r[m] for a, r in zip(coeffs, rows))
        seq[m] = float(acc / d)
        err = sum(1e-15 * (1 + abs(a)) * abs(float(r[m] / d)) for a, r in zip(coeffs, rows))
        if not use_mp:
            err += 1e-15 * abs(float(target[m] / d))
        noise[m] = err
    scale = max(1.0, float(np.median(np.abs(seq))))
    keep = N
    bad = np.nonzero(noise > 1e-9 * scale)[0]
    if len(bad):
        keep = max(int(bad[0]), min(N, 8))
    basis = [e[:keep] for e in gauges]
    try:
        return _accelerate(seq[:keep], t[:keep], basis, what)
    except EstimationError:
        if not rows:
            raise
    # errors in the peeled coefficients leave a residue along row / denom
    drift = [np.array([float(r[m] / denom[m]) for m in range(keep)]) for r in rows]
    return _accelerate(seq[:keep], t[:keep], drift + basis, what)


def estimate_limit_functions(f, g, x, t_grid=None, precise=None):
    """Peel-off estimate of (h_1(x), ..., h_n(x)).

    h_k = lim (f(tx) - f(t) - sum_{i<k} h_i g_i(t)) / g_k(t), each limit
    extrapolated along the grid with the later components of ``g`` (and its
    remainder gauges) as the error basis.
    """
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    use_mp = _use_mp(precise, f.mp is not None and g.has_mp)
    with mp.workdps(60):
        G = _components_table(g.components, t, use_mp)
        if use_mp:
            df = [f.eval_mp(mp.mpf(x) * tt) - f.eval_mp(tt) for tt in t]
        else:
            df = list(f(x * t) - f(t))
        h = []
        for k in range(g.n):
            h.append(_peel(df, h, G[:k], G[k], t, _gauges(g, k, t, G),
                           f"h_{k + 1}({x:g})", use_mp))
    return np.array(h)


def estimate_limit_matrix(g, x, t_grid=None, precise=None):
    """Peel-off estimate of A(x) = x^B from g alone."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    use_mp = _use_mp(precise, g.has_mp)
    n = g.n
    A = np.zeros((n, n))
    with mp.workdps(60):
        G = _components_table(g.components, t, use_mp)
        Gx = _components_table(g.components, t, use_mp, x)
        for i in range(n):
            for j in range(i, n):
                A[i, j] = _peel(Gx[i], list(A[i, i:j]), G[i:j], G[j], t, _gauges(g, j, t, G),
                                f"A_{i + 1}{j + 1}({x:g})", use_mp)
    return UpperTriangularMatrix(A)


def estimate_index_matrix(g, t_grid=None, h=1e-3, x_probes=None, precise=None):
    """B from (A(x+) - A(x-)) / (log x+ - log x-), x± = exp(±h) by default."""
    if x_probes is None:
        x_probes = (math.exp(-h), math.exp(h))
    lo, hi = min(x_probes), max(x_probes)
    if not (lo < 1 < hi):
        raise ValueError("need probes on both sides of x = 1")
    Alo = estimate_limit_matrix(g, lo, t_grid, precise).entries
    Ahi = estimate_limit_matrix(g, hi, t_grid, precise).entries
    return UpperTriangularMatrix(np.triu((Ahi - Alo) / (math.log(hi) - math.log(lo))))


# -- representation --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Representation:
    v: np.ndarray
    eta: Callable
    phi: Callable
    a: float
    B: UpperTriangularMatrix

    def reconstruct(self, t, rel_tol=1e-11):
        """t^B v + eta(t) + t^B int_a^t u^{-B} phi(u) du/u."""
        negB = -self.B

        def integrand(w):
            return mat_power_x(negB, math.exp(w)).entries @ self.phi(math.exp(w))

        At = mat_power_x(self.B, t).entries
        scale = max_norm(At @ self.v) + max_norm(self.eta(t)) + 1e-300
        integral, _ = quadrature_vec(integrand, math.log(self.a), math.log(t), rel_tol=rel_tol,
                                     abs_tol=rel_tol * scale / max(1.0, max_norm(At)))
        return At @ self.v + self.eta(t) + At @ integral


def representation_components(g, B, a=None, rel_tol=1e-11):
    """v = int_a^{ea} u^{-B} g(u) du/u, eta(t) = int_1^e {g(t) - u^{-B} g(ut)} du/u,
    phi(t) = e^{-B} g(et) - g(t)."""
    B = as_utm(B)
    a = g.t_min if a is None else a
    if a < g.t_min:
        raise DomainError("base point below the domain of g")
    negB = -B
    Einv = mat_power_x(negB, math.e).entries

    def vec_g(t):
        return np.array([float(c(t)) for c in g.components])

    v, _ = quadrature_vec(lambda w: mat_power_x(negB, a * math.exp(w)).entries @ vec_g(a * math.exp(w)),
                          0.0, 1.0, rel_tol=rel_tol)

    def eta(t):
        val, _ = quadrature_vec(
            lambda w: vec_g(t) - mat_power_x(negB, math.exp(w)).entries @ vec_g(math.exp(w) * t),
            0.0, 1.0, rel_tol=rel_tol, abs_tol=rel_tol * max_norm(vec_g(t)))
        return val

    def phi(t):
        return Einv @ vec_g(math.e * t) - vec_g(t)

    return Representation(v, eta, phi, a, B)


# -- Potter certificates ---------------------------------------------------------------

@dataclass(frozen=True)
class PotterCertificate:
    t_eps: Optional[float]
    epsilon: float
    envelope: str
    margin: float

    @property
    def found(self):
        return self.t_eps is not None


def _certify(lhs, env, t, xs, epsilon, name, all_small_x=False):
    """Smallest grid t_k such that lhs <= env on every admissible (t_j, x)."""
    t = np.asarray(t, dtype=float)
    xs = np.asarray(xs, dtype=float)
    ok = lhs <= env
    for k in range(len(t)):
        rows = slice(k, None)
        adm = (xs[None, :] * t[rows, None] >= t[k] * (1 - 1e-12))
        if not all_small_x:
            adm |= xs[None, :] >= 1
        if np.all(ok[rows][adm]):
            margin = float(np.min((env[rows] - lhs[rows])[adm] / env[rows][adm])) if adm.any() else 1.0
            return PotterCertificate(float(t[k]), epsilon, name, margin)
    return PotterCertificate(None, epsilon, name, float("nan"))


def _check_eps(epsilon):
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")


def rv_envelope(B, epsilon, xs):
    b = as_utm(B).diagonal
    xs = np.asarray(xs, dtype=float)
    return np.where(xs >= 1, epsilon * xs ** (b[0] + epsilon), epsilon * xs ** (b[-1] - epsilon))


def grv_envelope(B, epsilon, xs):
    b = as_utm(B).diagonal
    xs = np.asarray(xs, dtype=float)
    return np.where(xs >= 1, epsilon * xs ** max(b[0] + epsilon, 0.0),
                    epsilon * xs ** min(b[-1] - epsilon, 0.0))


def improved_rv_envelope(B, epsilon, xs):
    bn = as_utm(B).diagonal[-1]
    xs = np.asarray(xs, dtype=float)
    return epsilon * xs ** bn * np.maximum(xs ** epsilon, xs ** -epsilon)


def improved_grv_envelope(B, epsilon, xs):
    bn = as_utm(B).diagonal[-1]
    xs = np.asarray(xs, dtype=float)
    return epsilon * np.maximum.reduce([np.ones_like(xs), xs ** (bn + epsilon), xs ** (bn - epsilon)])


def potter_certificate(g, B, epsilon, t_grid=None, x_grid=DEFAULT_X_PROBES, precise=None):
    _check_eps(epsilon)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    lhs = np.abs(rv_remainder_table(g, B, t, x_grid, precise))
    env = np.broadcast_to(rv_envelope(B, epsilon, x_grid), lhs.shape)
    return _certify(lhs, env, t, x_grid, epsilon, "rv")


def grv_potter_certificate(F, epsilon, t_grid=None, x_grid=DEFAULT_X_PROBES, precise=None):
    _check_eps(epsilon)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    lhs = np.abs(grv_remainder_table(F, t, x_grid, precise))
    env = np.broadcast_to(grv_envelope(F.B, epsilon, x_grid), lhs.shape)
    return _certify(lhs, env, t, x_grid, epsilon, "grv")


def improved_potter_certificate(g, B, epsilon, t_grid=None, x_grid=DEFAULT_X_PROBES,
                                F=None, precise=None):
    """Sharper envelopes for distinct diagonals; returns (rv, grv-or-None)."""
    _check_eps(epsilon)
    B = as_utm(B)
    if len(set(B.diagonal.tolist())) != B.n:
        raise ReductionError("improved Potter bounds need pairwise distinct diagonal entries")
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    lhs = np.abs(rv_remainder_table(g, B, t, x_grid, precise))
    env = np.broadcast_to(improved_rv_envelope(B, epsilon, x_grid), lhs.shape)
    rv = _certify(lhs, env, t, x_grid, epsilon, "improved-rv", all_small_x=True)
    grv = None
    if F is not None:
        lhs = np.abs(grv_remainder_table(F, t, x_grid, precise))
        env = np.broadcast_to(improved_grv_envelope(B, epsilon, x_grid), lhs.shape)
        grv = _certify(lhs, env, t, x_grid, epsilon, "improved-grv", all_small_x=True)
    return rv, grv


# -- special structure -----------------------------------------------------------------

def nonzero_diagonal_check(F, t_grid=None, thresholds=None, entry=""):
    """For invertible B, f(t) - c B^{-1} g(t) tends to a constant up to o(g_n).

    Ratios are |K(t) - K(t_end)| / |g_n(t)| with K = f - c B^{-1} g.
    """
    B = F.B.entries
    if np.any(np.diag(B) == 0):
        raise ValueError("B must be invertible")
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    w = np.linalg.solve(B.T, F.c)  # row vector c B^{-1}
    if F.has_mp:
        dps = max(_dps_for(max(abs(F.f(tt)), max_norm(F.g(tt))), F.g(tt)[-1]) for tt in t)
        with mp.workdps(dps):
            K = [F.f.eval_mp(tt) - sum(w[j] * v for j, v in enumerate(F.g.eval_mp(tt))) for tt in t]
            gn = [abs(F.g.eval_mp(tt)[-1]) for tt in t]
            r = np.array([float(abs(k - K[-1]) / s) for k, s in zip(K, gn)])
    else:
        G = F.g(t)
        K = F.f(t) - w @ G
        r = np.abs(K - K[-1]) / np.abs(G[-1])
    return summarize(entry, F.n, t[:-1], [], r[:-1, None], thresholds)


def power_representation_check(g, B, t_grid=None, thresholds=None, entry=""):
    """Distinct diagonal: g_i = sum_{j=i}^{n-1} Q_ij t^{b_j} + Q_in g_n + O(g_n).

    Q is fitted by least squares on the tail half of the grid; the report
    holds the residual normalised by |g_n(t)|.
    """
    B = as_utm(B)
    b = B.diagonal
    if len(set(b.tolist())) != B.n:
        raise ReductionError("diagonal entries must be pairwise distinct")
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    G = g(t)
    n = g.n
    basis = np.array([t ** b[j] for j in range(n - 1)] + [G[-1]])
    Q = np.zeros((n, n))
    Q[-1, -1] = 1.0
    tail = slice(len(t) // 2, None)
    res = np.zeros((n, len(t)))
    for i in range(n - 1):
        X = basis[i:].T / np.abs(G[-1])[:, None]
        y = G[i] / np.abs(G[-1])
        scale = np.max(np.abs(X[tail]), axis=0)
        coef, *_ = np.linalg.lstsq(X[tail] / scale, y[tail], rcond=None)
        Q[i, i:] = coef / scale
        res[i] = y - X @ Q[i, i:]
    ratios = np.max(np.abs(res), axis=0)
    return UpperTriangularMatrix(Q), summarize(entry, n, t, [], ratios[:, None], thresholds)
