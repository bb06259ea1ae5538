"""Inverses of Gamma-class functions through the auxiliary function q.

A positive increasing A with ``D log A = 1/q`` has an inverse f whose
derivative ladder is ``L_i = q_i o f``, where ``q_1 = q`` and
``q_i = q D q_{i-1}``.  The q_i are kept as polynomials in
``(q, Dq, D^2 q, ...)`` so only the supplied derivatives of q are ever
evaluated.
"""
from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Optional

import numpy as np

from .grv_core import ScalarFunction, Thresholds, summarize
from .numerics import NumericsError, adaptive_quadrature, falling_factorial
from .transforms import DerivativeLadder

CASES = ("positive_alpha", "zero_alpha", "negative_alpha_zero_limit",
         "negative_alpha_nonzero_limit", "alpha_one")


class ContractError(ValueError):
    pass


class DegenerateCaseError(ValueError):
    pass


class InversionError(NumericsError):
    pass


def _excluded(alpha, n):
    return [m for m in range(2, n) if math.isclose(alpha, (m - 1) / m, rel_tol=0, abs_tol=1e-14)]


@dataclass(frozen=True, eq=False)
class GammaClassFunction:
    """Auxiliary function q (with exact derivatives in ``q.derivs``), base
    point ``t0`` with ``A(t0) = A0``, and the index ``alpha`` of q.

    ``q_inf`` is the limit of q when ``alpha < 0``; ``log_A`` optionally
    gives log A in closed form, which is then preferred over quadrature.
    """
    q: ScalarFunction
    t0: float
    A0: float
    alpha: float
    q_inf: Optional[float] = None
    log_A: Optional[ScalarFunction] = None
    name: str = ""

    def __post_init__(self):
        if self.alpha > 1:
            raise ValueError("alpha must be at most 1")
        if not self.A0 > 0:
            raise ValueError("A0 must be positive")

    def check_exclusion(self, n):
        """Raise if alpha = (m-1)/m for some m in 2..n-1 (degenerate q_i)."""
        bad = _excluded(self.alpha, n)
        if bad:
            raise DegenerateCaseError(f"alpha = (m-1)/m with m = {bad[0]} is excluded")

    @property
    def order(self):
        """Largest n for which q has the n-1 derivatives required."""
        return len(self.q.derivs) + 1

    @property
    def case(self):
        a = self.alpha
        if a == 1:
            return "alpha_one"
        if a > 0:
            return "positive_alpha"
        if a == 0:
            return "zero_alpha"
        if self.q_inf is None:
            raise ContractError("alpha < 0 needs q_inf")
        return "negative_alpha_zero_limit" if self.q_inf == 0 else "negative_alpha_nonzero_limit"

    def jet(self, t, k):
        """[q(t), Dq(t), ..., D^k q(t)]."""
        if k > len(self.q.derivs):
            raise ContractError(f"derivative of order {k} of q is not supplied")
        return [self.q(t)] + [d(t) for d in self.q.derivs[:k]]


# -- A and its inverse -----------------------------------------------------------------

class _CumulativeLogA:
    """log A on a cached node grid t0 + d (r^k - 1), refined by quadrature
    between the last node and the target."""

    def __init__(self, G, t_max, ratio=1.5):
        self.G = G
        self.d = max(G.t0, 1.0)
        self.ratio = ratio
        self.nodes = [G.t0]
        self.cum = [math.log(G.A0)]
        self._extend(t_max)

    def _inv_q(self, s):
        return 1.0 / float(self.G.q(s))

    def _extend(self, t):
        while self.nodes[-1] < t:
            k = len(self.nodes)
            nxt = self.G.t0 + self.d * (self.ratio ** k - 1)
            seg = adaptive_quadrature(self._inv_q, self.nodes[-1], nxt, rel_tol=1e-13)
            self.nodes.append(nxt)
            self.cum.append(self.cum[-1] + seg.value)

    def __call__(self, t):
        t = float(t)
        if t < self.G.t0:
            raise ValueError("t below t0")
        self._extend(t)
        k = int(np.searchsorted(self.nodes, t, side="right")) - 1
        rest = adaptive_quadrature(self._inv_q, self.nodes[k], t, rel_tol=1e-13)
        return self.cum[k] + rest.value


def build_log_A(G, t_max=None):
    """log A(t) = log A0 + int_{t0}^t ds / q(s)."""
    acc = _CumulativeLogA(G, t_max or 1e3 * max(G.t0, 1.0))

    def func(t):
        return np.vectorize(acc, otypes=[float])(t)

    return ScalarFunction(func, t_min=G.t0, derivs=(lambda t: 1.0 / G.q(t),),
                          name=f"logA[{G.name}]")


def build_A(G, t_max=None):
    """A(t) = A0 exp(int_{t0}^t ds / q(s)); ``derivs[0]`` is DA = A / q."""
    logA = build_log_A(G, t_max)
    return _exp_of(logA, G)


def _exp_of(logA, G=None):
    """A = exp(log A) with DA = A * D log A, from ``logA.derivs[0]`` or 1/q."""
    def dlog(t):
        return logA.derivs[0](t) if logA.derivs else 1.0 / G.q(t)

    def func(t):
        with np.errstate(over="ignore"):
            return np.exp(logA(t))

    def dA(t):
        with np.errstate(over="ignore"):
            return np.exp(logA(t)) * dlog(t)

    return ScalarFunction(func, t_min=logA.t_min, derivs=(dA,), name=f"exp[{logA.name}]")


def exp_of(logA):
    return _exp_of(logA)


def _solve_log(log_a, slope, lt, lo0, tol, maxiter):
    """Bracketed Newton on log_a(y) = lt, vectorised; ``slope`` may be None."""
    if log_a(np.array([lo0]))[0] > np.min(lt) + 1e-15:
        raise InversionError(f"some t lies below A at the start of the domain ({lo0})")
    lo_ = np.full_like(lt, lo0)
    hi_ = np.full_like(lt, max(2 * lo0, lo0 + 1.0))
    for _ in range(2000):
        short = log_a(hi_) < lt
        if not short.any():
            break
        lo_ = np.where(short, hi_, lo_)
        hi_ = np.where(short, lo0 + 2 * (hi_ - lo0), hi_)
    else:
        raise InversionError("no bracket found")
    y = 0.5 * (lo_ + hi_)
    done = np.zeros(lt.shape, dtype=bool)
    for _ in range(maxiter):
        act = ~done
        ya = y[act]
        F = log_a(ya) - lt[act]
        lo_[act] = np.where(F < 0, ya, lo_[act])
        hi_[act] = np.where(F > 0, ya, hi_[act])
        yn = 0.5 * (lo_[act] + hi_[act])
        if slope is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = ya - F / slope(ya)
            ok = np.isfinite(newton) & (newton > lo_[act]) & (newton < hi_[act])
            yn = np.where(ok, newton, yn)
        hit = (np.abs(F) <= 4e-16 * np.maximum(1.0, np.abs(lt[act])))
        yn = np.where(hit, ya, yn)
        fin = hit | (np.abs(yn - ya) <= tol * np.maximum(1.0, np.abs(yn))) \
            | (hi_[act] - lo_[act] <= tol * np.abs(hi_[act]))
        y[act] = yn
        done[act] = fin
        if done.all():
            break
    res = np.abs(log_a(y) - lt)
    if np.any(res > 1e-10 * np.maximum(1.0, np.abs(lt))):
        raise InversionError(f"inversion residual {res.max():.2e} too large")
    return y


def invert_A(A, t, lo=None, tol=1e-15, maxiter=200):
    """y with A(y) = t, solved on log A with Newton steps inside a bracket.

    Vectorised over ``t``.  ``A.derivs[0]`` (DA), when present, supplies
    the Newton slope DA / A; otherwise plain bisection is used.  The
    bracket grows geometrically from ``lo`` (default ``A.t_min``).
    """
    lo0 = A.t_min if lo is None else lo
    lt = np.log(np.atleast_1d(np.asarray(t, dtype=float)))

    def log_a(y):
        with np.errstate(over="ignore", divide="ignore"):
            return np.log(np.asarray(A(y), dtype=float))

    slope = None
    if A.derivs:
        def slope(y):
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                return np.asarray(A.derivs[0](y), dtype=float) / np.asarray(A(y), dtype=float)

    y = _solve_log(log_a, slope, lt, lo0, tol, maxiter)
    return float(y[0]) if np.ndim(t) == 0 else y.reshape(np.shape(t))


def invert_log_A(logA, t, lo, tol=1e-15, maxiter=200):
    """As ``invert_A`` but from log A and its derivative 1/q directly."""
    lt = np.log(np.atleast_1d(np.asarray(t, dtype=float)))
    slope = (lambda y: np.asarray(logA.derivs[0](y), dtype=float)) if logA.derivs else None
    y = _solve_log(lambda y: np.asarray(logA(y), dtype=float), slope, lt, lo, tol, maxiter)
    return float(y[0]) if np.ndim(t) == 0 else y.reshape(np.shape(t))


def inverse_function(G, t_max=None):
    """f = A^{-1} as a ScalarFunction on [A0, inf)."""
    logA = G.log_A if G.log_A is not None else build_log_A(G, t_max)
    return ScalarFunction(lambda t: invert_log_A(logA, t, G.t0), t_min=G.A0, name=f"inv[{G.name}]")


# -- q ladder ----------------------------------------------------------------------------

def _poly_derivative(poly):
    out = {}
    for mono, coef in poly.items():
        for k, e in enumerate(mono):
            if e == 0:
                continue
            new = list(mono) + [0] * (k + 2 - len(mono))
            new[k] -= 1
            new[k + 1] += 1
            while new and new[-1] == 0:
                new.pop()
            key = tuple(new)
            out[key] = out.get(key, 0) + coef * e
    return {m: c for m, c in out.items() if c != 0}


def _poly_times_q(poly):
    out = {}
    for mono, coef in poly.items():
        new = list(mono) or [0]
        new[0] += 1
        out[tuple(new)] = out.get(tuple(new), 0) + coef
    return out


def _poly_order(poly):
    return max((len(m) - 1 for m in poly), default=0)


@dataclass(frozen=True, eq=False)
class QLadder:
    """q_1..q_n; ``polys[i-1]`` expresses q_i as a sum of products of
    derivatives of q (exponent tuple -> integer coefficient)."""
    G: GammaClassFunction
    polys: tuple

    @property
    def n(self):
        return len(self.polys)

    def poly(self, i, j=0):
        p = self.polys[i - 1]
        for _ in range(j):
            p = _poly_derivative(p)
        return p

    def evaluate(self, i, t, j=0):
        """D^j q_i(t)."""
        p = self.poly(i, j)
        jet = self.G.jet(t, _poly_order(p))
        total = 0.0
        for mono, coef in p.items():
            term = coef
            for k, e in enumerate(mono):
                if e:
                    term = term * jet[k] ** e
            total = total + term
        return total

    def function(self, i, j=0):
        return ScalarFunction(lambda t: self.evaluate(i, t, j), t_min=self.G.q.t_min,
                              name=f"D^{j}q_{i}[{self.G.name}]")

    @property
    def q(self):
        return tuple(self.function(i) for i in range(1, self.n + 1))


def q_ladder(G, n):
    """q_1 = q, q_i = q D q_{i-1} by the product rule on the jet of q."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n - 1 > len(G.q.derivs):
        raise ContractError(f"q_{n} needs D^{n - 1} q, only {len(G.q.derivs)} derivatives supplied")
    polys = [{(1,): 1}]
    for _ in range(1, n):
        polys.append(_poly_times_q(_poly_derivative(polys[-1])))
    return QLadder(G, tuple(polys))


def L_from_q(G, n, t_max=None):
    """Derivative ladder of f = A^{-1}: L_0 = f, L_i = q_i o f."""
    G.check_exclusion(n)
    Q = q_ladder(G, n)
    f = inverse_function(G, t_max)
    levels = [f]
    for i in range(1, n + 1):
        levels.append(ScalarFunction(lambda t, i=i: Q.evaluate(i, f(t)), t_min=f.t_min,
                                     name=f"L_{i}[{G.name}]"))
    return DerivativeLadder(f, tuple(levels), True)


# -- asymptotic laws ---------------------------------------------------------------------

def coefficient_C(alpha, i, j):
    """C_1(j) = (alpha)_j, C_i(j) = sum_k binom(j, k) C_1(k) C_{i-1}(j-k+1).

    Exact for Fraction or integer alpha.
    """
    memo = {}

    def C(i, j):
        if (i, j) not in memo:
            if i == 1:
                memo[i, j] = falling_factorial(alpha, j)
            else:
                memo[i, j] = sum(math.comb(j, k) * C(1, k) * C(i - 1, j - k + 1)
                                 for k in range(j + 1))
        return memo[i, j]

    return C(i, j)


def coefficient_C0_closed(alpha, i):
    """C_i(0) = prod_{k=1}^{i-1} (k alpha - k + 1)."""
    out = 1
    for k in range(1, i):
        out = out * (k * alpha - k + 1)
    return out


@dataclass(frozen=True)
class QiLaw:
    """Leading term of D^j q_i(t) as a function of (t, q, Dq, D^2 q)."""
    case: str
    i: int
    j: int
    coefficient: float
    alpha: float
    q_inf: Optional[float] = None

    def predict(self, t, q, dq, d2q=None):
        i, j, c = self.i, self.j, self.coefficient
        if self.case in ("positive_alpha", "negative_alpha_zero_limit"):
            return c * t ** (-i - j + 1) * q ** i
        if i + j < 2 and self.case != "alpha_one":
            return q
        if self.case == "zero_alpha":
            return c * t ** (-i - j + 2) * q ** (i - 1) * dq
        if self.case == "negative_alpha_nonzero_limit":
            return c * self.q_inf ** (i - 1) * t ** (-i - j + 2) * dq
        if j <= 1:
            return c * t ** (-i - j + 1) * q ** i
        return c * t ** (-i - j + 1) * q ** i * (t * d2q / dq)


def qi_asymptotic_law(alpha, case, i, j, q_inf=None):
    """Predicted leading behaviour of D^j q_i for the given alpha regime."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    expected = {
        "positive_alpha": 0 < alpha < 1,
        "zero_alpha": alpha == 0,
        "negative_alpha_zero_limit": alpha < 0 and q_inf == 0,
        "negative_alpha_nonzero_limit": alpha < 0 and q_inf not in (None, 0),
        "alpha_one": alpha == 1,
    }[case]
    if not expected:
        raise ValueError(f"case {case} inconsistent with alpha={alpha}, q_inf={q_inf}")
    if i < 1 or j < 0:
        raise ValueError("need i >= 1 and j >= 0")
    if case in ("positive_alpha", "negative_alpha_zero_limit"):
        coef = coefficient_C(alpha, i, j)
        bad = _excluded(alpha, i + j)
        if bad and abs(coef) < 1e-12:
            raise DegenerateCaseError(f"alpha = (m-1)/m with m = {bad[0]}: leading term vanishes")
    elif case == "zero_alpha":
        coef = 1.0 if i + j < 2 else (-1) ** (i + j) * math.factorial(i + j - 2)
    elif case == "negative_alpha_nonzero_limit":
        coef = 1.0 if i + j < 2 else falling_factorial(alpha - 1, i + j - 2)
    else:
        coef = 1.0 if j <= 1 else i * (-1) ** (j - 2) * math.factorial(j - 2)
    return QiLaw(case, i, j, float(coef), alpha, q_inf)


def verify_qi_asymptotics(G, n, t_grid, thresholds=None, entry=""):
    """|D^j q_i / law - 1| for all i >= 1, j >= 0 with i + j <= n.

    Pairs whose predicted coefficient is zero (the law then only says
    o(.)) are left out, as are pairs that vanish identically on both sides.
    """
    t = np.asarray(t_grid, dtype=float)
    th = thresholds or Thresholds(slope_min=math.inf, ratio_max=0.05)
    Q = q_ladder(G, n)
    jet = [np.asarray(v, dtype=float) for v in G.jet(t, min(2, len(G.q.derivs)))]
    d2q = jet[2] if len(jet) > 2 else None
    labels, cols = [], []
    for i in range(1, n + 1):
        for j in range(0, n - i + 1):
            try:
                law = qi_asymptotic_law(G.alpha, G.case, i, j, G.q_inf)
            except DegenerateCaseError:
                continue
            if law.coefficient == 0:
                continue
            actual = np.asarray(Q.evaluate(i, t, j), dtype=float)
            pred = law.predict(t, jet[0], jet[1], d2q)
            if not np.any(actual) and not np.any(pred):
                continue  # trivial ladder: zero against zero
            labels.append(f"({i},{j})")
            cols.append(np.abs(actual / pred - 1))
    return summarize(entry or G.name, n, t, labels, np.column_stack(cols), th)


def verify_dq_law(G, k, t_grid, thresholds=None, entry=""):
    """|D^j q / ((alpha-1)_{j-1} t^{-j+1} Dq) - 1| for j = 2..k (alpha < 1)."""
    if not G.alpha < 1:
        raise ValueError("the law needs alpha < 1")
    t = np.asarray(t_grid, dtype=float)
    th = thresholds or Thresholds(slope_min=math.inf, ratio_max=0.05)
    jet = [np.asarray(v, dtype=float) for v in G.jet(t, k)]
    labels, cols = [], []
    for j in range(2, k + 1):
        pred = falling_factorial(G.alpha - 1, j - 1) * t ** (-j + 1) * jet[1]
        labels.append(f"j={j}")
        cols.append(np.abs(jet[j] / pred - 1))
    return summarize(entry or G.name, k, t, labels, np.column_stack(cols), th)


def check_C0_recursion(alpha, n):
    """Pairs (recursion, closed form) for C_i(0), i = 1..n; exact for rationals."""
    if isinstance(alpha, float):
        alpha = Fraction(alpha).limit_denominator(10 ** 12)
    return [(coefficient_C(alpha, i, 0), coefficient_C0_closed(alpha, i)) for i in range(1, n + 1)]
