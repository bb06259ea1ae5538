"""Rate vectors built from f itself.

Three routes: the iterated indices transform ``C_i``, differencing at
multiplicative step e (``Delta^k f``), and the derivative ladder
``L_k = D^k (f o exp) o log`` for smooth f.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy.special import comb

from .grv_core import DEFAULT_X_PROBES, RateVector, ScalarFunction, default_t_grid, summarize
from .numerics import (NumericsError, adaptive_quadrature, falling_factorial,
                       log_domain_derivative, log_step)
from .trimat import (DomainError, IndexMatrix, IndexVector, UpperTriangularMatrix, all_ones_upper,
                     as_utm)


def generalized_binomial(z, k):
    """binom(z, k) = (z)_k / k! for real z and integer k >= 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return falling_factorial(z, k) / math.factorial(k)


# -- indices transform -----------------------------------------------------------------

def _kernel_coeffs(i):
    # C_i = f - int_0^{log(t/a)} f(t e^-w) e^-w K_i(w) dw,
    # K_i(w) = sum_{j=1}^i binom(i, j) (-1)^(j-1) w^(j-1) / (j-1)!
    return [comb(i, j, exact=True) * (-1) ** (j - 1) / math.factorial(j - 1)
            for j in range(1, i + 1)]


def _chain_values(f, a, n, t, rel_tol):
    """(C_1(t), ..., C_n(t)) for an array of t, one vector quadrature."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < a):
        raise DomainError(f"indices transform needs t >= a = {a}")
    W = np.log(t / a)
    K = [np.array(_kernel_coeffs(i)) for i in range(1, n + 1)]
    ft = np.asarray(f(t), dtype=float)

    def integrand(s):
        w = s * W
        y = t * np.exp(-w)
        y = np.maximum(y, a)
        base = f(y) * np.exp(-w) * W
        powers = np.array([w ** m for m in range(n)])
        return np.array([base * (k @ powers[:len(k)]) for k in K])

    val, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsrel=rel_tol,
                                epsabs=rel_tol * max(1e-300, float(np.max(np.abs(ft)))),
                                norm="max")
    return ft[None, :] - val


@dataclass(frozen=True, eq=False)
class IndicesChain:
    a: float
    C: tuple

    @property
    def n(self):
        return len(self.C) - 1

    def vector(self):
        return RateVector(self.C[1:])

    def recursion_residual(self, t, i, rel_tol=1e-10):
        """|C_i(t) - C_{i-1}(t) + (1/t) int_a^t C_{i-1}| relative to |C_i(t)|."""
        prev = self.C[i - 1]
        q = adaptive_quadrature(lambda w: float(prev(self.a * math.exp(w))) * self.a * math.exp(w),
                                0.0, math.log(t / self.a), rel_tol=rel_tol)
        direct = float(prev(t)) - q.value / t
        return abs(direct - float(self.C[i](t))) / max(abs(float(self.C[i](t))), 1e-300)


def _chain(f, a, n, rel_tol):
    @lru_cache(maxsize=64)
    def table(key):
        return _chain_values(f, a, n, np.frombuffer(key), rel_tol)

    def component(i):
        def func(t):
            arr = np.atleast_1d(np.asarray(t, dtype=float))
            out = table(arr.tobytes())[i - 1]
            return out if np.ndim(t) else float(out[0])
        return ScalarFunction(func, t_min=a, name=f"C_{i}[{f.name}]")

    return tuple(component(i) for i in range(1, n + 1))


def indices_transform(f, a=None, rel_tol=1e-13):
    """C(t) = f(t) - (1/t) int_a^t f(y) dy."""
    a = max(f.t_min, 1.0) if a is None else a
    if a < f.t_min:
        raise DomainError("base point below the domain of f")
    return _chain(f, a, 1, rel_tol)[0]


def indices_inverse(C, a, rel_tol=1e-12):
    """f(x) = C(x) + int_a^x C(t) dt / t, the inverse of the indices transform."""
    def scalar(x):
        q = adaptive_quadrature(lambda w: float(C(a * math.exp(w))), 0.0, math.log(x / a),
                                rel_tol=rel_tol)
        return float(C(x)) + q.value

    def func(x):
        return np.vectorize(scalar, otypes=[float])(x)

    return ScalarFunction(func, t_min=a, name=f"inverse[{C.name}]")


def iterate_indices(f, a=None, n=1, rel_tol=1e-13):
    """C_0 = f, C_i = indices transform of C_{i-1}, for i = 1..n.

    All n components come from a single quadrature against the kernel of
    the n-fold transform, so no nested integrals are formed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    a = max(f.t_min, 1.0) if a is None else a
    if a < f.t_min:
        raise DomainError("base point below the domain of f")
    return IndicesChain(a, (f,) + _chain(f, a, n, rel_tol))


def q_matrix_recursion(B, c):
    """Q with C(t) = Q g(t) + o(g_n(t)) for the indices chain of f in Pi(g).

    Returns ``(Q, singular)``; ``singular`` holds iff c_1 prod B_{i,i+1} = 0.
    """
    B = as_utm(B)
    if np.any(B.diagonal != 0):
        raise ValueError("B must have zero diagonal")
    c = np.asarray(c.c if isinstance(c, IndexVector) else c, dtype=float).ravel()
    n = B.n
    M = B.entries
    Q = np.zeros((n, n))
    ci = c.copy()
    for i in range(n):
        Bi = M[i:, i:]
        qi = np.linalg.solve((np.eye(n - i) + Bi).T, ci)
        Q[i, i:] = qi
        ci = (qi @ Bi)[1:]
    singular = c[0] * np.prod(np.diag(M, 1)) == 0
    return UpperTriangularMatrix(Q), bool(singular)


# -- differencing -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DifferenceLadder:
    f: ScalarFunction
    levels: tuple

    @property
    def n(self):
        return len(self.levels) - 1

    def recursive(self, k, t):
        """Delta^k f(t) through Delta^k f(t) = Delta^{k-1} f(et) - Delta^{k-1} f(t)."""
        if k == 0:
            return self.f(t)
        return self.recursive(k - 1, math.e * np.asarray(t)) - self.recursive(k - 1, t)

    def vector(self):
        return RateVector(self.levels[1:])


def _difference(f, k):
    w = [comb(k, i, exact=True) * (-1) ** (k - i) for i in range(k + 1)]

    def func(t):
        t = np.asarray(t, dtype=float)
        return sum(wi * f(math.e ** i * t) for i, wi in enumerate(w))

    mp_eval = None
    if f.mp is not None:
        def mp_eval(t):
            return mp.fsum(wi * f.mp(mp.e ** i * t) for i, wi in enumerate(w))

    return ScalarFunction(func, t_min=f.t_min, mp=mp_eval, name=f"Delta^{k}[{f.name}]")


def difference_ladder(f, n):
    """Delta^k f(t) = sum_i binom(k, i) (-1)^(k-i) f(e^i t), k = 0..n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return DifferenceLadder(f, (f,) + tuple(_difference(f, k) for k in range(1, n + 1)))


def difference_index_vector(n):
    """Index of f in Pi(Delta): (1, -1/2, 1/3, ...)."""
    return np.array([(-1) ** k / (k + 1) for k in range(n)])


def difference_grv_check(f, ladder, t_grid=None, x_probes=DEFAULT_X_PROBES, i=0,
                         thresholds=None, entry=""):
    """Residual of Delta^i f(xt) - sum_{j=i}^n binom(log x, j-i) Delta^j f(t),
    normalised by |Delta^n f(t)|."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    n = ladder.n
    if not 0 <= i <= n:
        raise ValueError("row index out of range")
    D = [np.asarray(ladder.levels[j](t), dtype=float) for j in range(n + 1)]
    cols = []
    for x in x_probes:
        lx = math.log(x)
        lhs = np.asarray(ladder.levels[i](x * t), dtype=float)
        rhs = sum(generalized_binomial(lx, j - i) * D[j] for j in range(i, n + 1))
        cols.append((lhs - rhs) / np.abs(D[n]))
    return summarize(entry or f.name, n, t, x_probes, np.column_stack(cols), thresholds)


# -- derivative ladder ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DerivativeLadder:
    f: ScalarFunction
    levels: tuple
    exact: bool

    @property
    def n(self):
        return len(self.levels) - 1

    def vector(self):
        return RateVector(self.levels[1:])


@lru_cache(maxsize=None)
def stirling2(k, j):
    if k == j:
        return 1
    if j == 0 or j > k:
        return 0
    return j * stirling2(k - 1, j) + stirling2(k - 1, j - 1)


@lru_cache(maxsize=None)
def stirling1(n, k):
    """Signed Stirling numbers of the first kind."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return stirling1(n - 1, k - 1) - (n - 1) * stirling1(n - 1, k)


def _from_ordinary(f, k):
    # L_k = sum_j S(k, j) t^j D^j f
    def func(t):
        t = np.asarray(t, dtype=float)
        return sum(stirling2(k, j) * t ** j * f.derivs[j - 1](t) for j in range(1, k + 1))
    return ScalarFunction(func, t_min=f.t_min, name=f"L_{k}[{f.name}]")


def _finite_difference(f, k):
    h = log_step(k)

    def func(t):
        return log_domain_derivative(f.func, np.asarray(t, dtype=float), k, h)
    return ScalarFunction(func, t_min=f.t_min * math.exp(5 * h), name=f"L_{k}[{f.name}]~fd")


def derivative_ladder(f, n, numeric=False):
    """L_0 = f, L_k = D^k (f o exp) o log, k = 1..n.

    Exact log-derivatives are used when present, then exact ordinary
    derivatives; otherwise order-4 central differences in log t, which are
    refused beyond order 5.  ``numeric=True`` forces the difference route.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not numeric and len(f.log_derivs) >= n:
        levels = tuple(d if isinstance(d, ScalarFunction) else
                       ScalarFunction(d, t_min=f.t_min, name=f"L_{k + 1}[{f.name}]")
                       for k, d in enumerate(f.log_derivs[:n]))
        return DerivativeLadder(f, (f,) + levels, True)
    if not numeric and len(f.derivs) >= n:
        return DerivativeLadder(f, (f,) + tuple(_from_ordinary(f, k) for k in range(1, n + 1)), True)
    if n > 5:
        raise NumericsError(f"order {n} needs exact derivative callbacks (finite differences stop at 5)")
    return DerivativeLadder(f, (f,) + tuple(_finite_difference(f, k) for k in range(1, n + 1)), False)


def taylor_remainder_check(f, ladder, x, t, rel_tol=1e-12):
    """Integral remainder of the log-Taylor expansion of order n, two ways.

    Returns ``(direct, quadrature)`` where ``direct`` is
    f(xt) - f(t) - sum_k (log x)^k / k! L_k(t) and ``quadrature`` is
    int_0^{log x} (log x - w)^{n-1} / (n-1)! {L_n(t e^w) - L_n(t)} dw.
    """
    n = ladder.n
    lx = math.log(x)
    L = [float(ladder.levels[k](t)) for k in range(n + 1)]
    direct = float(f(x * t)) - L[0] - sum(lx ** k / math.factorial(k) * L[k] for k in range(1, n + 1))
    if lx == 0:
        return direct, 0.0
    Ln = ladder.levels[n]

    def integrand(w):
        return (lx - w) ** (n - 1) / math.factorial(n - 1) * (float(Ln(t * math.exp(w))) - L[n])

    lo, hi, sign = (0.0, lx, 1.0) if lx > 0 else (lx, 0.0, -1.0)
    q = adaptive_quadrature(integrand, lo, hi, rel_tol=rel_tol, abs_tol=1e-15 * max(1.0, abs(L[n])))
    return direct, sign * q.value


# -- cross-checks between routes --------------------------------------------------------

def jordan_q(n):
    """Q_ij = (-1)^(j-i) binom(j-1, i-1): C = Q L + o(L_n) for the derivative ladder."""
    Q = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            Q[i, j] = (-1) ** (j - i) * comb(j, i, exact=True)
    return UpperTriangularMatrix(Q)


def chain_vs_ladder(chain, ladder, t_grid=None, thresholds=None, entry=""):
    """C_i - sum_{j>=i} (-1)^(j-i) binom(j-1, i-1) L_j, max over i, over |L_n|."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    n = min(chain.n, ladder.n)
    Q = jordan_q(n).entries
    C = np.array([chain.C[i](t) for i in range(1, n + 1)])
    L = np.array([ladder.levels[i](t) for i in range(1, n + 1)])
    res = np.max(np.abs(C - Q @ L), axis=0) / np.abs(L[-1])
    return summarize(entry, n, t, ["max_i"], res[:, None], thresholds)


def chain_ladder_ratio(chain, ladder, t_grid=None, thresholds=None, entry=""):
    """|C_i / L_i - 1| per component."""
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    n = min(chain.n, ladder.n)
    cols = [np.abs(np.asarray(chain.C[i](t)) / np.asarray(ladder.levels[i](t)) - 1)
            for i in range(1, n + 1)]
    return summarize(entry, n, t, [f"C{i}/L{i}" for i in range(1, n + 1)],
                     np.column_stack(cols), thresholds)


def indices_index_matrix(n):
    return IndexMatrix(all_ones_upper(n).entries)
