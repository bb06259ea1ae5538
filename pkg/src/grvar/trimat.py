"""Upper-triangular matrix algebra for index matrices.

The central object is ``x**B = exp(log(x) B)`` for upper-triangular ``B``.
Unrolling the column recursion for its entries gives a sum over increasing
index paths ``i = j_0 < j_1 < ... < j_l = j``::

    (x**B)_ij = sum_paths  B_{j_0 j_1} ... B_{j_{l-1} j_l} * s**l * E[s b_{j_0}, ..., s b_{j_l}]

with ``s = log x`` and ``E[...]`` the divided difference of ``exp``.  For a
zero diagonal ``E[0, ..., 0] = 1/l!``, which is the familiar
``(log x)**l / l!`` path formula.  Divided differences of ``exp`` at real
points are positive, so they are computed by a shifted Taylor series on a
scaled point set followed by repeated squaring of the bidiagonal
exponential; all terms are positive and no cancellation occurs.
"""
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np
from scipy.linalg import solve_triangular

from .numerics import falling_factorial, quadrature_vec


class TriangularityError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ReductionError(ValueError):
    pass


class JordanReductionError(ReductionError):
    """Raised when a superdiagonal entry vanishes; ``index`` is 1-based."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"B[{index},{index + 1}] = 0: no reduction to a Jordan block")


class UpperTriangularMatrix:
    """Immutable n x n real matrix whose strict lower triangle is exactly 0."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if np.any(np.tril(a, -1) != 0):
            raise TriangularityError("strict lower triangle must be exactly zero")
        a.setflags(write=False)
        self._a = a

    @property
    def n(self):
        return self._a.shape[0]

    @property
    def entries(self):
        return self._a

    @property
    def diagonal(self):
        return self._a.diagonal().copy()

    def __array__(self, dtype=None, copy=None):
        return self._a.astype(dtype) if dtype is not None else self._a.copy()

    def __getitem__(self, idx):
        return self._a[idx]

    def replace(self, i, j, value):
        """Copy with entry (i, j) set; writes below the diagonal are refused."""
        if i > j:
            raise TriangularityError(f"cannot write strict-lower entry ({i}, {j})")
        a = self._a.copy()
        a[i, j] = value
        return type(self)(a) if type(self) is UpperTriangularMatrix else UpperTriangularMatrix(a)

    def __matmul__(self, other):
        if isinstance(other, UpperTriangularMatrix):
            return UpperTriangularMatrix(np.triu(self._a @ other._a))
        return self._a @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self._a

    def __add__(self, other):
        return UpperTriangularMatrix(self._a + np.asarray(other))

    def __sub__(self, other):
        return UpperTriangularMatrix(self._a - np.asarray(other))

    def __mul__(self, k):
        return UpperTriangularMatrix(self._a * float(k))

    __rmul__ = __mul__

    def __neg__(self):
        return UpperTriangularMatrix(-self._a)

    def __eq__(self, other):
        if not isinstance(other, UpperTriangularMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.all(self._a == other._a))

    __hash__ = None

    def inverse(self):
        return UpperTriangularMatrix(np.triu(solve_triangular(self._a, np.eye(self.n))))

    def max_norm(self):
        return max_norm(self._a)

    def tolist(self):
        return self._a.tolist()

    def __repr__(self):
        return f"{type(self).__name__}({self._a.tolist()!r})"


class IndexMatrix(UpperTriangularMatrix):
    """Upper-triangular matrix with non-increasing diagonal.

    ``simple_eigenvalues`` records whether every eigenvalue except possibly
    the smallest has geometric multiplicity one.
    """

    __slots__ = ("simple_eigenvalues",)

    def __init__(self, entries):
        super().__init__(entries)
        d = self._a.diagonal()
        if np.any(np.diff(d) > 0):
            raise ValueError(f"index matrix diagonal must be non-increasing, got {d.tolist()}")
        self.simple_eigenvalues = _geometric_simple(self._a)


def _geometric_simple(a):
    d = a.diagonal()
    vals = sorted(set(d.tolist()))
    n = len(d)
    scale = max(1.0, max_norm(a))
    for lam in vals[1:]:
        sv = np.linalg.svd(a - lam * np.eye(n), compute_uv=False)
        rank = int(np.sum(sv > 1e-10 * scale))
        if n - rank != 1:
            return False
    return True


@dataclass(frozen=True)
class IndexVector:
    c: tuple

    def __init__(self, c):
        object.__setattr__(self, "c", tuple(float(v) for v in np.ravel(c)))

    @property
    def n(self):
        return len(self.c)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.c, dtype=dtype or float)


def as_utm(B):
    return B if isinstance(B, UpperTriangularMatrix) else UpperTriangularMatrix(B)


def max_norm(a):
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def identity(n):
    return UpperTriangularMatrix(np.eye(n))


def jordan_block(n):
    """Nilpotent shift J_n (ones on the first superdiagonal)."""
    return IndexMatrix(np.eye(n, k=1))


def all_ones_upper(n):
    """K_n: zero diagonal, ones everywhere above it."""
    return IndexMatrix(np.triu(np.ones((n, n)), 1))


def difference_index_matrix(n):
    """Toeplitz M with M_ij = (-1)**(j-i-1) / (j-i) above the diagonal."""
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = j - i
            m[i, j] = (-1) ** (d - 1) / d
    return IndexMatrix(m)


# -- divided differences of exp ----------------------------------------------

_TAYLOR_TERMS = 24


def exp_divided_differences(z):
    """Table T with T[i, j] = exp[z_i, ..., z_j] for i <= j."""
    z = np.asarray(z, dtype=float)
    m = len(z)
    mu = float(z.mean())
    rho = float(np.max(np.abs(z - mu)))
    s = max(0, math.ceil(math.log2(rho / 0.25))) if rho > 0.25 else 0
    scale = 2.0 ** -s
    d = (z - mu) * scale
    T = np.zeros((m, m))
    fact = [math.factorial(k) for k in range(_TAYLOR_TERMS + m + 1)]
    for i in range(m):
        # complete homogeneous polynomials of d_i..d_j, degree 0.._TAYLOR_TERMS
        H = np.zeros(_TAYLOR_TERMS + 1)
        H[0] = 1.0
        for j in range(i, m):
            for k in range(1, _TAYLOR_TERMS + 1):
                H[k] += d[j] * H[k - 1]
            l = j - i
            T[i, j] = sum(H[k] / fact[k + l] for k in range(_TAYLOR_TERMS + 1)) * scale ** l
    T *= math.exp(mu * scale)
    for _ in range(s):
        T = np.triu(T @ T)
    return T


def _path_sum(B, s, extra_point=False):
    """Entries of exp(s B), or of int_0^s exp(v B) dv when ``extra_point``."""
    a = B.entries
    n = B.n
    b = a.diagonal()
    out = np.zeros((n, n))
    cache = {}

    def dd(idx):
        pts = tuple(s * b[k] for k in idx) + ((0.0,) if extra_point else ())
        if pts not in cache:
            cache[pts] = exp_divided_differences(pts)[0, -1]
        return cache[pts]

    p = 1 if extra_point else 0
    for i in range(n):
        out[i, i] = s ** p * dd((i,))
        for j in range(i + 1, n):
            inner = range(i + 1, j)
            total = 0.0
            for r in range(len(inner) + 1):
                for mid in combinations(inner, r):
                    path = (i,) + mid + (j,)
                    w = 1.0
                    for u, v in zip(path, path[1:]):
                        w *= a[u, v]
                        if w == 0.0:
                            break
                    if w == 0.0:
                        continue
                    total += w * s ** (len(path) - 1 + p) * dd(path)
            out[i, j] = total
    return out


def _log_of(x):
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    return math.log(x)


def mat_power_x(B, x):
    """A(x) = x**B for upper-triangular B and x > 0."""
    B = as_utm(B)
    s = _log_of(x)
    if x == 1:
        return identity(B.n)
    out = _path_sum(B, s)
    np.fill_diagonal(out, np.power(float(x), B.diagonal))
    return UpperTriangularMatrix(out)


def mat_power_zero_diag(B, x):
    """x**B for nilpotent B via sum_l (log x)**l / l! * (path products)."""
    B = as_utm(B)
    if np.any(B.diagonal != 0):
        raise ValueError("mat_power_zero_diag requires an exactly zero diagonal")
    return UpperTriangularMatrix(_nilpotent_exp(B.entries, _log_of(x)))


def _nilpotent_exp(a, s):
    n = a.shape[0]
    out = np.eye(n)
    P = np.eye(n)
    for l in range(1, n):
        P = P @ a
        out = out + P * (s ** l / math.factorial(l))
    return np.triu(out)


def mat_H(B, x):
    """H(x) = int_1^x u**B du/u; satisfies B H = H B = x**B - I."""
    B = as_utm(B)
    s = _log_of(x)
    if x == 1:
        return UpperTriangularMatrix(np.zeros((B.n, B.n)))
    return UpperTriangularMatrix(_path_sum(B, s, extra_point=True))


def limit_row(B, c, x):
    """h(x) = c H(x)."""
    return np.asarray(c, dtype=float) @ mat_H(B, x).entries


def mat_power_mp(B, x, dps=50):
    """x**B with mpmath at ``dps`` digits (generic scaling-and-squaring)."""
    import mpmath as mp
    with mp.workdps(dps):
        s = mp.log(mp.mpf(x))
        M = mp.matrix(np.asarray(B, dtype=float).tolist()) * s
        return mp.expm(M)


def mat_H_mp(B, x, dps=50):
    """H(x) with mpmath: top-right block of exp of [[sB, sI], [0, 0]]."""
    import mpmath as mp
    a = np.asarray(B, dtype=float)
    n = a.shape[0]
    with mp.workdps(dps):
        s = mp.log(mp.mpf(x))
        M = mp.zeros(2 * n, 2 * n)
        for i in range(n):
            for j in range(n):
                M[i, j] = s * a[i, j]
            M[i, n + i] = s
        E = mp.expm(M)
        return E[0:n, n:2 * n]


# -- identities and reductions -------------------------------------------------

def _require_zero_diagonal(B):
    if np.any(B.diagonal != 0):
        raise ValueError("matrix must have an exactly zero diagonal")


def mat_IplusB_inverse_integral_check(B):
    """(I + B)^{-1} by back-substitution, for nilpotent B.

    For such B this equals ``int_0^1 x**B dx``; see :func:`power_integral_unit`
    for the quadrature side of that identity.
    """
    B = as_utm(B)
    _require_zero_diagonal(B)
    n = B.n
    return UpperTriangularMatrix(np.triu(solve_triangular(np.eye(n) + B.entries, np.eye(n))))


def power_integral_unit(B, rel_tol=1e-13):
    """int_0^1 x**B dx by quadrature (x = exp(-s)), for nilpotent B."""
    B = as_utm(B)
    _require_zero_diagonal(B)
    a = B.entries
    n = B.n

    def integrand(s):
        return _nilpotent_exp(a, -s).ravel() * math.exp(-s)

    val, _ = quadrature_vec(integrand, 0.0, math.inf, rel_tol=rel_tol, abs_tol=1e-15)
    return UpperTriangularMatrix(np.triu(val.reshape(n, n)))


def exp_integral_unit(B, rel_tol=1e-13):
    """int_0^1 exp(yB) dy by quadrature, for nilpotent B."""
    B = as_utm(B)
    _require_zero_diagonal(B)
    n = B.n

    def integrand(y):
        return _nilpotent_exp(B.entries, y).ravel()

    val, _ = quadrature_vec(integrand, 0.0, 1.0, rel_tol=rel_tol, abs_tol=1e-15)
    return np.triu(val.reshape(n, n))


def cute_identities_check(B, x):
    """Residuals of the two binomial-series identities for nilpotent B.

    First:  x**B - I = sum_{k=1}^{n-1} binom(log x, k) (e^B - I)^k.
    Second: H(x) = int_0^1 exp(yB) dy * sum_{k=1}^{n} binom(log x, k) (e^B - I)^{k-1}.
    """
    B = as_utm(B)
    _require_zero_diagonal(B)
    n = B.n
    z = _log_of(x)
    E = mat_power_zero_diag(B, math.e).entries - np.eye(n)
    lhs1 = mat_power_zero_diag(B, x).entries - np.eye(n)
    rhs1 = np.zeros((n, n))
    P = np.eye(n)
    series2 = np.zeros((n, n))
    for k in range(1, n + 1):
        c = falling_factorial(z, k) / math.factorial(k)
        series2 += c * P
        P = P @ E
        if k <= n - 1:
            rhs1 += c * P
    r1 = max_norm(lhs1 - rhs1)
    rhs2 = exp_integral_unit(B) @ series2
    r2 = max_norm(mat_H(B, x).entries - rhs2)
    return r1, r2


def jordan_reduce(B):
    """Upper-triangular Q with B = Q J_n Q^{-1}, for nilpotent B whose
    superdiagonal has no zeros.

    Columns are built left to right from B q_j = q_{j-1}; the free choices are
    fixed as Q_11 = 1 and Q_1j = 0 for j >= 2.
    """
    B = as_utm(B)
    _require_zero_diagonal(B)
    a = B.entries
    n = B.n
    for i in range(n - 1):
        if a[i, i + 1] == 0:
            raise JordanReductionError(i + 1)
    Q = np.zeros((n, n))
    Q[0, 0] = 1.0
    for j in range(1, n):
        Q[j, j] = Q[j - 1, j - 1] / a[j - 1, j]
        # rows i = j-2, ..., 0:  sum_{k=i+1}^{j-1} a[i,k] Q[k,j] = Q[i,j-1] - a[i,j] Q[j,j]
        for i in range(j - 2, -1, -1):
            rhs = Q[i, j - 1] - a[i, j] * Q[j, j]
            rhs -= sum(a[i, k] * Q[k, j] for k in range(i + 2, j))
            Q[i + 1, j] = rhs / a[i, i + 1]
        Q[0, j] = 0.0
    return UpperTriangularMatrix(Q)


def diag_reduce(B, q):
    """Unique upper-triangular Q with diagonal q and B = Q diag(B) Q^{-1}."""
    B = as_utm(B)
    q = np.asarray(q, dtype=float)
    a = B.entries
    b = a.diagonal()
    n = B.n
    if len(q) != n or np.any(q == 0):
        raise ValueError("q must have n nonzero entries")
    if len(set(b.tolist())) != n:
        raise ReductionError("diagonal entries must be pairwise distinct")
    Q = np.diag(q)
    for j in range(n):
        for i in range(j - 1, -1, -1):
            Q[i, j] = sum(a[i, k] * Q[k, j] for k in range(i + 1, j + 1)) / (b[j] - b[i])
    return UpperTriangularMatrix(Q)
