"""Regenerate oracles.json from mpmath alone (no grvar imports).

    python tests/oracles/make_oracles.py
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
OUT = Path(__file__).with_name("oracles.json")


def f2s(v):
    return mp.nstr(v, 25)


def mat_powers():
    cases = [
        ([[1.0, 2.0, -1.0], [0, 0.5, 3.0], [0, 0, -2.0]], 3.7),
        ([[0.0, 1.0, 1.0], [0, 0.0, 1.0], [0, 0, 0.0]], 0.2),
        ([[-1.0, 1.0, 0.5, 2.0], [0, -1.0, 1.0, -1.0], [0, 0, -1.0, 1.0], [0, 0, 0, -2.0]], 7.5),
        ([[2.5, -3.0], [0, 2.5 - 1e-9]], 0.3),
    ]
    out = []
    for B, x in cases:
        A = mp.expm(mp.matrix(B) * mp.log(x))
        n = len(B)
        out.append({"B": B, "x": x, "A": [[f2s(A[i, j]) for j in range(n)] for i in range(n)]})
    return out


def log_gamma_remainder():
    """(f(xt) - f(t) - h(x) g(t)) / g_4(t) for one Stirling correction at t = 1e4, x = 2."""
    t, x = mp.mpf(10) ** 4, mp.mpf(2)
    df = mp.loggamma(x * t) - mp.loggamma(t)
    g = [t * mp.log(t), t, 1, 1 / t]
    # c H(x) for B = [[1,1],[0,1]] + diag(0, -1), c = (1, 0, -1/2, -1/12)
    h = [x - 1, x * mp.log(x) - x + 1, -mp.log(x) / 2, -(1 - 1 / x) / 12]
    rem = df - sum(hi * gi for hi, gi in zip(h, g))
    return f2s(rem / g[3])


def lambert():
    return {str(t): f2s(mp.lambertw(t)) for t in (mp.e, 10.0, 1e6, 1e8, 1e15)}


def upper_gamma():
    cases = [(0.5, 0.1), (0.5, 3.0), (1.5, 2.4), (2.0, 40.0), (1.25, 1e-3), (3.5, 4.4), (0.75, 200.0)]
    return [{"s": s, "x": x, "log": f2s(mp.log(mp.gammainc(s, x)))} for s, x in cases]


def log_ladders():
    """L_k(t) = D^k (f o exp)(log t) by mpmath differentiation of phi(u)."""
    phis = {
        "loglog": lambda u: mp.log(u),
        "loglog_squared": lambda u: mp.log(u) ** 2,
        "logloglog": lambda u: mp.log(mp.log(u)),
        "superlog_sqrt": lambda u: mp.exp(mp.sqrt(u)),
        "superlog_loglog": lambda u: mp.exp(u / mp.log(u)),
        "log_loglog_a": lambda u: u * mp.log(u),
        "log_power_half": lambda u: mp.sqrt(u),
    }
    out = {}
    for name, phi in phis.items():
        out[name] = {}
        for t in (1e4, 1e8):
            u = mp.log(t)
            out[name][str(t)] = [f2s(mp.diff(phi, u, k)) for k in range(0, 5)]
    return out


def lambert_ladder():
    # L_k of W through W o exp, k = 1..4
    out = {}
    for t in (1e3, 1e8):
        u = mp.log(t)
        out[str(t)] = [f2s(mp.diff(lambda v: mp.lambertw(mp.exp(v)), u, k)) for k in range(1, 5)]
    return out


def hazard_q():
    """q = 1/r with r = x^(b+p-1) e^(-x^p/p) / (p^(b/p) Gamma(b/p+1, x^p/p)) and derivatives."""
    out = []
    for b, p, x in [(1.0, 2.0, 3.0), (1.0, 1.0, 6.0), (-0.5, 1.0, 4.0), (1.0, 0.4, 50.0)]:
        def q(y, b=mp.mpf(b), p=mp.mpf(p)):
            s = b / p + 1
            return p ** (b / p) * mp.gammainc(s, y ** p / p) / (y ** (b + p - 1) * mp.exp(-y ** p / p))
        out.append({"b": b, "p": p, "x": x, "jet": [f2s(mp.diff(q, x, k)) for k in range(4)]})
    return out


def chain_log():
    # indices chain of f = log log t from a = e, nested by definition, at t = 1e3
    a = mp.e
    t = mp.mpf(1000)

    def f(y):
        return mp.log(mp.log(y))

    def F(y):
        return mp.quad(f, [a, y])

    def C1(y):
        return f(y) - F(y) / y

    c1 = C1(t)
    c2 = c1 - mp.quad(C1, [a, t]) / t
    return {"t": 1000.0, "a": "e", "C": [f2s(c1), f2s(c2)]}


def power_q_coefficients():
    """q = t^alpha: D^j q_i(t) / (t^(-i-j+1) q^i) at t = 1 equals C_i(j)."""
    out = []
    for alpha in (mp.mpf("0.3"), mp.mpf("-0.5"), mp.mpf(2) / 3):
        def q1(t, alpha=alpha):
            return t ** alpha

        qs = [q1]
        for i in range(2, 4):
            prev = qs[-1]
            qs.append(lambda t, prev=prev, alpha=alpha: t ** alpha * mp.diff(prev, t))
        vals = {}
        for i in range(1, 4):
            for j in range(0, 4 - i + 1):
                vals[f"{i},{j}"] = f2s(mp.diff(qs[i - 1], mp.mpf(1), j))
        out.append({"alpha": mp.nstr(alpha, 20), "C": vals})
    return out


def bernoulli():
    return [f2s(mp.bernoulli(k)) for k in range(0, 21)]


def main():
    data = {
        "mat_power": mat_powers(),
        "log_gamma_remainder": log_gamma_remainder(),
        "lambert_w": lambert(),
        "log_upper_gamma": upper_gamma(),
        "log_ladders": log_ladders(),
        "lambert_ladder": lambert_ladder(),
        "hazard_q": hazard_q(),
        "chain_loglog": chain_log(),
        "power_q_coefficients": power_q_coefficients(),
        "bernoulli": bernoulli(),
    }
    OUT.write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
