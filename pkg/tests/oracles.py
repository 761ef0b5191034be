"""Independent direct-summation oracles for the closed-form constants.

These deliberately avoid the library's closed forms: every sum is an
explicit loop, every power a literal, so a regression in the formulas
cannot hide in shared code.
"""
import math


def oracle_gc_markov(kappa1, L, n):
    total = 0.0
    for m in range(1, n + 1):
        inner = 0.0
        for k in range(m):
            inner += L**k
        total += inner * inner
    return kappa1 * total


def oracle_gc_general(kappa1, M, n):
    return kappa1 * (1.0 + M) ** (2 * n) / (M * M)


def oracle_ts(alpha, R, s, n):
    if R < 1.0:
        return n ** (1.0 - 2.0 / s) * (1.0 - R ** (1.0 / s)) ** 2 * alpha
    if R == 1.0:
        return math.e ** (2.0 / s - 2.0) * (n + 1) ** (-2.0 / s - 1.0) * alpha
    return ((R - 1.0) / (math.e ** (s - 1.0) * R**n)) ** (2.0 / s) * alpha / (n + 1)


def oracle_ts_general(alpha, M, s, n):
    return alpha * ((n * math.e) ** (1.0 - s) * M / (1.0 + M) ** n) ** (2.0 / s)


def oracle_lsi_markov(alpha, L, n):
    if L < alpha:
        return (alpha - L) ** 2 / alpha
    if L == alpha:
        return alpha / (n * (n + 1) * (math.e - 1.0))
    return (alpha / L) ** (2 * n) * (L * L - alpha * alpha) / (alpha * math.e * (n + 1))


def oracle_lsi_weak(alpha, R, n):
    if R < alpha:
        return (math.sqrt(alpha) - math.sqrt(R)) ** 2
    if R == alpha:
        return alpha / (n * (n + 1) * (math.e - 1.0))
    return (alpha / R) ** n * (R - alpha) / (math.e * (n + 1))


def oracle_lsi_weak_general(alpha, kappa, n, eps):
    """Loop evaluation of the coupled-chain log-Sobolev display."""
    ks = []
    for j in range(1, n):
        total = 0.0
        for ell in range(j):
            total += kappa[n - ell - 1][n - j - 1]
        ks.append((1.0 + 1.0 / eps) * total / alpha)
    bracket = 1.0
    for k in range(n - 1):
        prod = 1.0
        for m in range(k + 1, n):
            prod *= 1.0 + ks[m - 1]
        bracket += prod
    return alpha / (1.0 + eps) / bracket


def oracle_contraction(alpha, L, n):
    if L < 1.0:
        return (1.0 - L) ** 2 * alpha
    if L == 1.0:
        return alpha / (n * (n + 1) * (math.e - 1.0))
    return (L - 1.0) * alpha / (L**n * math.e * (n + 1))


def oracle_ou(rho, tau, n, x):
    theta = math.exp(-rho * tau)
    sigma2 = tau if rho == 0.0 else (1.0 - theta * theta) / (2.0 * rho)
    kappa = 0.0
    for j in range(n):
        inner = 0.0
        for i in range(n - j):
            inner += theta**i
        kappa += inner * inner
    mean = 0.0
    for i in range(1, n + 1):
        mean += x * theta**i
    return {"theta": theta, "sigma2": sigma2, "kappa_n": sigma2 * kappa, "mean_Fn": mean}
