"""Explicit inequality constants with regime dispatch.

Every function evaluates one of the closed-form constants for the joint
law of a dependent process: Gaussian-concentration constants, transport
constants for order-s costs with their contractive / critical / expansive
regimes, and logarithmic Sobolev constants for Lipschitz-driven,
ARMA-type and kernel-coupled chains. Geometric sums switch from the
closed form to direct summation when the ratio is within 1e-9 of 1, to
avoid catastrophic cancellation at the regime boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

_E = math.e

CONTRACTIVE = "contractive"
CRITICAL = "critical"
EXPANSIVE = "expansive"


@dataclass(frozen=True)
class RegimeConstant:
    """A positive constant together with the regime that produced it."""

    value: float
    regime: str
    inputs: dict
    formula_id: str

    def __post_init__(self):
        if not self.value > 0:
            raise InputError(f"constant must be positive, got {self.value}")
        if self.regime not in (CONTRACTIVE, CRITICAL, EXPANSIVE):
            raise InputError(f"unknown regime {self.regime!r}")

    def __float__(self):
        return float(self.value)


def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise InputError(f"{name} must be positive, got {value}")


def _check_count(n: int) -> None:
    if n < 1:
        raise InputError(f"step count must be >= 1, got {n}")


def geometric_sum(ratio: float, terms: int) -> float:
    """sum_{k=0}^{terms-1} ratio**k, stable near ratio = 1."""
    if abs(ratio - 1.0) <= 1e-9:
        return math.fsum(ratio**k for k in range(terms))
    return (ratio**terms - 1.0) / (ratio - 1.0)


def gc_markov_kappa(kappa1: float, L: float, n: int) -> float:
    """Concentration constant kappa_1 * sum_m (sum_{k<m} L^k)^2 for a
    homogeneous chain with an L-Lipschitz kernel."""
    _check_positive("kappa1", kappa1)
    if L < 0:
        raise InputError("Lipschitz constant must be nonnegative")
    _check_count(n)
    return kappa1 * math.fsum(geometric_sum(L, m) ** 2 for m in range(1, n + 1))


def gc_weak_kappa(kappa1: float, R: float, n: int) -> float:
    """Same double sum with the summed dependence coefficient R in place
    of the one-step Lipschitz constant."""
    return gc_markov_kappa(kappa1, R, n)


def gc_weak_kappa_general(kappa1: float, M: float, n: int) -> float:
    """Coarse bound kappa_1 (1+M)^(2n) / M^2 when the dependence
    coefficients are merely bounded by M > 0."""
    _check_positive("kappa1", kappa1)
    _check_count(n)
    if M <= 0:
        raise InputError("M must be positive; use the R-form for R = 0")
    return kappa1 * (1.0 + M) ** (2 * n) / M**2


def _ts_regimes(alpha: float, R: float, s: float, n: int, formula_id: str) -> RegimeConstant:
    inputs = {"alpha": alpha, "R": R, "s": s, "n": n}
    if R < 1.0:
        value = n ** (1.0 - 2.0 / s) * (1.0 - R ** (1.0 / s)) ** 2 * alpha
        regime = CONTRACTIVE
    elif R == 1.0:
        # critical branch normalized to carry the same alpha factor as its
        # neighbours; (n+1) exponent from the gamma = 1 + 1/n choice
        value = _E ** (2.0 / s - 2.0) * (n + 1) ** (-2.0 / s - 1.0) * alpha
        regime = CRITICAL
    else:
        value = ((R - 1.0) / (_E ** (s - 1.0) * R**n)) ** (2.0 / s) * alpha / (n + 1)
        regime = EXPANSIVE
    return RegimeConstant(value, regime, inputs, formula_id)


def ts_markov_alpha(alpha: float, L: float, s: float, n: int) -> RegimeConstant:
    """Order-s transport constant for a homogeneous chain whose kernel is
    L-Lipschitz into (Prob_s, W_s); constant in n when s = 2 and L < 1."""
    _check_positive("alpha", alpha)
    if L < 0:
        raise InputError("Lipschitz constant must be nonnegative")
    if not (1.0 <= s <= 2.0):
        raise InputError("order s must lie in [1, 2]")
    _check_count(n)
    return _ts_regimes(alpha, L, s, n, "ts-markov")


def ts_weak_alpha(alpha: float, R: float, s: float, n: int) -> RegimeConstant:
    """Transport constant under the summed dependence bound sum rho_j <= R."""
    _check_positive("alpha", alpha)
    if R < 0:
        raise InputError("R must be nonnegative")
    if not (1.0 <= s <= 2.0):
        raise InputError("order s must lie in [1, 2]")
    _check_count(n)
    return _ts_regimes(alpha, R, s, n, "ts-weak")


def ts_general_alpha(alpha: float, M: float, s: float, n: int) -> float:
    """Transport constant alpha ((n e)^(1-s) M / (1+M)^n)^(2/s) when the
    dependence coefficients are merely bounded by M > 0."""
    _check_positive("alpha", alpha)
    if M <= 0:
        raise InputError("M must be positive")
    if not (1.0 <= s <= 2.0):
        raise InputError("order s must lie in [1, 2]")
    _check_count(n)
    return alpha * ((n * _E) ** (1.0 - s) * M / (1.0 + M) ** n) ** (2.0 / s)


def lsi_markov_alpha(alpha: float, L: float, n: int) -> RegimeConstant:
    """Log-Sobolev constant for a chain whose kernel energy has
    off-diagonal Hessian blocks bounded by L in operator norm."""
    _check_positive("alpha", alpha)
    if L < 0:
        raise InputError("L must be nonnegative")
    _check_count(n)
    inputs = {"alpha": alpha, "L": L, "n": n}
    if L < alpha:
        return RegimeConstant((alpha - L) ** 2 / alpha, CONTRACTIVE, inputs, "lsi-markov")
    if L == alpha:
        return RegimeConstant(alpha / (n * (n + 1) * (_E - 1.0)), CRITICAL, inputs, "lsi-markov")
    value = (alpha / L) ** (2 * n) * (L**2 - alpha**2) / (alpha * _E * (n + 1))
    return RegimeConstant(value, EXPANSIVE, inputs, "lsi-markov")


def lsi_weak_alpha_general(
    alpha: float, kappa_matrix, n: int, epsilon: float | str = "auto"
) -> float:
    """Log-Sobolev constant from per-pair coupling strengths kappa_{j,k}.

    ``kappa_matrix[j-1, k-1]`` holds kappa_{j,k} >= 0 for 1 <= k < j <= n.
    For a fixed epsilon the value is
    (alpha / (1+eps)) * (1 + sum_{k=0}^{n-2} prod_{m=k+1}^{n-1} (1+K_m))^(-1)
    with K_j = (1 + 1/eps) * sum_{l=0}^{j-1} kappa_{n-l, n-j} / alpha.
    ``epsilon="auto"`` maximizes over eps by golden-section search on
    log(eps) in [-12, 12], with a dense-grid fallback if the profile is
    not unimodal.
    """
    _check_positive("alpha", alpha)
    _check_count(n)
    kappa = np.zeros((n, n)) if kappa_matrix is None else np.asarray(kappa_matrix, dtype=float)
    if kappa.shape != (n, n):
        raise InputError(f"kappa matrix must be {n}x{n}")
    if np.any(kappa < 0):
        raise InputError("kappa entries must be nonnegative")

    def value_at(eps: float) -> float:
        ks = []
        for j in range(1, n):
            total = math.fsum(kappa[n - ell - 1, n - j - 1] for ell in range(j))
            ks.append((1.0 + 1.0 / eps) * total / alpha)
        bracket = 1.0
        for k in range(0, n - 1):
            prod = 1.0
            for m in range(k + 1, n):
                prod *= 1.0 + ks[m - 1]
            bracket += prod
        return alpha / (1.0 + eps) / bracket

    if epsilon != "auto":
        eps = float(epsilon)
        _check_positive("epsilon", eps)
        return value_at(eps)

    lo, hi = -12.0, 12.0
    f = lambda t: value_at(math.exp(t))
    # golden-section maximization; verify the bracket looks unimodal first
    grid = np.linspace(lo, hi, 25)
    vals = [f(t) for t in grid]
    best = max(vals)
    rises = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    sign_changes = sum(
        1 for i in range(len(rises) - 1) if rises[i] > 0 > rises[i + 1] or rises[i] < 0 < rises[i + 1]
    )
    if sign_changes > 1:
        dense = np.linspace(lo, hi, 4001)
        return max(f(t) for t in dense)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return max(best, f((a + b) / 2.0), fc, fd)


def lsi_weak_alpha(alpha: float, R: float, n: int) -> RegimeConstant:
    """Log-Sobolev constant under sum_l sqrt(rho_l) <= sqrt(R); at R = 0
    the product law keeps the one-step constant alpha."""
    _check_positive("alpha", alpha)
    if R < 0:
        raise InputError("R must be nonnegative")
    _check_count(n)
    inputs = {"alpha": alpha, "R": R, "n": n}
    if R < alpha:
        value = (math.sqrt(alpha) - math.sqrt(R)) ** 2
        return RegimeConstant(value, CONTRACTIVE, inputs, "lsi-weak")
    if R == alpha:
        return RegimeConstant(alpha / (n * (n + 1) * (_E - 1.0)), CRITICAL, inputs, "lsi-weak")
    value = (alpha / R) ** n * (R - alpha) / (_E * (n + 1))
    return RegimeConstant(value, EXPANSIVE, inputs, "lsi-weak")


def lsi_markov_kernel_alpha(alpha: float, kappa: float, n: int) -> RegimeConstant:
    """Log-Sobolev constant for a homogeneous kernel whose coupling MGF is
    sub-Gaussian with parameter kappa; same display as the weak form at
    R = kappa."""
    rc = lsi_weak_alpha(alpha, kappa, n)
    return RegimeConstant(
        rc.value, rc.regime, {"alpha": alpha, "kappa": kappa, "n": n}, "lsi-kernel"
    )


def contraction_noise_alpha(alpha: float, L: float, n: int) -> RegimeConstant:
    """Log-Sobolev constant for Z_{j+1} = Theta(Z_j) + Y_{j+1} with an
    L-Lipschitz map and LSI(alpha) noise."""
    _check_positive("alpha", alpha)
    if L < 0:
        raise InputError("L must be nonnegative")
    _check_count(n)
    inputs = {"alpha": alpha, "L": L, "n": n}
    if L < 1.0:
        return RegimeConstant((1.0 - L) ** 2 * alpha, CONTRACTIVE, inputs, "lsi-contraction")
    if L == 1.0:
        return RegimeConstant(
            alpha / (n * (n + 1) * (_E - 1.0)), CRITICAL, inputs, "lsi-contraction"
        )
    value = (L - 1.0) * alpha / (L**n * _E * (n + 1))
    return RegimeConstant(value, EXPANSIVE, inputs, "lsi-contraction")


def arma_lsi_alpha(A, B, tol: float = 1e-15, max_terms: int = 100000) -> float:
    """n-independent log-Sobolev constant for Z_{j+1} = A Z_j + B Y_{j+1}
    with standard Gaussian noise and spectral radius rho(A) < 1.

    Evaluates ((1 - sqrt(rho)) / max(1, ||B||))^2 * S^(-2) with
    S = sum_j rho^(-j) ||A^j||^2, summing until the geometric tail bound
    (ratio estimated from consecutive terms, certified once it stabilizes
    below 1) is under tol times the partial sum.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise InputError("A and B must be square matrices of equal size")
    _check_positive("tol", tol)
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    norm_b = float(np.linalg.norm(B, 2))
    if rho >= 1.0:
        raise InputError(f"spectral radius {rho} >= 1: the contraction hypothesis fails")
    if rho == 0.0:
        if np.any(A != 0.0):
            raise InputError(
                "spectral radius 0 with a nonzero (nilpotent) A makes the series "
                "rho^(-j) ||A^j||^2 ill-defined"
            )
        series = 1.0  # only the j = 0 term survives
        return (1.0 / max(1.0, norm_b)) ** 2 * series ** (-2.0)
    terms = [1.0]
    power = np.eye(A.shape[0])
    prev_ratio = None
    stable = 0
    for _ in range(max_terms):
        power = power @ A
        term = float(np.linalg.norm(power, 2) ** 2) / rho ** len(terms)
        ratio = term / terms[-1] if terms[-1] > 0 else 0.0
        terms.append(term)
        if term == 0.0:
            break
        if prev_ratio is not None and ratio < 1.0 and abs(ratio - prev_ratio) < 0.05 * (1 - ratio):
            stable += 1
        else:
            stable = 0
        prev_ratio = ratio
        if stable >= 3:
            partial = math.fsum(terms)
            tail = term * ratio / (1.0 - ratio)
            if tail < tol * partial:
                break
    series = math.fsum(terms)
    return ((1.0 - math.sqrt(rho)) / max(1.0, norm_b)) ** 2 * series ** (-2.0)


def ou_kappa(rho: float, tau: float, n: int, x: float = 0.0) -> dict:
    """Exact constants of the time-discretized Ornstein-Uhlenbeck chain.

    Returns theta = exp(-rho tau), the innovation variance sigma2
    ((1 - theta^2) / (2 rho), or tau at rho = 0), the concentration
    constant kappa_n = sigma2 sum_j (sum_i theta^i)^2 for the additive
    functional sum_j x_j, and its mean x sum_{i=1}^n theta^i.
    """
    _check_positive("tau", tau)
    _check_count(n)
    theta = math.exp(-rho * tau)
    if rho == 0.0:
        sigma2 = tau
    else:
        sigma2 = (1.0 - theta**2) / (2.0 * rho)
    kappa_n = sigma2 * math.fsum(geometric_sum(theta, n - j) ** 2 for j in range(n))
    mean_fn = x * math.fsum(theta**i for i in range(1, n + 1))
    return {"theta": theta, "sigma2": sigma2, "kappa_n": kappa_n, "mean_Fn": mean_fn}
