"""Relative entropy for discrete and Gaussian pairs, and the chain rule.

All logarithms are natural. The chain rule splits the relative entropy of
two joint laws on a product space into the entropy of the first marginals
plus one conditional term per later time step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .measures import DiscreteMeasure, GaussianMeasure, _point_key


def relative_entropy_discrete(nu: DiscreteMeasure, mu: DiscreteMeasure) -> float:
    """sum nu_i log(nu_i / mu_i), with 0 log 0 = 0; +inf off the support of mu."""
    mu_w = mu.as_dict()
    terms = []
    for p, w in zip(nu.support, nu.weights):
        if w == 0.0:
            continue
        m = mu_w.get(_point_key(p), 0.0)
        if m == 0.0:
            return math.inf
        terms.append(w * math.log(w / m))
    return max(math.fsum(terms), 0.0)


def relative_entropy_gaussian(nu: GaussianMeasure, mu: GaussianMeasure) -> float:
    """Closed-form KL divergence between nondegenerate Gaussian laws."""
    if nu.dim != mu.dim:
        raise InputError("Gaussian dimensions differ")
    m = mu.dim
    sign, logdet_mu = np.linalg.slogdet(mu.cov)
    if sign <= 0:
        raise InputError("reference covariance is singular")
    sign_nu, logdet_nu = np.linalg.slogdet(nu.cov)
    if sign_nu <= 0:
        raise InputError("covariance of the first argument is singular")
    prec = np.linalg.inv(mu.cov)
    gap = mu.mean - nu.mean
    val = 0.5 * (
        float(np.trace(prec @ nu.cov)) - m + float(gap @ prec @ gap) + logdet_mu - logdet_nu
    )
    return max(val, 0.0)


@dataclass(frozen=True)
class EntropyBreakdown:
    """Chain-rule decomposition of a joint relative entropy.

    ``total = initial_term + sum(conditional_terms)`` when finite;
    ``failure_step`` is the 1-based step at which absolute continuity
    failed when total is +inf.
    """

    total: float
    initial_term: float
    conditional_terms: tuple = field(default_factory=tuple)
    failure_step: int | None = None

    def __post_init__(self):
        if math.isfinite(self.total):
            parts = self.initial_term + math.fsum(self.conditional_terms)
            if abs(parts - self.total) > 1e-10 * max(1.0, abs(self.total)):
                raise InputError("breakdown terms do not sum to the total")
            if self.initial_term < -1e-12 or any(t < -1e-12 for t in self.conditional_terms):
                raise InputError("entropy terms must be nonnegative")


def _joint_items(q: DiscreteMeasure):
    for p, w in zip(q.support, q.weights):
        yield tuple(p), float(w)


def _marginal(q: DiscreteMeasure, upto: int) -> dict:
    out: dict = {}
    for p, w in _joint_items(q):
        key = _point_key(p[:upto])
        out[key] = out.get(key, 0.0) + w
    return out


def _conditional(q: DiscreteMeasure, k: int) -> dict:
    """q_k(x_k | x^(k-1)) as {prefix: {state: prob}} for 1-based step k."""
    groups: dict = {}
    for p, w in _joint_items(q):
        if w == 0.0:
            continue
        pref = _point_key(p[: k - 1])
        groups.setdefault(pref, {})
        key = _point_key(p[k - 1])
        groups[pref][key] = groups[pref].get(key, 0.0) + w
    for pref, states in groups.items():
        z = sum(states.values())
        for key in states:
            states[key] /= z
    return groups


class _TabularJoint:
    """Joint-law view of a tabular Markov model, evaluated pointwise."""

    def __init__(self, model):
        self.init = np.asarray(model.init, dtype=float)
        self.trans = np.asarray(model.transition, dtype=float)

    def initial(self) -> dict:
        # keyed by length-1 prefixes, matching the marginal of the joint law
        return {(i,): float(w) for i, w in enumerate(self.init) if w > 0}

    def conditional(self, prefix, k: int) -> dict:
        row = self.trans[int(prefix[-1])]
        return {i: float(w) for i, w in enumerate(row) if w > 0}


class _DiscreteJoint:
    """Joint-law view of an explicit discrete measure on tuples."""

    def __init__(self, p: DiscreteMeasure):
        self.p = p
        self._marginals: dict = {}
        self._conditionals: dict = {}

    def initial(self) -> dict:
        return self._marginal(1)

    def _marginal(self, upto: int) -> dict:
        if upto not in self._marginals:
            self._marginals[upto] = _marginal(self.p, upto)
        return self._marginals[upto]

    def conditional(self, prefix, k: int) -> dict:
        if k not in self._conditionals:
            self._conditionals[k] = _conditional(self.p, k)
        return self._conditionals[k].get(_point_key(tuple(prefix)), {})


def _entropy_of_dicts(qd: dict, pd: dict) -> float:
    terms = []
    for key, w in qd.items():
        if w == 0.0:
            continue
        m = pd.get(key, 0.0)
        if m == 0.0:
            return math.inf
        terms.append(w * math.log(w / m))
    return max(math.fsum(terms), 0.0)


def chain_rule_decompose(q: DiscreteMeasure, p) -> EntropyBreakdown:
    """Decompose Ent(Q | P) along time steps of a product-space joint law.

    ``q`` must have tuple support; ``p`` is a tabular Markov model or a
    discrete joint law on the same product space. Conditionals of Q at
    histories Q does not visit carry zero weight and contribute nothing.
    """
    n = len(tuple(q.support[0]))
    if any(len(tuple(pt)) != n for pt in q.support):
        raise InputError("joint support tuples must share one length")
    view = _DiscreteJoint(p) if isinstance(p, DiscreteMeasure) else _TabularJoint(p)

    q1 = _marginal(q, 1)
    initial = _entropy_of_dicts(q1, view.initial())
    if math.isinf(initial):
        return EntropyBreakdown(math.inf, math.inf, (), failure_step=1)

    conditionals = []
    for k in range(2, n + 1):
        q_prev = _marginal(q, k - 1)
        q_cond = _conditional(q, k)
        acc = []
        for pref_key, qd in q_cond.items():
            w_pref = q_prev.get(pref_key, 0.0)
            if w_pref == 0.0:
                continue
            prefix = pref_key if isinstance(pref_key, tuple) else (pref_key,)
            ent = _entropy_of_dicts(qd, view.conditional(prefix, k))
            if math.isinf(ent):
                return EntropyBreakdown(
                    math.inf, initial, tuple(conditionals), failure_step=k
                )
            acc.append(w_pref * ent)
        conditionals.append(max(math.fsum(acc), 0.0))
    total = initial + math.fsum(conditionals)
    return EntropyBreakdown(total, initial, tuple(conditionals))
