"""Incentive analysis for informative voting under greedy approval voting.

Covers the unit-cost pivotal machinery: closed-form tie-probability
approximation for two binomial counts, enumeration of pivotal
(partition, quality-vector) pairs around a fixed pivot alternative, the
KL-divergence rate function whose minimum governs how fast each pivotal
event becomes rare, an exact minimiser for it, and the Monte Carlo check
of how rarely the equilibrium necessary condition G+ = G- holds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

DERIVATIVE_SIGN_TOL = 1e-12
SINGULAR_MATCH_TOL = 1e-12


class EmptyPivotalSetError(ValueError):
    pass


class SingularCaseError(ValueError):
    """The refined estimate only covers non-singular minimisers."""


@dataclass(frozen=True)
class ConstraintSpec:
    """Probabilities behind one pivotal event: counts that must equal the
    pivot's count (includes the pivot itself), exceed it, or fall below it."""

    eq_probs: tuple[float, ...]
    gt_probs: tuple[float, ...] = ()
    lt_probs: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.eq_probs:
            raise ValueError("need at least one equality constraint")
        for p in (*self.eq_probs, *self.gt_probs, *self.lt_probs):
            if not 0.0 < p < 1.0:
                raise ValueError("constraint probabilities must lie in (0, 1)")


@dataclass(frozen=True)
class RateFunctionResult:
    t_tilde: float
    g_value: float
    active_size: int
    singular: bool


@dataclass(frozen=True)
class PivotalPartition:
    """Disjoint split of the non-pivot alternatives by their approval counts
    relative to the pivot (strictly above / tied / strictly below).

    The pivot is alternative 0 by convention and the tie-break places it
    last, so with one extra approval the pivot enters the winning set exactly
    when |gt| <= B-1 and |gt| + |eq| >= B.
    """

    gt: tuple[int, ...]
    eq: tuple[int, ...]
    lt: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gt", tuple(sorted(self.gt)))
        object.__setattr__(self, "eq", tuple(sorted(self.eq)))
        object.__setattr__(self, "lt", tuple(sorted(self.lt)))
        groups = self.gt + self.eq + self.lt
        if len(set(groups)) != len(groups):
            raise ValueError("partition classes must be disjoint")
        if 0 in groups:
            raise ValueError("the pivot (alternative 0) is not partitioned")

    def is_pivotal(self, budget: int) -> bool:
        return len(self.gt) <= budget - 1 and len(self.gt) + len(self.eq) >= budget

    def displaced(self, budget: int) -> int:
        """The tied alternative the pivot pushes out of the winning set."""
        return self.eq[budget - len(self.gt) - 1]


def binary_bne_lhs_rhs(q: np.ndarray) -> tuple[float, float]:
    """Two-alternative, binary-quality equilibrium comparator.

    Informative voting can only be an equilibrium in the large-agent limit
    when the two returned values are equal; they differ on all but a
    measure-zero set of signal structures.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (2, 2):
        raise ValueError("expected a 2x2 signal matrix [alternative, quality]")
    lhs = math.sqrt(q[0, 1] * q[1, 0]) + math.sqrt((1 - q[0, 1]) * (1 - q[1, 0]))
    rhs = math.sqrt(q[0, 0] * q[1, 1]) + math.sqrt((1 - q[0, 0]) * (1 - q[1, 1]))
    return lhs, rhs


def tie_log_probability_saddlepoint(n: int, p1: float, p2: float) -> float:
    base = math.sqrt(p1 * p2) + math.sqrt((1 - p1) * (1 - p2))
    return (
        (2 * n + 1) * math.log(base)
        - math.log(2 * math.sqrt(math.pi * n))
        - 0.25 * math.log(p1 * p2 * (1 - p1) * (1 - p2))
    )


def tie_probability_saddlepoint(n: int, p1: float, p2: float) -> float:
    """Closed-form approximation of Pr[B(n,p1) = B(n,p2)]; relative error
    shrinks like 1/n."""
    if n < 1:
        raise ValueError("n must be positive")
    return math.exp(tie_log_probability_saddlepoint(n, p1, p2))


def enumerate_pivotal_pairs(
    m: int, budget: int, lmax: int
) -> tuple[list[tuple[PivotalPartition, tuple[int, ...]]], list[tuple[PivotalPartition, tuple[int, ...]]]]:
    """All (partition, quality-vector) pairs where one extra approval for the
    pivot flips the outcome, split by whether the flip raises utility
    (pivot quality above the displaced alternative's) or lowers it.
    Unit costs; equal-quality pairs are dropped."""
    if budget < 1 or budget >= m:
        raise ValueError("budget must satisfy 1 <= B < m for pivotal analysis")
    others = list(range(1, m))
    quality_vectors = list(itertools.product(range(lmax + 1), repeat=m))
    plus: list[tuple[PivotalPartition, tuple[int, ...]]] = []
    minus: list[tuple[PivotalPartition, tuple[int, ...]]] = []
    for g in range(0, budget):
        for gts in itertools.combinations(others, g):
            rest = [j for j in others if j not in gts]
            for e in range(max(1, budget - g), len(rest) + 1):
                for eqs in itertools.combinations(rest, e):
                    lts = tuple(j for j in rest if j not in eqs)
                    part = PivotalPartition(gt=gts, eq=eqs, lt=lts)
                    jd = part.displaced(budget)
                    for L in quality_vectors:
                        if L[0] > L[jd]:
                            plus.append((part, L))
                        elif L[0] < L[jd]:
                            minus.append((part, L))
    return plus, minus


def partition_to_spec(
    part: PivotalPartition, L: Sequence[int], q: np.ndarray
) -> ConstraintSpec:
    """Constraint probabilities of one pivotal event: each alternative
    contributes its positive-signal probability at its quality."""
    q = np.asarray(q, dtype=float)
    L = np.asarray(L, dtype=int)
    return ConstraintSpec(
        eq_probs=(float(q[0, L[0]]),) + tuple(float(q[j, L[j]]) for j in part.eq),
        gt_probs=tuple(float(q[j, L[j]]) for j in part.gt),
        lt_probs=tuple(float(q[j, L[j]]) for j in part.lt),
    )


def _kl(t: float, p: float) -> float:
    return t * math.log(t / p) + (1 - t) * math.log((1 - t) / (1 - p))


def _active_probs(t: float, spec: ConstraintSpec) -> list[float]:
    act = list(spec.eq_probs)
    act += [p for p in spec.gt_probs if p < t]
    act += [p for p in spec.lt_probs if p > t]
    return act


def rate_function_G(t: float, spec: ConstraintSpec) -> float:
    """Sum of KL(t||p) over the active constraints at t.

    Equality constraints are always active; a strictly-above constraint only
    costs probability once t exceeds its parameter (the count must stay above
    a level its mean no longer clears), and symmetrically for strictly-below.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    return sum(_kl(t, p) for p in _active_probs(t, spec))


def _kl_slope(t: float, p: float) -> float:
    return math.log(t * (1 - p) / (p * (1 - t)))


def compute_t_tilde(spec: ConstraintSpec) -> RateFunctionResult:
    """Exact minimiser of the rate function.

    Candidates are, per interval between consecutive tail parameters, the
    weighted geometric-mean stationary point alpha/(alpha+beta) when it lands
    inside the interval, plus every tail parameter whose one-sided slopes
    bracket zero.  The smallest rate wins; ties go to the smaller t.
    """
    tails = sorted(set(spec.gt_probs) | set(spec.lt_probs))
    bounds = [0.0] + tails + [1.0]
    candidates: list[tuple[float, float]] = []  # (g, t)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        active = list(spec.eq_probs)
        active += [p for p in spec.gt_probs if p <= lo]
        active += [p for p in spec.lt_probs if p >= hi]
        la = sum(math.log(p) for p in active) / len(active)
        lb = sum(math.log1p(-p) for p in active) / len(active)
        t_star = expit(la - lb)
        if lo < t_star < hi:
            candidates.append((rate_function_G(t_star, spec), t_star))
    for qv in tails:
        below = list(spec.eq_probs)
        below += [p for p in spec.gt_probs if p < qv]
        below += [p for p in spec.lt_probs if p >= qv]
        above = list(spec.eq_probs)
        above += [p for p in spec.gt_probs if p <= qv]
        above += [p for p in spec.lt_probs if p > qv]
        d_minus = sum(_kl_slope(qv, p) for p in below)
        d_plus = sum(_kl_slope(qv, p) for p in above)
        if d_minus <= DERIVATIVE_SIGN_TOL and d_plus >= -DERIVATIVE_SIGN_TOL:
            candidates.append((rate_function_G(qv, spec), qv))
    if not candidates:
        # Float-tolerance fallback: the minimiser must then sit at a tail point.
        candidates = [(rate_function_G(qv, spec), qv) for qv in tails]
    g_value, t_tilde = min(candidates)
    singular = any(abs(t_tilde - qv) <= SINGULAR_MATCH_TOL for qv in tails)
    return RateFunctionResult(
        t_tilde=t_tilde,
        g_value=g_value,
        active_size=len(_active_probs(t_tilde, spec)),
        singular=singular,
    )


def g_min_over(
    pairs: Sequence[tuple[PivotalPartition, Sequence[int]]], q: np.ndarray
) -> float:
    """Smallest rate over a set of pivotal pairs; the most likely of the
    pairs dominates the deviation incentive."""
    if not pairs:
        raise EmptyPivotalSetError("no pivotal pairs to minimise over")
    return min(
        compute_t_tilde(partition_to_spec(part, L, q)).g_value for part, L in pairs
    )


# --- vectorised minimum-rate kernel ------------------------------------------
#
# The rarity simulation evaluates the rate minimum for thousands of pivotal
# pairs per sampled structure; this batch path mirrors compute_t_tilde on
# uniform-shape prob arrays and is cross-checked against it in the tests.


def _g_values_batch(eq: np.ndarray, gt: np.ndarray, lt: np.ndarray) -> np.ndarray:
    rows, k1 = eq.shape
    log_eq_p = np.log(eq).sum(axis=1)
    log_eq_q = np.log1p(-eq).sum(axis=1)
    tails = np.concatenate([gt, lt], axis=1)
    r = tails.shape[1]
    if r == 0:
        la = log_eq_p / k1
        lb = log_eq_q / k1
        return -k1 * np.logaddexp(la, lb)
    log_gt_p, log_gt_q = np.log(gt), np.log1p(-gt)
    log_lt_p, log_lt_q = np.log(lt), np.log1p(-lt)
    S = np.sort(tails, axis=1)
    lo = np.concatenate([np.zeros((rows, 1)), S], axis=1)
    hi = np.concatenate([S, np.ones((rows, 1))], axis=1)
    best = np.full(rows, np.inf)
    for i in range(r + 1):
        lo_i, hi_i = lo[:, i], hi[:, i]
        a_gt = gt <= lo_i[:, None]
        a_lt = lt >= hi_i[:, None]
        s = k1 + a_gt.sum(axis=1) + a_lt.sum(axis=1)
        lp = log_eq_p + np.where(a_gt, log_gt_p, 0.0).sum(axis=1) + np.where(a_lt, log_lt_p, 0.0).sum(axis=1)
        lq = log_eq_q + np.where(a_gt, log_gt_q, 0.0).sum(axis=1) + np.where(a_lt, log_lt_q, 0.0).sum(axis=1)
        la, lb = lp / s, lq / s
        t_star = expit(la - lb)
        g = -s * np.logaddexp(la, lb)
        valid = (t_star > lo_i) & (t_star < hi_i)
        best = np.where(valid & (g < best), g, best)
    for c in range(r):
        qv = tails[:, c]
        log_q, log_1mq = np.log(qv), np.log1p(-qv)

        def kl_sum(probs, log_p, log_1mp, mask):
            terms = qv[:, None] * (log_q[:, None] - log_p) + (1 - qv)[:, None] * (
                log_1mq[:, None] - log_1mp
            )
            return np.where(mask, terms, 0.0).sum(axis=1)

        g = kl_sum(eq, np.log(eq), np.log1p(-eq), np.ones_like(eq, dtype=bool))
        g += kl_sum(gt, log_gt_p, log_gt_q, gt < qv[:, None])
        g += kl_sum(lt, log_lt_p, log_lt_q, lt > qv[:, None])
        best = np.minimum(best, g)
    return best


def _compile_pair_groups(pairs, lmax: int):
    """Group pairs by (|eq|, |gt|, |lt|) and flatten each side into index
    arrays over a flattened (m, lmax+1) structure matrix."""
    groups: dict[tuple[int, int, int], list[tuple[list[int], list[int], list[int]]]] = {}
    for part, L in pairs:
        eq_idx = [0 * (lmax + 1) + L[0]] + [j * (lmax + 1) + L[j] for j in part.eq]
        gt_idx = [j * (lmax + 1) + L[j] for j in part.gt]
        lt_idx = [j * (lmax + 1) + L[j] for j in part.lt]
        groups.setdefault((len(eq_idx), len(gt_idx), len(lt_idx)), []).append(
            (eq_idx, gt_idx, lt_idx)
        )
    compiled = []
    for (ke, kg, kl_), rows in groups.items():
        eq = np.array([r[0] for r in rows], dtype=np.int64).reshape(len(rows), ke)
        gt = np.array([r[1] for r in rows], dtype=np.int64).reshape(len(rows), kg)
        lt = np.array([r[2] for r in rows], dtype=np.int64).reshape(len(rows), kl_)
        compiled.append((eq, gt, lt))
    return compiled


def batch_g_min(compiled_groups, flat_structure: np.ndarray) -> float:
    return min(
        float(_g_values_batch(flat_structure[eq], flat_structure[gt], flat_structure[lt]).min())
        for eq, gt, lt in compiled_groups
    )


STRUCTURE_CLAMP = 1e-6


def sample_structure(
    rng: np.random.Generator, m: int, lmax: int, dominant_only: bool = False
) -> np.ndarray:
    """Uniform draw from the open cube of signal structures; with
    dominant_only, a draw conditioned on quality dominance (order statistics
    split into per-level blocks, shuffled across alternatives within each)."""
    if not dominant_only:
        return rng.uniform(STRUCTURE_CLAMP, 1 - STRUCTURE_CLAMP, size=(m, lmax + 1))
    vals = np.sort(rng.uniform(STRUCTURE_CLAMP, 1 - STRUCTURE_CLAMP, size=m * (lmax + 1)))
    q = np.empty((m, lmax + 1))
    for lev in range(lmax + 1):
        block = vals[lev * m:(lev + 1) * m]
        q[rng.permutation(m), lev] = block
    return q


@dataclass(frozen=True)
class RarityResult:
    hold_count: int
    total: int
    tolerance: float
    g_plus: np.ndarray
    g_minus: np.ndarray


def rarity_simulation(
    m: int,
    budget: int,
    lmax: int,
    n_samples: int,
    tolerance: float,
    seed: int,
    dominant_only: bool = False,
) -> RarityResult:
    """Sample signal structures and count how often the minimum rates of the
    utility-raising and utility-lowering pivotal families coincide within
    the tolerance.  Holding is the equilibrium necessary condition; it is
    expected to be rare."""
    plus, minus = enumerate_pivotal_pairs(m, budget, lmax)
    plus_c = _compile_pair_groups(plus, lmax)
    minus_c = _compile_pair_groups(minus, lmax)
    g_plus = np.empty(n_samples)
    g_minus = np.empty(n_samples)
    for s in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(s,)))
        q = sample_structure(rng, m, lmax, dominant_only)
        flat = q.ravel()
        g_plus[s] = batch_g_min(plus_c, flat)
        g_minus[s] = batch_g_min(minus_c, flat)
    holds = np.abs(g_plus - g_minus) < tolerance
    return RarityResult(
        hold_count=int(holds.sum()),
        total=n_samples,
        tolerance=tolerance,
        g_plus=g_plus,
        g_minus=g_minus,
    )


def refined_pivotal_log_estimate(n: int, spec: ConstraintSpec) -> float:
    """Sharper closed form for the log pivotal probability when the rate
    minimiser is non-singular: exponential rate plus the polynomial and
    geometric-tail corrections."""
    res = compute_t_tilde(spec)
    if res.singular:
        raise SingularCaseError("refined estimate requires a non-singular minimiser")
    t = res.t_tilde
    act_gt = [p for p in spec.gt_probs if p < t]
    act_lt = [p for p in spec.lt_probs if p > t]
    act = list(spec.eq_probs) + act_gt + act_lt
    s = len(act)
    la = sum(math.log(p) for p in act) / s
    lb = sum(math.log1p(-p) for p in act) / s
    log_ab = np.logaddexp(la, lb)  # log(alpha + beta)
    logp = s * n * log_ab
    logp -= ((s - 1) / 2) * math.log(2 * math.pi * n)
    logp -= ((s - 1) / 2) * math.log(t * (1 - t))
    logp -= 0.5 * math.log(s)
    for p in act_gt:
        lam = _kl_slope(t, p)  # > 0 for p < t
        logp += -lam - math.log1p(-math.exp(-lam))
    for p in act_lt:
        mu = -_kl_slope(t, p)  # > 0 for p > t
        logp += -mu - math.log1p(-math.exp(-mu))
    a_prime = sum(1 for p in spec.gt_probs if p == t)
    c_prime = sum(1 for p in spec.lt_probs if p == t)
    logp -= (a_prime + c_prime) * math.log(2)
    return float(logp)


def refined_pivotal_estimate(n: int, spec: ConstraintSpec) -> float:
    return math.exp(refined_pivotal_log_estimate(n, spec))
