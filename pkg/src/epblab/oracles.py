"""Brute-force and exact reference computations.

Everything here favours correctness over speed: exhaustive optima, exact
binomial convolutions in log space, and a dense-grid minimiser for the
pivotal rate function.  These are the ground truth that the fast paths and
closed-form approximations are tested against.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .model import COST_EPS, Environment, InstanceTooLargeError, UtilityKind
from .rules import TieBreak, WinningSet, av_from_counts

OPTIMAL_ENUM_LIMIT = 20
OPTIMAL_LIMIT = 24
VALUE_EPS = 1e-9


def _subset_sums(values: np.ndarray) -> np.ndarray:
    """sums[mask] = sum of values[j] over the set bits of mask."""
    m = len(values)
    sums = np.zeros(1 << m)
    for j in range(m):
        step = 1 << j
        sums.reshape(-1, 2 * step)[:, step:] += values[j]
    return sums


def _mask_members(mask: int) -> tuple[int, ...]:
    members = []
    while mask:
        j = (mask & -mask).bit_length() - 1
        members.append(j)
        mask &= mask - 1
    return tuple(members)


class SubsetEnumerator:
    """Precomputed exhaustive search over all feasible subsets (m <= 20).

    Built once per (costs, budget); `optimal(weights)` is then a cheap
    matvec, which keeps per-sample optimum lookups fast in Monte Carlo loops.
    """

    def __init__(self, costs: np.ndarray, budget: float):
        m = len(costs)
        if m > OPTIMAL_ENUM_LIMIT:
            raise InstanceTooLargeError(f"direct enumeration supports m <= {OPTIMAL_ENUM_LIMIT}")
        self.m = m
        self.costs = np.asarray(costs, dtype=float)
        self.budget = float(budget)
        self.feasible = _subset_sums(self.costs) <= budget + COST_EPS

    def optimal_value(self, weights: np.ndarray) -> float:
        values = _subset_sums(np.asarray(weights, dtype=float))
        return float(values[self.feasible].max())

    def optimal(self, weights: np.ndarray) -> tuple[WinningSet, float]:
        values = _subset_sums(np.asarray(weights, dtype=float))
        masked = np.where(self.feasible, values, -np.inf)
        best = float(masked.max())
        if best <= 0.0:
            # the empty set ties every zero-value optimum and is lex-smallest
            return WinningSet((), 0.0, 0.0), 0.0
        candidates = np.flatnonzero(masked == best)
        if len(candidates) == 1:
            mask = int(candidates[0])
        else:
            mask = min((int(c) for c in candidates), key=_mask_members)
        members = _mask_members(mask)
        return WinningSet(members, float(self.costs[list(members)].sum()), best), best


def _mitm_max_value(costs: np.ndarray, weights: np.ndarray, budget: float) -> float:
    """Exact max subset value under a cost cap, by meet-in-the-middle."""
    m = len(costs)
    if m == 0:
        return 0.0
    h = m // 2
    c1, w1 = costs[:h], weights[:h]
    c2, w2 = costs[h:], weights[h:]
    cost2 = _subset_sums(np.asarray(c2, dtype=float))
    val2 = _subset_sums(np.asarray(w2, dtype=float))
    order = np.argsort(cost2, kind="stable")
    cost2s = cost2[order]
    best2 = np.maximum.accumulate(val2[order])
    cost1 = _subset_sums(np.asarray(c1, dtype=float))
    val1 = _subset_sums(np.asarray(w1, dtype=float))
    best = -math.inf
    for c, v in zip(cost1, val1):
        room = budget + COST_EPS - c
        if room < 0:
            continue
        idx = np.searchsorted(cost2s, room, side="right") - 1
        if idx >= 0:
            best = max(best, v + best2[idx])
    return float(best)


def _lex_reconstruct(costs, weights, budget, best) -> tuple[int, ...]:
    """Lexicographically smallest member tuple achieving the optimum value."""
    members: list[int] = []
    spent = 0.0
    value = 0.0
    m = len(costs)
    for j in range(m):
        if value >= best - VALUE_EPS:
            break
        if spent + costs[j] > budget + COST_EPS:
            continue
        tail = _mitm_max_value(costs[j + 1:], weights[j + 1:], budget - spent - costs[j])
        if value + weights[j] + tail >= best - VALUE_EPS:
            members.append(j)
            spent += costs[j]
            value += weights[j]
    return tuple(members)


def _weights_for(env: Environment, L: Sequence[int]) -> np.ndarray:
    Larr = np.asarray(L, dtype=float)
    if env.utility_kind is UtilityKind.COST_PROPORTIONAL:
        return env.costs * Larr
    return Larr


def optimal_set(env: Environment, L: Sequence[int]) -> tuple[WinningSet, float]:
    """Exact utility maximiser over all feasible subsets.

    Direct enumeration up to 20 alternatives, meet-in-the-middle up to 24.
    Value ties resolve toward the lexicographically smallest member tuple
    (so the empty set wins whenever the optimum is zero).
    """
    if env.m > OPTIMAL_LIMIT:
        raise InstanceTooLargeError(f"exact optimum supports m <= {OPTIMAL_LIMIT}")
    weights = _weights_for(env, L)
    if env.m <= OPTIMAL_ENUM_LIMIT:
        return SubsetEnumerator(env.costs, env.budget).optimal(weights)
    best = _mitm_max_value(env.costs, weights, env.budget)
    if best <= 0.0:
        return WinningSet((), 0.0, 0.0), 0.0
    members = _lex_reconstruct(env.costs, weights, env.budget, best)
    cost = float(env.costs[list(members)].sum())
    return WinningSet(members, cost, best), best


# --- exact binomial probabilities -------------------------------------------

TIE_N_LIMIT = 100_000


def tie_log_probability_exact(n: int, p1: float, p2: float) -> float:
    """log Pr[X1 = X2] for independent X1~B(n,p1), X2~B(n,p2)."""
    if n > TIE_N_LIMIT:
        raise InstanceTooLargeError(f"exact tie probability supports n <= {TIE_N_LIMIT}")
    k = np.arange(n + 1)
    return float(logsumexp(binom.logpmf(k, n, p1) + binom.logpmf(k, n, p2)))


def tie_probability_exact(n: int, p1: float, p2: float) -> float:
    return math.exp(tie_log_probability_exact(n, p1, p2))


def _log_tail_below(logpmf: np.ndarray) -> np.ndarray:
    """out[x] = log Pr[X < x] from a logpmf vector (stable prefix sums)."""
    out = np.full(len(logpmf), -np.inf)
    out[1:] = np.logaddexp.accumulate(logpmf)[:-1]
    return out


def _log_tail_above(logpmf: np.ndarray) -> np.ndarray:
    """out[x] = log Pr[X > x]."""
    out = np.full(len(logpmf), -np.inf)
    out[:-1] = np.logaddexp.accumulate(logpmf[::-1])[::-1][1:]
    return out


def pivotal_log_probability_exact(
    n: int,
    eq_probs: Sequence[float],
    gt_probs: Sequence[float] = (),
    lt_probs: Sequence[float] = (),
) -> float:
    """log of the exact joint probability that independent binomial counts sit
    exactly on / strictly above / strictly below a common level x, summed
    over x.  Requires at least one equality variable."""
    if not len(eq_probs):
        raise ValueError("need at least one equality constraint")
    x = np.arange(n + 1)
    f = np.zeros(n + 1)
    for p in eq_probs:
        f += binom.logpmf(x, n, p)
    for p in gt_probs:
        f += _log_tail_above(binom.logpmf(x, n, p))
    for p in lt_probs:
        f += _log_tail_below(binom.logpmf(x, n, p))
    return float(logsumexp(f))


def pivotal_probability_exact(n, eq_probs, gt_probs=(), lt_probs=()) -> float:
    return math.exp(pivotal_log_probability_exact(n, eq_probs, gt_probs, lt_probs))


# --- dense-grid rate-function minimiser --------------------------------------

GRID_POINTS = 10**6
_grid_cache: dict[str, np.ndarray] = {}


def _grid():
    if not _grid_cache:
        t = np.linspace(1e-6, 1.0 - 1e-6, GRID_POINTS)
        _grid_cache["t"] = t
        _grid_cache["log_t"] = np.log(t)
        _grid_cache["log_1mt"] = np.log1p(-t)
        _grid_cache["neg_ent"] = t * _grid_cache["log_t"] + (1 - t) * _grid_cache["log_1mt"]
    return _grid_cache


def _g_scalar(t: float, eq, gt, lt) -> float:
    # local copy of the KL-sum so this oracle does not share code with the
    # closed-form minimiser it is used to check
    def kl(p):
        return t * math.log(t / p) + (1 - t) * math.log((1 - t) / (1 - p))

    total = sum(kl(p) for p in eq)
    total += sum(kl(p) for p in gt if p < t)
    total += sum(kl(p) for p in lt if p > t)
    return total


def minimize_rate_function_grid(
    eq_probs: Sequence[float],
    gt_probs: Sequence[float] = (),
    lt_probs: Sequence[float] = (),
) -> tuple[float, float]:
    """Grid search over one million points followed by golden-section
    refinement; returns (argmin, min value)."""
    if not len(eq_probs):
        raise ValueError("need at least one equality constraint")
    g = _grid()
    t, log_t, log_1mt, neg_ent = g["t"], g["log_t"], g["log_1mt"], g["neg_ent"]
    eq = np.asarray(eq_probs, dtype=float)
    total = len(eq) * neg_ent - np.log(eq).sum() * t - np.log1p(-eq).sum() * (1 - t)
    for p in gt_probs:
        term = neg_ent - math.log(p) * t - math.log1p(-p) * (1 - t)
        total = total + np.where(t > p, term, 0.0)
    for p in lt_probs:
        term = neg_ent - math.log(p) * t - math.log1p(-p) * (1 - t)
        total = total + np.where(t < p, term, 0.0)
    i = int(np.argmin(total))
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, GRID_POINTS - 1)]
    # golden-section refinement on the bracketing interval
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _g_scalar(c, eq_probs, gt_probs, lt_probs)
    fd = _g_scalar(d, eq_probs, gt_probs, lt_probs)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _g_scalar(c, eq_probs, gt_probs, lt_probs)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _g_scalar(d, eq_probs, gt_probs, lt_probs)
    t_star = (a + b) / 2
    return t_star, _g_scalar(t_star, eq_probs, gt_probs, lt_probs)


# --- exact expected gain of a ballot deviation -------------------------------

DEVIATION_N_LIMIT = 8
DEVIATION_M_LIMIT = 4


def deviation_gain_exact(
    env: Environment,
    n: int,
    signal: Sequence[int],
    deviation: Sequence[int],
    tb: TieBreak,
) -> float:
    """Expected utility of reporting one's signal minus the expected utility
    of reporting `deviation`, for one agent among n, under greedy approval
    voting with unit costs.

    The posterior over quality vectors conditions on the agent's full signal
    vector; the other n-1 agents report their signals, so their approval
    counts are independent binomials given the qualities.  Positive output
    means the honest report is (weakly) better.
    """
    if n > DEVIATION_N_LIMIT or env.m > DEVIATION_M_LIMIT:
        raise InstanceTooLargeError("exact deviation gain is limited to n <= 8, m <= 4")
    if not np.allclose(env.costs, 1.0):
        raise ValueError("exact deviation gain requires unit costs")
    m = env.m
    signal = np.asarray(signal, dtype=int)
    deviation = np.asarray(deviation, dtype=int)

    # Outcomes depend only on the other agents' approval counts plus the
    # report, so enumerate count vectors once and reuse them for every L.
    grids = [range(n)] * m
    states = list(itertools.product(*grids))
    delta = np.zeros((len(states), m))
    for idx, x in enumerate(states):
        counts = np.asarray(x, dtype=np.int64)
        w_sig = av_from_counts(env.costs, env.budget, counts + signal, tb)
        w_dev = av_from_counts(env.costs, env.budget, counts + deviation, tb)
        delta[idx, list(w_sig.members)] += 1.0
        delta[idx, list(w_dev.members)] -= 1.0

    gain = 0.0
    total_post = 0.0
    for L in itertools.product(range(env.lmax + 1), repeat=m):
        p = env.q[np.arange(m), list(L)]
        post = 1.0
        for j in range(m):
            like = p[j] if signal[j] else 1.0 - p[j]
            post *= env.priors[j, L[j]] * like
        if post == 0.0:
            continue
        T = np.ones(1)
        for j in range(m):
            T = np.multiply.outer(T, binom.pmf(np.arange(n), n - 1, p[j]))
        per_alt = T.ravel() @ delta
        weights = _weights_for(env, L)
        gain += post * float(per_alt @ weights)
        total_post += post
    return gain / total_post
