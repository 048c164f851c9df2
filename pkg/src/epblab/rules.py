"""Eight budgeted approval rules over a binary ballot profile.

All rules consume an (n x m) 0/1 profile plus the instance's costs and
budget, and return a feasible winning set.  Ties are always resolved by one
fixed priority permutation so results are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .model import COST_EPS, Environment, InstanceTooLargeError


class Rule(str, Enum):
    """Canonical rule identifiers; the values are the wire/CSV names."""

    AV = "av"
    AV_COST = "av_cost"
    PAV = "pav"
    GREEDY_COVER = "greedy_cover"
    PHRAGMEN = "phragmen"
    MES = "mes"
    MES_AV = "mes_av"
    MES_PHRAGMEN = "mes_phragmen"


ALL_RULES = tuple(Rule)

PAV_EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class TieBreak:
    """Fixed priority permutation; earlier entries win ties."""

    order: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError("tie-break order must be a permutation of 0..m-1")

    @classmethod
    def identity(cls, m: int) -> "TieBreak":
        return cls(tuple(range(m)))

    @classmethod
    def disfavoring(cls, m: int, alt: int) -> "TieBreak":
        """Index order with one alternative demoted to last priority."""
        return cls(tuple(j for j in range(m) if j != alt) + (alt,))

    def ranks(self) -> np.ndarray:
        r = np.empty(len(self.order), dtype=int)
        r[list(self.order)] = np.arange(len(self.order))
        return r


@dataclass(frozen=True)
class WinningSet:
    members: tuple[int, ...]
    total_cost: float
    value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))


def _counts(profile: np.ndarray) -> np.ndarray:
    profile = np.asarray(profile)
    return profile.sum(axis=0).astype(np.int64) if profile.size else np.zeros(profile.shape[1], dtype=np.int64)


def _greedy_fill(order, costs, budget, taken=()):
    members = list(taken)
    spent = float(sum(costs[j] for j in taken))
    for j in order:
        if j in members:
            continue
        if spent + costs[j] <= budget + COST_EPS:
            members.append(j)
            spent += costs[j]
    return members, spent


def _winning_set(members, costs) -> WinningSet:
    return WinningSet(tuple(sorted(members)), float(sum(costs[j] for j in members)))


def av_from_counts(costs: np.ndarray, budget: float, counts: np.ndarray, tb: TieBreak) -> WinningSet:
    """Greedy fill in order of (count desc, priority); skipped items stay skipped."""
    ranks = tb.ranks()
    order = sorted(range(len(costs)), key=lambda j: (-counts[j], ranks[j]))
    members, _ = _greedy_fill(order, costs, budget)
    return _winning_set(members, costs)


def tally_av(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    return av_from_counts(env.costs, env.budget, _counts(profile), tb)


def tally_av_per_cost(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    counts = _counts(profile)
    ranks = tb.ranks()
    ratios = counts / env.costs
    order = sorted(range(env.m), key=lambda j: (-ratios[j], ranks[j]))
    members, _ = _greedy_fill(order, env.costs, env.budget)
    return _winning_set(members, env.costs)


def _harmonic(m: int) -> np.ndarray:
    return np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, m + 1))))


def pav_scores(profile: np.ndarray, subsets: Sequence[tuple[int, ...]], m: int) -> np.ndarray:
    """Total harmonic score of each candidate subset under the profile."""
    H = _harmonic(m)
    profile = np.asarray(profile, dtype=np.float64)
    scores = np.empty(len(subsets))
    if profile.shape[0] == 0:
        scores[:] = 0.0
        return scores
    # Chunked matmul keeps memory flat for large m.
    chunk = 4096
    for start in range(0, len(subsets), chunk):
        block = subsets[start:start + chunk]
        M = np.zeros((m, len(block)))
        for i, s in enumerate(block):
            M[list(s), i] = 1.0
        k = profile @ M  # (n, block): per-agent overlap with each subset
        scores[start:start + len(block)] = H[k.astype(np.int64)].sum(axis=0)
    return scores


def _feasible_subsets(costs: np.ndarray, budget: float) -> list[tuple[int, ...]]:
    m = len(costs)
    out = []
    for mask in range(1 << m):
        c = 0.0
        members = []
        ok = True
        mm = mask
        while mm:
            j = (mm & -mm).bit_length() - 1
            c += costs[j]
            if c > budget + COST_EPS:
                ok = False
                break
            members.append(j)
            mm &= mm - 1
        if ok:
            out.append(tuple(members))
    return out


def tally_pav(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    if env.m > PAV_EXHAUSTIVE_LIMIT:
        raise InstanceTooLargeError(
            f"exhaustive PAV supports at most {PAV_EXHAUSTIVE_LIMIT} alternatives"
        )
    subsets = _feasible_subsets(env.costs, env.budget)
    scores = pav_scores(profile, subsets, env.m)
    best = scores.max()
    ranks = tb.ranks()
    # Ties: larger set first, then lexicographically earliest priority tuple.
    def key(i):
        s = subsets[i]
        return (-len(s), tuple(sorted(ranks[j] for j in s)))

    winner = min((i for i in np.flatnonzero(scores == best)), key=key)
    return _winning_set(subsets[winner], env.costs)


def tally_greedy_cover(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    profile = np.asarray(profile, dtype=bool)
    ranks = tb.ranks()
    costs, budget = env.costs, env.budget
    uncovered = np.ones(profile.shape[0], dtype=bool)
    members: list[int] = []
    spent = 0.0
    raw = _counts(profile)
    while True:
        afford = [j for j in range(env.m) if j not in members and spent + costs[j] <= budget + COST_EPS]
        if not afford:
            break
        cover = profile[uncovered].sum(axis=0) if uncovered.any() else np.zeros(env.m, dtype=np.int64)
        best_cover = max(cover[j] for j in afford)
        if best_cover == 0:
            # No selection can change coverage any more; spend the rest by raw
            # approval count like plain AV.
            rest = sorted(afford, key=lambda j: (-raw[j], ranks[j]))
            members, spent = _greedy_fill(rest, costs, budget, taken=members)
            break
        j = min((j for j in afford if cover[j] == best_cover), key=lambda j: ranks[j])
        members.append(j)
        spent += costs[j]
        uncovered &= ~profile[:, j]
    return _winning_set(members, env.costs)


def _phragmen_time(loads: np.ndarray, cost: float) -> float:
    """Smallest x with sum(max(0, x - load)) == cost over the approver loads."""
    l = np.sort(loads)
    prefix = 0.0
    k = len(l)
    for j in range(1, k + 1):
        prefix += l[j - 1]
        x = (cost + prefix) / j
        if x >= l[j - 1] - 1e-15 and (j == k or x <= l[j] + 1e-15):
            return x
    return (cost + prefix) / k  # unreachable for cost > 0


def phragmen_rounds(costs: np.ndarray, budget: float, profile: np.ndarray, tb: TieBreak):
    """Yield (selected, x, loads-after); exposes internals for diagnostics."""
    profile = np.asarray(profile, dtype=bool)
    n, m = profile.shape
    ranks = tb.ranks()
    loads = np.zeros(n)
    members: list[int] = []
    spent = 0.0
    while True:
        best = None
        for j in range(m):
            if j in members or spent + costs[j] > budget + COST_EPS:
                continue
            approvers = profile[:, j]
            if not approvers.any():
                continue  # x would be undefined
            x = _phragmen_time(loads[approvers], costs[j])
            if best is None or (x, ranks[j]) < best[:2]:
                best = (x, ranks[j], j)
        if best is None:
            return
        x, _, j = best
        members.append(j)
        spent += costs[j]
        approvers = profile[:, j]
        loads[approvers] = np.maximum(loads[approvers], x)
        yield j, x, loads.copy()


def tally_phragmen(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    members = [j for j, _, _ in phragmen_rounds(env.costs, env.budget, profile, tb)]
    return _winning_set(members, env.costs)


def _mes_cap(budgets: np.ndarray, cost: float) -> float | None:
    """Smallest per-agent cap p with sum(min(b_i, p)) >= cost, or None."""
    b = np.sort(budgets)
    total = float(b.sum())
    if total < cost - COST_EPS:
        return None
    k = len(b)
    prefix = 0.0
    for j in range(k):
        # first j agents pay their full (exhausted) share, the rest pay p
        p = (cost - prefix) / (k - j)
        if (j == 0 or b[j - 1] <= p + 1e-15) and p <= b[j] + 1e-15:
            return max(p, 0.0)
        prefix += b[j]
    return float(b[-1])


def mes_rounds(costs: np.ndarray, budget: float, profile: np.ndarray, tb: TieBreak):
    """Yield (selected, cap, payments) per round of the equal-shares phase."""
    profile = np.asarray(profile, dtype=bool)
    n, m = profile.shape
    if n < 1:
        raise ValueError("equal shares needs at least one agent")
    ranks = tb.ranks()
    shares = np.full(n, budget / n)
    members: list[int] = []
    while True:
        best = None
        for j in range(m):
            if j in members:
                continue
            approvers = profile[:, j]
            if not approvers.any():
                continue
            p = _mes_cap(shares[approvers], costs[j])
            if p is None:
                continue
            if best is None or (p, ranks[j]) < best[:2]:
                best = (p, ranks[j], j)
        if best is None:
            return
        p, _, j = best
        members.append(j)
        approvers = profile[:, j]
        pay = np.minimum(shares[approvers], p)
        shares[approvers] = np.maximum(shares[approvers] - pay, 0.0)
        payments = np.zeros(n)
        payments[approvers] = pay
        yield j, p, payments


def tally_mes(env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    members = [j for j, _, _ in mes_rounds(env.costs, env.budget, profile, tb)]
    return _winning_set(members, env.costs)


def tally_mes_plus(env: Environment, profile: np.ndarray, tb: TieBreak, completion: Rule) -> WinningSet:
    """Equal shares, then spend any leftover budget with a second rule run
    from scratch on the not-yet-selected alternatives."""
    if completion not in (Rule.AV, Rule.PHRAGMEN):
        raise ValueError("completion rule must be av or phragmen")
    first = tally_mes(env, profile, tb)
    leftover = env.budget - first.total_cost
    remaining = [j for j in range(env.m) if j not in first.members]
    if not remaining or leftover < min(env.costs[j] for j in remaining) - COST_EPS:
        return first
    sub_costs = env.costs[remaining]
    sub_profile = np.asarray(profile)[:, remaining]
    ranks = tb.ranks()
    sub_tb = TieBreak(tuple(sorted(range(len(remaining)), key=lambda i: ranks[remaining[i]])))
    if completion is Rule.AV:
        sub = av_from_counts(sub_costs, leftover, _counts(sub_profile), sub_tb)
    else:
        sub_members = [j for j, _, _ in phragmen_rounds(sub_costs, leftover, sub_profile, sub_tb)]
        sub = _winning_set(sub_members, sub_costs)
    members = list(first.members) + [remaining[i] for i in sub.members]
    return _winning_set(members, env.costs)


def tally(rule: Rule, env: Environment, profile: np.ndarray, tb: TieBreak) -> WinningSet:
    rule = Rule(rule)
    if rule is Rule.AV:
        return tally_av(env, profile, tb)
    if rule is Rule.AV_COST:
        return tally_av_per_cost(env, profile, tb)
    if rule is Rule.PAV:
        return tally_pav(env, profile, tb)
    if rule is Rule.GREEDY_COVER:
        return tally_greedy_cover(env, profile, tb)
    if rule is Rule.PHRAGMEN:
        return tally_phragmen(env, profile, tb)
    if rule is Rule.MES:
        return tally_mes(env, profile, tb)
    if rule is Rule.MES_AV:
        return tally_mes_plus(env, profile, tb, Rule.AV)
    if rule is Rule.MES_PHRAGMEN:
        return tally_mes_plus(env, profile, tb, Rule.PHRAGMEN)
    raise ValueError(f"unknown rule {rule!r}")
