"""Problem instances for participatory budgeting with noisy quality signals.

An instance couples alternatives (with costs and a budget cap) to a latent
integer quality per alternative.  Agents never observe qualities directly;
each agent receives an independent binary signal per alternative whose
positive-signal probability depends on that alternative's quality.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# Slack for feasibility comparisons: real-valued costs make exact equality
# tests fragile once sums are involved.
COST_EPS = 1e-9

PRIOR_SUM_TOL = 1e-12


class InstanceTooLargeError(ValueError):
    """An exact/exhaustive computation was asked for beyond its size limit."""


class UtilityKind(str, Enum):
    NORMAL = "normal"
    COST_PROPORTIONAL = "cost_proportional"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Environment:
    """One PB instance: costs, budget, quality priors, signal model, utility.

    Immutable after construction; all sampling goes through explicit RNG
    streams, so instances can be shared freely across workers.

    ``priors`` and ``q`` are (m, lmax+1) matrices indexed [alternative, quality];
    ``q[j, l]`` is the probability of a positive signal about alternative ``j``
    when its quality is ``l``.
    """

    costs: np.ndarray
    budget: float
    lmax: int
    priors: np.ndarray
    q: np.ndarray
    utility_kind: UtilityKind = UtilityKind.NORMAL
    n_default: int = 100

    def __post_init__(self):
        object.__setattr__(self, "costs", _readonly(self.costs))
        object.__setattr__(self, "priors", _readonly(self.priors))
        object.__setattr__(self, "q", _readonly(self.q))
        object.__setattr__(self, "utility_kind", UtilityKind(self.utility_kind))
        m = self.costs.shape[0]
        if self.costs.ndim != 1 or m < 1:
            raise ValueError("costs must be a non-empty 1-d array")
        if np.any(self.costs <= 0):
            raise ValueError("all costs must be positive")
        if self.budget < float(self.costs.max()) - COST_EPS:
            raise ValueError("budget must cover the most expensive alternative")
        if self.lmax < 1:
            raise ValueError("quality range needs at least two levels")
        shape = (m, self.lmax + 1)
        if self.priors.shape != shape:
            raise ValueError(f"priors must have shape {shape}")
        if self.q.shape != shape:
            raise ValueError(f"q must have shape {shape}")
        if np.any(self.priors < 0):
            raise ValueError("priors must be non-negative")
        if np.any(np.abs(self.priors.sum(axis=1) - 1.0) > PRIOR_SUM_TOL):
            raise ValueError("each prior must sum to 1")
        if np.any(self.q <= 0) or np.any(self.q >= 1):
            raise ValueError("signal probabilities must lie strictly inside (0, 1)")

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    @property
    def alpha(self) -> float:
        """Ratio of the highest to the lowest cost."""
        return float(self.costs.max() / self.costs.min())


def utility(env: Environment, members: Iterable[int], L: Sequence[int]) -> float:
    """Ground-truth utility of a winning set; does not check feasibility."""
    idx = np.fromiter(members, dtype=int)
    if idx.size == 0:
        return 0.0
    Larr = np.asarray(L, dtype=float)
    if env.utility_kind is UtilityKind.NORMAL:
        return float(Larr[idx].sum())
    return float((env.costs[idx] * Larr[idx]).sum())


def is_feasible(env: Environment, members: Iterable[int]) -> bool:
    idx = np.fromiter(members, dtype=int)
    cost = float(env.costs[idx].sum()) if idx.size else 0.0
    return cost <= env.budget + COST_EPS


def is_quality_dominant(q: np.ndarray) -> bool:
    """True when every higher quality level beats every lower one, across
    and within alternatives: min over level l entries > max over level l-1."""
    q = np.asarray(q, dtype=float)
    lows = q.min(axis=0)
    highs = q.max(axis=0)
    return bool(np.all(lows[1:] > highs[:-1]))


def sample_quality_vector(env: Environment, rng: np.random.Generator) -> np.ndarray:
    """Draw each alternative's quality independently from its prior."""
    u = rng.random(env.m)
    cum = np.cumsum(env.priors, axis=1)
    L = (cum < u[:, None]).sum(axis=1)
    return np.minimum(L, env.lmax).astype(np.int64)


def sample_signal_profile(
    env: Environment, L: Sequence[int], n: int, rng: np.random.Generator
) -> np.ndarray:
    """n x m binary signal matrix; rows are agents, i.i.d. given qualities."""
    Larr = np.asarray(L, dtype=int)
    p = env.q[np.arange(env.m), Larr]
    return (rng.random((n, env.m)) < p).astype(np.uint8)


def generate_environment(
    m: int,
    alpha: float,
    budget: float,
    lmax: int,
    rng: np.random.Generator,
    utility_kind: UtilityKind = UtilityKind.NORMAL,
) -> Environment:
    """Random instance: uniform priors, costs uniform on [1, alpha] with one
    alternative pinned to each endpoint, and signal probabilities drawn from
    disjoint bands of [0.1, 0.9] (one band per quality level, so the result
    is always quality dominant).
    """
    if m < 2:
        raise ValueError("need at least two alternatives")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    if lmax < 1:
        raise ValueError("lmax must be at least 1")
    if budget < alpha:
        raise ValueError("budget must be at least alpha (max cost)")
    costs = rng.uniform(1.0, alpha, size=m)
    lo_idx, hi_idx = rng.choice(m, size=2, replace=False)
    costs[lo_idx] = 1.0
    costs[hi_idx] = alpha
    # Quality-level bands partition [0.1, 0.9]; band l is [edges[l], edges[l+1]).
    edges = np.linspace(0.1, 0.9, lmax + 2)
    q = np.empty((m, lmax + 1))
    for j in range(m):
        for lev in range(lmax + 1):
            q[j, lev] = rng.uniform(edges[lev], edges[lev + 1])
    priors = np.full((m, lmax + 1), 1.0 / (lmax + 1))
    return Environment(
        costs=costs, budget=float(budget), lmax=lmax, priors=priors, q=q,
        utility_kind=utility_kind,
    )


def env_to_json(env: Environment) -> str:
    doc = {
        "m": env.m,
        "costs": [float(c) for c in env.costs],
        "budget": float(env.budget),
        "lmax": env.lmax,
        "priors": [[float(p) for p in row] for row in env.priors],
        "q": [[float(v) for v in row] for row in env.q],
        "utility": env.utility_kind.value,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


_JSON_FIELDS = {"m", "costs", "budget", "lmax", "priors", "q", "utility"}


def env_from_json(text: str) -> Environment:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("environment document must be a JSON object")
    unknown = set(doc) - _JSON_FIELDS
    if unknown:
        raise ValueError(f"unknown fields in environment document: {sorted(unknown)}")
    missing = _JSON_FIELDS - set(doc)
    if missing:
        raise ValueError(f"missing fields in environment document: {sorted(missing)}")
    env = Environment(
        costs=np.array(doc["costs"], dtype=float),
        budget=float(doc["budget"]),
        lmax=int(doc["lmax"]),
        priors=np.array(doc["priors"], dtype=float),
        q=np.array(doc["q"], dtype=float),
        utility_kind=UtilityKind(doc["utility"]),
    )
    if env.m != int(doc["m"]):
        raise ValueError("field m does not match the number of costs")
    return env


def save_environment(env: Environment, path) -> None:
    with open(path, "w") as fh:
        fh.write(env_to_json(env))
        fh.write("\n")


def load_environment(path) -> Environment:
    with open(path) as fh:
        return env_from_json(fh.read())
