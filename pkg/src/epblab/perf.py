"""Monte Carlo estimation of how close each rule's outcome gets to the
exact optimum, plus sweep orchestration and the paired t-test used to rank
rules.

Sampling follows a two-level protocol: a *trial* draws instance parameters
(costs, signal structure) where those are themselves random, and each trial
draws many *samples* (quality vector + ballot profile).  Every trial and
sample owns an RNG stream derived from the master seed by its indices, so
results do not depend on execution order or worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import (
    Environment,
    InstanceTooLargeError,
    UtilityKind,
    generate_environment,
    sample_quality_vector,
    sample_signal_profile,
    utility,
)
from .oracles import OPTIMAL_ENUM_LIMIT, SubsetEnumerator, _weights_for, optimal_set
from .rules import Rule, TieBreak, WinningSet, tally

CSV_HEADER = "rule,n,m,alpha,budget,utility,lmax,trials,samples,mean_ratio,std_dev,ci95,seed"

# A rule under test is normally a Rule id; tests may inject a callable that
# also sees the drawn quality vector (e.g. an oracle stub).
RuleLike = Rule | Callable[..., WinningSet]


@dataclass(frozen=True)
class EnvParams:
    """Recipe for per-trial random instances."""

    m: int
    alpha: float
    budget: float
    lmax: int
    utility_kind: UtilityKind = UtilityKind.NORMAL

    def generate(self, rng: np.random.Generator) -> Environment:
        return generate_environment(
            self.m, self.alpha, self.budget, self.lmax, rng, self.utility_kind
        )


Setting = Environment | EnvParams


@dataclass(frozen=True)
class PerformanceRecord:
    rule: Rule
    n: int
    m: int
    alpha: float
    budget: float
    utility_kind: UtilityKind
    lmax: int
    trials: int
    samples_per_trial: int
    mean_ratio: float
    std_dev: float
    ci95_half_width: float
    seed: int

    def csv_row(self) -> str:
        return (
            f"{self.rule.value},{self.n},{self.m},{self.alpha:.6f},{self.budget:.6f},"
            f"{self.utility_kind.value},{self.lmax},{self.trials},{self.samples_per_trial},"
            f"{self.mean_ratio:.6f},{self.std_dev:.6f},{self.ci95_half_width:.6f},{self.seed}"
        )


def records_to_csv(records: Sequence[PerformanceRecord]) -> str:
    return "\n".join([CSV_HEADER, *(r.csv_row() for r in records)]) + "\n"


def _ratio(env: Environment, winning: WinningSet, L, opt_value: float) -> float:
    # An all-zero quality draw makes the optimum 0; any outcome is then
    # optimal and the ratio is defined as 1.
    if opt_value <= 0.0:
        return 1.0
    return utility(env, winning.members, L) / opt_value


def _trial_ratios(
    setting: Setting,
    rules: Sequence[RuleLike],
    n: int,
    samples: int,
    seed: int,
    trial_idx: int,
) -> list[np.ndarray]:
    env_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_idx,)))
    env = setting if isinstance(setting, Environment) else setting.generate(env_rng)
    tb = TieBreak.identity(env.m)
    enum = SubsetEnumerator(env.costs, env.budget) if env.m <= OPTIMAL_ENUM_LIMIT else None
    out = [np.empty(samples) for _ in rules]
    for s_i in range(samples):
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(trial_idx, s_i))
        )
        L = sample_quality_vector(env, rng)
        profile = sample_signal_profile(env, L, n, rng)
        if enum is not None:
            opt_value = enum.optimal_value(_weights_for(env, L))
        else:
            opt_value = optimal_set(env, L)[1]
        for r_i, rule in enumerate(rules):
            if isinstance(rule, Rule):
                winning = tally(rule, env, profile, tb)
            else:
                winning = rule(env, profile, tb, L)
            out[r_i][s_i] = _ratio(env, winning, L, opt_value)
    return out


def performance_samples(
    setting: Setting,
    rules: Sequence[RuleLike],
    n: int,
    trials: int,
    samples: int,
    seed: int,
    threads: int = 1,
) -> dict[RuleLike, np.ndarray]:
    """Per-sample utility ratios, shape (trials, samples) per rule.  All rules
    see identical draws, which is what makes paired comparisons valid."""
    if trials < 1 or samples < 1:
        raise ValueError("need at least one trial and one sample")
    if threads > 1 and trials > 1:
        args = [(setting, tuple(rules), n, samples, seed, t) for t in range(trials)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(_trial_ratios_star, args))
    else:
        per_trial = [
            _trial_ratios(setting, tuple(rules), n, samples, seed, t)
            for t in range(trials)
        ]
    return {
        rule: np.stack([per_trial[t][r_i] for t in range(trials)])
        for r_i, rule in enumerate(rules)
    }


def _trial_ratios_star(args):
    return _trial_ratios(*args)


def _record_from_ratios(setting, rule, n, trials, samples, seed, ratios) -> PerformanceRecord:
    flat = ratios.ravel()
    mean = float(flat.mean())
    std = float(flat.std(ddof=1)) if flat.size > 1 else 0.0
    ci = 1.96 * std / math.sqrt(flat.size)
    # Environment and EnvParams expose the same parameter attributes.
    return PerformanceRecord(
        rule=rule, n=n, m=setting.m, alpha=float(setting.alpha),
        budget=float(setting.budget), utility_kind=setting.utility_kind,
        lmax=setting.lmax, trials=trials, samples_per_trial=samples,
        mean_ratio=mean, std_dev=std, ci95_half_width=ci, seed=seed,
    )


def empirical_performance(
    setting: Setting,
    rule: RuleLike,
    n: int,
    trials: int,
    samples: int,
    seed: int,
    threads: int = 1,
) -> PerformanceRecord:
    """Average utility ratio against the exact optimum over trials x samples."""
    ratios = performance_samples(setting, [rule], n, trials, samples, seed, threads)[rule]
    rec_rule = rule if isinstance(rule, Rule) else Rule.AV
    return _record_from_ratios(setting, rec_rule, n, trials, samples, seed, ratios)


def scenario_performance(
    env: Environment,
    L: Sequence[int],
    rule: Rule,
    n: int,
    samples: int,
    seed: int,
) -> float:
    """Monte Carlo estimate of E[v(rule outcome)] / optimum for one fixed
    quality vector."""
    tb = TieBreak.identity(env.m)
    _, opt_value = optimal_set(env, L)
    if opt_value <= 0.0:
        return 1.0
    total = 0.0
    for s_i in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(s_i,)))
        profile = sample_signal_profile(env, L, n, rng)
        winning = tally(rule, env, profile, tb)
        total += utility(env, winning.members, L)
    return total / (samples * opt_value)


WORST_CASE_STATE_LIMIT = 100_000


def worst_case_performance(
    env: Environment,
    rule: Rule,
    n: int,
    samples: int,
    seed: int,
) -> tuple[np.ndarray, float]:
    """Enumerate every quality vector with a positive optimum and return the
    one with the lowest estimated ratio, with its estimate."""
    import itertools

    n_states = (env.lmax + 1) ** env.m
    if n_states > WORST_CASE_STATE_LIMIT:
        raise InstanceTooLargeError("too many quality vectors to enumerate")
    worst_L = None
    worst = math.inf
    for idx, L in enumerate(itertools.product(range(env.lmax + 1), repeat=env.m)):
        _, opt_value = optimal_set(env, L)
        if opt_value <= 0.0:
            continue
        tb = TieBreak.identity(env.m)
        total = 0.0
        for s_i in range(samples):
            rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(idx, s_i))
            )
            profile = sample_signal_profile(env, L, n, rng)
            winning = tally(rule, env, profile, tb)
            total += utility(env, winning.members, L)
        est = total / (samples * opt_value)
        if est < worst:
            worst = est
            worst_L = np.array(L, dtype=int)
    if worst_L is None:
        raise ValueError("every quality vector has zero optimum")
    return worst_L, float(worst)


def indistinguishable_scenarios(
    m: int, utility_kind: UtilityKind = UtilityKind.NORMAL
) -> tuple[tuple[Environment, np.ndarray], tuple[Environment, np.ndarray]]:
    """Two environment/quality pairs that induce exactly the same ballot
    distribution but have very different optima, so no rule can do well in
    both.  Normal utility uses one big alternative versus m-1 unit ones;
    cost-proportional uses a near-free alternative versus a unit one."""
    uniform = np.full((2,), 0.5)
    if utility_kind is UtilityKind.NORMAL:
        if m < 3:
            raise ValueError("the normal-utility construction needs m >= 3")
        costs = np.ones(m)
        costs[0] = m
        budget = float(m)
        priors = np.tile(uniform, (m, 1))
        q1 = np.tile([0.4, 0.6], (m, 1))
        q2 = np.vstack([[0.3, 0.6], *[[0.2, 0.4]] * (m - 1)])
        L1 = np.zeros(m, dtype=int)
        L1[0] = 1
        L2 = np.ones(m, dtype=int)
    else:
        if m != 2:
            raise ValueError("the cost-proportional construction is for m = 2")
        costs = np.array([0.01, 1.0])
        budget = 1.0
        priors = np.tile(uniform, (2, 1))
        q1 = np.tile([0.4, 0.6], (2, 1))
        q2 = np.array([[0.3, 0.6], [0.2, 0.4]])
        L1 = np.array([1, 0])
        L2 = np.array([1, 1])
    env1 = Environment(costs=costs, budget=budget, lmax=1, priors=priors, q=q1,
                       utility_kind=utility_kind)
    env2 = Environment(costs=costs, budget=budget, lmax=1, priors=priors, q=q2,
                       utility_kind=utility_kind)
    return (env1, L1), (env2, L2)


# Two-sided 5% critical values for Student's t, df 1..30; normal value above.
T_CRITICAL_95 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365,
    8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179, 13: 2.160, 14: 2.145,
    15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093, 20: 2.086,
    21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064, 25: 2.060, 26: 2.056,
    27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
}


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    significant_95: bool
    zero_variance: bool


def paired_t_test(ratios_a: Sequence[float], ratios_b: Sequence[float]) -> TTestResult:
    """Paired t-test on per-sample differences b - a.

    A degenerate case where every difference is identical is flagged; it is
    reported significant exactly when that constant difference is non-zero
    (the difference is then deterministic, not statistical).
    """
    a = np.asarray(ratios_a, dtype=float)
    b = np.asarray(ratios_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("need two equal-length lists with at least two pairs")
    d = b - a
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
        return TTestResult(t_statistic=t, significant_95=mean != 0.0, zero_variance=True)
    t = mean / (sd / math.sqrt(len(d)))
    crit = T_CRITICAL_95.get(len(d) - 1, 1.96)
    return TTestResult(t_statistic=t, significant_95=abs(t) > crit, zero_variance=False)


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple[int, ...]
    alpha_values: tuple[float, ...]
    budget_values: tuple[float, ...]
    rules: tuple[Rule, ...]
    m: int
    lmax: int
    utility_kind: UtilityKind
    trials: int
    samples: int
    seed: int
    environment: Environment | None = None  # fixed instance instead of redraws

    def __post_init__(self):
        if not (self.n_values and self.rules):
            raise ValueError("n_values and rules must be non-empty")
        if self.environment is None and not (self.alpha_values and self.budget_values):
            raise ValueError("alpha_values and budget_values must be non-empty")


def run_sweep(config: SweepConfig, threads: int = 1) -> list[PerformanceRecord]:
    """Cartesian product of sweep parameters; one record per (cell, rule).
    Deterministic for a fixed config and seed, regardless of thread count."""
    if config.environment is not None:
        cells = [(n, None, None) for n in sorted(config.n_values)]
    else:
        cells = sorted(
            (n, a, b)
            for n in config.n_values
            for a in config.alpha_values
            for b in config.budget_values
        )
    records: list[PerformanceRecord] = []
    for cell_idx, (n, alpha, budget) in enumerate(cells):
        if config.environment is not None:
            setting: Setting = config.environment
        else:
            setting = EnvParams(config.m, alpha, budget, config.lmax, config.utility_kind)
        cell_seed = int(
            np.random.SeedSequence(config.seed, spawn_key=(cell_idx,)).generate_state(1, np.uint64)[0]
        )
        ratios = performance_samples(
            setting, config.rules, n, config.trials, config.samples, cell_seed, threads
        )
        for rule in config.rules:
            records.append(
                _record_from_ratios(
                    setting, rule, n, config.trials, config.samples, config.seed, ratios[rule]
                )
            )
    return records
