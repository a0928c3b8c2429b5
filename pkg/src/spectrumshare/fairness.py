"""Cooperative single-channel game targeting proportional fairness.

Each user picks one channel and an attempt probability from the grid
{1, 1/2, ..., 1/(deg+1)}. The shared objective is the sum of log rates; each
user's cooperative utility is its own log rate minus the log-rate damage its
transmissions inflict on same-channel neighbors, and a unilateral change moves
the global objective by exactly the utility change. Noisy best responses
(softmax in beta times utility) turn the game into annealed local search whose
long-run profile distribution is the Gibbs measure of the objective.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, DegenerateInstanceError
from .network import (
    Instance,
    StrategyProfile,
    Strategy,
    log_interference,
    neighbors_on_channel,
    total_expected_rate,
)

__all__ = [
    "FairnessAction",
    "FairnessNepReport",
    "CoolingSchedule",
    "cooperative_utility",
    "exact_potential",
    "optimal_attempt_probability",
    "noisy_br_distribution",
    "sample_noisy_br",
    "is_nep_fairness",
    "per_channel_sum_log_rate",
    "gibbs_stationary",
    "delta_lower_bound",
]

NEP_REL_TOL = 1e-9
GIBBS_CAPACITY = 10**6


@dataclass(frozen=True)
class FairnessAction:
    """One candidate play: a channel plus an attempt probability.

    The sampler's action grid restricts attempt_prob to {1/r : r = 1..deg+1};
    the type itself accepts any probability so off-grid plays can still be
    evaluated defensively.
    """

    channel: int
    attempt_prob: float

    def __post_init__(self) -> None:
        if self.channel < 0:
            raise ValueError("channel must be nonnegative")
        if not 0.0 <= self.attempt_prob <= 1.0:
            raise ValueError("attempt_prob must lie in [0, 1]")


@dataclass(frozen=True)
class FairnessNepReport:
    """Outcome of an equilibrium check for the fairness game."""

    is_nep: bool
    violating_user: Optional[int] = None
    best_action: Optional[FairnessAction] = None
    utility_gain: float = 0.0


def _require_single_channel(instance: Instance) -> None:
    if instance.channels_per_user != 1:
        raise ValueError("the fairness game requires channels_per_user == 1")


def cooperative_utility(
    user: int, action: FairnessAction, profile: StrategyProfile, instance: Instance
) -> float:
    """Fair utility of playing `action` against the others' current profile.

    log(u * p) minus the log-interference the user suffers on the channel,
    minus log(1/(1-p)) times the number of neighbors it would interfere with
    there. -inf when p = 0, when the utility is 0, when a same-channel
    neighbor transmits with probability 1, or when p = 1 with any same-channel
    neighbor present (an isolated p = 1 play scores log u, reading 0*log 0
    as 0).
    """
    _require_single_channel(instance)
    k = action.channel
    if k >= instance.num_channels:
        raise ValueError(f"channel index {k} out of range")
    p = action.attempt_prob
    u = instance.utilities[user][k]
    if p <= 0.0 or u <= 0.0:
        return -math.inf
    suffered = log_interference(user, k, profile, instance.graph)
    if suffered == math.inf:
        return -math.inf
    count = len(neighbors_on_channel(user, k, profile, instance.graph))
    if p >= 1.0:
        return math.log(u) - suffered if count == 0 else -math.inf
    return math.log(u * p) - suffered + count * math.log1p(-p)


def exact_potential(profile: StrategyProfile, instance: Instance) -> float:
    """Sum of log expected rates; -inf if any user's rate is zero."""
    _require_single_channel(instance)
    total = 0.0
    for n in range(instance.num_users):
        rate = total_expected_rate(n, profile, instance)
        if rate <= 0.0:
            return -math.inf
        total += math.log(rate)
    return total


def optimal_attempt_probability(neighbor_count_on_channel: int) -> float:
    """The attempt probability maximizing fair utility on a fixed channel."""
    if neighbor_count_on_channel < 0:
        raise ValueError("neighbor count must be nonnegative")
    return 1.0 / (neighbor_count_on_channel + 1)


def _action_grid(user: int, instance: Instance) -> list[FairnessAction]:
    degree = instance.graph.degree(user)
    return [
        FairnessAction(k, 1.0 / r)
        for k in range(instance.num_channels)
        for r in range(1, degree + 2)
    ]


def noisy_br_distribution(
    user: int, profile: StrategyProfile, instance: Instance, beta: float
) -> dict[FairnessAction, float]:
    """Softmax over the user's action grid at inverse temperature beta.

    Weights are exp(beta * utility), computed max-shifted; actions with
    utility -inf get weight 0, except at beta = 0 where the distribution is
    uniform over the whole grid (zero times -inf is read as zero). Raises
    DegenerateInstanceError when every action is worthless.
    """
    _require_single_channel(instance)
    if not beta >= 0.0:
        raise ValueError("beta must be nonnegative")
    actions = _action_grid(user, instance)
    values = [cooperative_utility(user, a, profile, instance) for a in actions]
    finite = [v for v in values if v > -math.inf]
    if not finite:
        raise DegenerateInstanceError(
            f"user {user} has utility -inf for every available action"
        )
    if beta == 0.0:
        weight = 1.0 / len(actions)
        return {a: weight for a in actions}
    shift = max(finite)
    weights = [
        math.exp(beta * (v - shift)) if v > -math.inf else 0.0 for v in values
    ]
    total = sum(weights)
    return {a: w / total for a, w in zip(actions, weights)}


def sample_noisy_br(
    user: int,
    profile: StrategyProfile,
    instance: Instance,
    beta: float,
    rng: np.random.Generator,
) -> FairnessAction:
    """Single inverse-CDF draw from noisy_br_distribution."""
    dist = noisy_br_distribution(user, profile, instance, beta)
    draw = rng.random()
    cumulative = 0.0
    last_supported = None
    for action, prob in dist.items():
        if prob <= 0.0:
            continue
        last_supported = action
        cumulative += prob
        if draw < cumulative:
            return action
    return last_supported  # rounding fallthrough lands on the final atom


def is_nep_fairness(
    profile: StrategyProfile, instance: Instance, rel_tol: float = NEP_REL_TOL
) -> FairnessNepReport:
    """Check that no user can improve its fair utility unilaterally.

    Candidates per channel are the grid probabilities plus the closed-form
    optimum 1/(count+1) for that channel (always itself on the grid). The
    first user able to gain more than the relative tolerance is reported.
    """
    _require_single_channel(instance)
    for n in range(instance.num_users):
        strat = profile[n]
        current = cooperative_utility(
            n, FairnessAction(strat.channels[0], strat.attempt_prob), profile, instance
        )
        best_value = -math.inf
        best_action = None
        degree = instance.graph.degree(n)
        for k in range(instance.num_channels):
            count = len(neighbors_on_channel(n, k, profile, instance.graph))
            candidates = [1.0 / (count + 1)] + [1.0 / r for r in range(1, degree + 2)]
            for p in candidates:
                action = FairnessAction(k, p)
                value = cooperative_utility(n, action, profile, instance)
                if value > best_value:
                    best_value = value
                    best_action = action
        if best_value == -math.inf:
            continue  # nothing the user does matters; cannot improve
        if current == -math.inf:
            return FairnessNepReport(False, n, best_action, math.inf)
        gain = best_value - current
        if gain > rel_tol * max(1.0, abs(best_value), abs(current)):
            return FairnessNepReport(False, n, best_action, gain)
    return FairnessNepReport(True)


def per_channel_sum_log_rate(
    channel: int, profile: StrategyProfile, instance: Instance
) -> float:
    """Sum of log rates over the users currently selecting `channel`."""
    _require_single_channel(instance)
    if not 0 <= channel < instance.num_channels:
        raise ValueError(f"channel index {channel} out of range")
    total = 0.0
    for n, strat in enumerate(profile):
        if channel in strat.channels:
            rate = total_expected_rate(n, profile, instance)
            if rate <= 0.0:
                return -math.inf
            total += math.log(rate)
    return total


def gibbs_stationary(
    instance: Instance, beta: float
) -> dict[StrategyProfile, float]:
    """Long-run profile distribution of noisy best response at fixed beta.

    Enumerates the joint action space (each user's channel-probability grid)
    and weights each joint profile by exp(beta * objective), max-shifted,
    with -inf-objective profiles at weight 0. Refuses joint spaces larger
    than GIBBS_CAPACITY profiles.
    """
    _require_single_channel(instance)
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    grids = [_action_grid(n, instance) for n in range(instance.num_users)]
    space = 1
    for grid in grids:
        space *= len(grid)
        if space > GIBBS_CAPACITY:
            raise CapacityError(
                f"joint action space exceeds {GIBBS_CAPACITY} profiles"
            )
    profiles = []
    values = []
    for combo in itertools.product(*grids):
        prof = tuple(Strategy((a.channel,), a.attempt_prob) for a in combo)
        profiles.append(prof)
        values.append(exact_potential(prof, instance))
    finite = [v for v in values if v > -math.inf]
    if not finite:
        raise DegenerateInstanceError("every joint profile has objective -inf")
    shift = max(finite)
    weights = [
        math.exp(beta * (v - shift)) if v > -math.inf else 0.0 for v in values
    ]
    total = sum(weights)
    return {prof: w / total for prof, w in zip(profiles, weights)}


def delta_lower_bound(instance: Instance) -> float:
    """Sufficient temperature step for the annealed dynamics to concentrate.

    N * (log(max u) - log(min u / (max_degree + 1)) + max_degree * log 2),
    evaluated on the instance. Schedules with a larger delta are conservative
    ("sufficient" in the run manifest); smaller ones are heuristic.
    """
    flat = [u for row in instance.utilities for u in row]
    if any(u <= 0.0 for u in flat):
        raise ValueError("all utilities must be strictly positive")
    max_deg = max(
        (instance.graph.degree(n) for n in range(instance.num_users)), default=0
    )
    max_u = max(flat)
    min_u = min(flat)
    return instance.num_users * (
        math.log(max_u) - math.log(min_u / (max_deg + 1)) + max_deg * math.log(2.0)
    )


@dataclass(frozen=True)
class CoolingSchedule:
    """Inverse-temperature schedule beta(t) for updating times t = 1, 2, ...

    Kinds: "fixed-beta" holds beta0 forever; "logarithmic" is log(t)/delta;
    "piecewise-constant" holds beta = level on [t_level, t_level+1) with
    t_1 = 1 and breakpoint gaps e^(level * delta), so the level at the
    breakpoints tracks the logarithmic schedule.
    """

    kind: str
    beta0: float = 0.0
    delta: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("fixed-beta", "logarithmic", "piecewise-constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "fixed-beta":
            if not (math.isfinite(self.beta0) and self.beta0 >= 0.0):
                raise ValueError("beta0 must be finite and nonnegative")
        else:
            if not (math.isfinite(self.delta) and self.delta > 0.0):
                raise ValueError("delta must be finite and positive")

    @classmethod
    def fixed(cls, beta0: float) -> "CoolingSchedule":
        return cls("fixed-beta", beta0=beta0)

    @classmethod
    def logarithmic(cls, delta: float) -> "CoolingSchedule":
        return cls("logarithmic", delta=delta)

    @classmethod
    def piecewise_constant(cls, delta: float) -> "CoolingSchedule":
        return cls("piecewise-constant", delta=delta)

    def beta(self, t: float) -> float:
        if t < 1:
            raise ValueError("updating times are 1-based")
        if self.kind == "fixed-beta":
            return self.beta0
        if self.kind == "logarithmic":
            return math.log(t) / self.delta
        level = 1
        next_break = 1.0 + math.exp(self.delta)
        while t >= next_break:
            level += 1
            next_break += math.exp(level * self.delta)
        return float(level)
