"""Exhaustive reference computations for small instances.

Everything here enumerates joint strategy spaces outright, guarded by
explicit capacity limits. These routines exist to pin down ground truth in
tests and experiments; none of them are meant for large networks.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .drm import NEP_REL_TOL, is_nep_drm
from .errors import CapacityError, DegenerateInstanceError
from .fairness import is_nep_fairness, optimal_attempt_probability
from .network import Instance, Strategy, StrategyProfile, total_expected_rate

__all__ = [
    "OracleResult",
    "exhaustive_sum_log_rate",
    "exhaustive_drm_nep_enumeration",
    "exhaustive_fairness_nep_enumeration",
    "brute_force_best_response",
    "empirical_visit_distribution",
]

ORACLE_CAPACITY = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    """Outcome of an exhaustive search.

    best_allocations lists every channel allocation whose objective is
    within 1e-9 of the best, in enumeration order.
    """

    best_value: float
    best_allocations: tuple[tuple[int, ...], ...]
    num_evaluated: int


def exhaustive_sum_log_rate(
    instance: Instance, capacity: int = ORACLE_CAPACITY
) -> OracleResult:
    """Maximize the sum of log rates over all single-channel allocations.

    Each user's attempt probability is set to its best reply
    1/(same-channel neighbor count + 1), so the search space is the
    num_channels ** num_users channel assignments. Assignments whose
    objective is minus infinity for every user's choice cannot be ranked,
    so a user whose utilities are all zero raises DegenerateInstanceError.
    """
    if instance.channels_per_user != 1:
        raise ValueError("oracle requires single-channel selection")
    n_users = instance.num_users
    n_channels = instance.num_channels
    total = n_channels**n_users
    if total > capacity:
        raise CapacityError(
            f"{total} allocations exceed the oracle capacity of {capacity}"
        )
    for n in range(n_users):
        if max(instance.utilities[n]) <= 0.0:
            raise DegenerateInstanceError(f"user {n} has no channel with positive utility")

    log_u = [
        [math.log(u) if u > 0.0 else -math.inf for u in row]
        for row in instance.utilities
    ]
    max_degree = max((instance.graph.degree(n) for n in range(n_users)), default=0)
    # log p and log(1 - p) at p = 1/(count+1), indexed by neighbor count
    log_attempt = [-math.log(r + 1) for r in range(max_degree + 1)]
    log_clear = [-math.inf] + [math.log(r / (r + 1)) for r in range(1, max_degree + 1)]
    adjacency = instance.graph.adjacency

    best_value = -math.inf
    best: list[tuple[tuple[int, ...], float]] = []
    for alloc in itertools.product(range(n_channels), repeat=n_users):
        counts = [
            sum(1 for i in adjacency[n] if alloc[i] == alloc[n])
            for n in range(n_users)
        ]
        value = 0.0
        for n in range(n_users):
            term = log_u[n][alloc[n]] + log_attempt[counts[n]]
            if term == -math.inf:
                value = -math.inf
                break
            for i in adjacency[n]:
                if alloc[i] == alloc[n]:
                    term += log_clear[counts[i]]
            value += term
        if value == -math.inf:
            continue
        if value > best_value:
            best_value = value
            best = [(a, v) for a, v in best if v >= best_value - 1e-9]
            best.append((alloc, value))
        elif value >= best_value - 1e-9:
            best.append((alloc, value))
    if best_value == -math.inf:
        raise DegenerateInstanceError("every allocation has zero rate for some user")
    return OracleResult(best_value, tuple(a for a, _ in best), total)


def allocation_profile(alloc: Sequence[int], instance: Instance) -> StrategyProfile:
    """Profile for a channel allocation with best-reply attempt probabilities."""
    adjacency = instance.graph.adjacency
    strategies = []
    for n in range(instance.num_users):
        count = sum(1 for i in adjacency[n] if alloc[i] == alloc[n])
        strategies.append(
            Strategy((int(alloc[n]),), optimal_attempt_probability(count))
        )
    return tuple(strategies)


def exhaustive_drm_nep_enumeration(
    instance: Instance,
    capacity: int = ORACLE_CAPACITY,
    rel_tol: float = NEP_REL_TOL,
) -> tuple[StrategyProfile, ...]:
    """All pure equilibria of the rate-maximization game, by full enumeration.

    Attempt probabilities are pinned at the caps; the search runs over every
    combination of per-user channel sets.
    """
    per_user: list[list[tuple[int, ...]]] = []
    total = 1
    for n in range(instance.num_users):
        options = [
            tuple(c)
            for c in itertools.combinations(
                instance.allowed_channels(n), instance.channels_per_user
            )
        ]
        per_user.append(options)
        total *= len(options)
        if total > capacity:
            raise CapacityError(
                f"profile space exceeds the oracle capacity of {capacity}"
            )
    results = []
    for combo in itertools.product(*per_user):
        profile = tuple(
            Strategy(chans, instance.caps[n]) for n, chans in enumerate(combo)
        )
        if is_nep_drm(profile, instance, rel_tol).is_nep:
            results.append(profile)
    return tuple(results)


def exhaustive_fairness_nep_enumeration(
    instance: Instance,
    capacity: int = 10**6,
    rel_tol: float = NEP_REL_TOL,
) -> tuple[StrategyProfile, ...]:
    """All pure equilibria of the fairness game over the discrete action grid."""
    if instance.channels_per_user != 1:
        raise ValueError("fairness enumeration requires single-channel selection")
    per_user: list[list[Strategy]] = []
    total = 1
    for n in range(instance.num_users):
        degree = instance.graph.degree(n)
        options = [
            Strategy((k,), 1.0 / r)
            for k in range(instance.num_channels)
            for r in range(1, degree + 2)
        ]
        per_user.append(options)
        total *= len(options)
        if total > capacity:
            raise CapacityError(
                f"action space exceeds the enumeration capacity of {capacity}"
            )
    results = []
    for combo in itertools.product(*per_user):
        if is_nep_fairness(combo, instance, rel_tol).is_nep:
            results.append(combo)
    return tuple(results)


def brute_force_best_response(
    user: int, profile: StrategyProfile, instance: Instance
) -> tuple[int, ...]:
    """Best channel set for one user by trying every combination.

    Scans combinations in lexicographic order and keeps the first strict
    maximum of the user's total expected rate, which matches the
    lowest-index tie-breaking of the closed-form best response.
    """
    best_rate = -math.inf
    best_set: Optional[tuple[int, ...]] = None
    for combo in itertools.combinations(
        instance.allowed_channels(user), instance.channels_per_user
    ):
        candidate = (
            profile[:user]
            + (Strategy(tuple(combo), profile[user].attempt_prob),)
            + profile[user + 1 :]
        )
        rate = total_expected_rate(user, candidate, instance)
        if rate > best_rate:
            best_rate = rate
            best_set = tuple(combo)
    assert best_set is not None
    return best_set


def empirical_visit_distribution(
    trajectory, burn_in: int = 0
) -> dict[StrategyProfile, float]:
    """Relative visit frequencies of the profiles recorded after burn_in steps."""
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    profiles = trajectory.profiles[burn_in:]
    if not profiles:
        raise ValueError("burn_in leaves no recorded steps")
    counts = Counter(profiles)
    total = len(profiles)
    return {profile: count / total for profile, count in counts.items()}
