"""Non-cooperative distributed rate maximization over shared channels.

Every user transmits at its attempt-probability cap and competes only through
channel choice: the best response picks the channels with the largest product
of utility and clearance probability. Best-response switches monotonically
increase a scalar audit function (`br_potential`), which is what rules out
cycles for best-response dynamics even though plain better-response dynamics
can cycle. The closed-form efficiency bound compares equilibrium rates against
a channel-oblivious random policy on regular networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .network import (
    Instance,
    Strategy,
    StrategyProfile,
    _neg_log1m,
    log_interference,
    replace_strategy,
    success_probability,
    total_expected_rate,
)

__all__ = [
    "DrmNepReport",
    "best_response_drm",
    "br_potential",
    "br_potential_upper_bound",
    "is_nep_drm",
    "efficiency_bound",
    "naive_expected_rate",
]

NEP_REL_TOL = 1e-9


@dataclass(frozen=True)
class DrmNepReport:
    """Outcome of an equilibrium check for the rate-maximization game."""

    is_nep: bool
    violating_user: Optional[int] = None
    improving_channels: Optional[tuple[int, ...]] = None
    rate_gain: float = 0.0


def best_response_drm(
    user: int,
    profile: StrategyProfile,
    instance: Instance,
    success_estimates: Optional[Sequence[float]] = None,
) -> tuple[int, ...]:
    """The channel set maximizing the user's expected rate, others fixed.

    Scores each allowed channel by utility times clearance probability and
    keeps the top channels_per_user, breaking score ties toward the lowest
    channel index. Pass success_estimates (one clearance value per channel) to
    decide from measured estimates instead of the exact closed form.
    """
    candidates = instance.allowed_channels(user)
    if len(candidates) < instance.channels_per_user:
        raise ValueError(
            f"user {user} has fewer than channels_per_user allowed channels"
        )
    utils = instance.utilities[user]
    if success_estimates is None:
        scores = {
            k: utils[k] * success_probability(user, k, profile, instance.graph)
            for k in candidates
        }
    else:
        if len(success_estimates) != instance.num_channels:
            raise ValueError("success_estimates must have one entry per channel")
        scores = {k: utils[k] * float(success_estimates[k]) for k in candidates}
    ranked = sorted(candidates, key=lambda k: (-scores[k], k))
    return tuple(sorted(ranked[: instance.channels_per_user]))


def br_potential(profile: StrategyProfile, instance: Instance) -> float:
    """Scalar that strict best-response channel switches strictly increase.

    Sum over users of log(1/(1-P_n)) times the selected channels' log
    utilities, each discounted by half the log-interference seen there. A zero
    utility on a selected channel yields -inf rather than an error so dynamics
    can move off such profiles. Only meaningful when every cap is below 1;
    with a cap pinned at exactly 1 the multiplier is infinite and the value
    may degenerate to +/-inf or nan.
    """
    total = 0.0
    for n, strat in enumerate(profile):
        mult = _neg_log1m(instance.caps[n])
        inner = 0.0
        for k in strat.channels:
            u = instance.utilities[n][k]
            log_u = math.log(u) if u > 0.0 else -math.inf
            inner += log_u - 0.5 * log_interference(n, k, profile, instance.graph)
        if mult == math.inf and inner == 0.0:
            continue  # 0 * inf: treat the user as contributing nothing
        total += mult * inner
    return total


def br_potential_upper_bound(instance: Instance) -> float:
    """Profile-independent ceiling on br_potential.

    Interference only subtracts, so no profile can beat selecting the
    highest-log-utility channel channels_per_user times with zero
    interference everywhere.
    """
    total = 0.0
    for n in range(instance.num_users):
        best_u = max(instance.utilities[n][k] for k in instance.allowed_channels(n))
        best_log = math.log(best_u) if best_u > 0.0 else -math.inf
        mult = _neg_log1m(instance.caps[n])
        inner = instance.channels_per_user * best_log
        if mult == math.inf and inner == 0.0:
            continue
        total += mult * inner
    return total


def is_nep_drm(
    profile: StrategyProfile, instance: Instance, rel_tol: float = NEP_REL_TOL
) -> DrmNepReport:
    """Check that no user can improve its rate by switching channel sets.

    Assumes every user plays at its cap. Improvements within rel_tol (relative
    to the larger rate) do not count as violations; the first violating user
    found is reported with its best-response set and the rate gain.
    """
    for n in range(instance.num_users):
        current = total_expected_rate(n, profile, instance)
        br_set = best_response_drm(n, profile, instance)
        if br_set == profile[n].channels:
            continue
        candidate = replace_strategy(
            profile, n, Strategy(br_set, profile[n].attempt_prob)
        )
        best = total_expected_rate(n, candidate, instance)
        gain = best - current
        if gain > rel_tol * max(best, current):
            return DrmNepReport(False, n, br_set, gain)
    return DrmNepReport(True)


def efficiency_bound(num_channels: int, degree: int) -> float:
    """Guaranteed per-user rate ratio of best-response play over random play.

    Defined on regular networks where every user sees `degree` interferers,
    utilities are equal, caps equal num_channels/(degree+1), and (degree+1)
    is a multiple of num_channels. Equals
    (1 - K/(d+1))^((d+1)/K - 1) / (1 - 1/(d+1))^d, which is 1 at K=1 and
    grows toward e as (d+1)/K shrinks to 1; the boundary case d+1 == K uses
    the 0^0 = 1 limit.
    """
    if num_channels < 1:
        raise ValueError("num_channels must be at least 1")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    group = degree + 1
    if group % num_channels != 0:
        raise ValueError(
            f"(degree+1)={group} must be a multiple of num_channels={num_channels}"
        )
    numerator = (1.0 - num_channels / group) ** (group // num_channels - 1)
    denominator = (1.0 - 1.0 / group) ** degree
    return numerator / denominator


def naive_expected_rate(user: int, instance: Instance, degree: int) -> float:
    """Expected rate of the channel-oblivious policy in the regular setting.

    The naive policy picks one of the K channels uniformly at random each slot
    and transmits with probability K/(degree+1). Requires the instance to be
    a degree-regular graph with equal utilities and caps all equal to
    K/(degree+1); anything else is rejected.
    """
    if not 0 <= user < instance.num_users:
        raise ValueError(f"user index {user} out of range")
    if degree < 1:
        raise ValueError("degree must be at least 1 for the naive-rate analysis")
    group = degree + 1
    k = instance.num_channels
    if group % k != 0:
        raise ValueError(f"(degree+1)={group} must be a multiple of num_channels={k}")
    for n in range(instance.num_users):
        if instance.graph.degree(n) != degree:
            raise ValueError("instance graph is not degree-regular")
    flat = [u for row in instance.utilities for u in row]
    if any(u != flat[0] for u in flat):
        raise ValueError("instance utilities are not all equal")
    attempt = k / group
    if any(abs(cap - attempt) > 1e-12 for cap in instance.caps):
        raise ValueError("instance caps must all equal num_channels/(degree+1)")
    utility = instance.utilities[user][0]
    return utility * attempt * (1.0 - 1.0 / group) ** degree
