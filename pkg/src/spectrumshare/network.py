"""Core model of multichannel slotted random access under interference.

N users share K collision channels. Each user holds a strategy: a set of
channels it transmits on, plus a single attempt probability. Interference is
local: a transmission on a channel succeeds in a slot exactly when none of the
user's graph neighbors transmits on that channel in the same slot. Everything
downstream (both games, the dynamics, the oracles) is built from the handful
of closed forms defined here.

Indexing is 0-based throughout, including all serialized output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "InterferenceGraph",
    "Strategy",
    "StrategyProfile",
    "Instance",
    "make_profile",
    "replace_strategy",
    "validate_profile",
    "success_probability",
    "log_interference",
    "expected_rate_on_channel",
    "total_expected_rate",
    "neighbors_on_channel",
    "graph_from_positions",
    "build_geometric_graph",
    "build_regular_graph",
]


def _neg_log1m(p: float) -> float:
    # log(1/(1-p)); +inf once p reaches 1 (a neighbor that always transmits).
    if p >= 1.0:
        return math.inf
    return -math.log1p(-p)


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected interference relation over users 0..num_users-1.

    adjacency[n] is the sorted tuple of neighbors of user n. The relation is
    symmetric and irreflexive: simultaneous same-channel transmissions by two
    adjacent users destroy both.
    """

    num_users: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.num_users < 0:
            raise ValueError("num_users must be nonnegative")
        if len(self.adjacency) != self.num_users:
            raise ValueError("adjacency length must equal num_users")
        for n, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"adjacency[{n}] must be sorted and duplicate-free")
            for r in nbrs:
                if not 0 <= r < self.num_users:
                    raise ValueError(f"adjacency[{n}] contains out-of-range user {r}")
                if r == n:
                    raise ValueError(f"user {n} listed as its own neighbor")
                if n not in self.adjacency[r]:
                    raise ValueError(f"asymmetric edge ({n}, {r})")

    @classmethod
    def from_edges(cls, num_users: int, edges: Iterable[tuple[int, int]]) -> "InterferenceGraph":
        nbrs: list[set[int]] = [set() for _ in range(num_users)]
        for a, b in edges:
            if not (0 <= a < num_users and 0 <= b < num_users):
                raise ValueError(f"edge ({a}, {b}) out of range for {num_users} users")
            if a == b:
                raise ValueError(f"self-edge on user {a}")
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(num_users, tuple(tuple(sorted(s)) for s in nbrs))

    def neighbors(self, user: int) -> tuple[int, ...]:
        return self.adjacency[user]

    def degree(self, user: int) -> int:
        return len(self.adjacency[user])

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (n, r) for n in range(self.num_users) for r in self.adjacency[n] if n < r
        )

    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.num_users, self.num_users), dtype=bool)
        for n, nbrs in enumerate(self.adjacency):
            mat[n, list(nbrs)] = True
        return mat


@dataclass(frozen=True)
class Strategy:
    """One user's play: the channels it transmits on, and how eagerly.

    channels is a sorted tuple of distinct channel indices; attempt_prob is
    the per-slot transmission probability applied on every selected channel.
    """

    channels: tuple[int, ...]
    attempt_prob: float

    def __post_init__(self) -> None:
        chans = tuple(self.channels)
        object.__setattr__(self, "channels", chans)
        if list(chans) != sorted(set(chans)):
            raise ValueError("channels must be sorted and distinct")
        if chans and chans[0] < 0:
            raise ValueError("channel indices must be nonnegative")
        if not 0.0 <= self.attempt_prob <= 1.0:
            raise ValueError("attempt_prob must lie in [0, 1]")


# A profile is one Strategy per user, indexed by user. Plain tuples keep
# profiles hashable and cheap to snapshot.
StrategyProfile = tuple[Strategy, ...]


def make_profile(
    channel_sets: Sequence[Sequence[int]], attempt_probs: Sequence[float]
) -> StrategyProfile:
    if len(channel_sets) != len(attempt_probs):
        raise ValueError("channel_sets and attempt_probs must have equal length")
    return tuple(
        Strategy(tuple(sorted(chans)), float(p))
        for chans, p in zip(channel_sets, attempt_probs)
    )


def replace_strategy(
    profile: StrategyProfile, user: int, strategy: Strategy
) -> StrategyProfile:
    return profile[:user] + (strategy,) + profile[user + 1 :]


@dataclass(frozen=True)
class Instance:
    """A complete problem: graph, channel count, per-user utilities and caps.

    utilities[n][k] is user n's collision-free rate on channel k (Mbps).
    caps[n] bounds user n's attempt probability; the rate-maximization game
    always plays at the cap. channels_per_user is the number of channels each
    user must select. allowed, when present, masks which channels each user
    may select.
    """

    graph: InterferenceGraph
    num_channels: int
    channels_per_user: int
    utilities: tuple[tuple[float, ...], ...]
    caps: tuple[float, ...]
    allowed: Optional[tuple[tuple[bool, ...], ...]] = None

    def __post_init__(self) -> None:
        n_users = self.graph.num_users
        if self.num_channels < 1:
            raise ValueError("num_channels must be at least 1")
        if not 1 <= self.channels_per_user <= self.num_channels:
            raise ValueError("channels_per_user must lie in [1, num_channels]")
        utils = tuple(tuple(float(u) for u in row) for row in self.utilities)
        object.__setattr__(self, "utilities", utils)
        if len(utils) != n_users:
            raise ValueError("utilities must have one row per user")
        for n, row in enumerate(utils):
            if len(row) != self.num_channels:
                raise ValueError(f"utilities[{n}] must have num_channels entries")
            for u in row:
                if not math.isfinite(u) or u < 0.0:
                    raise ValueError(f"utilities[{n}] must be finite and nonnegative")
        caps = tuple(float(c) for c in self.caps)
        object.__setattr__(self, "caps", caps)
        if len(caps) != n_users:
            raise ValueError("caps must have one entry per user")
        for n, cap in enumerate(caps):
            # The upper end is closed: the regular-graph efficiency regime with
            # degree+1 == num_channels legitimately pins caps at exactly 1.
            if not 0.0 < cap <= 1.0:
                raise ValueError(f"caps[{n}] must lie in (0, 1]")
        if self.allowed is not None:
            mask = tuple(tuple(bool(b) for b in row) for row in self.allowed)
            object.__setattr__(self, "allowed", mask)
            if len(mask) != n_users:
                raise ValueError("allowed must have one row per user")
            for n, row in enumerate(mask):
                if len(row) != self.num_channels:
                    raise ValueError(f"allowed[{n}] must have num_channels entries")
                if sum(row) < self.channels_per_user:
                    raise ValueError(
                        f"allowed[{n}] permits fewer than channels_per_user channels"
                    )

    @property
    def num_users(self) -> int:
        return self.graph.num_users

    def allowed_channels(self, user: int) -> tuple[int, ...]:
        if self.allowed is None:
            return tuple(range(self.num_channels))
        return tuple(k for k in range(self.num_channels) if self.allowed[user][k])


def validate_profile(profile: StrategyProfile, instance: Instance) -> None:
    """Raise if the profile does not fit the instance's dimensions."""
    if len(profile) != instance.num_users:
        raise ValueError("profile length must equal num_users")
    for n, strat in enumerate(profile):
        if len(strat.channels) != instance.channels_per_user:
            raise ValueError(
                f"user {n} selects {len(strat.channels)} channels, "
                f"expected {instance.channels_per_user}"
            )
        for k in strat.channels:
            if k >= instance.num_channels:
                raise ValueError(f"user {n} selects out-of-range channel {k}")


def _check_user(graph: InterferenceGraph, user: int) -> None:
    if not 0 <= user < graph.num_users:
        raise ValueError(f"user index {user} out of range")


def _check_channel(channel: int, num_channels: int) -> None:
    if not 0 <= channel < num_channels:
        raise ValueError(f"channel index {channel} out of range")


def success_probability(
    user: int, channel: int, profile: StrategyProfile, graph: InterferenceGraph
) -> float:
    """Probability that no neighbor of `user` transmits on `channel` in a slot.

    Product of (1 - p_i) over neighbors i that selected the channel; the empty
    product is 1. The user's own strategy never enters.
    """
    _check_user(graph, user)
    if channel < 0:
        raise ValueError(f"channel index {channel} out of range")
    prob = 1.0
    for i in graph.adjacency[user]:
        strat = profile[i]
        if channel in strat.channels:
            prob *= 1.0 - strat.attempt_prob
    return prob


def log_interference(
    user: int, channel: int, profile: StrategyProfile, graph: InterferenceGraph
) -> float:
    """Negative log of success_probability; +inf if a neighbor has p = 1."""
    _check_user(graph, user)
    if channel < 0:
        raise ValueError(f"channel index {channel} out of range")
    total = 0.0
    for i in graph.adjacency[user]:
        strat = profile[i]
        if channel in strat.channels:
            total += _neg_log1m(strat.attempt_prob)
    return total


def expected_rate_on_channel(
    user: int, channel: int, profile: StrategyProfile, instance: Instance
) -> float:
    """Expected throughput of `user` on one channel: p * u * clearance."""
    _check_channel(channel, instance.num_channels)
    v = success_probability(user, channel, profile, instance.graph)
    return profile[user].attempt_prob * instance.utilities[user][channel] * v


def total_expected_rate(user: int, profile: StrategyProfile, instance: Instance) -> float:
    """Expected throughput of `user` summed over its selected channels."""
    return sum(
        expected_rate_on_channel(user, k, profile, instance)
        for k in profile[user].channels
    )


def neighbors_on_channel(
    user: int, channel: int, profile: StrategyProfile, graph: InterferenceGraph
) -> tuple[int, ...]:
    """Neighbors of `user` whose channel set contains `channel`.

    Membership is structural: a neighbor counts even with attempt_prob 0.
    """
    _check_user(graph, user)
    return tuple(
        i for i in graph.adjacency[user] if channel in profile[i].channels
    )


def build_geometric_graph(
    rng: np.random.Generator,
    num_users: int,
    region_radius: float,
    interference_radius: float,
) -> tuple[InterferenceGraph, np.ndarray]:
    """Drop users uniformly in a disc; link any pair within interference range.

    Returns the graph and the (num_users, 2) position array.
    """
    if num_users < 1:
        raise ValueError("num_users must be at least 1")
    if region_radius <= 0 or interference_radius < 0:
        raise ValueError("radii must be positive (interference radius may be 0)")
    radii = region_radius * np.sqrt(rng.random(num_users))
    angles = 2.0 * math.pi * rng.random(num_users)
    positions = np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))
    return graph_from_positions(positions, interference_radius), positions


def graph_from_positions(
    positions: np.ndarray, interference_radius: float
) -> InterferenceGraph:
    """Link every pair of points within interference range of each other."""
    num_users = len(positions)
    if num_users < 1:
        raise ValueError("need at least one position")
    if interference_radius < 0:
        raise ValueError("interference_radius must be nonnegative")
    edges = []
    for a in range(num_users):
        for b in range(a + 1, num_users):
            if float(np.hypot(*(positions[a] - positions[b]))) <= interference_radius:
                edges.append((a, b))
    return InterferenceGraph.from_edges(num_users, edges)


def build_regular_graph(num_users: int, degree: int) -> InterferenceGraph:
    """Circulant graph in which every user has exactly `degree` neighbors.

    Even degree d links each user to its d/2 nearest indices on either side
    (mod N); odd degree additionally links antipodal pairs, which requires an
    even user count.
    """
    if num_users < 1:
        raise ValueError("num_users must be at least 1")
    if degree < 0 or degree >= num_users:
        raise ValueError("degree must lie in [0, num_users)")
    if (degree * num_users) % 2 != 0:
        raise ValueError("degree * num_users must be even; no such regular graph")
    edges = []
    half = degree // 2
    for n in range(num_users):
        for j in range(1, half + 1):
            edges.append((n, (n + j) % num_users))
        if degree % 2 == 1:
            edges.append((n, (n + num_users // 2) % num_users))
    graph = InterferenceGraph.from_edges(num_users, edges)
    for n in range(num_users):
        if graph.degree(n) != degree:
            raise ValueError("internal error: constructed graph is not regular")
    return graph
