"""Update mechanisms, trajectories, replay, annealing, slot simulation."""

import math

import numpy as np
import pytest

from spectrumshare import (
    CoolingSchedule,
    EstimatorConfig,
    Instance,
    InterferenceGraph,
    PopulationEvent,
    Strategy,
    UpdateMechanism,
    br_potential,
    build_regular_graph,
    drm_initial_profile,
    estimate_success_probability,
    exact_potential,
    is_nep_drm,
    is_nep_fairness,
    make_profile,
    naive_expected_rate,
    nbrf_initial_profile,
    run_better_response_replay,
    run_br_drm,
    run_nbrf,
    select_active,
    simulate_naive_policy,
    simulate_slot,
    simulate_slots,
    success_probability,
    total_expected_rate,
)
from spectrumshare.errors import EstimationError

from conftest import random_drm_instance, random_graph

CYCLE_RATES = (1.0, 1.25)


def cycle_instance():
    """Two adjacent users, four channels, two picks each, dyadic values."""
    g = InterferenceGraph.from_edges(2, [(0, 1)])
    return Instance(
        g, 4, 2,
        ((1.0, 2.0, 1.0, 2.0), (2.0, 1.0, 2.0, 1.0)),
        (0.5, 0.5),
    )


def test_mechanism_validation():
    with pytest.raises(ValueError):
        UpdateMechanism("nonsense")
    with pytest.raises(ValueError):
        UpdateMechanism.backoff(0.0)
    with pytest.raises(ValueError):
        UpdateMechanism.probabilistic(0.0)
    # q = 1 is allowed: the everyone-every-step chain
    UpdateMechanism.probabilistic(1.0)


def test_backoff_active_set_is_independent():
    rng = np.random.default_rng(41)
    mech = UpdateMechanism.backoff()
    for _ in range(50):
        graph = random_graph(rng, int(rng.integers(2, 12)))
        active = select_active(mech, graph, rng)
        assert active  # the global winner is always active
        for n in active:
            assert not any(r in active for r in graph.adjacency[n])


def test_backoff_activates_every_local_minimum():
    # a path 0-1-2 where draws are forced by seed inspection: instead of
    # pinning draws, check the definition directly against a re-draw
    rng = np.random.default_rng(42)
    graph = InterferenceGraph.from_edges(3, [(0, 1), (1, 2)])
    mech = UpdateMechanism.backoff()
    seen_both_ends = False
    for _ in range(200):
        active = select_active(mech, graph, rng)
        if active == (0, 2):
            seen_both_ends = True
    assert seen_both_ends  # non-adjacent users do fire together


def test_sweep_mechanism_round_robin():
    graph = InterferenceGraph(3, ((), (), ()))
    mech = UpdateMechanism.sweep_sequential()
    rng = np.random.default_rng(0)
    order = [select_active(mech, graph, rng, step=t) for t in range(6)]
    assert order == [(0,), (1,), (2,), (0,), (1,), (2,)]


def test_probabilistic_mechanism_respects_per_user_probs():
    graph = InterferenceGraph(2, ((), ()))
    mech = UpdateMechanism.probabilistic([1.0, 0.2])
    rng = np.random.default_rng(43)
    hits = np.zeros(2)
    for _ in range(2000):
        for n in select_active(mech, graph, rng):
            hits[n] += 1
    assert hits[0] == 2000
    assert 300 < hits[1] < 500


def test_drm_initial_profile_prefers_high_utility():
    inst = cycle_instance()
    prof = drm_initial_profile(inst)
    assert prof[0].channels == (1, 3)
    assert prof[1].channels == (0, 2)
    assert prof[0].attempt_prob == 0.5


def test_nbrf_initial_profile_count_consistent():
    g = InterferenceGraph.from_edges(3, [(0, 1), (1, 2)])
    inst = Instance(g, 2, 1, ((2.0, 1.0),) * 3, (1.0, 1.0, 1.0))
    prof = nbrf_initial_profile(inst)
    # everyone picks channel 0; attempt probs reflect same-channel neighbors
    assert [s.channels for s in prof] == [(0,), (0,), (0,)]
    assert prof[0].attempt_prob == pytest.approx(0.5)
    assert prof[1].attempt_prob == pytest.approx(1.0 / 3.0)


def test_run_br_drm_exact_reaches_equilibrium():
    rng = np.random.default_rng(44)
    for _ in range(20):
        inst = random_drm_instance(rng, max_users=8)
        traj = run_br_drm(
            inst, UpdateMechanism.sweep_sequential(), max_iters=20 * inst.num_users,
            rng=np.random.default_rng(4)
        )
        assert traj.termination == "converged"
        assert is_nep_drm(traj.profiles[-1], inst).is_nep
        # recorded potentials never decrease on the exact path
        pots = traj.potentials
        assert all(b >= a - 1e-12 for a, b in zip(pots, pots[1:]))


def test_run_br_drm_trajectory_shapes():
    inst = cycle_instance()
    traj = run_br_drm(
        inst, UpdateMechanism.sweep_sequential(), max_iters=10,
        rng=np.random.default_rng(0)
    )
    assert len(traj.profiles) == len(traj.potentials) == len(traj.rates)
    assert len(traj.active_sets) == len(traj.profiles)
    assert traj.active_sets[0] == ()  # initial snapshot precedes any update
    assert traj.rates[0] == (
        total_expected_rate(0, traj.profiles[0], inst),
        total_expected_rate(1, traj.profiles[0], inst),
    )
    step = traj.step(1)
    assert step.profile == traj.profiles[1]


def test_run_br_drm_initial_profile_override():
    inst = cycle_instance()
    start = make_profile([[0, 1], [1, 2]], [0.5, 0.5])
    traj = run_br_drm(
        inst, UpdateMechanism.sweep_sequential(), max_iters=10,
        rng=np.random.default_rng(0), initial_profile=start,
    )
    assert traj.profiles[0] == start


def test_replay_cycle_detection_and_rates():
    inst = cycle_instance()
    start = make_profile([[0, 1], [1, 2]], [0.5, 0.5])
    moves = [(0, (2, 3)), (1, (0, 3)), (0, (0, 1)), (1, (1, 2))]
    traj = run_better_response_replay(inst, start, moves)
    assert traj.termination == "cycle-detected"
    assert traj.cycle_length == 4
    assert traj.profiles[-1] == start
    # the two users' rates swap back and forth, bit-exact
    assert traj.rates[0] == CYCLE_RATES
    assert traj.rates[1] == (1.25, 1.0)
    assert traj.rates[2] == CYCLE_RATES
    assert traj.rates[4] == CYCLE_RATES
    # the scalar the sequential dynamics would climb stays flat
    level = math.log(2.0) ** 2
    for value in traj.potentials:
        assert value == pytest.approx(level, rel=1e-12)


def test_replay_rejects_non_improving_move():
    inst = cycle_instance()
    start = make_profile([[0, 1], [1, 2]], [0.5, 0.5])
    with pytest.raises(ValueError, match="move 1"):
        run_better_response_replay(inst, start, [(0, (0, 1))])


def test_run_nbrf_freezes_into_equilibrium():
    g = InterferenceGraph.from_edges(2, [(0, 1)])
    inst = Instance(g, 2, 1, ((2.0, 1.0), (4.0, 1.0)), (1.0, 1.0))
    traj = run_nbrf(
        inst, UpdateMechanism.backoff(), CoolingSchedule.logarithmic(0.5),
        max_iters=400, rng=np.random.default_rng(45), freeze_beta=6.0,
    )
    assert traj.termination == "converged"
    assert is_nep_fairness(traj.profiles[-1], inst).is_nep


def test_run_nbrf_fixed_beta_cache_matches_direct_sampler():
    from spectrumshare.dynamics import _sample_cached
    from spectrumshare.fairness import sample_noisy_br

    g = InterferenceGraph.from_edges(3, [(0, 1), (1, 2)])
    inst = Instance(g, 2, 1, ((2.0, 1.0), (1.0, 3.0), (2.0, 2.0)), (1.0,) * 3)
    prof = make_profile([[0], [1], [0]], [0.5, 1.0 / 3.0, 0.5])
    beta = 1.7
    cache = {}
    for seed in range(300):
        r1 = np.random.default_rng(seed)
        r2 = np.random.default_rng(seed)
        a1 = _sample_cached(1, prof, inst, beta, r1, cache)
        a2 = sample_noisy_br(1, prof, inst, beta, r2)
        assert a1 == a2


def test_run_nbrf_deterministic_per_seed():
    g = InterferenceGraph.from_edges(2, [(0, 1)])
    inst = Instance(g, 2, 1, ((2.0, 1.0), (4.0, 1.0)), (1.0, 1.0))
    runs = [
        run_nbrf(
            inst, UpdateMechanism.probabilistic(0.3), CoolingSchedule.fixed(1.0),
            max_iters=200, rng=np.random.default_rng(7),
        )
        for _ in range(2)
    ]
    assert runs[0].profiles == runs[1].profiles
    assert runs[0].active_sets == runs[1].active_sets


def grown_instance():
    g = InterferenceGraph.from_edges(3, [(0, 1), (1, 2)])
    return Instance(g, 2, 1, ((2.0, 1.0), (1.0, 3.0), (2.0, 2.0)), (0.5,) * 3)


def test_population_event_extension_checks():
    small = Instance(
        InterferenceGraph.from_edges(2, [(0, 1)]), 2, 1,
        ((2.0, 1.0), (1.0, 3.0)), (0.5, 0.5),
    )
    PopulationEvent(5, grown_instance())  # valid construction
    with pytest.raises(ValueError):
        PopulationEvent(0, grown_instance())
    traj = run_br_drm(
        small, UpdateMechanism.sweep_sequential(), max_iters=20,
        rng=np.random.default_rng(0),
        events=[PopulationEvent(4, grown_instance())],
    )
    assert traj.instances[0].num_users == 2
    assert traj.instances[-1].num_users == 3
    # the profile grows with the instance and stays valid
    assert len(traj.profiles[-1]) == 3


def test_population_event_rejects_inconsistent_growth():
    small = Instance(
        InterferenceGraph.from_edges(2, [(0, 1)]), 2, 1,
        ((2.0, 1.0), (1.0, 3.0)), (0.5, 0.5),
    )
    # prefix utilities must be preserved
    bad = Instance(
        InterferenceGraph.from_edges(3, [(0, 1), (1, 2)]), 2, 1,
        ((9.0, 1.0), (1.0, 3.0), (2.0, 2.0)), (0.5,) * 3,
    )
    with pytest.raises(ValueError):
        run_br_drm(
            small, UpdateMechanism.sweep_sequential(), max_iters=10,
            rng=np.random.default_rng(0), events=[PopulationEvent(2, bad)],
        )
    # the induced subgraph on the original users must be unchanged
    bad = Instance(
        InterferenceGraph.from_edges(3, [(1, 2)]), 2, 1,
        ((2.0, 1.0), (1.0, 3.0), (2.0, 2.0)), (0.5,) * 3,
    )
    with pytest.raises(ValueError):
        run_br_drm(
            small, UpdateMechanism.sweep_sequential(), max_iters=10,
            rng=np.random.default_rng(0), events=[PopulationEvent(2, bad)],
        )
    # shrinking is not an extension
    with pytest.raises(ValueError):
        run_br_drm(
            grown_instance(), UpdateMechanism.sweep_sequential(), max_iters=10,
            rng=np.random.default_rng(0), events=[PopulationEvent(2, small)],
        )


def test_estimator_driven_run_settles_on_equilibrium():
    rng = np.random.default_rng(46)
    inst = random_drm_instance(rng, max_users=6, max_channels=3, max_select=1)
    traj = run_br_drm(
        inst, UpdateMechanism.backoff(),
        estimator_config=EstimatorConfig(window=80, slots_per_update=80),
        max_iters=120, rng=np.random.default_rng(9),
    )
    # estimation noise keeps strict convergence claims off the table; the
    # final profile should still be an exact equilibrium here
    assert is_nep_drm(traj.profiles[-1], inst).is_nep


def test_estimate_success_probability_counts_idle_slots():
    class Outcome:
        def __init__(self, busy):
            self.neighbor_busy = busy

    busy = np.zeros((2, 2), dtype=bool)
    busy[0, 1] = True
    window = [Outcome(busy), Outcome(np.zeros((2, 2), dtype=bool))]
    assert estimate_success_probability(0, 1, window) == 0.5
    assert estimate_success_probability(0, 0, window) == 1.0
    with pytest.raises(EstimationError):
        estimate_success_probability(0, 0, [])


def test_simulate_slot_success_requires_clear_air():
    inst = cycle_instance()
    prof = make_profile([[0, 1], [1, 2]], [0.9, 0.9])
    rng = np.random.default_rng(47)
    for _ in range(200):
        out = simulate_slot(prof, inst, rng)
        # success only on selected channels while transmitting, never under
        # a transmitting neighbor
        for n in range(2):
            for k in range(4):
                if out.success[n, k]:
                    assert out.transmitted[n]
                    assert k in prof[n].channels
                    assert not out.neighbor_busy[n, k]
        if out.transmitted[0] and out.transmitted[1]:
            assert not out.success[0, 1] and not out.success[1, 1]


def test_simulate_slots_matches_closed_form_statistically():
    inst = cycle_instance()
    prof = make_profile([[0, 1], [1, 2]], [0.6, 0.4])
    rng = np.random.default_rng(48)
    slots = 200_000
    succ, busy = simulate_slots(prof, inst, slots, rng)
    for n in range(2):
        for k in prof[n].channels:
            want = prof[n].attempt_prob * success_probability(
                n, k, prof, inst.graph
            )
            assert succ[n, k] / slots == pytest.approx(want, rel=0.03)
    # busy counts estimate the neighbor-clear probability complement
    v = success_probability(0, 1, prof, inst.graph)
    assert 1.0 - busy[0, 1] / slots == pytest.approx(v, rel=0.03)


def test_simulate_naive_policy_matches_closed_form():
    g = build_regular_graph(8, 3)
    inst = Instance(g, 2, 1, ((100.0, 100.0),) * 8, (0.5,) * 8)
    rng = np.random.default_rng(49)
    slots = 100_000
    succ = simulate_naive_policy(inst, 0.5, slots, rng)
    want = naive_expected_rate(0, inst, degree=3) / 100.0  # success prob
    for n in range(8):
        assert succ[n] / slots == pytest.approx(want, rel=0.05)
