import math

import numpy as np
import pytest

from pure_explore.core import (
    BanditInstance,
    Bernoulli,
    Dirac,
    Discrete,
    History,
    RngStream,
    expected_simple_regret,
)
from pure_explore.simulator import (
    OracleBudgetError,
    default_checkpoints,
    estimate_curve,
    estimate_curves,
    exact_expected_simple_regret,
    exact_oracle_diagnostics,
    run_episode,
)
from pure_explore.strategies import Eba, Edp, Mpa, Ucb, Unif, allocate, recommend

PAIRS = [(Unif(), Edp()), (Unif(), Eba()), (Unif(), Mpa()),
         (Ucb(2.0), Edp()), (Ucb(2.0), Eba()), (Ucb(2.0), Mpa())]


def brute_expected_simple_regret(instance, allocation, recommendation, n):
    """Unmemoized path enumeration over full History objects.

    Independent check of the aggregated-state oracle: walks every reward
    sequence with its probability and scores the recommendation at round n.
    """
    total = 0.0

    def walk(history, prob):
        nonlocal total
        t = history.n + 1
        if t > n:
            rec = recommend(recommendation, history)
            total += prob * expected_simple_regret(instance, rec)
            return
        arm = allocate(allocation, history, t)
        for value, p in instance.arms[arm - 1].outcomes():
            child = History(instance.k)
            for _, a, r in history.pulls:
                child.record(a, r)
            child.record(arm, value)
            walk(child, prob * p)

    walk(History(instance.k), 1.0)
    return total


class TestDefaultCheckpoints:
    def test_geometric_plus_horizon(self):
        assert default_checkpoints(10) == (1, 2, 4, 8, 10)
        assert default_checkpoints(8) == (1, 2, 4, 8)
        assert default_checkpoints(1) == (1,)


class TestRunEpisode:
    def test_deterministic_arms(self):
        inst = BanditInstance([Dirac(1.0), Dirac(0.0)])
        res = run_episode(inst, Unif(), Eba(), 2, [2], RngStream(0, 0))
        assert res.simple_regrets == (0.0,)
        assert res.final_cumulative_regret == 1.0

    def test_identical_arms_zero_regret(self):
        inst = BanditInstance([Bernoulli(0.5)] * 3)
        for alloc, rec in PAIRS:
            res = run_episode(inst, alloc, rec, 9, [1, 3, 9], RngStream(1, 0))
            assert res.simple_regrets == (0.0, 0.0, 0.0)

    def test_checkpoint_validation(self):
        inst = BanditInstance([Dirac(1.0), Dirac(0.0)])
        with pytest.raises(ValueError):
            run_episode(inst, Unif(), Eba(), 4, [5], RngStream(0, 0))
        with pytest.raises(ValueError):
            run_episode(inst, Unif(), Eba(), 4, [2, 2], RngStream(0, 0))
        with pytest.raises(ValueError):
            run_episode(inst, Unif(), Eba(), 0, [1], RngStream(0, 0))

    def test_counts_monotone_and_consistent(self):
        inst = BanditInstance([Bernoulli(0.4), Bernoulli(0.8)])
        rng = RngStream(3, 0)
        history = History(2)
        prev = [0, 0]
        for t in range(1, 40):
            arm = allocate(Ucb(1.5), history, t)
            from pure_explore.core import sample_reward

            history.record(arm, sample_reward(inst.arms[arm - 1], rng))
            assert sum(history.counts) == t
            assert all(c >= p for c, p in zip(history.counts, prev))
            prev = list(history.counts)


class TestEstimateCurve:
    def test_mean_close_to_exact(self):
        inst = BanditInstance([Bernoulli(0.5), Bernoulli(1.0)])
        curve = estimate_curve(inst, Unif(), Eba(), [2], 100000, 77)
        assert abs(curve.means[0] - 0.25) <= 3 * curve.std_errors[0]

    def test_bitwise_reproducible(self):
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8), Bernoulli(0.5)])
        a = estimate_curve(inst, Ucb(2.0), Eba(), [2, 4, 8], 5000, 11)
        b = estimate_curve(inst, Ucb(2.0), Eba(), [2, 4, 8], 5000, 11)
        assert a == b

    def test_threads_do_not_change_results(self):
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8)])
        for alloc, rec in PAIRS:
            one = estimate_curve(inst, alloc, rec, [3, 7], 999, 13, threads=1)
            four = estimate_curve(inst, alloc, rec, [3, 7], 999, 13, threads=4)
            assert one == four

    def test_engines_agree_bitwise(self):
        instances = [
            BanditInstance([Bernoulli(0.3), Bernoulli(0.8)]),
            BanditInstance([Dirac(0.6), Bernoulli(0.5), Bernoulli(0.9)]),
            BanditInstance([Discrete(((0.0, 0.5), (1.0, 0.5))), Dirac(0.4)]),
        ]
        for inst in instances:
            for alloc, rec in PAIRS:
                vec = estimate_curve(inst, alloc, rec, [2, 5], 400, 21, engine="vector")
                seq = estimate_curve(inst, alloc, rec, [2, 5], 400, 21, engine="sequential")
                assert vec == seq, (inst, alloc, rec)

    def test_eba_floor_engines_agree(self):
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8), Bernoulli(0.5)])
        rec = Eba("floor_multiple_of_K")
        vec = estimate_curve(inst, Unif(), rec, [4, 7, 9], 500, 33, engine="vector")
        seq = estimate_curve(inst, Unif(), rec, [4, 7, 9], 500, 33, engine="sequential")
        assert vec == seq

    def test_all_dirac_zero_std_error(self):
        inst = BanditInstance([Dirac(0.9), Dirac(0.2), Dirac(0.6)])
        for alloc, rec in PAIRS:
            curve = estimate_curve(inst, alloc, rec, [1, 4, 6], 50, 5)
            assert curve.std_errors == (0.0, 0.0, 0.0)

    def test_shared_pass_matches_single(self):
        inst = BanditInstance([Bernoulli(0.4), Bernoulli(0.7)])
        together = estimate_curves(inst, Unif(), [Edp(), Eba(), Mpa()], [2, 6], 300, 9)
        for rec, curve in zip([Edp(), Eba(), Mpa()], together):
            assert curve == estimate_curve(inst, Unif(), rec, [2, 6], 300, 9)

    def test_replicate_validation(self):
        inst = BanditInstance([Bernoulli(0.4), Bernoulli(0.7)])
        with pytest.raises(ValueError):
            estimate_curve(inst, Unif(), Eba(), [2], 0, 1)
        single = estimate_curve(inst, Unif(), Eba(), [2], 1, 1)
        assert single.std_errors == (0.0,)


class TestExactOracle:
    def test_dirac_single_leaf(self):
        inst = BanditInstance([Dirac(1.0), Dirac(0.0)])
        value, mass, states = exact_oracle_diagnostics(inst, Unif(), Eba(), 4)
        assert value == 0.0
        assert mass == pytest.approx(1.0, abs=1e-12)

    def test_two_leaf_enumeration(self):
        inst = BanditInstance([Bernoulli(0.5), Bernoulli(1.0)])
        assert exact_expected_simple_regret(inst, Unif(), Eba(), 2) == 0.25

    def test_dominant_arm_under_ucb_mpa(self):
        inst = BanditInstance([Bernoulli(1.0), Bernoulli(0.0)])
        assert exact_expected_simple_regret(inst, Ucb(2.0), Mpa(), 4) == 0.0

    def test_leaf_mass_sums_to_one(self):
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8), Bernoulli(0.5)])
        for alloc, rec in PAIRS:
            _, mass, _ = exact_oracle_diagnostics(inst, alloc, rec, 7)
            assert abs(mass - 1.0) <= 1e-9

    def test_matches_brute_enumeration(self):
        instances = [
            BanditInstance([Bernoulli(0.5), Bernoulli(1.0)]),
            BanditInstance([Bernoulli(0.3), Bernoulli(0.8)]),
            BanditInstance([Bernoulli(0.8), Bernoulli(0.5), Bernoulli(0.3)]),
            BanditInstance([Dirac(0.6), Bernoulli(0.5)]),
        ]
        for inst in instances:
            for alloc, rec in PAIRS:
                for n in (1, 2, 4, 5):
                    fast = exact_expected_simple_regret(inst, alloc, rec, n)
                    slow = brute_expected_simple_regret(inst, alloc, rec, n)
                    assert fast == pytest.approx(slow, abs=1e-12), (inst, alloc, rec, n)

    def test_eba_floor_equals_truncated_round(self):
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8)])
        floor = exact_expected_simple_regret(inst, Unif(), Eba("floor_multiple_of_K"), 5)
        brute = brute_expected_simple_regret(inst, Unif(), Eba("floor_multiple_of_K"), 5)
        assert floor == pytest.approx(brute, abs=1e-12)

    def test_budget_exceeded(self):
        inst = BanditInstance([Bernoulli(0.5), Bernoulli(0.5), Bernoulli(0.5)])
        with pytest.raises(OracleBudgetError):
            exact_expected_simple_regret(inst, Ucb(2.0), Eba(), 8, budget=10)

    def test_discrete_unsupported(self):
        inst = BanditInstance([Discrete(((0.0, 0.5), (1.0, 0.5))), Bernoulli(0.5)])
        with pytest.raises(ValueError):
            exact_expected_simple_regret(inst, Unif(), Eba(), 2)

    def test_monte_carlo_agrees_with_oracle(self):
        # small spot-check; the full grid is in the acceptance suite
        inst = BanditInstance([Bernoulli(0.3), Bernoulli(0.8)])
        for alloc in (Unif(), Ucb(2.0)):
            curves = estimate_curves(inst, alloc, [Edp(), Eba(), Mpa()], [2, 4, 6], 40000, 2718)
            for rec, curve in zip([Edp(), Eba(), Mpa()], curves):
                for ci, n in enumerate(curve.checkpoints):
                    exact = exact_expected_simple_regret(inst, alloc, rec, n)
                    tol = 3 * curve.std_errors[ci] if curve.std_errors[ci] > 0 else 1e-12
                    assert abs(curve.means[ci] - exact) <= tol, (alloc, rec, n)
