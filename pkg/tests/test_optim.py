"""Phase-shift search: oracle comparisons, guards, and determinism."""

import math
from dataclasses import replace

import numpy as np
import pytest

from rispla.auth import pmd_pathloss, threshold_for_pfa
from rispla.channel import PerElement, ScalarGradient
from rispla.mc import Feature, Hypothesis, TrialPlan, empirical_distribution
from rispla.optim import (
    EXHAUSTIVE_CANDIDATE_LIMIT,
    InfeasibleGridError,
    SearchBudgetError,
    Strategy,
    default_gradient_grid,
    optimize_gradient,
    optimize_phase_matrix,
)


class TestOptimizeGradient:
    def test_colocated_attacker_flat_objective(self, scenario):
        sc = replace(scenario, eve_pos=scenario.alice_pos)
        sigma = sc.noise_sigma
        eps = threshold_for_pfa(0.05, sigma)
        res = optimize_gradient(sc, eps, np.linspace(0, 10, 50))
        expected = math.erf(eps / (sigma * math.sqrt(2)))
        pmds = [row[2] for row in res.trace]
        assert res.best_pmd == pytest.approx(expected, abs=1e-12)
        assert max(pmds) - min(pmds) < 1e-12
        # first minimizer wins ties on a flat landscape
        assert res.best_profile.gradient == 0.0

    def test_matches_analytical_objective(self, scenario):
        from rispla.channel import ris_pathloss

        eps = threshold_for_pfa(0.05, scenario.noise_sigma)
        grid = np.linspace(0.0, 20.0, 11)
        res = optimize_gradient(scenario, eps, grid)
        for _, g, pmd in res.trace[:5]:
            pl_a = ris_pathloss(scenario, scenario.alice_pos, g)
            pl_e = ris_pathloss(scenario, scenario.eve_pos, g)
            assert pmd == pmd_pathloss(eps, scenario.noise_sigma, pl_a, pl_e)

    def test_reaches_zero_on_default_span(self, scenario):
        eps = threshold_for_pfa(0.05, scenario.noise_sigma)
        res = optimize_gradient(scenario, eps, default_gradient_grid(scenario, 2000))
        assert res.best_pmd < 1e-6

    def test_best_bounds_trace(self, scenario):
        eps = threshold_for_pfa(0.2, scenario.noise_sigma)
        res = optimize_gradient(scenario, eps, np.linspace(0, 40, 300))
        assert all(pmd >= res.best_pmd for _, _, pmd in res.trace)
        assert res.evaluations == len(res.trace)

    def test_evanescent_points_skipped(self, scenario):
        huge = 2.0 * 2 * math.pi / scenario.wavelength
        grid = [0.0, 5.0, huge]
        res = optimize_gradient(scenario, 1e-5, grid)
        assert res.skipped == [huge]
        assert res.evaluations == 2

    def test_all_evanescent_raises(self, scenario):
        huge = 2.0 * 2 * math.pi / scenario.wavelength
        with pytest.raises(InfeasibleGridError):
            optimize_gradient(scenario, 1e-5, [huge, 2 * huge])

    def test_empty_grid_rejected(self, scenario):
        with pytest.raises(ValueError):
            optimize_gradient(scenario, 1e-5, [])

    def test_deterministic(self, scenario):
        eps = threshold_for_pfa(0.05, scenario.noise_sigma)
        grid = np.linspace(0, 30, 100)
        a = optimize_gradient(scenario, eps, grid)
        b = optimize_gradient(scenario, eps, grid)
        assert a.best_pmd == b.best_pmd
        assert a.best_profile == b.best_profile
        assert a.trace == b.trace


class TestOptimizePhaseMatrix:
    def test_single_element_strategies_agree(self, scenario):
        sc = replace(scenario, n_elements=1, lq_db=20.0)
        kw = dict(epsilon=0.3, levels=8, budget_trials=10**6, rng_seed=5, eval_trials=5000)
        ex = optimize_phase_matrix(sc, strategy=Strategy.EXHAUSTIVE, **kw)
        co = optimize_phase_matrix(sc, strategy=Strategy.COORDINATE, **kw)
        np.testing.assert_array_equal(ex.best_profile.phases, co.best_profile.phases)
        assert ex.best_pmd == co.best_pmd

    def test_coordinate_never_beats_exhaustive(self, scenario):
        sc = replace(scenario, n_elements=2, lq_db=20.0)
        for seed in (0, 1, 2):
            kw = dict(epsilon=0.05, levels=4, budget_trials=10**6, rng_seed=seed,
                      eval_trials=5000)
            ex = optimize_phase_matrix(sc, strategy=Strategy.EXHAUSTIVE, **kw)
            co = optimize_phase_matrix(sc, strategy=Strategy.COORDINATE, **kw)
            assert co.best_pmd >= ex.best_pmd
            assert len(ex.trace) == 16  # the full candidate set

    def test_exhaustive_is_global_minimum_of_candidate_set(self, scenario):
        sc = replace(scenario, n_elements=2, lq_db=20.0)
        ex = optimize_phase_matrix(sc, epsilon=0.05, levels=4, strategy=Strategy.EXHAUSTIVE,
                                   budget_trials=10**6, rng_seed=2, eval_trials=5000)
        assert ex.best_pmd == min(pmd for _, _, pmd in ex.trace)

    def test_candidate_guard(self, scenario):
        with pytest.raises(SearchBudgetError) as err:
            optimize_phase_matrix(scenario, epsilon=0.1, levels=4,
                                  strategy=Strategy.EXHAUSTIVE, budget_trials=10**9)
        assert err.value.required == 4**scenario.n_elements
        assert err.value.required > EXHAUSTIVE_CANDIDATE_LIMIT

    def test_exhaustive_trial_budget_guard(self, scenario):
        sc = replace(scenario, n_elements=2, lq_db=20.0)
        with pytest.raises(SearchBudgetError) as err:
            optimize_phase_matrix(sc, epsilon=0.1, levels=4, strategy=Strategy.EXHAUSTIVE,
                                  budget_trials=20_000, eval_trials=5000)
        assert err.value.required == 16 * 5000

    def test_budget_must_cover_one_evaluation(self, scenario):
        with pytest.raises(SearchBudgetError):
            optimize_phase_matrix(scenario, epsilon=0.1, budget_trials=100, eval_trials=5000)

    def test_coordinate_budget_exhaustion_returns_best_seen(self, scenario):
        sc = replace(scenario, n_elements=4, lq_db=20.0)
        res = optimize_phase_matrix(sc, epsilon=0.05, levels=8, strategy=Strategy.COORDINATE,
                                    budget_trials=10 * 2000, rng_seed=1, eval_trials=2000)
        assert res.evaluations == 10
        assert res.best_pmd == min(pmd for _, _, pmd in res.trace)

    def test_coordinate_sweep_minima_monotone(self, scenario):
        sc = replace(scenario, n_elements=3, lq_db=20.0)
        levels = 6
        res = optimize_phase_matrix(sc, epsilon=0.05, levels=levels,
                                    strategy=Strategy.COORDINATE,
                                    budget_trials=10**6, rng_seed=4, eval_trials=2000)
        pmds = [pmd for _, _, pmd in res.trace]
        sweep_minima = [min(pmds[i:i + levels]) for i in range(0, len(pmds), levels)]
        assert all(b <= a + 1e-15 for a, b in zip(sweep_minima, sweep_minima[1:]))

    def test_objective_reproducible_at_best_profile(self, scenario):
        sc = replace(scenario, n_elements=2, lq_db=20.0)
        res = optimize_phase_matrix(sc, epsilon=0.05, levels=4, strategy=Strategy.COORDINATE,
                                    budget_trials=10**6, rng_seed=2, eval_trials=5000)
        plan = TrialPlan(n_trials=5000, master_seed=2, feature=Feature.CIR_PHASE,
                         epsilon=0.05, scenario=sc, profile=res.best_profile)
        samples = empirical_distribution(plan, Hypothesis.H1, 5000)
        pmd = np.searchsorted(samples, 0.05, side="left") / 5000
        assert pmd == res.best_pmd

    def test_deterministic(self, scenario):
        sc = replace(scenario, n_elements=2, lq_db=20.0)
        kw = dict(epsilon=0.05, levels=4, strategy=Strategy.COORDINATE,
                  budget_trials=10**6, rng_seed=3, eval_trials=2000)
        a = optimize_phase_matrix(sc, **kw)
        b = optimize_phase_matrix(sc, **kw)
        assert a.best_pmd == b.best_pmd
        np.testing.assert_array_equal(a.best_profile.phases, b.best_profile.phases)
        assert a.trace == b.trace

    def test_levels_validation(self, scenario):
        with pytest.raises(ValueError):
            optimize_phase_matrix(scenario, epsilon=0.1, levels=1)
