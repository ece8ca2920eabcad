"""Phase-shift design: minimize missed detection over the panel configuration.

The scalar-gradient search evaluates the analytical pathloss missed
detection on a grid. The per-element search minimizes the empirical
phase-feature missed detection; candidates are compared under common random
numbers (one fixed evaluation seed) so the noisy objective is a
deterministic function of the candidate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .auth import pmd_pathloss
from .channel import EvanescentError, PerElement, PhaseProfile, ScalarGradient, Scenario, ris_pathloss
from .mc import Feature, Hypothesis, TrialPlan, empirical_distribution

__all__ = [
    "Strategy",
    "OptResult",
    "InfeasibleGridError",
    "SearchBudgetError",
    "default_gradient_grid",
    "optimize_gradient",
    "optimize_phase_matrix",
    "EXHAUSTIVE_CANDIDATE_LIMIT",
]

EXHAUSTIVE_CANDIDATE_LIMIT = 10**6


class Strategy(Enum):
    EXHAUSTIVE = "exhaustive"
    COORDINATE = "coordinate"


class InfeasibleGridError(ValueError):
    """Every grid point was evanescent; nothing to optimize."""


class SearchBudgetError(ValueError):
    """Requested search exceeds the candidate or trial budget."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True)
class OptResult:
    """Search outcome; trace rows are (coordinate, value, pmd) per evaluation.

    coordinate is 0 for the scalar gradient, the 1-based element number for
    per-element sweeps, and the flat lexicographic candidate index for
    exhaustive enumeration over more than one element (value repeats the
    index so rows stay numeric; decode with base `levels` digits).
    """

    best_profile: PhaseProfile
    best_pmd: float
    evaluations: int
    trace: list[tuple[int, float, float]]
    skipped: list[float] = field(default_factory=list)


def default_gradient_grid(scenario: Scenario, n_points: int = 10_000) -> np.ndarray:
    """Gradient sweep covering the first few reflection lobes.

    The lobe factor depends on the gradient only through
    u = element_b * gradient / (2 * refractive_index), with nulls every
    2*pi*n1/element_b in the gradient; this span covers u in [0, 4*pi],
    i.e. the specular lobe plus three side lobes.
    """
    span = 8.0 * math.pi * scenario.refractive_index / scenario.element_b
    return np.linspace(0.0, span, n_points)


def optimize_gradient(scenario: Scenario, epsilon: float, grid) -> OptResult:
    """Grid search of the analytical pathloss missed detection over gradients.

    Evanescent grid points (no propagating reflection for either
    transmitter) are skipped and recorded. First minimizer wins ties.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D sequence of gradients")
    sigma = scenario.noise_sigma
    trace: list[tuple[int, float, float]] = []
    skipped: list[float] = []
    best_gradient = None
    best_pmd = math.inf
    for g in grid.tolist():
        try:
            pl_a = ris_pathloss(scenario, scenario.alice_pos, g)
            pl_e = ris_pathloss(scenario, scenario.eve_pos, g)
        except EvanescentError:
            skipped.append(g)
            continue
        pmd = pmd_pathloss(epsilon, sigma, pl_a, pl_e)
        trace.append((0, g, pmd))
        if pmd < best_pmd:
            best_pmd = pmd
            best_gradient = g
    if best_gradient is None:
        raise InfeasibleGridError(
            f"all {grid.size} grid points are evanescent for this geometry"
        )
    return OptResult(
        best_profile=ScalarGradient(best_gradient),
        best_pmd=best_pmd,
        evaluations=len(trace),
        trace=trace,
        skipped=skipped,
    )


class _PhaseObjective:
    """Empirical phase-feature missed detection under common random numbers."""

    def __init__(self, scenario: Scenario, epsilon: float, eval_trials: int,
                 eval_seed: int, budget_trials: int):
        self.scenario = scenario
        self.epsilon = epsilon
        self.eval_trials = eval_trials
        self.eval_seed = eval_seed
        self.budget_trials = budget_trials
        self.spent = 0
        self.evaluations = 0
        self._cache: dict[tuple, float] = {}

    def budget_left(self) -> bool:
        return self.spent + self.eval_trials <= self.budget_trials

    def __call__(self, phases: tuple) -> float:
        cached = self._cache.get(phases)
        if cached is not None:
            return cached
        if not self.budget_left():
            raise SearchBudgetError(
                "trial budget exhausted", required=self.spent + self.eval_trials
            )
        plan = TrialPlan(
            n_trials=self.eval_trials,
            master_seed=self.eval_seed,
            feature=Feature.CIR_PHASE,
            epsilon=self.epsilon,
            scenario=self.scenario,
            profile=PerElement(np.asarray(phases)),
        )
        samples = empirical_distribution(plan, Hypothesis.H1, self.eval_trials)
        pmd = float(np.searchsorted(samples, self.epsilon, side="left")) / self.eval_trials
        self.spent += self.eval_trials
        self.evaluations += 1
        self._cache[phases] = pmd
        return pmd


def optimize_phase_matrix(
    scenario: Scenario,
    epsilon: float,
    levels: int = 16,
    strategy: Strategy = Strategy.COORDINATE,
    budget_trials: int = 10**7,
    rng_seed: int = 0,
    *,
    eval_trials: int = 10_000,
) -> OptResult:
    """Minimize the empirical phase-feature missed detection over discrete phases.

    Candidate phases for each element are the `levels` uniform points on
    [0, 2*pi). EXHAUSTIVE enumerates every assignment (refused above
    EXHAUSTIVE_CANDIDATE_LIMIT candidates or above the trial budget);
    COORDINATE sweeps elements 1..N in order, fixing each at its best level
    given the others, and repeats passes until no element changes or the
    budget runs out. Lowest-index candidate wins ties.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if eval_trials < 1 or budget_trials < eval_trials:
        raise SearchBudgetError(
            f"budget_trials must cover at least one evaluation of {eval_trials} trials",
            required=eval_trials,
        )
    n = scenario.n_elements
    phase_values = [2.0 * math.pi * k / levels for k in range(levels)]
    objective = _PhaseObjective(scenario, epsilon, eval_trials, rng_seed, budget_trials)

    if strategy is Strategy.EXHAUSTIVE:
        n_candidates = levels**n
        if n_candidates > EXHAUSTIVE_CANDIDATE_LIMIT:
            raise SearchBudgetError(
                f"exhaustive search needs {n_candidates} candidate evaluations "
                f"(limit {EXHAUSTIVE_CANDIDATE_LIMIT}); use the coordinate strategy",
                required=n_candidates,
            )
        if n_candidates * eval_trials > budget_trials:
            raise SearchBudgetError(
                f"exhaustive search needs {n_candidates * eval_trials} trials, "
                f"budget is {budget_trials}",
                required=n_candidates * eval_trials,
            )
        trace = []
        best_pmd = math.inf
        best_phases = None
        for idx, combo in enumerate(itertools.product(phase_values, repeat=n)):
            pmd = objective(combo)
            trace.append((1, combo[0], pmd) if n == 1 else (idx, float(idx), pmd))
            if pmd < best_pmd:
                best_pmd = pmd
                best_phases = combo
        return OptResult(
            best_profile=PerElement(np.asarray(best_phases)),
            best_pmd=best_pmd,
            evaluations=objective.evaluations,
            trace=trace,
        )

    # coordinate descent from the all-zero assignment
    current = [0.0] * n
    best_phases = tuple(current)
    best_pmd = math.inf
    trace = []
    try:
        while True:
            changed = False
            for elem in range(n):
                sweep_pmds = []
                for value in phase_values:
                    cand = tuple(current[:elem] + [value] + current[elem + 1 :])
                    pmd = objective(cand)
                    trace.append((elem + 1, value, pmd))
                    sweep_pmds.append(pmd)
                    if pmd < best_pmd:
                        best_pmd = pmd
                        best_phases = cand
                best_k = int(np.argmin(sweep_pmds))  # argmin keeps the lowest index on ties
                if current[elem] != phase_values[best_k]:
                    current[elem] = phase_values[best_k]
                    changed = True
            if not changed:
                break
    except SearchBudgetError:
        pass  # return the best candidate evaluated before the budget ran out
    return OptResult(
        best_profile=PerElement(np.asarray(best_phases)),
        best_pmd=best_pmd,
        evaluations=objective.evaluations,
        trace=trace,
    )
