"""Command-line front end: scenario loading, experiment orchestration, CSV output.

All dB/linear conversion happens here; the library works in linear units.
CSV schemas (pinned by tests):
    sweep-pfa / sweep-pmd : lq_db,threshold,analytical,empirical,half_width_95,n_trials
    roc                   : epsilon,pfa,pd
    optimize-* trace      : coordinate,value,pmd
Exit codes: 0 success, 1 validation failure, 2 usage/parse error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import auth, mc, optim
from .channel import (
    GeometryError,
    PerElement,
    ScalarGradient,
    Scenario,
    ScenarioFormatError,
    fspl,
    load_scenario,
    ris_pathloss,
)
from .mc import ErrorEstimate, Feature, Hypothesis, TrialPlan
from .specfun import FoldedNormalParams, folded_normal_cdf, folded_normal_moments

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class UsageError(ValueError):
    """Malformed command-line value (exit code 2)."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def _fmt(x) -> str:
    """Shortest round-trip decimal form; empty cell for None, plain ints for counts."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path, header: str, rows, comments: list[str] | None = None) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    if comments:
        lines.extend(comments)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_grid(text: str) -> list[float]:
    """Either 'start:step:stop' (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"grid spec must be start:step:stop, got {text!r}")
            start, step, stop = (float(p) for p in parts)
            if step <= 0:
                raise UsageError("grid step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(max(n, 1))]
        return [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad grid spec {text!r}: {exc}") from None


def _parse_epsilons(text: str) -> np.ndarray:
    """'log:lo:hi:n' for a geometric grid, else a comma-separated list."""
    try:
        if text.startswith("log:"):
            _, lo, hi, n = text.split(":")
            return np.geomspace(float(lo), float(hi), int(n))
        return np.asarray([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"bad epsilon spec {text!r}: {exc}") from None


def _feature(name: str) -> Feature:
    return Feature(name)


def _profile_for(args, scenario: Scenario, feature: Feature):
    if feature is Feature.PATHLOSS:
        return ScalarGradient(args.gradient)
    if args.phases:
        phases = np.asarray([float(p) for p in args.phases.split(",")], dtype=float)
    else:
        phases = np.zeros(scenario.n_elements)
    return PerElement(phases)


def _threshold_for_target(feature: Feature, target_pfa: float, noise_sigma: float) -> float:
    if not (0.0 < target_pfa <= 1.0):
        raise UsageError(f"target_pfa must be in (0, 1], got {target_pfa}")
    if feature is Feature.PATHLOSS:
        return auth.threshold_for_pfa(target_pfa, noise_sigma)
    if feature is Feature.CIR_MAGNITUDE:
        # invert the Rayleigh tail exp(-eps^2 / 2 sigma_r^2)
        sigma_r = auth.rayleigh_sigma(noise_sigma)
        return sigma_r * math.sqrt(-2.0 * math.log(target_pfa))
    raise UsageError("the phase feature has no closed-form threshold; pass --epsilon")


def _analytical_value(command: str, feature: Feature, epsilon: float,
                      scenario: Scenario, use_ris: bool, gradient: float):
    """Closed form for the requested error, or None where only numerics exist."""
    sigma_n = scenario.noise_sigma
    if command == "sweep-pfa":
        if feature is Feature.PATHLOSS:
            return auth.pfa_pathloss(epsilon, sigma_n)
        if feature is Feature.CIR_MAGNITUDE:
            return auth.pfa_cir_magnitude(epsilon, auth.rayleigh_sigma(sigma_n))
        return None
    if feature is Feature.PATHLOSS:
        if use_ris:
            pl_a = ris_pathloss(scenario, scenario.alice_pos, gradient)
            pl_e = ris_pathloss(scenario, scenario.eve_pos, gradient)
        else:
            pl_a = fspl(scenario.alice_pos, scenario.bob_pos, scenario)
            pl_e = fspl(scenario.eve_pos, scenario.bob_pos, scenario)
        return auth.pmd_pathloss(epsilon, sigma_n, pl_a, pl_e)
    return None


def _baseline_outputs(output: str, baseline: str) -> list[tuple[str, bool]]:
    """(path, use_ris) pairs; 'both' splits the output name."""
    if baseline == "both":
        p = Path(output)
        return [
            (str(p.with_name(p.stem + "_ris" + p.suffix)), True),
            (str(p.with_name(p.stem + "_noris" + p.suffix)), False),
        ]
    return [(output, baseline == "ris")]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_sweep(args, command: str) -> int:
    scenario = load_scenario(args.scenario)
    feature = _feature(args.feature)
    lq_grid = _parse_grid(args.lq_grid)
    if not lq_grid:
        raise ValueError("lq grid must be nonempty")
    for path, use_ris in _baseline_outputs(args.output, args.baseline):
        rows = []
        flagged = []
        for lq in lq_grid:
            sc = replace(scenario, lq_db=lq)
            sigma_n = sc.noise_sigma
            epsilon = (args.epsilon if args.epsilon is not None
                       else _threshold_for_target(feature, args.target_pfa, sigma_n))
            plan = TrialPlan(
                n_trials=args.trials, master_seed=args.seed, feature=feature,
                epsilon=epsilon, scenario=sc, profile=_profile_for(args, sc, feature),
                refade_alice=not args.freeze_alice, ris=use_ris,
            )
            pfa, pmd = mc.run_trials(plan, workers=args.workers)
            est = pfa if command == "sweep-pfa" else pmd
            analytical = _analytical_value(command, feature, epsilon, sc, use_ris,
                                           args.gradient)
            rows.append((lq, epsilon, analytical, est.value, est.half_width_95,
                         est.n_conditioning))
            if est.low_confidence:
                flagged.append(len(rows))
        comments = [f"# low_confidence_rows: {','.join(str(i) for i in flagged)}"] if flagged else None
        _write_csv(path, "lq_db,threshold,analytical,empirical,half_width_95,n_trials",
                   rows, comments)
    return EXIT_OK


def _auto_epsilons(plan: TrialPlan, n_points: int = 50) -> np.ndarray:
    """Log-spaced grid spanning the observed statistic range (pilot pass)."""
    pilot = min(plan.n_trials, 10_000)
    s0 = mc.empirical_distribution(plan, Hypothesis.H0, pilot)
    s1 = mc.empirical_distribution(plan, Hypothesis.H1, pilot)
    samples = np.concatenate([s0, s1])
    positive = samples[samples > 0.0]
    lo = 0.5 * float(positive.min()) if positive.size else 1e-12
    hi = 1.05 * float(samples.max()) if samples.max() > 0 else 1.0
    if hi <= lo:
        hi = 10.0 * lo
    return np.geomspace(lo, hi, n_points)


def _cmd_roc(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.lq_db is not None:
        scenario = replace(scenario, lq_db=args.lq_db)
    feature = _feature(args.feature)
    for path, use_ris in _baseline_outputs(args.output, args.baseline):
        plan = TrialPlan(
            n_trials=args.trials, master_seed=args.seed, feature=feature,
            epsilon=0.0, scenario=scenario,
            profile=_profile_for(args, scenario, feature),
            refade_alice=not args.freeze_alice, ris=use_ris,
        )
        epsilons = (_parse_epsilons(args.epsilons) if args.epsilons
                    else _auto_epsilons(plan))
        curve = mc.roc_sweep(plan, epsilons, workers=args.workers)
        _write_csv(path, "epsilon,pfa,pd", curve.points)
    return EXIT_OK


def _summary_path(output: str) -> str:
    p = Path(output)
    return str(p.with_name(p.stem + "_summary" + p.suffix))


def _write_opt_outputs(output: str, result: optim.OptResult) -> None:
    _write_csv(output, "coordinate,value,pmd", result.trace)
    if isinstance(result.best_profile, ScalarGradient):
        profile_text = repr(result.best_profile.gradient)
    else:
        profile_text = ";".join(repr(p) for p in result.best_profile.phases.tolist())
    lines = ["best_pmd,evaluations,best_profile",
             f"{_fmt(result.best_pmd)},{result.evaluations},{profile_text}"]
    Path(_summary_path(output)).write_text("\n".join(lines) + "\n")


def _cmd_optimize_gradient(args) -> int:
    scenario = load_scenario(args.scenario)
    epsilon = (args.epsilon if args.epsilon is not None
               else auth.threshold_for_pfa(args.target_pfa, scenario.noise_sigma))
    if args.grid:
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise ValueError("--grid must be start:stop:npoints")
        grid = np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    else:
        grid = optim.default_gradient_grid(scenario)
    result = optim.optimize_gradient(scenario, epsilon, grid)
    _write_opt_outputs(args.output, result)
    print(f"best gradient {result.best_profile.gradient:.6g} rad/m, "
          f"pmd {result.best_pmd:.3g}, {result.evaluations} evaluations, "
          f"{len(result.skipped)} evanescent points skipped")
    return EXIT_OK


def _cmd_optimize_phases(args) -> int:
    scenario = load_scenario(args.scenario)
    result = optim.optimize_phase_matrix(
        scenario,
        epsilon=args.epsilon,
        levels=args.levels,
        strategy=optim.Strategy(args.strategy),
        budget_trials=args.budget,
        rng_seed=args.seed,
        eval_trials=args.eval_trials,
    )
    _write_opt_outputs(args.output, result)
    print(f"best pmd {result.best_pmd:.3g} after {result.evaluations} evaluations "
          f"({result.evaluations * args.eval_trials} trials)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate: analytical closed forms vs the Monte-Carlo engine
# ---------------------------------------------------------------------------


def _check_np_round_trip():
    grid = np.geomspace(1e-6, 1.0, 13)
    worst = max(abs(auth.pfa_pathloss(auth.threshold_for_pfa(p, s), s) - p)
                for p in grid for s in (0.3, 1.0, 4.0))
    return worst <= 1e-9, f"max |pfa(threshold(p)) - p| = {worst:.3g}"


def _check_pathloss_pfa(scenario: Scenario, trials: int):
    worst = 0.0
    combos = [(lq, t) for lq in (10.0, 20.0, 40.0, 60.0)
              for t in (0.5, 0.2, 0.05, 0.01, 1e-3)]
    for i, (lq, target) in enumerate(combos):
        sc = replace(scenario, lq_db=lq)
        eps = auth.threshold_for_pfa(target, sc.noise_sigma)
        plan = TrialPlan(n_trials=trials, master_seed=1000 + i, feature=Feature.PATHLOSS,
                         epsilon=eps, scenario=sc, profile=ScalarGradient(0.0))
        pfa, _ = mc.run_trials(plan)
        se = math.sqrt(target * (1.0 - target) / pfa.n_conditioning)
        worst = max(worst, abs(pfa.value - target) / se)
    return worst <= 3.0, f"max |empirical - 2Q(eps/sigma)| = {worst:.2f} std errors over {len(combos)} combos"


def _check_pathloss_pmd(scenario: Scenario, trials: int):
    """Noise level set from the pathloss contrast so every combo is informative."""
    worst = 0.0
    n_checked = 0
    combos = [(g, ratio, t) for g in (0.0, 6.0, 9.0, 11.0)
              for ratio, t in ((0.5, 0.05), (1.5, 0.2), (2.5, 0.05), (3.5, 0.2), (5.0, 0.05))]
    for i, (gradient, ratio, target) in enumerate(combos):
        pl_a = ris_pathloss(scenario, scenario.alice_pos, gradient)
        pl_e = ris_pathloss(scenario, scenario.eve_pos, gradient)
        sigma = abs(pl_e - pl_a) / ratio
        sc = replace(scenario, lq_db=-linear_to_db(sigma**2 / scenario.tx_power_w))
        eps = auth.threshold_for_pfa(target, sc.noise_sigma)
        expected = auth.pmd_pathloss(eps, sc.noise_sigma, pl_a, pl_e)
        if not (1e-3 <= expected <= 0.999):
            continue
        plan = TrialPlan(n_trials=trials, master_seed=2000 + i, feature=Feature.PATHLOSS,
                         epsilon=eps, scenario=sc, profile=ScalarGradient(gradient))
        _, pmd = mc.run_trials(plan)
        se = math.sqrt(expected * (1.0 - expected) / pmd.n_conditioning)
        worst = max(worst, abs(pmd.value - expected) / se)
        n_checked += 1
    return (worst <= 3.0 and n_checked >= 20,
            f"max deviation {worst:.2f} std errors over {n_checked} combos")


def _check_rayleigh(scenario: Scenario, samples: int):
    sc = replace(scenario, lq_db=20.0, n_elements=8)
    plan = TrialPlan(n_trials=1, master_seed=77, feature=Feature.CIR_MAGNITUDE,
                     epsilon=0.0, scenario=sc, profile=PerElement(np.zeros(8)),
                     refade_alice=False)
    ts = mc.empirical_distribution(plan, Hypothesis.H0, samples)
    sigma_r = auth.rayleigh_sigma(sc.noise_sigma)
    worst = 0.0
    for q in np.linspace(0.05, 0.95, 10):
        eps = sigma_r * math.sqrt(-2.0 * math.log(1.0 - q))  # Rayleigh quantile
        expected = auth.pfa_cir_magnitude(eps, sigma_r)
        emp = 1.0 - np.searchsorted(ts, eps, side="left") / samples
        se = math.sqrt(expected * (1.0 - expected) / samples)
        worst = max(worst, abs(emp - expected) / se)
    grid = 1.0 - np.exp(-(ts**2) / (2.0 * sigma_r**2))  # CDF at each sorted sample
    ks = float(np.max(np.abs(grid - (np.arange(1, samples + 1) - 0.5) / samples)))
    return (worst <= 3.0 and ks < 0.005,
            f"max tail deviation {worst:.2f} std errors, KS distance {ks:.4f}")


def _check_phase_invariance(scenario: Scenario, trials: int):
    """False alarm must not move with the panel configuration.

    The magnitude feature runs with the enrollment channel pinned, which is
    the regime of the closed-form Rayleigh false alarm; re-fading makes the
    false alarm condition on the enrolled |fingerprint|, which is not a
    function the closed forms describe.
    """
    sc_base = replace(scenario, n_elements=8)
    rng = np.random.default_rng(7)
    profiles = [PerElement(rng.uniform(0.0, 2.0 * math.pi, 8)) for _ in range(2)]
    gradients = (0.0, 9.0)
    worst = 0.0
    for lq in np.linspace(5.0, 50.0, 10):
        sc = replace(sc_base, lq_db=float(lq))
        # Rayleigh median of |n|, so both estimates sit mid-scale
        eps_m = auth.rayleigh_sigma(sc.noise_sigma) * math.sqrt(2.0 * math.log(2.0))
        eps_p = auth.threshold_for_pfa(0.1, sc.noise_sigma)
        pairs = [
            [TrialPlan(n_trials=trials, master_seed=3000 + k, feature=Feature.CIR_MAGNITUDE,
                       epsilon=eps_m, scenario=sc, profile=prof, refade_alice=False)
             for k, prof in enumerate(profiles)],
            [TrialPlan(n_trials=trials, master_seed=3100 + k, feature=Feature.PATHLOSS,
                       epsilon=eps_p, scenario=sc, profile=ScalarGradient(g))
             for k, g in enumerate(gradients)],
        ]
        for plan_a, plan_b in pairs:
            est_a, _ = mc.run_trials(plan_a)
            est_b, _ = mc.run_trials(plan_b)
            se = math.hypot(est_a.half_width_95, est_b.half_width_95) / 1.96
            gap = abs(est_a.value - est_b.value)
            worst = max(worst, gap / se if se > 0 else (0.0 if gap == 0 else math.inf))
    return worst <= 3.0, f"max profile-to-profile gap {worst:.2f} combined std errors"


def _check_folded_moments():
    rng = np.random.default_rng(11)
    worst = 0.0
    for delta, sigma in ((0.0, 1.0), (2.0, 1.0), (1.0, 3.0)):
        draws = np.abs(delta + sigma * rng.standard_normal(10**6))
        mean, var = folded_normal_moments(FoldedNormalParams(delta, sigma))
        worst = max(worst, abs(draws.mean() - mean) / mean, abs(draws.var() - var) / var)
    return worst <= 0.01, f"max relative moment error {worst:.3g}"


def _check_uniform_split(scenario: Scenario, trials: int):
    plan = TrialPlan(n_trials=trials, master_seed=5, feature=Feature.PATHLOSS,
                     epsilon=1.0, scenario=scenario, profile=ScalarGradient(0.0))
    pfa, pmd = mc.run_trials(plan)
    n0 = pfa.n_conditioning
    dev = abs(n0 - trials / 2.0) / math.sqrt(trials * 0.25)
    return dev <= 5.0, f"legitimate-transmitter count deviates {dev:.2f} std devs from n/2"


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    trials = args.trials
    checks = [
        ("neyman-pearson-round-trip", lambda: _check_np_round_trip()),
        ("pathloss-pfa-closed-form", lambda: _check_pathloss_pfa(scenario, trials)),
        ("pathloss-pmd-closed-form", lambda: _check_pathloss_pmd(scenario, trials)),
        ("folded-normal-moments", lambda: _check_folded_moments()),
        ("rayleigh-magnitude-false-alarm", lambda: _check_rayleigh(scenario, trials)),
        ("false-alarm-phase-invariance", lambda: _check_phase_invariance(scenario, max(trials // 10, 10_000))),
        ("uniform-transmitter-split", lambda: _check_uniform_split(scenario, trials)),
    ]
    failures = 0
    for name, fn in checks:
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures += 1
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2 but avoid argparse's SystemExit text dance
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p, *, trials_default=10**6):
    p.add_argument("--scenario", required=True, help="scenario config file")
    p.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    p.add_argument("--trials", type=int, default=trials_default,
                   help=f"Monte-Carlo trials (default {trials_default})")
    p.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")


def _add_feature_opts(p):
    p.add_argument("--feature", choices=[f.value for f in Feature], default="pathloss")
    p.add_argument("--gradient", type=float, default=0.0,
                   help="phase gradient rad/m for the pathloss feature (default 0)")
    p.add_argument("--phases", default=None,
                   help="comma-separated element phases for CIR features (default all zero)")
    p.add_argument("--freeze-alice", action="store_true",
                   help="pin the legitimate channel to the enrollment realization")
    p.add_argument("--baseline", choices=["ris", "no-ris", "both"], default="ris")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rispla",
                     description="RIS-assisted physical-layer authentication lab")
    sub = parser.add_subparsers(dest="command", required=True)

    for cmd in ("sweep-pfa", "sweep-pmd"):
        p = sub.add_parser(cmd, help=f"{cmd} against link quality")
        _add_common(p)
        _add_feature_opts(p)
        p.add_argument("--lq-grid", default="0:2:40",
                       help="dB grid, start:step:stop or comma list (default 0:2:40)")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--epsilon", type=float, default=None)
        group.add_argument("--target-pfa", type=float, default=None)
        p.add_argument("--output", required=True)

    p = sub.add_parser("roc", help="operating characteristic over thresholds")
    _add_common(p)
    _add_feature_opts(p)
    p.add_argument("--lq-db", type=float, default=None, help="override scenario link quality")
    p.add_argument("--epsilons", default=None,
                   help="comma list or log:lo:hi:n (default: auto from the statistic range)")
    p.add_argument("--output", required=True)

    p = sub.add_parser("optimize-gradient", help="grid search of the phase gradient")
    p.add_argument("--scenario", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--epsilon", type=float, default=None)
    group.add_argument("--target-pfa", type=float, default=None)
    p.add_argument("--grid", default=None, help="start:stop:npoints (default: lobe span, 1e4 points)")
    p.add_argument("--output", required=True)

    p = sub.add_parser("optimize-phases", help="discrete per-element phase search")
    p.add_argument("--scenario", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--strategy", choices=["exhaustive", "coordinate"], default="coordinate")
    p.add_argument("--budget", type=int, default=10**7, help="total trial budget")
    p.add_argument("--eval-trials", type=int, default=10**4, help="trials per candidate")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output", required=True)

    p = sub.add_parser("validate", help="closed forms vs Monte-Carlo cross-check")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trials", type=int, default=10**6)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("sweep-pfa", "sweep-pmd"):
            return _cmd_sweep(args, args.command)
        if args.command == "roc":
            return _cmd_roc(args)
        if args.command == "optimize-gradient":
            return _cmd_optimize_gradient(args)
        if args.command == "optimize-phases":
            return _cmd_optimize_phases(args)
        return _cmd_validate(args)
    except (ScenarioFormatError, UsageError) as exc:
        print(f"rispla: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rispla: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"rispla: i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
