"""Monte-Carlo trial engine for empirical error probabilities and ROC curves.

Randomness is counter-based: trial i consumes a fixed-size block of uniform
draws from a Philox stream advanced to a position that depends only on
(master_seed, i). Normals come from Box-Muller on those uniforms, never from
a rejection sampler, so the draw count per trial is constant and any
partition of the trial range across chunks or workers reproduces the same
trials bit for bit. Block 0 is reserved for fingerprint enrollment.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.random import Generator, Philox

from .channel import PerElement, PhaseProfile, ScalarGradient, Scenario, fspl, ris_pathloss

__all__ = [
    "Feature",
    "Hypothesis",
    "TrialPlan",
    "ErrorEstimate",
    "RocCurve",
    "run_trials",
    "roc_sweep",
    "empirical_distribution",
]

TWO_PI = 2.0 * math.pi

LOW_CONFIDENCE_TRIALS = 100


class Feature(Enum):
    PATHLOSS = "pathloss"
    CIR_MAGNITUDE = "cir-magnitude"
    CIR_PHASE = "cir-phase"


class Hypothesis(Enum):
    H0 = "h0"  # legitimate transmitter
    H1 = "h1"  # attacker


@dataclass(frozen=True)
class TrialPlan:
    """Everything one Monte-Carlo run depends on.

    refade_alice controls whether the legitimate channel is redrawn each
    transmission (True) or pinned to the enrollment realization (False);
    the closed-form magnitude false alarm corresponds to the pinned mode.
    ris=False swaps the reflected link for the direct-channel baseline.
    """

    n_trials: int
    master_seed: int
    feature: Feature
    epsilon: float
    scenario: Scenario
    profile: PhaseProfile
    refade_alice: bool = True
    ris: bool = True

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in 64 bits")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"epsilon must be finite and nonnegative, got {self.epsilon}")
        if self.feature is Feature.PATHLOSS:
            if not isinstance(self.profile, ScalarGradient):
                raise ValueError("pathloss feature requires a ScalarGradient profile")
        else:
            if not isinstance(self.profile, PerElement):
                raise ValueError("CIR features require a PerElement profile")
            if self.profile.phases.size != self.scenario.n_elements:
                raise ValueError(
                    f"profile has {self.profile.phases.size} phases, "
                    f"scenario has {self.scenario.n_elements} elements"
                )


@dataclass(frozen=True)
class ErrorEstimate:
    """Empirical probability with a binomial 95% half-width."""

    value: float
    half_width_95: float
    n_conditioning: int

    @classmethod
    def from_counts(cls, successes: int, n: int) -> "ErrorEstimate":
        if n == 0:
            return cls(value=math.nan, half_width_95=0.0, n_conditioning=0)
        v = successes / n
        return cls(value=v, half_width_95=1.96 * math.sqrt(v * (1.0 - v) / n), n_conditioning=n)

    @property
    def low_confidence(self) -> bool:
        return self.n_conditioning < LOW_CONFIDENCE_TRIALS


@dataclass(frozen=True)
class RocCurve:
    """Operating points (threshold, false alarm, detection) from one sample pass."""

    epsilons: np.ndarray
    pfa: np.ndarray
    pd: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.ndim != 1 or eps.size == 0:
            raise ValueError("epsilons must be a nonempty 1-D array")
        if np.any(np.diff(eps) <= 0):
            raise ValueError("epsilons must be strictly increasing")

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.epsilons.tolist(), self.pfa.tolist(), self.pd.tolist()))


# ---------------------------------------------------------------------------
# Counter-based trial generation
# ---------------------------------------------------------------------------


def _stride(plan: TrialPlan) -> int:
    """Uniform draws reserved per trial block (multiple of 4 for Philox advance)."""
    if plan.feature is Feature.PATHLOSS:
        return 4
    n = plan.scenario.n_elements if plan.ris else 1
    return 4 * n + 4


def _uniform_blocks(master_seed: int, stride: int, first_block: int, n_blocks: int) -> np.ndarray:
    bit_gen = Philox(key=master_seed)
    bit_gen.advance((first_block * stride) >> 2)  # advance unit = 4 doubles
    return Generator(bit_gen).random((n_blocks, stride))


def _box_muller(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rad = np.sqrt(-2.0 * np.log1p(-u))
    ang = TWO_PI * v
    return rad * np.cos(ang), rad * np.sin(ang)


def _cir_vectors(block: np.ndarray, n: int, sigma_g_sq: float):
    """Decode one block of uniforms into (h, g, noise_unit) complex vectors."""
    m = block.shape[0]
    pairs = block[:, 1 : 4 * n + 3].reshape(m, 2 * n + 1, 2)
    z0, z1 = _box_muller(pairs[:, :, 0], pairs[:, :, 1])
    z = np.empty((m, 4 * n + 2))
    z[:, 0::2] = z0
    z[:, 1::2] = z1
    h = (z[:, 0:n] + 1j * z[:, n : 2 * n]) / math.sqrt(2.0)
    g = math.sqrt(sigma_g_sq / 2.0) * (z[:, 2 * n : 3 * n] + 1j * z[:, 3 * n : 4 * n])
    noise_unit = (z[:, 4 * n] + 1j * z[:, 4 * n + 1]) / math.sqrt(2.0)
    return h, g, noise_unit


def _pathloss_pair(plan: TrialPlan) -> tuple[float, float]:
    sc = plan.scenario
    if plan.ris:
        grad = plan.profile.gradient
        return (ris_pathloss(sc, sc.alice_pos, grad), ris_pathloss(sc, sc.eve_pos, grad))
    return (fspl(sc.alice_pos, sc.bob_pos, sc), fspl(sc.eve_pos, sc.bob_pos, sc))


def _cir_fingerprint(plan: TrialPlan) -> complex:
    """Enrollment cascade from the reserved block 0."""
    sc = plan.scenario
    n = sc.n_elements if plan.ris else 1
    block = _uniform_blocks(plan.master_seed, _stride(plan), 0, 1)
    h, g, _ = _cir_vectors(block, n, sc.sigma_g_sq if plan.ris else 1.0)
    if plan.ris:
        phase = np.exp(1j * plan.profile.phases)
        return complex(np.sum(np.conj(h[0]) * phase * g[0]))
    return complex(h[0, 0])  # direct link: single CN(0,1) gain


def _trial_stats(plan: TrialPlan, lo: int, hi: int, force: Hypothesis | None = None):
    """Statistics and transmitter identity for trials [lo, hi)."""
    stride = _stride(plan)
    block = _uniform_blocks(plan.master_seed, stride, lo + 1, hi - lo)
    m = hi - lo
    if force is None:
        is_alice = block[:, 0] < 0.5
    else:
        is_alice = np.full(m, force is Hypothesis.H0)
    sigma_n = plan.scenario.noise_sigma

    if plan.feature is Feature.PATHLOSS:
        noise, _ = _box_muller(block[:, 1], block[:, 2])
        pl_a, pl_e = _pathloss_pair(plan)
        pl_true = np.where(is_alice, pl_a, pl_e)
        ts = np.abs(pl_true + sigma_n * noise - pl_a)
        return ts, is_alice

    sc = plan.scenario
    n = sc.n_elements if plan.ris else 1
    h, g, noise_unit = _cir_vectors(block, n, sc.sigma_g_sq if plan.ris else 1.0)
    if plan.ris:
        phase = np.exp(1j * plan.profile.phases)
        cascade = np.einsum("ij,j,ij->i", np.conj(h), phase, g)
    else:
        cascade = h[:, 0]
    gt = _cir_fingerprint(plan)
    if not plan.refade_alice:
        cascade = np.where(is_alice, gt, cascade)
    zeta = cascade + sigma_n * noise_unit
    if plan.feature is Feature.CIR_MAGNITUDE:
        ts = np.abs(zeta - gt)
    else:
        diff = np.abs(np.angle(zeta) - np.angle(gt))
        ts = np.where(diff > math.pi, TWO_PI - diff, diff)
    return ts, is_alice


def _default_chunk(plan: TrialPlan) -> int:
    return max(1024, (1 << 22) // _stride(plan))


def _ranges(n: int, chunk: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def _count_chunk(args) -> tuple[int, int, int, int]:
    plan, lo, hi = args
    ts, is_alice = _trial_stats(plan, lo, hi)
    accept = ts < plan.epsilon  # ties reject
    n0 = int(np.count_nonzero(is_alice))
    rejects_alice = int(np.count_nonzero(is_alice & ~accept))
    accepts_eve = int(np.count_nonzero(~is_alice & accept))
    return n0, hi - lo - n0, rejects_alice, accepts_eve


def _roc_chunk(args):
    plan, lo, hi, epsilons = args
    ts, is_alice = _trial_stats(plan, lo, hi)
    ts_a = np.sort(ts[is_alice])
    ts_e = np.sort(ts[~is_alice])
    # accepts = #(ts < eps), strict: ties reject
    acc_a = np.searchsorted(ts_a, epsilons, side="left")
    acc_e = np.searchsorted(ts_e, epsilons, side="left")
    return ts_a.size, ts_e.size, acc_a, acc_e


def _sample_chunk(args) -> np.ndarray:
    plan, lo, hi, force = args
    ts, _ = _trial_stats(plan, lo, hi, force=force)
    return ts


def _map_chunks(fn, tasks, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def run_trials(plan: TrialPlan, *, workers: int = 1,
               chunk_size: int | None = None) -> tuple[ErrorEstimate, ErrorEstimate]:
    """Empirical (false alarm, missed detection) under a uniform transmitter draw.

    Deterministic for fixed (master_seed, n_trials) for any chunk_size or
    worker count; merging is integer-count summation.
    """
    chunk = chunk_size or _default_chunk(plan)
    tasks = [(plan, lo, hi) for lo, hi in _ranges(plan.n_trials, chunk)]
    n0 = n1 = rejects_alice = accepts_eve = 0
    for c0, c1, rej, acc in _map_chunks(_count_chunk, tasks, workers):
        n0 += c0
        n1 += c1
        rejects_alice += rej
        accepts_eve += acc
    return (ErrorEstimate.from_counts(rejects_alice, n0),
            ErrorEstimate.from_counts(accepts_eve, n1))


def roc_sweep(plan: TrialPlan, epsilons, *, workers: int = 1,
              chunk_size: int | None = None) -> RocCurve:
    """Operating points for many thresholds from a single sample pass.

    All thresholds see the same per-trial statistics, so the resulting pfa
    and pd are each monotone along the curve. plan.epsilon is ignored.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("epsilons must be a nonempty 1-D sequence")
    if np.any(np.diff(eps) <= 0):
        raise ValueError("epsilons must be strictly increasing")
    chunk = chunk_size or _default_chunk(plan)
    tasks = [(plan, lo, hi, eps) for lo, hi in _ranges(plan.n_trials, chunk)]
    n0 = n1 = 0
    acc_a = np.zeros(eps.size, dtype=np.int64)
    acc_e = np.zeros(eps.size, dtype=np.int64)
    for c0, c1, a, e in _map_chunks(_roc_chunk, tasks, workers):
        n0 += c0
        n1 += c1
        acc_a += a
        acc_e += e
    with np.errstate(invalid="ignore", divide="ignore"):
        pfa = 1.0 - acc_a / n0 if n0 else np.full(eps.size, math.nan)
        pd = 1.0 - acc_e / n1 if n1 else np.full(eps.size, math.nan)
    return RocCurve(epsilons=eps, pfa=pfa, pd=pd)


def empirical_distribution(plan: TrialPlan, hypothesis: Hypothesis, n_samples: int, *,
                           workers: int = 1, chunk_size: int | None = None) -> np.ndarray:
    """Sorted draws of the test statistic under one fixed hypothesis.

    A CDF lookup on the result at the threshold gives the missed detection
    (H1) or one minus the false alarm (H0).
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    force = Hypothesis.H0 if hypothesis is Hypothesis.H0 else Hypothesis.H1
    chunk = chunk_size or _default_chunk(plan)
    tasks = [(plan, lo, hi, force) for lo, hi in _ranges(n_samples, chunk)]
    parts = _map_chunks(_sample_chunk, tasks, workers)
    return np.sort(np.concatenate(parts))
