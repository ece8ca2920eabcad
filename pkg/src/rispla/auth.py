"""Test statistics, decision rule, and closed-form error probabilities.

Every probability here is a pure function of linear-unit quantities; dB
conversion belongs to the CLI layer. The phase-feature and magnitude-feature
missed detections have no closed form and live in the Monte-Carlo engine.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .specfun import FoldedNormalParams, folded_normal_cdf, q_func, q_inv, rayleigh_ccdf

__all__ = [
    "Verdict",
    "Decision",
    "PathlossFingerprint",
    "CirFingerprint",
    "Fingerprint",
    "ts_pathloss",
    "ts_cir_magnitude",
    "ts_cir_phase",
    "decide",
    "pfa_pathloss",
    "threshold_for_pfa",
    "pmd_pathloss",
    "pfa_cir_magnitude",
    "rayleigh_sigma",
]


class Verdict(Enum):
    ACCEPT_H0 = "accept_h0"  # claim: legitimate transmitter
    REJECT_H0 = "reject_h0"  # claim: attacker


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    statistic: float
    threshold: float


@dataclass(frozen=True)
class PathlossFingerprint:
    """Enrolled pathloss of the legitimate transmitter (linear gain)."""

    pl_a: float

    def __post_init__(self):
        if self.pl_a <= 0.0:
            raise ValueError(f"pathloss fingerprint must be positive, got {self.pl_a}")


@dataclass(frozen=True)
class CirFingerprint:
    """Enrolled cascaded gain of the legitimate transmitter for the active phase profile."""

    ground_truth: complex


Fingerprint = PathlossFingerprint | CirFingerprint


def ts_pathloss(pl_hat: float, fp: PathlossFingerprint) -> float:
    """Distance |estimated pathloss - enrolled pathloss|."""
    return abs(pl_hat - fp.pl_a)


def ts_cir_magnitude(zeta: complex, fp: CirFingerprint) -> float:
    """Modulus of the complex CIR deviation from the enrolled gain."""
    return abs(zeta - fp.ground_truth)


def ts_cir_phase(zeta: complex, fp: CirFingerprint, wrap: bool = True) -> float:
    """Distance between the CIR phase and the enrolled phase.

    With wrap=True (default) the difference of principal arguments is folded
    into [0, pi] so the statistic is continuous across the branch cut; the
    literal unwrapped |difference| is kept behind wrap=False for comparison.
    """
    if zeta == 0 or fp.ground_truth == 0:
        raise ValueError("phase statistic undefined for zero-magnitude input")
    diff = abs(cmath.phase(zeta) - cmath.phase(fp.ground_truth))
    if wrap and diff > math.pi:
        diff = 2.0 * math.pi - diff
    return diff


def decide(ts: float, epsilon: float) -> Decision:
    """Threshold test; ties reject (classify as attacker)."""
    if ts < 0.0 or epsilon < 0.0:
        raise ValueError("statistic and threshold must be nonnegative")
    verdict = Verdict.ACCEPT_H0 if ts < epsilon else Verdict.REJECT_H0
    return Decision(verdict=verdict, statistic=ts, threshold=epsilon)


def pfa_pathloss(epsilon: float, sigma: float) -> float:
    """False-alarm probability 2 Q(epsilon / sigma) of the pathloss test."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    return 2.0 * q_func(epsilon / sigma)


def threshold_for_pfa(target_pfa: float, sigma: float) -> float:
    """Smallest threshold meeting a prescribed false-alarm probability."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (0.0 < target_pfa <= 1.0):
        raise ValueError(f"target_pfa must be in (0, 1], got {target_pfa}")
    if target_pfa == 1.0:
        return 0.0
    return sigma * q_inv(target_pfa / 2.0)


def pmd_pathloss(epsilon: float, sigma: float, pl_a: float, pl_e: float) -> float:
    """Missed-detection probability: folded-normal CDF at the threshold."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return folded_normal_cdf(epsilon, FoldedNormalParams(delta=pl_e - pl_a, sigma=sigma))


def pfa_cir_magnitude(epsilon: float, sigma: float) -> float:
    """False-alarm probability of the magnitude test: Rayleigh tail at the threshold."""
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    return rayleigh_ccdf(epsilon, sigma)


def rayleigh_sigma(noise_sigma: float) -> float:
    """Rayleigh scale of |n| for n ~ CN(0, noise_sigma^2): each part has variance
    noise_sigma^2 / 2, so the modulus is Rayleigh(noise_sigma / sqrt(2))."""
    return noise_sigma / math.sqrt(2.0)
