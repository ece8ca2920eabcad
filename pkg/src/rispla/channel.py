"""Physical model: reflection geometry, pathloss, and cascaded channel generation.

Coordinates are metres, angles radians, gains and powers linear. The panel
reflects transmitter signals toward the receiver; the direct transmitter to
receiver path is assumed blocked whenever the panel is in use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "GeometryError",
    "EvanescentError",
    "ScenarioFormatError",
    "Scenario",
    "ScalarGradient",
    "PerElement",
    "PhaseProfile",
    "ChannelRealization",
    "load_scenario",
    "incidence_angle",
    "reflection_angle",
    "ris_pathloss",
    "fspl",
    "sample_cir",
    "cascaded_gain",
    "add_noise",
]

SPEED_OF_LIGHT = 299_792_458.0

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Degenerate node geometry (coincident points, transmitter not facing the panel)."""


class EvanescentError(ValueError):
    """No propagating reflected ray for the requested phase gradient."""


class ScenarioFormatError(ValueError):
    """Malformed scenario file; message names the offending line."""


def _as_point(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Scenario:
    """Full physical configuration of one authentication setup."""

    alice_pos: np.ndarray
    eve_pos: np.ndarray
    bob_pos: np.ndarray
    ris_pos: np.ndarray
    ris_normal: np.ndarray
    element_a: float
    element_b: float
    n_elements: int
    frequency_hz: float
    tx_gain: float
    rx_gain: float
    tx_power_w: float
    refractive_index: float = 1.0
    lq_db: float = 20.0
    sigma_g_sq: float = 1.0  # panel-to-receiver fading variance, decoupled from noise

    def __post_init__(self):
        for name in ("alice_pos", "eve_pos", "bob_pos", "ris_pos", "ris_normal"):
            object.__setattr__(self, name, _as_point(getattr(self, name), name))
        if abs(np.linalg.norm(self.ris_normal) - 1.0) > 1e-9:
            raise ValueError("ris_normal must have unit norm within 1e-9")
        for name in ("alice_pos", "eve_pos", "bob_pos"):
            if np.array_equal(getattr(self, name), self.ris_pos):
                raise ValueError(f"{name} must be distinct from ris_pos")
        if self.element_a <= 0 or self.element_b <= 0:
            raise ValueError("element dimensions must be positive")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements}")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        for name in ("frequency_hz", "tx_gain", "rx_gain", "tx_power_w",
                     "refractive_index", "sigma_g_sq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def noise_variance(self) -> float:
        """Noise power sigma^2 from the transmit-to-noise power ratio (lq_db)."""
        return self.tx_power_w * 10.0 ** (-self.lq_db / 10.0)

    @property
    def noise_sigma(self) -> float:
        return math.sqrt(self.noise_variance)


@dataclass(frozen=True)
class ScalarGradient:
    """Phase-discontinuity gradient d(phase)/dx in rad/m, for the pathloss feature."""

    gradient: float


@dataclass(frozen=True)
class PerElement:
    """One phase per panel element, stored in [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self):
        arr = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        if arr.ndim != 1:
            raise ValueError("phases must be a 1-D vector")
        arr.flags.writeable = False
        object.__setattr__(self, "phases", arr)


PhaseProfile = ScalarGradient | PerElement


@dataclass(frozen=True)
class ChannelRealization:
    """Complex gains for one transmission: transmitter->panel h and panel->receiver g."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if self.h.shape != self.g.shape or self.h.ndim != 1:
            raise ValueError("h and g must be 1-D vectors of equal length")


_SCENARIO_VECTOR_KEYS = ("alice_pos", "eve_pos", "bob_pos", "ris_pos", "ris_normal")
_SCENARIO_SCALAR_KEYS = ("element_a", "element_b", "n_elements", "frequency_hz",
                         "tx_gain", "rx_gain", "tx_power_w", "refractive_index",
                         "lq_db", "sigma_g_sq")
_SCENARIO_OPTIONAL = frozenset({"sigma_g_sq", "refractive_index", "lq_db"})


def load_scenario(path) -> Scenario:
    """Parse a flat key=value scenario file (positions as comma-separated triples)."""
    text = Path(path).read_text()
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in _SCENARIO_VECTOR_KEYS:
            parts = [p.strip() for p in val.split(",")]
            if len(parts) != 3:
                raise ScenarioFormatError(f"{path}:{lineno}: {key} needs 3 components")
            try:
                values[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise ScenarioFormatError(f"{path}:{lineno}: non-numeric component in {key}") from None
        elif key in _SCENARIO_SCALAR_KEYS:
            try:
                values[key] = int(val) if key == "n_elements" else float(val)
            except ValueError:
                raise ScenarioFormatError(f"{path}:{lineno}: non-numeric value for {key}") from None
        else:
            raise ScenarioFormatError(f"{path}:{lineno}: unknown key {key!r}")
    missing = [k for k in (*_SCENARIO_VECTOR_KEYS, *_SCENARIO_SCALAR_KEYS)
               if k not in values and k not in _SCENARIO_OPTIONAL]
    if missing:
        raise ScenarioFormatError(f"{path}: missing keys: {', '.join(missing)}")
    try:
        return Scenario(**values)
    except ValueError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc


def incidence_angle(tx_pos, scenario: Scenario) -> float:
    """Angle in [0, pi/2) between the transmitter ray and the panel normal."""
    v = np.asarray(tx_pos, dtype=float) - scenario.ris_pos
    d = np.linalg.norm(v)
    if d == 0.0:
        raise GeometryError("transmitter coincides with the panel position")
    cos_i = float(np.dot(v, scenario.ris_normal)) / d
    cos_i = min(1.0, max(-1.0, cos_i))
    if cos_i <= 1e-12:
        raise GeometryError("transmitter lies in or behind the panel plane")
    return math.acos(cos_i)


def reflection_angle(theta_i: float, gradient: float, scenario: Scenario) -> float:
    """Reflected-ray angle for a phase-discontinuity gradient (principal arcsine branch)."""
    s = math.sin(theta_i) + scenario.wavelength * gradient / (TWO_PI * scenario.refractive_index)
    if abs(s) > 1.0:
        raise EvanescentError(
            f"no propagating reflection: |sin(theta_i) + lambda*gradient/(2 pi n1)| = {abs(s):.6g} > 1"
        )
    return math.asin(s)


def _sinc_sq(u: float) -> float:
    # removable singularity at u = 0: (sin u / u)^2 = 1 - u^2/3 + O(u^4)
    if abs(u) < 1e-8:
        return 1.0 - u * u / 3.0
    s = math.sin(u) / u
    return s * s


def ris_pathloss(scenario: Scenario, tx_pos, gradient: float) -> float:
    """Single-element reflection pathloss (linear power gain) from tx via the panel to Bob."""
    tx = np.asarray(tx_pos, dtype=float)
    d_i = float(np.linalg.norm(tx - scenario.ris_pos))
    r = float(np.linalg.norm(scenario.bob_pos - scenario.ris_pos))
    theta_i = incidence_angle(tx, scenario)
    theta_r = reflection_angle(theta_i, gradient, scenario)
    lam = scenario.wavelength
    u = (math.pi * scenario.element_b / lam) * (math.sin(theta_i) - math.sin(theta_r))
    ab = scenario.element_a * scenario.element_b
    return (
        scenario.tx_gain * scenario.rx_gain / (4.0 * math.pi) ** 2
        * (ab / (d_i * r)) ** 2
        * math.cos(theta_i) ** 2
        * _sinc_sq(u)
    )


def fspl(tx_pos, rx_pos, scenario: Scenario) -> float:
    """Friis free-space gain Gt*Gr*(lambda / 4 pi d)^2 for the direct link."""
    d = float(np.linalg.norm(np.asarray(tx_pos, dtype=float) - np.asarray(rx_pos, dtype=float)))
    if d == 0.0:
        raise GeometryError("coincident transmitter and receiver positions")
    return scenario.tx_gain * scenario.rx_gain * (scenario.wavelength / (4.0 * math.pi * d)) ** 2


def sample_cir(scenario: Scenario, rng: np.random.Generator) -> ChannelRealization:
    """Draw one fading realization: h ~ CN(0,1) per element, g ~ CN(0, sigma_g_sq)."""
    n = scenario.n_elements
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    g_scale = math.sqrt(scenario.sigma_g_sq / 2.0)
    g = g_scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ChannelRealization(h=h, g=g)


def cascaded_gain(real: ChannelRealization, profile: PerElement) -> complex:
    """Scalar baseband gain sum_n conj(h_n) * exp(j psi_n) * g_n through the panel."""
    if not isinstance(profile, PerElement):
        raise ValueError("cascaded_gain requires a per-element phase profile")
    if profile.phases.shape != real.h.shape:
        raise ValueError(
            f"profile has {profile.phases.size} phases but realization has {real.h.size} elements"
        )
    return complex(np.sum(np.conj(real.h) * np.exp(1j * profile.phases) * real.g))


def add_noise(value, sigma: float, rng: np.random.Generator):
    """Additive Gaussian noise: N(0, sigma^2) for reals, CN(0, sigma^2) for complex."""
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    arr = np.asarray(value)
    if np.iscomplexobj(arr):
        scale = sigma / math.sqrt(2.0)  # sigma^2 split evenly between parts
        noise = scale * (rng.standard_normal(arr.shape) + 1j * rng.standard_normal(arr.shape))
    else:
        noise = sigma * rng.standard_normal(arr.shape)
    out = arr + noise
    return out if arr.shape else out.item()
