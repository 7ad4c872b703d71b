"""Hysteretic switching core of the emulator.

A comparator senses the voltage dropped across the input resistor plus the
device and compares it against a composite threshold

    v_th = v_th0 + v_offset + v_n - tri(i_dc)

built from the zero-flux setpoint, a Gaussian noise sample and the
triangular flux modulation.  While superconducting the device contributes
no resistance, so it switches when |i_sq| * r_in exceeds v_th; once
resistive it adds r_normal to the sensed drop and so retraps only below
v_th / (r_in + r_normal).  The single comparison therefore yields both the
switching current and the lower retrapping current, i.e. IV hysteresis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .triwave import TriConfig, tri

# The emulation is only valid while the shunt transistor stays out of
# saturation; larger |v_sq| is flagged, not clamped.
V_SQ_VALID_MAX = 0.5

# Noise substream ids, one per consumer.  Frozen: renumbering silently
# changes every seeded result.
HIST_STREAM = 1
PULSE_STREAM = 2
DC_IV_STREAM = 3
FIND_ISW_STREAM = 4
MODMAP_STREAM = 5
FEEDBACK_STREAM = 6
CLOSURE_STREAM = 7
SERVER_STREAM = 8


class Phase(Enum):
    SUPERCONDUCTING = "superconducting"
    RESISTIVE = "resistive"


@dataclass(frozen=True)
class EmulatorConfig:
    """Circuit constants of the emulator.

    r_in:        input series resistance, ohms.
    r_normal:    resistive-state resistance (device parallel shunt), ohms.
    v_th0:       zero-flux comparator threshold, volts.
    v_offset:    comparator input offset, volts.
    noise_sigma: standard deviation of the threshold noise source, volts.
    tri_cfg:     flux-modulation chain constants.
    """

    r_in: float = 1000.0
    r_normal: float = 225.0
    v_th0: float = 0.090
    v_offset: float = 0.0
    noise_sigma: float = 0.0
    tri_cfg: TriConfig = field(default_factory=TriConfig)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_in) and self.r_in > 0):
            raise ValueError(f"r_in must be positive, got {self.r_in!r}")
        if not (math.isfinite(self.r_normal) and self.r_normal >= 0):
            raise ValueError(f"r_normal must be >= 0, got {self.r_normal!r}")
        if not (math.isfinite(self.v_th0) and self.v_th0 > 0):
            raise ValueError(f"v_th0 must be positive, got {self.v_th0!r}")
        if not math.isfinite(self.v_offset):
            raise ValueError(f"v_offset must be finite, got {self.v_offset!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        # Keep the mean threshold positive even at the modulation minimum.
        if not self.v_th0 + self.v_offset > self.tri_cfg.mod_depth:
            raise ValueError(
                "v_th0 + v_offset must exceed mod_depth "
                f"({self.v_th0 + self.v_offset!r} <= {self.tri_cfg.mod_depth!r})"
            )


@dataclass(frozen=True)
class DeviceState:
    """Switching-machine state: current phase, the threshold sampled on the
    last step, and whether that step drove the shunt into saturation."""

    phase: Phase = Phase.SUPERCONDUCTING
    last_v_th: float = 0.0
    saturated: bool = False


@dataclass(frozen=True)
class NoiseSource:
    """Deterministic Gaussian threshold noise with keyed substreams.

    ``draws(n, *key)`` opens the independent substream identified by
    (seed, *key) and returns its first n samples.  Draw j of a given
    substream is a pure function of (seed, key, j), so results do not
    depend on the order in which substreams are consumed; protocols key
    their substreams by (stream id, grid-point index) and use the draw
    index as the trial index.
    """

    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")

    def substream(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, *key]))

    def draws(self, n: int, *key: int) -> np.ndarray:
        if n < 1:
            raise ValueError(f"need at least one draw, got n={n!r}")
        return self.substream(*key).normal(0.0, self.sigma, n)


def threshold(cfg: EmulatorConfig, i_dc: float, v_n: float) -> float:
    """Composite comparator threshold for one noise sample, volts."""
    if not math.isfinite(v_n):
        raise ValueError(f"v_n must be finite, got {v_n!r}")
    return cfg.v_th0 + cfg.v_offset + v_n - tri(i_dc, cfg.tri_cfg)


def mean_threshold(cfg: EmulatorConfig, i_dc: float) -> float:
    """Noise-free threshold at a bias point, volts."""
    return threshold(cfg, i_dc, 0.0)


def device_resistance(cfg: EmulatorConfig, phase: Phase) -> float:
    return 0.0 if phase is Phase.SUPERCONDUCTING else cfg.r_normal


def step(
    state: DeviceState,
    cfg: EmulatorConfig,
    i_sq: float,
    i_dc: float,
    v_n: float,
) -> tuple[DeviceState, float]:
    """Advance the switching machine by one comparator evaluation.

    The comparator sees |i_sq| * (r_in + R(state)), where R is zero in the
    superconducting phase and r_normal in the resistive phase; the new
    phase is resistive iff that drop exceeds the sampled threshold.
    Returns the new state and the device voltage i_sq * R(new phase).
    """
    if not math.isfinite(i_sq):
        raise ValueError(f"i_sq must be finite, got {i_sq!r}")
    v_th = threshold(cfg, i_dc, v_n)
    sensed = abs(i_sq) * (cfg.r_in + device_resistance(cfg, state.phase))
    phase = Phase.RESISTIVE if sensed > v_th else Phase.SUPERCONDUCTING
    v_sq = i_sq * device_resistance(cfg, phase)
    return DeviceState(phase, v_th, abs(v_sq) > V_SQ_VALID_MAX), v_sq


def switching_current(cfg: EmulatorConfig, v_th: float) -> float:
    """Current above which a superconducting device switches, v_th / r_in."""
    return v_th / cfg.r_in


def retrap_current(cfg: EmulatorConfig, v_th: float) -> float:
    """Current below which a resistive device returns to the
    superconducting state, v_th / (r_in + r_normal)."""
    return v_th / (cfg.r_in + cfg.r_normal)


@dataclass(frozen=True)
class VthHistogram:
    """Binned threshold samples plus their summary statistics."""

    counts: np.ndarray
    bin_edges: np.ndarray
    mean: float
    std: float
    n_samples: int


def sample_vth_histogram(
    cfg: EmulatorConfig,
    i_dc: float,
    n: int,
    noise: NoiseSource,
    bins: int = 50,
) -> VthHistogram:
    """Histogram of n independent threshold samples at a fixed bias point.

    The sample mean estimates v_th0 + v_offset - tri(i_dc) and the sample
    standard deviation estimates the noise sigma.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got n={n!r}")
    samples = mean_threshold(cfg, i_dc) + noise.draws(n, HIST_STREAM)
    counts, edges = np.histogram(samples, bins=bins)
    std = float(np.std(samples, ddof=1)) if n > 1 else 0.0
    return VthHistogram(counts, edges, float(np.mean(samples)), std, n)
