"""Mixed-domain linear-to-triangular converter.

Bit-exact model of the flux-modulation chain: an active rectifier feeds an
8-bit ADC, six XOR gates conditioned on bit D6 remap the low six bits so the
DAC output folds back on itself, and an output divider scales the resulting
triangle wave down to SQUID-like modulation depths (tens of mV).

The bias current I_DC is first turned into a voltage by a transimpedance
``g_dc``; with the defaults, sweeping I_DC over -2 mA..+2 mA spans the ADC
full scale twice per polarity and the output traces four triangle cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

ADC_BITS = 8
ADC_MAX_CODE = (1 << ADC_BITS) - 1   # 255
DAC_BITS = 6
DAC_MAX_CODE = (1 << DAC_BITS) - 1   # 63


@dataclass(frozen=True)
class TriConfig:
    """Constants of the modulation chain.

    v_fullscale: ADC full-scale input, volts.
    mod_depth:   peak triangle amplitude after the output divider, volts.
                 Folds the R2R ladder reference and the divider ratio into
                 one number; the output peaks at exactly ``mod_depth``.
    g_dc:        transimpedance from bias current to ADC input, V/A.
                 The default maps 2 mA to the 5 V full scale.
    """

    v_fullscale: float = 5.0
    mod_depth: float = 0.040
    g_dc: float = 2500.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_fullscale) and self.v_fullscale > 0):
            raise ValueError(f"v_fullscale must be positive, got {self.v_fullscale!r}")
        if not (math.isfinite(self.mod_depth) and self.mod_depth >= 0):
            raise ValueError(f"mod_depth must be >= 0, got {self.mod_depth!r}")
        if not (math.isfinite(self.g_dc) and self.g_dc > 0):
            raise ValueError(f"g_dc must be positive, got {self.g_dc!r}")


@dataclass(frozen=True)
class AdcCode:
    """One 8-bit conversion; bit fields derive from the code so they can
    never disagree with it."""

    code: int

    def __post_init__(self) -> None:
        if not 0 <= self.code <= ADC_MAX_CODE:
            raise ValueError(f"ADC code out of range: {self.code!r}")

    @property
    def d7(self) -> int:
        return (self.code >> 7) & 1

    @property
    def d6(self) -> int:
        return (self.code >> 6) & 1

    @property
    def low6(self) -> int:
        return self.code & DAC_MAX_CODE


def digitize(v_dc: float, cfg: TriConfig) -> AdcCode:
    """Rectify and digitize a bias voltage.

    The free-running converter truncates, so the code is
    floor(256 * |v_dc| / v_fullscale), saturating at the top code.
    """
    if not math.isfinite(v_dc):
        raise ValueError(f"v_dc must be finite, got {v_dc!r}")
    code = int((1 << ADC_BITS) * abs(v_dc) / cfg.v_fullscale)
    return AdcCode(min(code, ADC_MAX_CODE))


def remap(adc: AdcCode) -> int:
    """XOR the low six bits with D6.

    D6 selects the slope sign: codes count up while D6=0 and are
    complemented while D6=1, so consecutive ADC codes produce a continuous
    6-bit triangle.
    """
    return adc.low6 ^ (DAC_MAX_CODE if adc.d6 else 0)


def tri(i_dc: float, cfg: TriConfig) -> float:
    """Triangular flux-modulation voltage for a bias current.

    Output lies in [0, mod_depth] and takes at most 64 distinct values.
    Symmetric in i_dc (input rectifier); beyond the ADC full scale the code
    saturates instead of wrapping.
    """
    return cfg.mod_depth * remap(digitize(cfg.g_dc * i_dc, cfg)) / DAC_MAX_CODE


def modulation_period(cfg: TriConfig) -> float:
    """Period of ``tri`` along the bias-current axis, amperes.

    Two triangle cycles fit in the ADC full scale, so one period covers
    half the full-scale current.
    """
    return cfg.v_fullscale / 2 / cfg.g_dc


def code_step(cfg: TriConfig) -> float:
    """Bias-current width of one ADC code bin, amperes."""
    return cfg.v_fullscale / (1 << ADC_BITS) / cfg.g_dc
