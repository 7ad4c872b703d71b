"""Ideal-SQUID reference mathematics.

The textbook two-junction interferometer switches at 2 * i_c * |cos(pi *
flux)| with flux in units of the flux quantum.  A truncated cosine series
mirrors how an analog multiplier chain would synthesize that shape, and
``sinusoidal_tri_mode`` packages it as a drop-in smooth alternative to the
triangular modulator for tunnel-junction-like modulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .triwave import TriConfig


@dataclass(frozen=True)
class IdealSquidParams:
    """Single-junction critical current and applied flux in flux quanta."""

    i_c: float
    flux: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.i_c) and self.i_c > 0):
            raise ValueError(f"i_c must be positive, got {self.i_c!r}")
        if not math.isfinite(self.flux):
            raise ValueError(f"flux must be finite, got {self.flux!r}")


def ideal_isw(p: IdealSquidParams) -> float:
    """Switching current of an ideal symmetric two-junction loop, amperes."""
    return 2.0 * p.i_c * abs(math.cos(math.pi * p.flux))


def taylor_cos(x, n_terms: int = 9):
    """Cosine series truncated to n_terms, evaluated by term recursion.

    term_{k+1} = -term_k * x^2 / ((2k+1)(2k+2)) avoids explicit powers and
    factorials.  Accepts scalars or arrays; nine terms keep the error below
    2e-6 on [-pi, pi].
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms!r}")
    arr = np.asarray(x, dtype=float)
    x2 = arr * arr
    term = np.ones_like(arr)
    total = np.ones_like(arr)
    for k in range(1, n_terms):
        term = term * (-x2) / ((2 * k - 1) * (2 * k))
        total = total + term
    return float(total) if np.isscalar(x) else total


def sinusoidal_tri_mode(i_dc: float, cfg: TriConfig, n_terms: int = 9) -> float:
    """Smooth replacement for the triangular modulator.

    Output is mod_depth * (1 - |taylor_cos(pi * v / period_v)|) with
    v = |g_dc * i_dc| clamped at the ADC full scale and period_v =
    v_fullscale / 2, the same period as the triangular mode.  Zeros fall at
    integer multiples of the period and peaks halfway between, exactly the
    bias points where the triangular mode reaches 0 and mod_depth.  The
    series argument is reduced mod pi into [0, pi) before evaluation, since
    the truncated series is only accurate near the origin.
    """
    if not math.isfinite(i_dc):
        raise ValueError(f"i_dc must be finite, got {i_dc!r}")
    v = min(abs(cfg.g_dc * i_dc), cfg.v_fullscale)
    x = math.fmod(math.pi * v / (cfg.v_fullscale / 2), math.pi)
    return cfg.mod_depth * (1.0 - abs(taylor_cos(x, n_terms)))
