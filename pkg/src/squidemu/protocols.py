"""Measurement protocols: pulsed trials, IV sweeps, S-curves, modulation
maps, noise calibration and the flux feedback loop.

Noise model: one Gaussian threshold draw per pulse trial and per DC-ramp
point (sample-and-hold).  Under that model the expected switching
probability at pulse amplitude i is exactly the normal CDF

    P_sw(i) = Phi((|i| * r_in - mu_th) / sigma),  mu_th = v_th0 + v_offset - tri(i_dc)

which makes every protocol here testable against closed-form predictions.

Every protocol output is a pure function of (config, plan, seed): trials
take their noise from substreams keyed by (seed, stream id, grid-point
index), with the trial number as the draw index, so results are identical
no matter how the work is ordered or distributed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .device import (
    CLOSURE_STREAM,
    DC_IV_STREAM,
    FEEDBACK_STREAM,
    FIND_ISW_STREAM,
    MODMAP_STREAM,
    PULSE_STREAM,
    DeviceState,
    EmulatorConfig,
    NoiseSource,
    Phase,
    mean_threshold,
    step,
    switching_current,
)
from .triwave import modulation_period, tri


class BracketError(RuntimeError):
    """No current interval bracketing the target switching probability."""


class CalibrationError(RuntimeError):
    """Noise calibration failed to close the hysteresis within its caps."""


@dataclass(frozen=True)
class SweepPlan:
    """Ordered current list walked while carrying device state, plus the
    bias point, repetition count and noise seed."""

    currents: np.ndarray
    i_dc: float = 0.0
    n_avg: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        currents = np.asarray(self.currents, dtype=float)
        if currents.ndim != 1 or currents.size == 0:
            raise ValueError("currents must be a non-empty 1-d sequence")
        if self.n_avg < 1:
            raise ValueError(f"n_avg must be >= 1, got {self.n_avg!r}")
        object.__setattr__(self, "currents", currents)

    @classmethod
    def up_down(
        cls,
        i_max: float,
        n_points: int,
        *,
        i_min: float = 0.0,
        i_dc: float = 0.0,
        n_avg: int = 1,
        seed: int = 0,
    ) -> "SweepPlan":
        """Symmetric ramp: i_min -> i_max over n_points points, then back."""
        up = np.linspace(i_min, i_max, n_points)
        return cls(np.concatenate([up, up[::-1]]), i_dc=i_dc, n_avg=n_avg, seed=seed)


@dataclass(frozen=True)
class SweepRecord:
    """Averaged sweep result: mean device voltage and the fraction of
    repetitions found resistive, per current point."""

    currents: np.ndarray
    mean_v: np.ndarray
    switch_frac: np.ndarray

    def __post_init__(self) -> None:
        if not len(self.currents) == len(self.mean_v) == len(self.switch_frac):
            raise ValueError("currents, mean_v and switch_frac must have equal length")


def split_up_down(record: SweepRecord) -> tuple[SweepRecord, SweepRecord]:
    """Split an up-then-down record into branches aligned on the up grid.

    The down branch is reversed into ascending-current order so the two
    records can be compared point by point.
    """
    n = len(record.currents)
    if n % 2:
        raise ValueError("record does not hold an up-down sweep (odd length)")
    h = n // 2
    up = SweepRecord(record.currents[:h], record.mean_v[:h], record.switch_frac[:h])
    down = SweepRecord(
        record.currents[h:][::-1], record.mean_v[h:][::-1], record.switch_frac[h:][::-1]
    )
    if not np.array_equal(up.currents, down.currents):
        raise ValueError("up and down branches do not share a current grid")
    return up, down


@dataclass(frozen=True)
class SCurve:
    """Switching probability versus pulse amplitude."""

    currents: np.ndarray
    p_sw: np.ndarray
    n_pulses: int

    def __post_init__(self) -> None:
        if len(self.currents) != len(self.p_sw):
            raise ValueError("currents and p_sw must have equal length")


@dataclass(frozen=True)
class ModulationMap:
    """Switching probability on a (bias current, pulse amplitude) grid;
    p_sw has shape (len(i_dc_values), len(i_sq_values))."""

    i_dc_values: np.ndarray
    i_sq_values: np.ndarray
    p_sw: np.ndarray

    def __post_init__(self) -> None:
        if self.p_sw.shape != (len(self.i_dc_values), len(self.i_sq_values)):
            raise ValueError("p_sw grid shape does not match its axes")


@dataclass(frozen=True)
class FeedbackTrace:
    """Per-iteration record of the flux feedback loop.  ``escaped`` marks a
    run truncated because i_dc left the configured branch interval."""

    iterations: np.ndarray
    p_sw: np.ndarray
    i_dc: np.ndarray
    disturbance: np.ndarray
    escaped: bool = False
    escape_iteration: int | None = None


def pulse_trial(
    device: DeviceState,
    cfg: EmulatorConfig,
    i_sq: float,
    i_dc: float,
    v_n: float,
) -> tuple[bool, float]:
    """One current pulse on a reset device.

    Returns whether it switched and the plateau voltage (i_sq * r_normal if
    switched, else 0).  The device must be superconducting: pulses are
    independent trials with no memory.
    """
    if device.phase is not Phase.SUPERCONDUCTING:
        raise ValueError("device must be reset to the superconducting state before a pulse trial")
    new_state, v_sq = step(device, cfg, i_sq, i_dc, v_n)
    return new_state.phase is Phase.RESISTIVE, v_sq


def _switch_fractions(
    cfg: EmulatorConfig,
    currents: np.ndarray,
    i_dc: float,
    n_pulses: int,
    noise: NoiseSource,
    stream_id: int,
) -> np.ndarray:
    """Fraction of independent pulses that switch, per amplitude."""
    mu = mean_threshold(cfg, i_dc)
    frac = np.empty(len(currents))
    for k, i in enumerate(currents):
        v_n = noise.draws(n_pulses, stream_id, k)
        frac[k] = np.count_nonzero(abs(i) * cfg.r_in > mu + v_n) / n_pulses
    return frac


def s_curve(
    cfg: EmulatorConfig,
    currents,
    i_dc: float = 0.0,
    n_pulses: int = 1000,
    seed: int = 0,
) -> SCurve:
    """Cumulative switching distribution over a pulse-amplitude grid."""
    currents = np.asarray(currents, dtype=float)
    if currents.size == 0:
        raise ValueError("currents grid must be non-empty")
    if n_pulses < 1:
        raise ValueError(f"n_pulses must be >= 1, got {n_pulses!r}")
    noise = NoiseSource(cfg.noise_sigma, seed)
    p = _switch_fractions(cfg, currents, i_dc, n_pulses, noise, PULSE_STREAM)
    return SCurve(currents, p, n_pulses)


def pulsed_iv(
    cfg: EmulatorConfig,
    currents,
    i_dc: float = 0.0,
    n_pulses: int = 1000,
    seed: int = 0,
) -> SweepRecord:
    """Pulsed IV curve: mean plateau voltage per amplitude.

    Shares trial substreams with ``s_curve``, so for equal arguments
    mean_v = p_sw * i * r_normal holds exactly, not just in expectation.
    There is no retrapping branch: every pulse starts from a reset device.
    """
    curve = s_curve(cfg, currents, i_dc, n_pulses, seed)
    return SweepRecord(curve.currents, curve.p_sw * curve.currents * cfg.r_normal, curve.p_sw)


def dc_iv(plan: SweepPlan, cfg: EmulatorConfig) -> SweepRecord:
    """Averaged DC IV sweep.

    Each repetition starts superconducting and walks the current list in
    order, carrying the device state from point to point (this is what
    produces hysteresis on an up-down plan); every point takes a fresh
    noise draw.  Results are averaged over plan.n_avg repetitions.
    """
    noise = NoiseSource(cfg.noise_sigma, plan.seed)
    mu = mean_threshold(cfg, plan.i_dc)
    resistive = np.zeros(plan.n_avg, dtype=bool)
    mean_v = np.empty(len(plan.currents))
    frac = np.empty(len(plan.currents))
    for p, i in enumerate(plan.currents):
        v_th = mu + noise.draws(plan.n_avg, DC_IV_STREAM, p)
        sensed = abs(i) * (cfg.r_in + resistive * cfg.r_normal)
        resistive = sensed > v_th
        mean_v[p] = i * cfg.r_normal * np.mean(resistive)
        frac[p] = np.mean(resistive)
    return SweepRecord(np.array(plan.currents), mean_v, frac)


def find_isw(
    cfg: EmulatorConfig,
    i_dc: float = 0.0,
    target: float = 0.5,
    n_pulses: int = 1000,
    tolerance: float = 1e-7,
    seed: int = 0,
    i_min: float = 0.0,
    i_max: float | None = None,
) -> float:
    """Bisect for the pulse amplitude giving P_sw = target.

    The bracket [i_min, i_max] must satisfy p(i_min) < target <= p(i_max);
    otherwise a BracketError is raised.  Bisection narrows the bracket to
    ``tolerance`` and returns its midpoint.  With sigma = 0 this recovers
    the deterministic switching current to within the tolerance.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target probability must be in (0, 1), got {target!r}")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance!r}")
    if i_max is None:
        i_max = 2.0 * (cfg.v_th0 + cfg.v_offset) / cfg.r_in
    noise = NoiseSource(cfg.noise_sigma, seed)
    mu = mean_threshold(cfg, i_dc)

    def p_at(i: float, evaluation: int) -> float:
        v_n = noise.draws(n_pulses, FIND_ISW_STREAM, evaluation)
        return np.count_nonzero(abs(i) * cfg.r_in > mu + v_n) / n_pulses

    lo, hi = i_min, i_max
    p_lo, p_hi = p_at(lo, 0), p_at(hi, 1)
    if not (p_lo < target <= p_hi):
        raise BracketError(
            f"no bracket: p({lo!r}) = {p_lo}, p({hi!r}) = {p_hi} around target {target}"
        )
    evaluation = 2
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if p_at(mid, evaluation) >= target:
            hi = mid
        else:
            lo = mid
        evaluation += 1
    return 0.5 * (lo + hi)


def modulation_map(
    cfg: EmulatorConfig,
    i_dc_values,
    i_sq_values,
    n_pulses: int = 1000,
    seed: int = 0,
) -> ModulationMap:
    """Switching probability over a (bias, amplitude) grid.

    With defaults the P_sw = 50% contour is periodic in i_dc with the
    modulation period (1 mA), tracing four cycles over +/-2 mA, and never
    reaches zero amplitude because the triangle depth stays below the
    zero-flux threshold.
    """
    i_dc_values = np.asarray(i_dc_values, dtype=float)
    i_sq_values = np.asarray(i_sq_values, dtype=float)
    if i_dc_values.size == 0 or i_sq_values.size == 0:
        raise ValueError("grids must be non-empty")
    if n_pulses < 1:
        raise ValueError(f"n_pulses must be >= 1, got {n_pulses!r}")
    noise = NoiseSource(cfg.noise_sigma, seed)
    p = np.empty((len(i_dc_values), len(i_sq_values)))
    for r, i_dc in enumerate(i_dc_values):
        mu = mean_threshold(cfg, i_dc)
        for c, i_sq in enumerate(i_sq_values):
            v_n = noise.draws(n_pulses, MODMAP_STREAM, r, c)
            p[r, c] = np.count_nonzero(abs(i_sq) * cfg.r_in > mu + v_n) / n_pulses
    return ModulationMap(i_dc_values, i_sq_values, p)


def fifty_percent_contour(m: ModulationMap) -> np.ndarray:
    """Smallest grid amplitude with p_sw >= 0.5 per bias point (nan where
    the row never crosses)."""
    contour = np.full(len(m.i_dc_values), np.nan)
    for r in range(len(m.i_dc_values)):
        above = np.nonzero(m.p_sw[r] >= 0.5)[0]
        if above.size:
            contour[r] = m.i_sq_values[above[0]]
    return contour


def branch_closure_gap(cfg: EmulatorConfig, plan: SweepPlan) -> float:
    """Largest up/down disagreement of the averaged DC IV branches, volts.

    The plan must be an up-down ramp.  Up and down passes of a repetition
    reuse the same threshold draw at the same current level (common random
    numbers): both branch means keep the exact dc_iv distribution, but the
    Monte Carlo noise common to the two visits cancels in the difference,
    leaving genuine hysteresis as the dominant term.  Used as the closure
    metric by ``calibrate_noise_levels``.
    """
    n = len(plan.currents)
    if n % 2:
        raise ValueError("plan does not hold an up-down sweep (odd length)")
    h = n // 2
    up_currents = plan.currents[:h]
    if not np.array_equal(up_currents, plan.currents[h:][::-1]):
        raise ValueError("up and down ramps do not share a current grid")
    noise = NoiseSource(cfg.noise_sigma, plan.seed)
    mu = mean_threshold(cfg, plan.i_dc)
    v_th = [mu + noise.draws(plan.n_avg, CLOSURE_STREAM, p) for p in range(h)]
    resistive = np.zeros(plan.n_avg, dtype=bool)
    up_v = np.empty(h)
    for p in range(h):
        i = up_currents[p]
        resistive = abs(i) * (cfg.r_in + resistive * cfg.r_normal) > v_th[p]
        up_v[p] = i * cfg.r_normal * np.mean(resistive)
    down_v = np.empty(h)
    for p in range(h - 1, -1, -1):
        i = up_currents[p]
        resistive = abs(i) * (cfg.r_in + resistive * cfg.r_normal) > v_th[p]
        down_v[p] = i * cfg.r_normal * np.mean(resistive)
    return float(np.max(np.abs(up_v - down_v)))


def calibrate_noise_levels(
    cfg: EmulatorConfig,
    plan: SweepPlan,
    *,
    closure_tol: float | None = None,
    sigma_resolution: float = 2e-4,
    max_doublings: int = 20,
) -> tuple[float, float]:
    """Find (sigma_large, sigma_medium) for the given ramp plan.

    sigma_large is the smallest noise sigma, to within ``sigma_resolution``,
    at which the averaged up/down DC IV branches agree everywhere within
    ``closure_tol`` (default 2% of the zero-flux plateau voltage
    i_sw * r_normal); sigma_medium is exactly half of it.  With r_normal = 0
    there is no hysteresis to close and both values are zero.
    """
    if cfg.r_normal == 0:
        return 0.0, 0.0
    if closure_tol is None:
        closure_tol = 0.02 * switching_current(cfg, cfg.v_th0 + cfg.v_offset) * cfg.r_normal

    def gap(sigma: float) -> float:
        return branch_closure_gap(replace(cfg, noise_sigma=sigma), plan)

    if gap(0.0) < closure_tol:
        return 0.0, 0.0
    # Scale guess: the threshold spread that spans the hysteresis window.
    hi = (cfg.v_th0 + cfg.v_offset) * cfg.r_normal / (cfg.r_in + cfg.r_normal)
    lo = 0.0
    for _ in range(max_doublings):
        if gap(hi) < closure_tol:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise CalibrationError(
            f"hysteresis did not close within {max_doublings} doublings (last sigma {hi!r})"
        )
    while hi - lo > sigma_resolution:
        mid = 0.5 * (lo + hi)
        if gap(mid) < closure_tol:
            hi = mid
        else:
            lo = mid
    return hi, hi / 2.0


def flux_feedback(
    cfg: EmulatorConfig,
    disturbance,
    gain: float,
    n_pulses: int = 400,
    n_iters: int = 300,
    seed: int = 0,
    *,
    i_dc_start: float | None = None,
    probe_i_sq: float | None = None,
    branch_sign: int = 1,
    branch_interval: tuple[float, float] | None = None,
) -> FeedbackTrace:
    """Proportional flux feedback at the P_sw = 50% working point.

    ``disturbance`` is a scalar or length-n_iters series of volts added to
    the modulation output, standing in for an external flux change.  Each
    iteration estimates P_sw from n_pulses trials at the fixed probe
    amplitude and applies

        i_dc <- i_dc - gain * (p_hat - 0.5) * branch_sign

    so the i_dc trace mirrors the disturbance.  branch_sign is the sign of
    the modulation slope on the chosen branch; defaults start a quarter
    period into the first rising branch with the probe placed at the
    working point.  If i_dc leaves ``branch_interval`` the trace is
    truncated and flagged rather than raising.
    """
    if n_pulses < 1:
        raise ValueError(f"n_pulses must be >= 1, got {n_pulses!r}")
    if n_iters < 1:
        raise ValueError(f"n_iters must be >= 1, got {n_iters!r}")
    if branch_sign not in (-1, 1):
        raise ValueError(f"branch_sign must be +1 or -1, got {branch_sign!r}")
    period = modulation_period(cfg.tri_cfg)
    if i_dc_start is None:
        # Mid-bin offset keeps the start off an ADC code boundary.
        i_dc_start = period / 4 + period / 512
    if probe_i_sq is None:
        probe_i_sq = mean_threshold(cfg, i_dc_start) / cfg.r_in
    if branch_interval is None:
        branch_interval = (0.0, period / 2)
    try:
        d_series = np.broadcast_to(np.asarray(disturbance, dtype=float), (n_iters,))
    except ValueError:
        raise ValueError(
            f"disturbance must be a scalar or a length-{n_iters} series"
        ) from None
    if not np.all(np.isfinite(d_series)):
        raise ValueError("disturbance values must be finite")

    noise = NoiseSource(cfg.noise_sigma, seed)
    iterations, p_hist, i_hist, d_hist = [], [], [], []
    escaped = False
    escape_iteration = None
    i_dc = i_dc_start
    for t in range(n_iters):
        d = d_series[t]
        mu = cfg.v_th0 + cfg.v_offset - tri(i_dc, cfg.tri_cfg) - d
        v_n = noise.draws(n_pulses, FEEDBACK_STREAM, t)
        p_hat = np.count_nonzero(abs(probe_i_sq) * cfg.r_in > mu + v_n) / n_pulses
        iterations.append(t)
        p_hist.append(p_hat)
        i_hist.append(i_dc)
        d_hist.append(d)
        i_dc = i_dc - gain * (p_hat - 0.5) * branch_sign
        if not branch_interval[0] <= i_dc <= branch_interval[1]:
            escaped = True
            escape_iteration = t
            break
    return FeedbackTrace(
        np.array(iterations),
        np.array(p_hist),
        np.array(i_hist),
        np.array(d_hist),
        escaped=escaped,
        escape_iteration=escape_iteration,
    )
