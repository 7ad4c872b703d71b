"""Device-core tests: threshold composition, comparator hysteresis,
retrapping arithmetic and the noise source contract."""

import math

import numpy as np
import pytest

from squidemu.device import (
    DeviceState,
    EmulatorConfig,
    NoiseSource,
    Phase,
    mean_threshold,
    retrap_current,
    sample_vth_histogram,
    step,
    switching_current,
    threshold,
)
from squidemu.triwave import TriConfig

CFG = EmulatorConfig()
SC = DeviceState()
RES = DeviceState(phase=Phase.RESISTIVE)

# Bias point inside the ADC bin whose remapped code is 63 (modulation
# minimum of the threshold), confirmed by the converter enumeration.
I_DC_MOD_MIN = 0.504e-3


def test_threshold_examples():
    assert threshold(CFG, 0.0, 0.0) == pytest.approx(0.090)
    assert threshold(CFG, I_DC_MOD_MIN, 0.0) == pytest.approx(0.050)
    assert threshold(CFG, 0.0, -0.090) == pytest.approx(0.0)


def test_degenerate_threshold_switches_at_any_nonzero_current():
    # a pathological -90 mV draw collapses the threshold to zero
    state, _ = step(SC, CFG, 1e-9, 0.0, -0.090)
    assert state.phase is Phase.RESISTIVE
    state, _ = step(SC, CFG, 0.0, 0.0, -0.090)
    assert state.phase is Phase.SUPERCONDUCTING  # zero current never exceeds it


def test_threshold_modulation_minimum_is_mod_depth_below_zero_flux():
    lowest = min(threshold(CFG, float(i), 0.0) for i in np.linspace(0, 2e-3, 4001))
    assert lowest == pytest.approx(CFG.v_th0 - CFG.tri_cfg.mod_depth)


def test_step_switches_above_threshold():
    state, v_sq = step(SC, CFG, 100e-6, 0.0, 0.0)
    assert state.phase is Phase.RESISTIVE
    assert v_sq == pytest.approx(22.5e-3)


def test_step_resistive_holds_above_retrap():
    state, v_sq = step(RES, CFG, 80e-6, 0.0, 0.0)
    assert state.phase is Phase.RESISTIVE
    assert v_sq == pytest.approx(18e-3)
    assert 80e-6 > retrap_current(CFG, 0.090)


def test_step_retraps_below_retrap_current():
    state, v_sq = step(RES, CFG, 70e-6, 0.0, 0.0)
    assert state.phase is Phase.SUPERCONDUCTING
    assert v_sq == 0.0
    assert 70e-6 < retrap_current(CFG, 0.090)


def test_step_antisymmetric_in_current():
    rng = np.random.default_rng(3)
    for _ in range(50):
        i = float(rng.uniform(10e-6, 150e-6))
        start = SC if rng.random() < 0.5 else RES
        s_pos, v_pos = step(start, CFG, i, 0.0, 0.0)
        s_neg, v_neg = step(start, CFG, -i, 0.0, 0.0)
        assert s_pos.phase is s_neg.phase
        assert v_neg == -v_pos


def test_step_negative_pulse_switches():
    state, v_sq = step(SC, CFG, -100e-6, 0.0, 0.0)
    assert state.phase is Phase.RESISTIVE
    assert v_sq == pytest.approx(-22.5e-3)


def test_v_sq_zero_whenever_superconducting():
    for i in np.linspace(-89e-6, 89e-6, 41):
        state, v_sq = step(SC, CFG, float(i), 0.0, 0.0)
        if state.phase is Phase.SUPERCONDUCTING:
            assert v_sq == 0.0


def test_step_saturation_flag():
    state, v_sq = step(SC, CFG, 3e-3, 0.0, 0.0)
    assert state.saturated
    assert abs(v_sq) > 0.5
    state, _ = step(SC, CFG, 100e-6, 0.0, 0.0)
    assert not state.saturated


def test_step_rejects_non_finite():
    with pytest.raises(ValueError):
        step(SC, CFG, math.nan, 0.0, 0.0)
    with pytest.raises(ValueError):
        step(SC, CFG, 1e-6, 0.0, math.inf)


def test_retrap_current_values():
    assert retrap_current(CFG, 0.090) == pytest.approx(73.47e-6, abs=0.01e-6)
    no_shunt = EmulatorConfig(r_normal=0.0)
    assert retrap_current(no_shunt, 0.090) == pytest.approx(90e-6)
    assert retrap_current(CFG, 0.0) == 0.0


def test_switching_current_values():
    assert switching_current(CFG, 0.090) == pytest.approx(90e-6)
    assert switching_current(CFG, 0.050) == pytest.approx(50e-6)
    assert switching_current(CFG, 0.0) == 0.0


def test_hysteresis_ordering():
    rng = np.random.default_rng(11)
    for _ in range(100):
        cfg = EmulatorConfig(
            r_in=float(rng.uniform(100, 5000)),
            r_normal=float(rng.uniform(1, 2000)),
            v_th0=float(rng.uniform(0.05, 0.5)),
        )
        v_th = float(rng.uniform(1e-3, cfg.v_th0))
        assert retrap_current(cfg, v_th) < switching_current(cfg, v_th)


def _quasi_static_updown(cfg, currents, i_dc=0.0):
    """Walk a current list through step() with no noise; returns phases."""
    state = DeviceState()
    phases = []
    for i in currents:
        state, _ = step(state, cfg, float(i), i_dc, 0.0)
        phases.append(state.phase)
    return phases


def test_two_threshold_equivalence_randomized():
    # A noise-free up-down ramp must switch at the first grid current above
    # v_th / r_in and retrap at the first grid current below
    # v_th / (r_in + r_normal).
    rng = np.random.default_rng(23)
    for _ in range(25):
        r_in = float(rng.uniform(200, 3000))
        r_normal = float(rng.uniform(50, 1500))
        v_th0 = float(rng.uniform(0.05, 0.3))
        mod_depth = float(rng.uniform(0.0, 0.8 * v_th0))
        cfg = EmulatorConfig(
            r_in=r_in, r_normal=r_normal, v_th0=v_th0, tri_cfg=TriConfig(mod_depth=mod_depth)
        )
        i_dc = float(rng.uniform(0, 2e-3))
        mu = mean_threshold(cfg, i_dc)
        i_sw = switching_current(cfg, mu)
        i_r = retrap_current(cfg, mu)
        up = np.linspace(0, 2.0 * i_sw, 257) + i_sw * 1e-7  # keep off exact boundaries
        currents = np.concatenate([up, up[::-1]])
        phases = _quasi_static_updown(cfg, currents, i_dc)
        switched = [p is Phase.RESISTIVE for p in phases]
        first_on = switched.index(True)
        assert currents[first_on] > i_sw and currents[first_on - 1] <= i_sw
        last_on = len(switched) - 1 - switched[::-1].index(True)
        assert currents[last_on] >= i_r and currents[last_on + 1] < i_r


def test_noise_source_keyed_determinism():
    ns = NoiseSource(5e-3, seed=42)
    a = ns.draws(100, 2, 7)
    ns.draws(50, 2, 8)  # consuming another substream must not disturb the first
    b = ns.draws(100, 2, 7)
    assert np.array_equal(a, b)
    # draw j is stable under extension of the request
    assert np.array_equal(ns.draws(10, 2, 7), a[:10])
    # distinct keys give distinct streams
    assert not np.array_equal(a, ns.draws(100, 2, 8))
    assert not np.array_equal(a, NoiseSource(5e-3, seed=43).draws(100, 2, 7))


def test_noise_source_statistics():
    ns = NoiseSource(5e-3, seed=1)
    x = ns.draws(200_000, 1)
    assert abs(x.mean()) < 5e-5
    assert x.std() == pytest.approx(5e-3, rel=0.02)
    assert np.all(NoiseSource(0.0, seed=1).draws(1000, 1) == 0.0)


def test_noise_source_validation():
    with pytest.raises(ValueError):
        NoiseSource(-1e-3, seed=0)
    with pytest.raises(ValueError):
        NoiseSource(1e-3, seed=-1)
    with pytest.raises(ValueError):
        NoiseSource(1e-3, seed=0).draws(0, 1)


def test_vth_histogram_no_noise():
    hist = sample_vth_histogram(CFG, 0.0, 1000, NoiseSource(0.0, seed=5))
    assert hist.mean == pytest.approx(0.090)
    assert hist.std == pytest.approx(0.0, abs=1e-15)  # identical samples, fp summation only
    assert hist.counts.sum() == 1000


def test_vth_histogram_noise_statistics():
    hist = sample_vth_histogram(CFG, 0.0, 100_000, NoiseSource(5e-3, seed=5))
    assert hist.std == pytest.approx(5e-3, rel=0.03)
    assert hist.mean == pytest.approx(0.090, abs=3 * 5e-3 / math.sqrt(100_000))


def test_vth_histogram_at_modulation_minimum():
    hist = sample_vth_histogram(CFG, I_DC_MOD_MIN, 1000, NoiseSource(0.0, seed=5))
    assert hist.mean == pytest.approx(0.050)
    assert hist.std == pytest.approx(0.0, abs=1e-15)


def test_vth_histogram_rejects_empty():
    with pytest.raises(ValueError):
        sample_vth_histogram(CFG, 0.0, 0, NoiseSource(0.0, seed=5))


def test_config_validation():
    with pytest.raises(ValueError):
        EmulatorConfig(r_in=0.0)
    with pytest.raises(ValueError):
        EmulatorConfig(r_normal=-1.0)
    with pytest.raises(ValueError):
        EmulatorConfig(v_th0=0.0)
    with pytest.raises(ValueError):
        EmulatorConfig(noise_sigma=-1e-3)
    # mean threshold must stay positive at the modulation minimum
    with pytest.raises(ValueError):
        EmulatorConfig(v_th0=0.030)
    with pytest.raises(ValueError):
        EmulatorConfig(v_offset=-0.060)
