"""Reference-model tests: ideal interferometer modulation and the
truncated-cosine modulator, checked against library-grade cosines."""

import math

import numpy as np
import pytest

from squidemu.ideal import IdealSquidParams, ideal_isw, sinusoidal_tri_mode, taylor_cos
from squidemu.triwave import TriConfig, tri

CFG = TriConfig()


def test_ideal_isw_examples():
    assert ideal_isw(IdealSquidParams(i_c=10e-6, flux=0.0)) == pytest.approx(20e-6)
    assert ideal_isw(IdealSquidParams(i_c=10e-6, flux=0.5)) == pytest.approx(0.0, abs=1e-20)
    assert ideal_isw(IdealSquidParams(i_c=10e-6, flux=1 / 3)) == pytest.approx(
        2 * 10e-6 * abs(math.cos(math.pi / 3))
    )


def test_ideal_isw_periodic_and_even():
    rng = np.random.default_rng(19)
    for flux in rng.uniform(-5, 5, 1000):
        base = ideal_isw(IdealSquidParams(i_c=7e-6, flux=float(flux)))
        assert ideal_isw(IdealSquidParams(i_c=7e-6, flux=float(flux) + 1.0)) == pytest.approx(
            base, abs=1e-18
        )
        assert ideal_isw(IdealSquidParams(i_c=7e-6, flux=-float(flux))) == pytest.approx(
            base, abs=1e-18
        )
        assert 0.0 <= base <= 2 * 7e-6


def test_ideal_params_validation():
    with pytest.raises(ValueError):
        IdealSquidParams(i_c=0.0, flux=0.0)
    with pytest.raises(ValueError):
        IdealSquidParams(i_c=1e-6, flux=math.nan)


def test_taylor_cos_trivial_cases():
    assert taylor_cos(0.0, 9) == 1.0
    for x in np.linspace(-10, 10, 21):
        assert taylor_cos(float(x), 1) == 1.0


def test_taylor_cos_quarter_period():
    assert abs(taylor_cos(math.pi / 2, 9)) < 1e-6


def test_taylor_cos_remainder_bound():
    x = np.linspace(-math.pi, math.pi, 10_000)
    err = np.abs(taylor_cos(x, 9) - np.cos(x))
    assert err.max() < 2e-6


def test_taylor_cos_validation():
    with pytest.raises(ValueError):
        taylor_cos(1.0, 0)


def test_sinusoidal_mode_zeros_and_peaks():
    assert sinusoidal_tri_mode(0.0, CFG) == 0.0
    # quarter of the cosine period = half a modulation period: cosine null
    assert sinusoidal_tri_mode(0.5e-3, CFG) == pytest.approx(CFG.mod_depth, rel=1e-6)
    assert sinusoidal_tri_mode(1.0e-3, CFG) == pytest.approx(0.0, abs=1e-6 * CFG.mod_depth)


def test_sinusoidal_mode_matches_triangle_at_extrema():
    for i_dc in (0.0, 0.5e-3, -0.5e-3, 1.0e-3, 1.5e-3, -1.5e-3, 2.0e-3):
        assert sinusoidal_tri_mode(i_dc, CFG) == pytest.approx(
            tri(i_dc, CFG), abs=1e-6 * CFG.mod_depth
        )


def test_sinusoidal_mode_period_and_symmetry():
    rng = np.random.default_rng(29)
    for i in rng.uniform(0, 1e-3, 200):
        i = float(i)
        assert sinusoidal_tri_mode(i, CFG) == pytest.approx(
            sinusoidal_tri_mode(i + 1e-3, CFG), abs=1e-8
        )
        assert sinusoidal_tri_mode(-i, CFG) == sinusoidal_tri_mode(i, CFG)
        assert 0.0 <= sinusoidal_tri_mode(i, CFG) <= CFG.mod_depth * (1 + 1e-9)


def test_sinusoidal_mode_clamps_at_fullscale():
    # Mirrors the ADC saturation of the triangular mode.
    assert sinusoidal_tri_mode(2.5e-3, CFG) == sinusoidal_tri_mode(2.0e-3, CFG)


def test_sinusoidal_mode_validation():
    with pytest.raises(ValueError):
        sinusoidal_tri_mode(math.nan, CFG)
    with pytest.raises(ValueError):
        sinusoidal_tri_mode(1e-3, CFG, n_terms=0)
