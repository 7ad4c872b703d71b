"""squidemu: software emulator of an electronic DC-SQUID test stand.

The device core reproduces hysteretic switching (zero voltage below the
switching current, retrapping at a lower current on the way down), a
bit-exact triangular flux modulator, and Gaussian threshold noise; on top
of it sit the standard diagnostic protocols (DC and pulsed IV, S-curves,
modulation maps, noise calibration, flux feedback), a CSV command-line
runner and a line-oriented TCP instrument server.
"""

from .device import (
    DeviceState,
    EmulatorConfig,
    NoiseSource,
    Phase,
    VthHistogram,
    mean_threshold,
    retrap_current,
    sample_vth_histogram,
    step,
    switching_current,
    threshold,
)
from .ideal import IdealSquidParams, ideal_isw, sinusoidal_tri_mode, taylor_cos
from .protocols import (
    BracketError,
    CalibrationError,
    FeedbackTrace,
    ModulationMap,
    SCurve,
    SweepPlan,
    SweepRecord,
    branch_closure_gap,
    calibrate_noise_levels,
    dc_iv,
    fifty_percent_contour,
    find_isw,
    flux_feedback,
    modulation_map,
    pulse_trial,
    pulsed_iv,
    s_curve,
    split_up_down,
)
from .server import InstrumentServer, InstrumentSession, handle_command, serve
from .triwave import AdcCode, TriConfig, code_step, digitize, modulation_period, remap, tri

__version__ = "0.1.0"

__all__ = [
    "AdcCode",
    "BracketError",
    "CalibrationError",
    "DeviceState",
    "EmulatorConfig",
    "FeedbackTrace",
    "IdealSquidParams",
    "InstrumentServer",
    "InstrumentSession",
    "ModulationMap",
    "NoiseSource",
    "Phase",
    "SCurve",
    "SweepPlan",
    "SweepRecord",
    "TriConfig",
    "VthHistogram",
    "branch_closure_gap",
    "calibrate_noise_levels",
    "code_step",
    "dc_iv",
    "digitize",
    "fifty_percent_contour",
    "find_isw",
    "flux_feedback",
    "handle_command",
    "ideal_isw",
    "mean_threshold",
    "modulation_map",
    "modulation_period",
    "pulse_trial",
    "pulsed_iv",
    "remap",
    "retrap_current",
    "s_curve",
    "sample_vth_histogram",
    "serve",
    "sinusoidal_tri_mode",
    "split_up_down",
    "step",
    "switching_current",
    "taylor_cos",
    "threshold",
    "tri",
]
