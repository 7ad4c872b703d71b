"""Command-line runner: every protocol to CSV, plus the TCP server.

Subcommands: dc-iv, pulsed-iv, s-curve, mod-map, vth-hist, feedback,
calibrate-noise, serve.  Values resolve flag > config file > built-in
default.  CSV output carries a header naming each column with its unit and
floats printed to 9 significant digits; identical arguments, config and
seed produce byte-identical files.  Exit codes: 0 success, 2 argument
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .configfile import load_config, make_emulator_config
from .device import EmulatorConfig, NoiseSource, sample_vth_histogram
from .protocols import (
    SweepPlan,
    calibrate_noise_levels,
    dc_iv,
    flux_feedback,
    modulation_map,
    pulsed_iv,
    s_curve,
)
from . import server as server_mod

_BUILTINS = {
    "seed": 0,
    "i_dc": 0.0,
    "i_min": 0.0,
    "i_max": 120e-6,
    "points": 121,
    "n_pulses": 1000,
    "n_avg": 100,
    "idc_min": -2e-3,
    "idc_max": 2e-3,
    "idc_points": 65,
    "gain": 1e-4,
    "n_iters": 300,
    "disturb_v": 0.010,
    "disturb_at": 100,
    "samples": 100000,
    "bins": 50,
}


def _fmt(x) -> str:
    return format(float(x), ".9g")


def _write_csv(path: str | None, header: str, rows) -> None:
    text = header + "\n" + "".join(",".join(_fmt(x) for x in row) + "\n" for row in rows)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as f:
            f.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidemu",
        description="DC-SQUID emulator: diagnostic measurement protocols and instrument server.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="noise seed (64-bit unsigned)")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--sigma", type=float, help="threshold noise sigma, V")
        p.add_argument("--idc", type=float, help="flux-bias current, A")

    def grid(p: argparse.ArgumentParser) -> None:
        p.add_argument("--imin", type=float, help="lowest pulse current, A")
        p.add_argument("--imax", type=float, help="highest pulse current, A")
        p.add_argument("--points", type=int, help="number of grid points")
        p.add_argument("--pulses", type=int, help="pulses per grid point")

    p = sub.add_parser("dc-iv", help="averaged up-down DC IV sweep")
    common(p)
    grid(p)
    p.add_argument("--avg", type=int, help="number of averaged sweeps")

    p = sub.add_parser("pulsed-iv", help="pulsed IV curve (no retrapping)")
    common(p)
    grid(p)

    p = sub.add_parser("s-curve", help="switching probability vs pulse amplitude")
    common(p)
    grid(p)

    p = sub.add_parser("mod-map", help="P_sw over the (flux bias, pulse amplitude) grid")
    common(p)
    grid(p)
    p.add_argument("--idc-min", type=float, help="lowest flux-bias current, A")
    p.add_argument("--idc-max", type=float, help="highest flux-bias current, A")
    p.add_argument("--idc-points", type=int, help="flux-bias grid points")

    p = sub.add_parser("vth-hist", help="threshold sample histogram")
    common(p)
    p.add_argument("--samples", type=int, help="number of threshold samples")
    p.add_argument("--bins", type=int, help="histogram bins")

    p = sub.add_parser("feedback", help="flux feedback loop with a step disturbance")
    common(p)
    p.add_argument("--gain", type=float, help="feedback gain, A per unit probability")
    p.add_argument("--iters", type=int, help="feedback iterations")
    p.add_argument("--pulses", type=int, help="pulses per probability estimate")
    p.add_argument("--disturb-v", type=float, help="step disturbance height, V")
    p.add_argument("--disturb-at", type=int, help="iteration at which the step applies")

    p = sub.add_parser("calibrate-noise", help="find the hysteresis-closing noise level")
    common(p)
    grid(p)
    p.add_argument("--avg", type=int, help="sweeps averaged per calibration step")

    p = sub.add_parser("serve", help="run the TCP instrument server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=5025)
    p.add_argument("--config", help="key = value config file")

    return parser


class _Settings:
    """Flag > config file > built-in resolution for one invocation."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.values = load_config(args.config) if getattr(args, "config", None) else {}
        self.args = args

    def get(self, flag_attr: str, key: str):
        flag = getattr(self.args, flag_attr, None)
        if flag is not None:
            return flag
        if key in self.values:
            return self.values[key]
        return _BUILTINS[key]

    def emulator_config(self) -> EmulatorConfig:
        cfg = make_emulator_config(self.values)
        sigma = getattr(self.args, "sigma", None)
        if sigma is not None:
            cfg = replace(cfg, noise_sigma=sigma)
        return cfg


def _pulse_grid(s: _Settings) -> np.ndarray:
    return np.linspace(s.get("imin", "i_min"), s.get("imax", "i_max"), s.get("points", "points"))


def _cmd_dc_iv(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    up = _pulse_grid(s)
    plan = SweepPlan(
        np.concatenate([up, up[::-1]]),
        i_dc=s.get("idc", "i_dc"),
        n_avg=s.get("avg", "n_avg"),
        seed=s.get("seed", "seed"),
    )
    rec = dc_iv(plan, cfg)
    return "i_sq_A,mean_v_V,switch_frac", zip(rec.currents, rec.mean_v, rec.switch_frac)


def _cmd_pulsed_iv(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    rec = pulsed_iv(
        cfg,
        _pulse_grid(s),
        i_dc=s.get("idc", "i_dc"),
        n_pulses=s.get("pulses", "n_pulses"),
        seed=s.get("seed", "seed"),
    )
    return "i_sq_A,mean_v_V,p_sw", zip(rec.currents, rec.mean_v, rec.switch_frac)


def _cmd_s_curve(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    curve = s_curve(
        cfg,
        _pulse_grid(s),
        i_dc=s.get("idc", "i_dc"),
        n_pulses=s.get("pulses", "n_pulses"),
        seed=s.get("seed", "seed"),
    )
    return "i_sq_A,p_sw", zip(curve.currents, curve.p_sw)


def _cmd_mod_map(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    m = modulation_map(
        cfg,
        np.linspace(s.get("idc_min", "idc_min"), s.get("idc_max", "idc_max"), s.get("idc_points", "idc_points")),
        _pulse_grid(s),
        n_pulses=s.get("pulses", "n_pulses"),
        seed=s.get("seed", "seed"),
    )
    rows = [
        (i_dc, i_sq, m.p_sw[r, c])
        for r, i_dc in enumerate(m.i_dc_values)
        for c, i_sq in enumerate(m.i_sq_values)
    ]
    return "i_dc_A,i_sq_A,p_sw", rows


def _cmd_vth_hist(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    noise = NoiseSource(cfg.noise_sigma, s.get("seed", "seed"))
    hist = sample_vth_histogram(
        cfg,
        s.get("idc", "i_dc"),
        s.get("samples", "samples"),
        noise,
        bins=s.get("bins", "bins"),
    )
    rows = zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts)
    return "bin_left_V,bin_right_V,count", rows


def _cmd_feedback(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    n_iters = s.get("iters", "n_iters")
    disturb = np.zeros(n_iters)
    disturb[s.get("disturb_at", "disturb_at"):] = s.get("disturb_v", "disturb_v")
    # start bias: flag > config > protocol default (a quarter period in)
    i_dc_start = getattr(s.args, "idc", None)
    if i_dc_start is None:
        i_dc_start = s.values.get("i_dc")
    trace = flux_feedback(
        cfg,
        disturb,
        gain=s.get("gain", "gain"),
        n_pulses=s.get("pulses", "n_pulses"),
        n_iters=n_iters,
        seed=s.get("seed", "seed"),
        i_dc_start=i_dc_start,
    )
    rows = zip(trace.iterations, trace.p_sw, trace.i_dc, trace.disturbance)
    return "iteration,p_sw,i_dc_A,disturbance_V", rows


def _cmd_calibrate(s: _Settings) -> tuple[str, list]:
    cfg = s.emulator_config()
    up = _pulse_grid(s)
    plan = SweepPlan(
        np.concatenate([up, up[::-1]]),
        i_dc=s.get("idc", "i_dc"),
        n_avg=s.get("avg", "n_avg"),
        seed=s.get("seed", "seed"),
    )
    sigma_large, sigma_medium = calibrate_noise_levels(cfg, plan)
    return "sigma_large_V,sigma_medium_V", [(sigma_large, sigma_medium)]


_COMMANDS = {
    "dc-iv": _cmd_dc_iv,
    "pulsed-iv": _cmd_pulsed_iv,
    "s-curve": _cmd_s_curve,
    "mod-map": _cmd_mod_map,
    "vth-hist": _cmd_vth_hist,
    "feedback": _cmd_feedback,
    "calibrate-noise": _cmd_calibrate,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "serve":
            cfg = make_emulator_config(load_config(args.config)) if args.config else None
            factory = (lambda: server_mod.InstrumentSession(cfg)) if cfg else server_mod.InstrumentSession
            server_mod.serve(args.host, args.port, factory)
            return 0
        settings = _Settings(args)
        header, rows = _COMMANDS[args.command](settings)
        _write_csv(args.out, header, rows)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
