"""Line-oriented TCP instrument server.

Presents the emulator as a bench instrument: current pulses in, a switch
bit out, flux bias settable, circuit constants adjustable.  The grammar is
a minimal command set rather than full SCPI; commands and keys are
case-insensitive ASCII, one command per newline-terminated line, exactly
one response line per command.

    SET <KEY> <float>                      -> OK
    GET <KEY>                              -> value
    IDC <float>                            -> OK   (flux-bias setpoint, clamped)
    PULSE <float>                          -> 1 or 0 (switched)
    RESET                                  -> OK   (device to superconducting, pulse counter to 0)
    SCURVE <imin> <imax> <points> <npulses> -> one CSV line of p_sw values
    QUIT                                   -> OK, then the connection closes

Keys: RIN, RNORM, VTH0, VOFF, SIGMA, MODDEPTH, GDC, SEED.

Errors: ``ERR 1 unknown`` for an unknown command or key, ``ERR 2 parse``
for bad arity, a malformed number or a non-ASCII line, ``ERR 3 range`` for
values violating a config invariant.  Errors never close the connection.
"""

from __future__ import annotations

import socketserver
from dataclasses import replace

import numpy as np

from .device import (
    SERVER_STREAM,
    DeviceState,
    EmulatorConfig,
    NoiseSource,
    Phase,
    step,
)
from .protocols import s_curve

MAX_SEED = (1 << 64) - 1

_ERR_UNKNOWN = "ERR 1 unknown"
_ERR_PARSE = "ERR 2 parse"
_ERR_RANGE = "ERR 3 range"


def _format_value(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


class InstrumentSession:
    """Command-protocol state for one connection.

    Owns an emulator config, the flux-bias setpoint, the device state and
    the pulse counter.  PULSE trials draw noise from the substream keyed by
    (seed, SERVER_STREAM, pulse counter), so a given seed always reproduces
    the same pulse outcomes; SET SEED and RESET both rewind the counter.
    """

    def __init__(self, cfg: EmulatorConfig | None = None, seed: int = 0) -> None:
        self.cfg = cfg if cfg is not None else EmulatorConfig()
        self.seed = seed
        self.i_dc = 0.0
        self.device = DeviceState()
        self.pulse_count = 0
        self.closed = False

    # --- key plumbing ----------------------------------------------------
    def _get_key(self, key: str) -> float:
        cfg = self.cfg
        return {
            "RIN": cfg.r_in,
            "RNORM": cfg.r_normal,
            "VTH0": cfg.v_th0,
            "VOFF": cfg.v_offset,
            "SIGMA": cfg.noise_sigma,
            "MODDEPTH": cfg.tri_cfg.mod_depth,
            "GDC": cfg.tri_cfg.g_dc,
            "SEED": float(self.seed),
        }[key]

    def _set_key(self, key: str, value: float) -> None:
        if key == "SEED":
            if value != int(value) or not 0 <= value <= MAX_SEED:
                raise ValueError("seed must be an integer in [0, 2^64)")
            self.seed = int(value)
            self.pulse_count = 0
            return
        cfg = self.cfg
        if key == "RIN":
            cfg = replace(cfg, r_in=value)
        elif key == "RNORM":
            cfg = replace(cfg, r_normal=value)
        elif key == "VTH0":
            cfg = replace(cfg, v_th0=value)
        elif key == "VOFF":
            cfg = replace(cfg, v_offset=value)
        elif key == "SIGMA":
            cfg = replace(cfg, noise_sigma=value)
        elif key == "MODDEPTH":
            cfg = replace(cfg, tri_cfg=replace(cfg.tri_cfg, mod_depth=value))
        elif key == "GDC":
            cfg = replace(cfg, tri_cfg=replace(cfg.tri_cfg, g_dc=value))
        else:
            raise KeyError(key)
        self.cfg = cfg

    @property
    def i_dc_limit(self) -> float:
        """Bias setpoints clamp to the ADC full-scale range."""
        return self.cfg.tri_cfg.v_fullscale / self.cfg.tri_cfg.g_dc

    # --- commands ---------------------------------------------------------
    def handle_command(self, line: str) -> str:
        tokens = line.split()
        if not tokens:
            return _ERR_UNKNOWN
        verb = tokens[0].upper()
        args = tokens[1:]
        handler = {
            "SET": self._cmd_set,
            "GET": self._cmd_get,
            "IDC": self._cmd_idc,
            "PULSE": self._cmd_pulse,
            "RESET": self._cmd_reset,
            "SCURVE": self._cmd_scurve,
            "QUIT": self._cmd_quit,
        }.get(verb)
        if handler is None:
            return _ERR_UNKNOWN
        return handler(args)

    def _cmd_set(self, args: list[str]) -> str:
        if len(args) != 2:
            return _ERR_PARSE
        key = args[0].upper()
        try:
            value = float(args[1])
        except ValueError:
            return _ERR_PARSE
        try:
            self._set_key(key, value)
        except KeyError:
            return _ERR_UNKNOWN
        except ValueError:
            return _ERR_RANGE
        return "OK"

    def _cmd_get(self, args: list[str]) -> str:
        if len(args) != 1:
            return _ERR_PARSE
        try:
            return _format_value(self._get_key(args[0].upper()))
        except KeyError:
            return _ERR_UNKNOWN

    def _cmd_idc(self, args: list[str]) -> str:
        if len(args) != 1:
            return _ERR_PARSE
        try:
            value = float(args[0])
        except ValueError:
            return _ERR_PARSE
        if not np.isfinite(value):
            return _ERR_RANGE
        limit = self.i_dc_limit
        self.i_dc = min(max(value, -limit), limit)
        return "OK"

    def _cmd_pulse(self, args: list[str]) -> str:
        if len(args) != 1:
            return _ERR_PARSE
        try:
            i_sq = float(args[0])
        except ValueError:
            return _ERR_PARSE
        if not np.isfinite(i_sq):
            return _ERR_RANGE
        noise = NoiseSource(self.cfg.noise_sigma, self.seed)
        v_n = noise.draws(1, SERVER_STREAM, self.pulse_count)[0]
        self.pulse_count += 1
        self.device, _ = step(DeviceState(), self.cfg, i_sq, self.i_dc, v_n)
        return "1" if self.device.phase is Phase.RESISTIVE else "0"

    def _cmd_reset(self, args: list[str]) -> str:
        if args:
            return _ERR_PARSE
        self.device = DeviceState()
        self.pulse_count = 0
        return "OK"

    def _cmd_scurve(self, args: list[str]) -> str:
        if len(args) != 4:
            return _ERR_PARSE
        try:
            i_min, i_max = float(args[0]), float(args[1])
            points, n_pulses = int(args[2]), int(args[3])
        except ValueError:
            return _ERR_PARSE
        if not (np.isfinite(i_min) and np.isfinite(i_max)) or points < 1 or n_pulses < 1:
            return _ERR_RANGE
        curve = s_curve(
            self.cfg,
            np.linspace(i_min, i_max, points),
            i_dc=self.i_dc,
            n_pulses=n_pulses,
            seed=self.seed,
        )
        return ",".join(format(p, ".9g") for p in curve.p_sw)

    def _cmd_quit(self, args: list[str]) -> str:
        if args:
            return _ERR_PARSE
        self.closed = True
        return "OK"


def handle_command(session: InstrumentSession, line: str) -> str:
    """Process one command line against a session and return the response."""
    return session.handle_command(line)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        session = self.server.session_factory()
        for raw in self.rfile:
            try:
                line = raw.decode("ascii")
            except UnicodeDecodeError:
                response = _ERR_PARSE
            else:
                response = session.handle_command(line)
            try:
                self.wfile.write(response.encode("ascii") + b"\n")
            except (BrokenPipeError, ConnectionResetError):
                return
            if session.closed:
                return


class InstrumentServer(socketserver.ThreadingTCPServer):
    """One independent session per connection; commands within a connection
    are processed strictly in order."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address=("127.0.0.1", 5025), session_factory=InstrumentSession):
        self.session_factory = session_factory
        super().__init__(address, _Handler)


def serve(host: str = "127.0.0.1", port: int = 5025, session_factory=InstrumentSession) -> None:
    """Bind and serve until interrupted (propagates bind failures)."""
    with InstrumentServer((host, port), session_factory) as server:
        server.serve_forever()
