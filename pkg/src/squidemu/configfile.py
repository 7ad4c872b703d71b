"""Flat ``key = value`` experiment configuration files.

One assignment per line, SI units throughout, ``#`` starts a comment.
Unknown keys are rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

from pathlib import Path

from .device import EmulatorConfig
from .triwave import TriConfig

# Emulator circuit constants.
FLOAT_KEYS = {
    "r_in",
    "r_normal",
    "v_th0",
    "v_offset",
    "noise_sigma",
    "v_fullscale",
    "mod_depth",
    "g_dc",
    # Protocol defaults.
    "i_min",
    "i_max",
    "i_dc",
    "idc_min",
    "idc_max",
    "gain",
    "disturb_v",
}

INT_KEYS = {
    "seed",
    "n_pulses",
    "n_avg",
    "points",
    "idc_points",
    "n_iters",
    "disturb_at",
    "samples",
    "bins",
}

_EMULATOR_KEYS = ("r_in", "r_normal", "v_th0", "v_offset", "noise_sigma")
_TRI_KEYS = ("v_fullscale", "mod_depth", "g_dc")


def parse_config(text: str) -> dict:
    """Parse config text into a {key: value} dict with typed values."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip().lower()
        value = value.strip()
        if key in FLOAT_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ValueError(f"line {lineno}: {key} needs a number, got {value!r}") from None
        elif key in INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ValueError(f"line {lineno}: {key} needs an integer, got {value!r}") from None
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return values


def load_config(path: str | Path) -> dict:
    return parse_config(Path(path).read_text())


def make_emulator_config(values: dict) -> EmulatorConfig:
    """Build an EmulatorConfig from parsed values, validating invariants."""
    tri_kwargs = {k: values[k] for k in _TRI_KEYS if k in values}
    kwargs = {k: values[k] for k in _EMULATOR_KEYS if k in values}
    return EmulatorConfig(tri_cfg=TriConfig(**tri_kwargs), **kwargs)


def dump_config(cfg: EmulatorConfig, extra: dict | None = None) -> str:
    """Render a config back to file text (useful as a template)."""
    lines = [
        f"r_in = {cfg.r_in!r}",
        f"r_normal = {cfg.r_normal!r}",
        f"v_th0 = {cfg.v_th0!r}",
        f"v_offset = {cfg.v_offset!r}",
        f"noise_sigma = {cfg.noise_sigma!r}",
        f"v_fullscale = {cfg.tri_cfg.v_fullscale!r}",
        f"mod_depth = {cfg.tri_cfg.mod_depth!r}",
        f"g_dc = {cfg.tri_cfg.g_dc!r}",
    ]
    for key, value in (extra or {}).items():
        if key not in FLOAT_KEYS and key not in INT_KEYS:
            raise ValueError(f"unknown key {key!r}")
        lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"
