"""Hysteretic IV curves of the emulated device.

Ramps the bias current up and down with no noise: the device stays at zero
voltage until the switching current (v_th0 / r_in = 90 uA), jumps onto the
resistive branch, and on the way down holds that branch until the lower
retrapping current v_th0 / (r_in + r_normal) = 73.5 uA.  A pulsed sweep has
no memory between pulses, so it shows a single sharp step and no hysteresis.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidemu import (
    EmulatorConfig,
    SweepPlan,
    dc_iv,
    pulsed_iv,
    retrap_current,
    split_up_down,
    switching_current,
)

cfg = EmulatorConfig()
print(f"switching current: {switching_current(cfg, cfg.v_th0) * 1e6:.2f} uA")
print(f"retrapping current: {retrap_current(cfg, cfg.v_th0) * 1e6:.2f} uA")

plan = SweepPlan.up_down(120e-6, 241, n_avg=1, seed=0)
record = dc_iv(plan, cfg)
up, down = split_up_down(record)

first_on = up.currents[np.nonzero(up.switch_frac > 0)[0][0]]
last_on = down.currents[np.nonzero(down.switch_frac > 0)[0][0]]
print(f"up-ramp switches at the {first_on * 1e6:.1f} uA grid point")
print(f"down-ramp retraps below the {last_on * 1e6:.1f} uA grid point")

pulsed = pulsed_iv(cfg, up.currents, n_pulses=1, seed=0)

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(up.currents * 1e6, up.mean_v * 1e3, label="DC up-ramp")
ax.plot(down.currents * 1e6, down.mean_v * 1e3, label="DC down-ramp")
ax.plot(pulsed.currents * 1e6, pulsed.mean_v * 1e3, "--", label="pulsed")
ax.set_xlabel("bias current (uA)")
ax.set_ylabel("device voltage (mV)")
ax.set_title("Noise-free IV: wide hysteresis, single-step pulsed curve")
ax.legend()
fig.tight_layout()

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig.savefig(out / "01_hysteretic_iv.png", dpi=120)
print(f"figure written to {out / '01_hysteretic_iv.png'}")
