"""Switching-probability modulation map.

Sweeping the flux-bias current moves the threshold along a triangle wave
with a 1 mA period, so the P_sw = 50% contour traces four modulation cycles
over +/-2 mA.  The contour bottoms out at 50 uA rather than zero (the
triangle depth is kept below the zero-flux threshold, the behavior of a
constriction-type device with loop inductance), and with no noise the
6-bit DAC gives the contour its characteristic staircase.
"""

from pathlib import Path
from dataclasses import replace

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidemu import EmulatorConfig, fifty_percent_contour, modulation_map
from squidemu.triwave import code_step

cfg = EmulatorConfig()
i_dc = np.linspace(-2e-3, 2e-3, 257)[:-1] + code_step(cfg.tri_cfg) / 2
i_sq = np.linspace(40e-6, 100e-6, 121)

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
for ax, (label, sigma, n) in zip(
    axes, [("no noise", 0.0, 1), ("sigma = 3 mV", 3e-3, 300), ("sigma = 8 mV", 8e-3, 300)]
):
    m = modulation_map(replace(cfg, noise_sigma=sigma), i_dc, i_sq, n_pulses=n, seed=4)
    ax.pcolormesh(m.i_dc_values * 1e3, m.i_sq_values * 1e6, m.p_sw.T,
                  cmap="coolwarm", vmin=0, vmax=1, shading="nearest")
    contour = fifty_percent_contour(m)
    ax.plot(m.i_dc_values * 1e3, contour * 1e6, "k-", lw=0.8)
    ax.set_title(label, fontsize=10)
    ax.set_xlabel("flux-bias current (mA)")
    if sigma == 0.0:
        print(f"{label}: contour spans {contour.min() * 1e6:.1f}..{contour.max() * 1e6:.1f} uA, "
              f"{len(set(np.round(contour, 12)))} distinct staircase levels")
axes[0].set_ylabel("pulse amplitude (uA)")
fig.suptitle("P_sw over (flux bias, pulse amplitude): red = 1, blue = 0")
fig.tight_layout()

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig.savefig(out / "04_modulation_map.png", dpi=120)
print(f"figure written to {out / '04_modulation_map.png'}")
