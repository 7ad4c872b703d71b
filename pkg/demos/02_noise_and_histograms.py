"""Threshold noise: calibration, histograms, and what noise does to the IV.

The "large" noise level is defined operationally: the smallest Gaussian
sigma at which the averaged up/down DC IV branches coincide everywhere
within 2% of the plateau voltage (the hysteresis has just closed).  The
"medium" level is half of that.  Histograms of the sampled threshold then
show the three working points; the averaged IV curves show the hysteresis
narrowing and vanishing as sigma grows.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidemu import (
    EmulatorConfig,
    NoiseSource,
    SweepPlan,
    calibrate_noise_levels,
    dc_iv,
    sample_vth_histogram,
    split_up_down,
)
from dataclasses import replace

cfg = EmulatorConfig()
plan = SweepPlan.up_down(120e-6, 121, n_avg=20000, seed=1)
sigma_large, sigma_medium = calibrate_noise_levels(cfg, plan)
print(f"hysteresis closes at sigma_large = {sigma_large * 1e3:.2f} mV")
print(f"medium level is half of that:     {sigma_medium * 1e3:.2f} mV")

levels = [("no noise", 0.0), ("medium", sigma_medium), ("large", sigma_large)]

fig, (ax_h, ax_iv) = plt.subplots(1, 2, figsize=(10, 4))
for k, (label, sigma) in enumerate(levels):
    hist = sample_vth_histogram(
        replace(cfg, noise_sigma=sigma), 0.0, 100_000, NoiseSource(sigma, seed=k), bins=80
    )
    print(f"{label:>9}: mean = {hist.mean * 1e3:7.3f} mV, std = {hist.std * 1e3:6.3f} mV")
    centers = (hist.bin_edges[:-1] + hist.bin_edges[1:]) / 2
    ax_h.step(centers * 1e3, hist.counts, where="mid", label=label)

    rec = dc_iv(SweepPlan.up_down(120e-6, 121, n_avg=3000, seed=10 + k),
                replace(cfg, noise_sigma=sigma))
    up, down = split_up_down(rec)
    gap = np.max(np.abs(up.mean_v - down.mean_v))
    print(f"{label:>9}: max averaged up/down difference = {gap * 1e3:.3f} mV")
    ax_iv.plot(up.currents * 1e6, up.mean_v * 1e3, label=f"{label} up")
    ax_iv.plot(down.currents * 1e6, down.mean_v * 1e3, "--", label=f"{label} down")

ax_h.set_xlabel("sampled threshold (mV)")
ax_h.set_ylabel("count")
ax_h.set_title("Threshold histograms at the three noise levels")
ax_h.legend()
ax_iv.set_xlabel("bias current (uA)")
ax_iv.set_ylabel("averaged voltage (mV)")
ax_iv.set_title("Averaged DC IV: noise closes the hysteresis")
ax_iv.legend(fontsize=7)
fig.tight_layout()

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig.savefig(out / "02_noise_and_histograms.png", dpi=120)
print(f"figure written to {out / '02_noise_and_histograms.png'}")
