"""Flux feedback at the P_sw = 50% working point.

The loop probes the device with fixed-amplitude pulses, estimates the
switching probability, and nudges the flux-bias current to hold it at 50%.
When an external disturbance (here a 10 mV step added to the modulation)
pulls the working point away, the bias settles at a new value whose
modulation change cancels the step, so the bias trace itself is the
measured disturbance: a flux detector.
"""

from pathlib import Path
from dataclasses import replace

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squidemu import EmulatorConfig, flux_feedback
from squidemu.triwave import code_step

cfg = replace(EmulatorConfig(), noise_sigma=5e-3)
n_iters, step_at, step_height = 400, 150, 0.010
disturbance = np.zeros(n_iters)
disturbance[step_at:] = step_height

trace = flux_feedback(cfg, disturbance, gain=1e-4, n_pulses=400, n_iters=n_iters, seed=2)

slope = cfg.tri_cfg.mod_depth / 0.5e-3  # modulation volts per ampere on a rising branch
expected = -step_height / slope
tail = trace.i_dc[300:]
print(f"bias shift after settling: {(tail.mean() - trace.i_dc[0]) * 1e6:8.2f} uA")
print(f"expected from modulation slope: {expected * 1e6:8.2f} uA "
      f"(one DAC code bin = {code_step(cfg.tri_cfg) * 1e6:.2f} uA)")
print(f"tail switching probability: {trace.p_sw[300:].mean():.3f}")

fig, (ax_p, ax_i) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
ax_p.plot(trace.iterations, trace.p_sw, ".", ms=3)
ax_p.axhline(0.5, color="k", lw=0.5)
ax_p.set_ylabel("estimated P_sw")
ax_i.plot(trace.iterations, trace.i_dc * 1e6)
ax_i.axhline((trace.i_dc[0] + expected) * 1e6, color="k", lw=0.5, ls="--")
ax_i.axvline(step_at, color="r", lw=0.5)
ax_i.set_ylabel("flux-bias current (uA)")
ax_i.set_xlabel("feedback iteration")
fig.suptitle("Feedback holds P_sw = 50%; the bias trace mirrors the disturbance")
fig.tight_layout()

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig.savefig(out / "05_flux_feedback.png", dpi=120)
print(f"figure written to {out / '05_flux_feedback.png'}")
