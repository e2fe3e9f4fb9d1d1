# %% Fast switching and link performance
import numpy as np

from mcfswitch.ber import crosstalk_penalty
from mcfswitch.config import load_config
from mcfswitch.scenario import run_ber_sweep, run_switching

cfg = load_config()

# %% Round-robin switching at two control samples per core
res = run_switching(cfg)
ex = res.report.extra
print(f"median 10-90 rise  {res.report.rise_time_s * 1e6:.3f} us")
print(f"worst rise         {ex['rise_time_max_s'] * 1e6:.3f} us")
print(f"dwell (mean)       {ex['dwell_mean_s'] * 1e6:.3f} us of {ex['commanded_dwell_s'] * 1e6:.2f} us")
print(f"long-swing steps   {ex['n_long_swing_transitions']} of {ex['n_transitions']}")

# %% Fine trace around a few transitions
ft = res.fine_trace
t0 = ft.t[0]
for i in range(0, 1000, 25):
    print(f"{(ft.t[i] - t0) * 1e6:6.3f} us  target {ft.target_core[i]}  {ft.p[:, i]}")

# %% Sensitivity penalty from eye closure against crosstalk level
for xt in (-26, -24, -22, -20, -18, -17, -16):
    print(f"IC-XT {xt:4d} dB  ->  penalty {crosstalk_penalty(float(xt)):.2f} dB")

# %% Per-core penalties at the simulated crosstalk
cfg_short = load_config(text="[ber]\nmc_bits = 1000000\nmc_targets = 0.001, 0.0001\n")
ber = run_ber_sweep(cfg_short).report.extra
for c in range(1, 5):
    print(f"core {c}: IC-XT {ber[f'ic_xt_core{c}_db']:.2f} dB, penalty {ber[f'penalty_core{c}_db']:.2f} dB")
print(f"mean penalty {ber['penalty_mean_db']:.2f} dB")
