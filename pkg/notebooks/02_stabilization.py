# %% Drift and perturb-and-observe locking
import numpy as np

from mcfswitch.config import load_config
from mcfswitch.scenario import run_stabilization

# %% A shortened run: 2 s free-running, then locked
cfg = load_config(text="""
[scenario]
duration_s = 4.0
free_running_s = 2.0
settle_s = 0.5
""")
res = run_stabilization(cfg)
tr = res.trace
p_max = res.report.extra["routed_power_ideal"]

# %% Normalized core-1 power, one line per 0.25 s
step = int(round(0.25 / (tr.t[1] - tr.t[0])))
for i in range(0, tr.t.size, step):
    bar = "#" * int(40 * tr.p[0, i] / p_max)
    print(f"{tr.t[i]:5.2f} s  {tr.p[0, i] / p_max:6.3f}  {bar}")

# %% Locked metrics
rep = res.report
print(f"extinction ratio  {rep.extinction_db:.2f} dB")
print(f"insertion loss    {rep.insertion_loss_db:.2f} dB")
for k in ("ic_xt_mean_db", "ic_xt_min_db", "ic_xt_max_db", "stabilized_norm",
          "free_running_min_norm", "free_running_max_norm"):
    print(f"{k:22s} {rep.extra[k]:.4f}")

# %% Seed spread
for seed in range(1, 6):
    r = run_stabilization(cfg.with_seed(seed)).report
    print(f"seed {seed}: ER {r.extinction_db:.2f} dB, IC-XT {r.extra['ic_xt_mean_db']:.2f} dB")
