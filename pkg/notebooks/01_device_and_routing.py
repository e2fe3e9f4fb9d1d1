# %% Device model: splitter, phase table, routing
import numpy as np

from mcfswitch.controller import switching_table
from mcfswitch.field import make_dft_splitter, make_hadamard_splitter, output_powers, propagate, unit_input

np.set_printoptions(precision=4, suppress=True)

# %% The two splitters are unitary
for make in (make_dft_splitter, make_hadamard_splitter):
    m = make()
    err = np.abs(m.entries.conj().T @ m.entries - np.eye(4)).max()
    print(f"{make.__name__:24s} max |M'M - I| = {err:.1e}")

# %% Phase table and the power it routes, input on core 1
m = make_dft_splitter()
table = switching_table(m)
print("phases (rad), one row per target core")
print(table)
routed = np.array([output_powers(propagate(unit_input(0), m, table[t])) for t in range(4)])
print("output powers, one row per target core")
print(routed)

# %% Scan one modulated path with the others at the core-1 setting
phi = np.linspace(0, 2 * np.pi, 9)
for p in phi:
    ph = table[0].copy()
    ph[1] += p
    print(f"{p:5.2f} rad  ->  {output_powers(propagate(unit_input(0), m, ph))}")

# %% Calibrated device: arm imbalance caps the two-path fringe contrast
from mcfswitch.config import load_config
from mcfswitch.scenario import run_fringe_characterization

res = run_fringe_characterization(load_config(), n_points=512)
for k, v in res.report.extra.items():
    print(f"{k:32s} {v:.4f}")
