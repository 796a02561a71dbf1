"""
Decoupling under a fluctuating anisotropy
=========================================

The z couplings of a nearest-neighbour chain are modulated by a sum of
sinusoids with random rates.  When the interval length is comparable to
the modulation period, periodic sequences can do worse than no control,
while random protocols degrade gracefully.  Four spins keep this quick.
"""
import numpy as np

from randdd.config import parse_config
from randdd.experiment import run_comparison

BASE = """
n_qubits = 4
coupling.kind = nearest_neighbor
anisotropy.enabled = true
protocol.group = nn
evolution.sample_stride = {stride}
run.total_time = 2
run.n_realizations = 30
evolution.dt = {dt}
"""

# %%
for dt, stride in [(0.05, 4), (0.025, 8)]:
    text = BASE.format(dt=dt, stride=stride)
    runs = [parse_config(text, [f"protocol.kind={k}"]) for k in ("free", "pdd", "nrd", "srpd")]
    traces = run_comparison(runs)
    print(f"dt = {dt}")
    for tr in traces:
        print(f"  {tr.label:5s}", np.round(tr.mean[::2], 3))
