"""
How infidelity scales with the interval length
==============================================

On a four-spin Heisenberg chain, periodic DD errors shrink as dt^2,
the time-symmetrized version as dt^4, and naive random decoupling only
as dt.  We fit the log-log slopes at a fixed time.
"""
from randdd.experiment import run_protocol, scaling_fit
from randdd.presets import expand_preset, get_preset

# %%
for name, reps in [("scaling-pdd", 1), ("scaling-sdd", 1), ("scaling-nrd", 40)]:
    preset = get_preset(name)
    traces = []
    for dt in preset.dt_grid:
        stride = round(preset.t_probe / dt)
        (cfg, _), = expand_preset(name, [f"evolution.dt={dt!r}",
                                         f"evolution.sample_stride={stride}",
                                         f"run.n_realizations={reps}"])
        traces.append(run_protocol(cfg))
    fit = scaling_fit(preset.dt_grid, traces, preset.t_probe)
    print(f"{name:12s} slope {fit.slope:.2f}  (95% CI {fit.ci_low:.2f} .. {fit.ci_high:.2f})")
