"""
Named multi-protocol experiments.

A preset is a base configuration plus one override block per curve, all in
the flat ``key = value`` grammar of :mod:`randdd.config`.  Sampling strides
are chosen so that every curve of a preset shares one time grid.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import ResolvedConfig, build_run, resolve
from .errors import ConfigError
from .experiment import RunConfig


@dataclass(frozen=True)
class Preset:
    description: str
    base: dict
    curves: tuple = ()
    dt_grid: tuple = ()          # default grid for scaling presets
    t_probe: float | None = None


def _text(d: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in d.items())


# -- dipolar chain, nested Pauli group --------------------------------------

_FIG1_BASE = {
    "n_qubits": 6,
    "coupling.kind": "dipolar",
    "protocol.group": "nested",
    "protocol.path": "gray",
    "run.total_time": 22.528,
    "run.n_realizations": 100,
}


def _fig1_curves(dt_nrd, pdd_dts, cycle):
    # one sample per NRD cycle; finer PDD curves are sampled on the same grid
    step = dt_nrd * cycle

    def stride(dt):
        return round(step / dt)

    curves = [
        {"protocol.kind": "free", "evolution.dt": dt_nrd, "evolution.sample_stride": cycle},
        {"protocol.kind": "nrd", "evolution.dt": dt_nrd, "evolution.sample_stride": cycle},
        {"protocol.kind": "rpd", "evolution.dt": dt_nrd, "evolution.sample_stride": cycle},
    ]
    for dt in pdd_dts:
        curves.append({"protocol.kind": "pdd", "evolution.dt": dt,
                       "evolution.sample_stride": stride(dt), "run.label": f"pdd-dt{dt:g}"})
    return tuple(curves)


FIG1 = Preset(
    "Six dipolar spins: NRD at dt=1e-3 against PDD on a refining dt grid",
    _FIG1_BASE,
    _fig1_curves(1e-3, (1e-3, 5e-4, 2.5e-4), 1024),
)

FIG1_INSET = Preset(
    "Six dipolar spins inside the first cycle (dt=1e-3)",
    {**_FIG1_BASE, "evolution.dt": 1e-3, "evolution.sample_stride": 32, "run.total_time": 1.024},
    ({"protocol.kind": "nrd"}, {"protocol.kind": "pdd"}, {"protocol.kind": "rpd"}),
)

# With only 64 group elements NRD does not overtake the refined PDD curves;
# the small variant compares the two at equal dt.
FIG1_SMOKE = Preset(
    "Four dipolar spins: NRD against PDD at equal dt=0.004",
    {**_FIG1_BASE, "n_qubits": 4, "run.total_time": 60},
    _fig1_curves(0.004, (0.004,), 64),
)

FIG1_SMOKE_INSET = Preset(
    "Four dipolar spins inside the first cycle (dt=0.004)",
    {**_FIG1_BASE, "n_qubits": 4, "evolution.dt": 0.004, "evolution.sample_stride": 2,
     "run.total_time": 0.256},
    ({"protocol.kind": "nrd"}, {"protocol.kind": "pdd"}, {"protocol.kind": "rpd"}),
)

# -- eight dipolar spins, eight-element group --------------------------------

# identity-first inner paths for EMD besides the listed order
EMD_PATHS = (
    "listed",
    "order:0,5,3,7,1,6,2,4",
    "order:0,2,6,4,3,1,7,5",
    "order:0,7,4,1,5,3,6,2",
    "order:0,3,1,2,6,7,5,4",
)
SRPD_DRAWS = 5

FIG2 = Preset(
    "Eight dipolar spins: deterministic vs randomized protocols over the g8 group",
    {
        "n_qubits": 8,
        "coupling.kind": "dipolar",
        "protocol.group": "g8",
        "evolution.dt": 0.05,
        "evolution.sample_stride": 8,
        "run.total_time": 120,
        "run.n_realizations": 100,
    },
    (
        {"protocol.kind": "free"},
        {"protocol.kind": "pdd"},
        {"protocol.kind": "sdd"},
        {"protocol.kind": "cdd", "protocol.level": 3, "protocol.arity": 4},
        {"protocol.kind": "cdd", "protocol.level": 5, "protocol.arity": 4},
        {"protocol.kind": "nrd"},
        {"protocol.kind": "rpd"},
        {"protocol.kind": "srpd"},
        *({"protocol.kind": "srpd", "protocol.seed": k, "run.label": f"srpd-s{k}"}
          for k in range(1, SRPD_DRAWS)),
        *({"protocol.kind": "emd", "protocol.outer_group": "nested", "protocol.path": p,
           "run.label": "emd" if k == 0 else f"emd-p{k}"}
          for k, p in enumerate(EMD_PATHS)),
    ),
)

# -- nearest-neighbour chain with a fluctuating anisotropy -------------------

_FIG3_BASE = {
    "n_qubits": 8,
    "coupling.kind": "nearest_neighbor",
    "anisotropy.enabled": "true",
    "anisotropy.harmonics": 5,
    "anisotropy.r_lo": 0.9,
    "anisotropy.r_hi": 1.1,
    "protocol.group": "nn",
    "evolution.sample_stride": 4,
    "run.total_time": 4,
    "run.n_realizations": 100,
}
_FIG3_CURVES = (
    {"protocol.kind": "free"},
    {"protocol.kind": "pdd"},
    {"protocol.kind": "sdd"},
    {"protocol.kind": "cdd", "protocol.level": 3},
    {"protocol.kind": "nrd"},
    {"protocol.kind": "rpd"},
    {"protocol.kind": "srpd"},
)

FIG3 = Preset(
    "Eight spins, nearest-neighbour couplings with a fluctuating anisotropy, dt=0.05",
    {**_FIG3_BASE, "evolution.dt": 0.05},
    _FIG3_CURVES,
)

FIG3_INSET = Preset(
    "As fig3 with dt=0.025",
    {**_FIG3_BASE, "evolution.dt": 0.025},
    _FIG3_CURVES,
)

# -- scaling studies on a four-spin Heisenberg chain -------------------------

_HEIS4 = {
    "n_qubits": 4,
    "coupling.kind": "nearest_neighbor",
    "protocol.group": "nn",
    "evolution.dt": 0.01,
    "run.total_time": 0.8,
    "run.n_realizations": 100,
}
_SCALING_GRID = (0.00125, 0.0025, 0.005, 0.01)


def _scaling(kind):
    return Preset(f"{kind.upper()} infidelity against dt on a four-spin Heisenberg chain",
                  {**_HEIS4, "protocol.kind": kind}, (), _SCALING_GRID, 0.8)


PRESETS = {
    "fig1": FIG1,
    "fig1-inset": FIG1_INSET,
    "fig1-smoke": FIG1_SMOKE,
    "fig1-smoke-inset": FIG1_SMOKE_INSET,
    "fig2": FIG2,
    "fig3": FIG3,
    "fig3-inset": FIG3_INSET,
    "scaling-pdd": _scaling("pdd"),
    "scaling-sdd": _scaling("sdd"),
    "scaling-nrd": _scaling("nrd"),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def preset_texts(name: str) -> list[str]:
    """Config text of every curve in a preset."""
    p = get_preset(name)
    curves = p.curves or ({},)
    return [_text({**p.base, **c}) for c in curves]


def expand_preset(name: str, overrides=()) -> list[tuple[RunConfig, ResolvedConfig]]:
    """Resolved runs for every curve; ``overrides`` apply to all of them."""
    out = []
    for text in preset_texts(name):
        resolved = resolve(text, overrides)
        out.append((build_run(resolved), resolved))
    return out
