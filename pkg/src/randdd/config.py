"""
Flat ``key = value`` run configuration.

A config file holds one setting per line, ``#`` starts a comment.  Parsing
produces a :class:`~randdd.experiment.RunConfig`; the resolved settings
(defaults filled in) render back to text that parses to the same run.

Keys
----
System: ``n_qubits``, ``omega``, ``detuning`` (comma list), ``frame``
(rotating|lab), ``coupling.kind`` (dipolar|nearest_neighbor|explicit),
``coupling.exponent``, ``coupling.j``, ``coupling.table_file``,
``anisotropy.enabled``, ``anisotropy.harmonics``, ``anisotropy.base_rate``,
``anisotropy.r_lo``, ``anisotropy.r_hi``, ``anisotropy.freeze``.

Protocol: ``protocol.kind``, ``protocol.group`` (nested|g8|nn|file),
``protocol.path`` (listed|gray|order:i,j,...), ``protocol.path_file``,
``protocol.level``, ``protocol.arity``, ``protocol.switch_cycle``,
``protocol.outer_group`` (none|nested|g8|nn|same), ``protocol.seed``.

Evolution: ``evolution.dt``, ``evolution.substeps``,
``evolution.sample_stride``, ``evolution.integrator``.

Run: ``run.total_time``, ``run.n_realizations``, ``run.master_seed``,
``run.label``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .experiment import RunConfig
from .groups import (USER_PATH_TOL, ControlPath, g8_group,
                     gray_code_path, load_path_file, nested_pauli_group,
                     nn_collective_group, verify_first_order)
from .hamiltonian import (Anisotropy, HamiltonianSpec, hamiltonian_terms,
                          rotating_frame_hamiltonian, terms_to_matrix)
from .propagator import INTEGRATORS, EvolutionConfig
from .protocols import KINDS, ProtocolSpec

_REQUIRED = object()


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text):
    if text.lower() == "none":
        return ()
    return tuple(float(s) for s in text.split(",") if s.strip())


def _opt(conv):
    def inner(text):
        return None if text.lower() in ("", "none", "auto") else conv(text)
    return inner


def _choice(*options):
    def inner(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return inner


def _path_choice(text):
    if text in ("listed", "gray"):
        return text
    if text.startswith("order:"):
        [int(s) for s in text[6:].split(",")]
        return text
    raise ValueError(f"expected listed, gray or order:i,j,..., got {text!r}")


def _positive(conv):
    def inner(text):
        v = conv(text)
        if not v > 0:
            raise ValueError(f"must be positive, got {text}")
        return v
    return inner


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise ValueError(f"must be non-negative, got {text}")
    return v


# key -> (converter, default); _REQUIRED marks keys without a default
SCHEMA = {
    "n_qubits": (_positive(int), _REQUIRED),
    "omega": (float, 0.0),
    "detuning": (_floats, ()),
    "frame": (_choice("rotating", "lab"), "rotating"),
    "coupling.kind": (_choice("dipolar", "nearest_neighbor", "explicit"), "dipolar"),
    "coupling.exponent": (float, 3.0),
    "coupling.j": (float, 1.0),
    "coupling.table_file": (_opt(str), None),
    "anisotropy.enabled": (_bool, False),
    "anisotropy.harmonics": (_positive(int), 5),
    "anisotropy.base_rate": (_positive(float), 10 * np.pi),
    "anisotropy.r_lo": (_positive(float), 0.9),
    "anisotropy.r_hi": (_positive(float), 1.1),
    "anisotropy.freeze": (_bool, False),
    "protocol.kind": (_choice(*KINDS), _REQUIRED),
    "protocol.group": (_choice("nested", "g8", "nn", "file"), "nested"),
    "protocol.path": (_path_choice, "listed"),
    "protocol.path_file": (_opt(str), None),
    "protocol.level": (_nonneg_int, 1),
    "protocol.arity": (_opt(_positive(int)), None),
    "protocol.switch_cycle": (_nonneg_int, 0),
    "protocol.outer_group": (_choice("none", "nested", "g8", "nn", "same"), "none"),
    "protocol.seed": (_opt(_nonneg_int), None),
    "evolution.dt": (_positive(float), _REQUIRED),
    "evolution.substeps": (_opt(_positive(int)), None),
    "evolution.sample_stride": (_opt(_positive(int)), None),
    "evolution.integrator": (_choice(*INTEGRATORS), "magnus4"),
    "run.total_time": (_positive(float), _REQUIRED),
    "run.n_realizations": (_positive(int), 100),
    "run.master_seed": (_nonneg_int, 0),
    "run.label": (_opt(str), None),
}


@dataclass
class ResolvedConfig:
    """Typed settings with the line each one came from (None for defaults)."""

    values: dict
    lines: dict

    def __getitem__(self, key):
        return self.values[key]

    def line(self, key):
        return self.lines.get(key)


def parse_lines(text: str) -> dict:
    """Raw ``{key: (value, lineno)}`` pairs from config text."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key] = (value, lineno)
    return raw


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, value = (s.strip() for s in item.split("=", 1))
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r} in override")
    return key, value


SYSTEM_KEYS = tuple(k for k in SCHEMA if not k.startswith(("protocol.", "evolution.", "run.")))


def resolve(text: str = "", overrides=(), required=None) -> ResolvedConfig:
    """Apply defaults and type conversion; overrides are ``key=value`` strings.

    ``required`` restricts which keys must be present; keys outside it that
    are missing are left out of the result.
    """
    raw = parse_lines(text)
    for item in overrides:
        key, value = parse_override(item)
        raw[key] = (value, None)
    values, lines = {}, {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            text_value, lineno = raw[key]
            if text_value == "":
                raise ConfigError(f"key {key!r} has an empty value", lineno)
            try:
                values[key] = conv(text_value)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}", lineno) from None
            lines[key] = lineno
        elif default is _REQUIRED:
            if required is not None and key not in required:
                continue
            raise ConfigError(f"missing required key {key!r}")
        else:
            values[key] = default
    return ResolvedConfig(values, lines)


def _render_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        if not v:
            return "none"
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(resolved: ResolvedConfig) -> str:
    """Config text listing every key, defaults included."""
    return "".join(f"{k} = {_render_value(v)}\n" for k, v in resolved.values.items())


# building -------------------------------------------------------------

def _fail(resolved, key, msg):
    return ConfigError(msg, resolved.line(key))


def _load_table(path, n):
    table = np.loadtxt(path, dtype=float, ndmin=2)
    if table.shape[1] != 5:
        raise ValueError("coupling table rows must be 'i j Jx Jy Jz'")
    out = np.zeros((3, n, n))
    for i, j, jx, jy, jz in table:
        i, j = int(i) - 1, int(j) - 1
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"bad qubit pair ({i + 1}, {j + 1})")
        out[:, i, j] = out[:, j, i] = (jx, jy, jz)
    return out


def build_system(r: ResolvedConfig, base_dir=None) -> HamiltonianSpec:
    n = r["n_qubits"]
    table = None
    if r["coupling.kind"] == "explicit":
        fname = r["coupling.table_file"]
        if fname is None:
            raise _fail(r, "coupling.kind", "explicit coupling needs coupling.table_file")
        try:
            table = _load_table(_resolve_path(fname, base_dir), n)
        except (OSError, ValueError) as exc:
            raise _fail(r, "coupling.table_file", f"coupling table: {exc}") from None
    anis = None
    if r["anisotropy.enabled"]:
        if r["coupling.kind"] != "nearest_neighbor":
            raise _fail(r, "anisotropy.enabled",
                        "anisotropy applies to nearest-neighbour couplings only")
        if r["anisotropy.r_lo"] > r["anisotropy.r_hi"]:
            raise _fail(r, "anisotropy.r_lo", "anisotropy.r_lo exceeds anisotropy.r_hi")
        anis = Anisotropy(r["anisotropy.harmonics"], r["anisotropy.base_rate"],
                          r["anisotropy.r_lo"], r["anisotropy.r_hi"])
    detuning = r["detuning"]
    if detuning and len(detuning) != n:
        raise _fail(r, "detuning", f"detuning lists {len(detuning)} values for {n} qubits")
    try:
        spec = HamiltonianSpec(n, omega=r["omega"], coupling=r["coupling.kind"],
                               exponent=r["coupling.exponent"], J=r["coupling.j"],
                               table=table, anisotropy=anis, detuning=detuning)
    except ValueError as exc:
        raise _fail(r, "n_qubits", str(exc)) from None
    if r["frame"] == "rotating":
        spec, exact = rotating_frame_hamiltonian(spec)
        if not exact:
            raise _fail(r, "frame", "couplings do not commute with the uniform rotation; "
                                    "the rotating frame would be time dependent (use frame = lab)")
    return spec


def _builtin_group(name, n):
    if name == "nested":
        return nested_pauli_group(n)
    if name == "g8":
        if n != 8:
            raise ValueError("the g8 group acts on exactly 8 qubits")
        return g8_group()
    return nn_collective_group(n)


def _resolve_path(fname, base_dir):
    p = Path(fname)
    if base_dir is not None and not p.is_absolute():
        p = Path(base_dir) / p
    return p


def build_protocol(r: ResolvedConfig, system: HamiltonianSpec, base_dir=None) -> ProtocolSpec:
    n = system.n_qubits
    kind = r["protocol.kind"]
    if r["protocol.group"] == "file":
        fname = r["protocol.path_file"]
        if fname is None:
            raise _fail(r, "protocol.group", "protocol.group = file needs protocol.path_file")
        try:
            path = load_path_file(_resolve_path(fname, base_dir), n)
        except (OSError, ValueError) as exc:
            raise _fail(r, "protocol.path_file", f"path file: {exc}") from None
        group = path.group
        static, modulated = hamiltonian_terms(system)
        h = terms_to_matrix(static + modulated, n)
        residual = verify_first_order(path, h)
        if residual >= USER_PATH_TOL:
            raise _fail(r, "protocol.path_file",
                        f"path does not decouple the system to first order "
                        f"(residual {residual:.3e})")
    else:
        try:
            group = _builtin_group(r["protocol.group"], n)
        except ValueError as exc:
            raise _fail(r, "protocol.group", str(exc)) from None
        choice = r["protocol.path"]
        try:
            if choice == "gray":
                path = gray_code_path(group)
            elif choice.startswith("order:"):
                order = [int(s) for s in choice[6:].split(",")]
                path = ControlPath(group, tuple(order))
            else:
                path = ControlPath.listed(group)
        except ValueError as exc:
            raise _fail(r, "protocol.path", str(exc)) from None
    outer = None
    oname = r["protocol.outer_group"]
    if oname == "same":
        outer = group
    elif oname != "none":
        try:
            outer = _builtin_group(oname, n)
        except ValueError as exc:
            raise _fail(r, "protocol.outer_group", str(exc)) from None
    try:
        return ProtocolSpec(kind, group, path, outer_group=outer,
                            level=r["protocol.level"], arity=r["protocol.arity"],
                            switch_index=r["protocol.switch_cycle"] * len(group),
                            seed=r["protocol.seed"])
    except ValueError as exc:
        raise _fail(r, "protocol.kind", str(exc)) from None


def build_run(r: ResolvedConfig, base_dir=None) -> RunConfig:
    """Validated :class:`RunConfig` from resolved settings."""
    system = build_system(r, base_dir)
    protocol = build_protocol(r, system, base_dir)
    evolution = EvolutionConfig(r["evolution.dt"], substeps=r["evolution.substeps"],
                                sample_stride=r["evolution.sample_stride"],
                                integrator=r["evolution.integrator"])
    try:
        cfg = RunConfig(system, protocol, evolution, r["run.total_time"],
                        n_realizations=r["run.n_realizations"],
                        master_seed=r["run.master_seed"],
                        freeze_disorder=r["anisotropy.freeze"], label=r["run.label"])
        cfg.n_intervals
    except ValueError as exc:
        raise _fail(r, "run.total_time", str(exc)) from None
    return cfg


def parse_config(text: str, overrides=(), base_dir=None) -> RunConfig:
    """Parse config text (plus ``key=value`` overrides) into a run."""
    return build_run(resolve(text, overrides), base_dir)


def load_config(path, overrides=()) -> tuple[RunConfig, ResolvedConfig]:
    text = Path(path).read_text()
    resolved = resolve(text, overrides)
    return build_run(resolved, Path(path).parent), resolved


def load_system(path) -> HamiltonianSpec:
    """System described by the system keys of a config file; other keys are ignored."""
    resolved = resolve(Path(path).read_text(), required=SYSTEM_KEYS)
    return build_system(resolved, Path(path).parent)
