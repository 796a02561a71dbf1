"""
Monte Carlo driver: realizations, fidelity traces, scaling fits and
post-selection of random sequences.
"""
from __future__ import annotations

import csv
import hashlib
import io
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .errors import ConfigError, DomainError, NumericalError
from .hamiltonian import HamiltonianSpec
from .propagator import EvolutionConfig, Evolver, propagate
from .protocols import ProtocolSpec, control_frames

THREADS_ENV = "RANDDD_THREADS"
INFIDELITY_FLOOR = 1e-12
CSV_HEADER = ("protocol", "seed", "n_real", "t_J", "fe_mean", "fe_stderr")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one fidelity trace."""

    system: HamiltonianSpec
    protocol: ProtocolSpec
    evolution: EvolutionConfig
    total_time: float
    n_realizations: int = 100
    master_seed: int = 0
    freeze_disorder: bool = False
    label: str | None = None

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be at least 1")
        if not self.total_time > 0:
            raise ConfigError("total_time must be positive")
        if self.protocol.group.n_qubits != self.system.n_qubits:
            raise ConfigError(
                f"protocol acts on {self.protocol.group.n_qubits} qubits, "
                f"system has {self.system.n_qubits}")

    @property
    def name(self) -> str:
        return self.label or self.protocol.label

    @property
    def n_intervals(self) -> int:
        n = int(round(self.total_time / self.evolution.dt))
        if n < 1:
            raise ConfigError("total_time is shorter than one interval")
        return n

    @property
    def stride(self) -> int:
        return self.evolution.sample_stride or self.protocol.group_size

    @property
    def effective_realizations(self) -> int:
        """Deterministic protocols on static systems need a single run."""
        if not self.protocol.randomized and self.system.anisotropy is None:
            return 1
        return self.n_realizations

    def digest(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


@dataclass
class FidelityTrace:
    """Mean entanglement fidelity with its standard error at sample times."""

    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_real: int
    meta: dict = field(default_factory=dict)
    samples: np.ndarray | None = None   # (n_real, n_t), per realization

    @property
    def label(self) -> str:
        return self.meta.get("protocol", "")

    @property
    def seed(self) -> int:
        return self.meta.get("seed", 0)

    def at(self, t: float, atol: float = 1e-9) -> int:
        """Index of the sample at time ``t``."""
        hits = np.flatnonzero(np.abs(self.t - t) <= atol * max(1.0, abs(t)))
        if not hits.size:
            raise ValueError(f"trace has no sample at t = {t}")
        return int(hits[0])

    @classmethod
    def from_samples(cls, t, samples, meta) -> FidelityTrace:
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        if n > 1:
            stderr = samples.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            stderr = np.zeros_like(mean)
        return cls(np.asarray(t, dtype=float), mean, stderr, n, dict(meta), samples)


# seeds ----------------------------------------------------------------

def realization_streams(master_seed: int, index: int, disorder_index: int | None = None):
    """Independent ``(control, disorder)`` generators for one realization.

    The disorder stream depends only on ``(master_seed, disorder_index)``, so
    protocols run at the same master seed see the same anisotropy draws.
    """
    di = index if disorder_index is None else disorder_index
    control = np.random.SeedSequence(master_seed, spawn_key=(index, 0))
    disorder = np.random.SeedSequence(master_seed, spawn_key=(di, 1))
    return np.random.default_rng(control), np.random.default_rng(disorder)


def _control_rng(control, protocol_seed):
    """Fresh copy of the realization's control stream.

    A protocol-level seed selects an independent substream, so several
    copies of one random protocol can be compared at the same master seed.
    """
    ss = control.bit_generator.seed_seq
    if protocol_seed is not None:
        ss = np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (protocol_seed,))
    return np.random.default_rng(ss)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# running --------------------------------------------------------------

def _check_compatible(cfgs):
    first = cfgs[0]
    for c in cfgs[1:]:
        if c.system != first.system:
            raise ConfigError("compared runs must share the same system")
        if (c.evolution.substeps, c.evolution.integrator) != \
                (first.evolution.substeps, first.evolution.integrator):
            raise ConfigError("compared runs must share substep settings")
        if c.master_seed != first.master_seed:
            raise ConfigError("compared runs must share the master seed")
        if c.freeze_disorder != first.freeze_disorder:
            raise ConfigError("compared runs must share the disorder policy")
    grids = {_sample_times(c).tobytes() for c in cfgs}
    if len(grids) > 1:
        raise ConfigError("compared runs have mismatched sampling grids")


def _sample_times(cfg: RunConfig) -> np.ndarray:
    n = cfg.n_intervals // cfg.stride
    return np.round(cfg.evolution.dt * cfg.stride * np.arange(1, n + 1), 12)


def _run_realization(cfgs, evolvers, r):
    """Fidelity samples of every config that still needs realization ``r``."""
    lead = cfgs[0]
    di = 0 if lead.freeze_disorder else r
    control, disorder = realization_streams(lead.master_seed, r, di)
    real = None
    if lead.system.anisotropy is not None:
        real = lead.system.anisotropy.sample(disorder)
    out = {}
    for key, group in evolvers.items():
        ev, members = group
        active = [i for i in members if r < cfgs[i].effective_realizations]
        if not active:
            continue
        seqs = []
        for i in active:
            c = cfgs[i]
            rng = _control_rng(control, c.protocol.seed) if c.protocol.randomized else None
            seqs.append(control_frames(c.protocol, c.n_intervals, rng))
        n_int = max(cfgs[i].n_intervals for i in active)
        strides = {cfgs[i].stride for i in active}
        # lockstep requires one stride; groups are keyed on (dt, stride)
        (stride,) = strides
        try:
            prop = propagate(ev, seqs, n_int, stride, real)
        except NumericalError as exc:
            raise NumericalError(f"realization {r}: {exc}") from exc
        for j, i in enumerate(active):
            out[i] = (prop.fidelity[j], prop.unitarity)
    return out


def _run_chunk(args):
    cfgs, rs = args
    evolvers = _build_evolvers(cfgs)
    return [_run_realization(cfgs, evolvers, r) for r in rs]


def _build_evolvers(cfgs):
    groups: dict = {}
    for i, c in enumerate(cfgs):
        key = (c.evolution.dt, c.stride, c.n_intervals)
        groups.setdefault(key, []).append(i)
    return {key: (Evolver(cfgs[idx[0]].system, cfgs[idx[0]].evolution), idx)
            for key, idx in groups.items()}


def run_comparison(cfgs) -> list[FidelityTrace]:
    """Run several protocols on one system with paired randomness.

    Realization ``r`` of every config uses the same control seed stream and
    the same anisotropy draw.  Configs with equal ``dt`` and sampling are
    evolved in lockstep so the physical interval propagators are computed
    once per realization.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("nothing to run")
    _check_compatible(cfgs)
    n_max = max(c.effective_realizations for c in cfgs)
    workers = min(_worker_count(), n_max)
    if workers > 1:
        chunks = [list(range(w, n_max, workers)) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [(cfgs, ch) for ch in chunks]))
        results = [None] * n_max
        for ch, part in zip(chunks, parts):
            for r, res in zip(ch, part):
                results[r] = res
    else:
        evolvers = _build_evolvers(cfgs)
        results = [_run_realization(cfgs, evolvers, r) for r in range(n_max)]
    traces = []
    for i, c in enumerate(cfgs):
        rows = [res[i] for res in results if i in res]
        samples = np.stack([f for f, _ in rows])
        meta = {
            "protocol": c.name,
            "seed": c.master_seed,
            "config_hash": c.digest(),
            "unitarity": max(u for _, u in rows),
            "dt": c.evolution.dt,
        }
        traces.append(FidelityTrace.from_samples(_sample_times(c), samples, meta))
    return traces


def run_protocol(cfg: RunConfig) -> FidelityTrace:
    """Monte Carlo estimate of the expected entanglement fidelity."""
    return run_comparison([cfg])[0]


# analysis -------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int


def scaling_fit(dts, traces, t_probe: float, confidence: float = 0.95) -> ScalingFit:
    """Least-squares slope of ``log(1 - F)`` against ``log(dt)`` at ``t_probe``."""
    dts = np.asarray(dts, dtype=float)
    if len(dts) != len(traces):
        raise ValueError("need one trace per dt")
    xs, ys = [], []
    for dt, tr in zip(dts, traces):
        infid = 1.0 - tr.mean[tr.at(t_probe)]
        if infid <= INFIDELITY_FLOOR:
            warnings.warn(f"infidelity {infid:.2e} at dt={dt} is below the numerical floor; "
                          "point excluded", stacklevel=2)
            continue
        xs.append(np.log(dt))
        ys.append(np.log(infid))
    if len(xs) < 4:
        raise ValueError(f"scaling fit needs at least 4 usable points, got {len(xs)}")
    fit = stats.linregress(xs, ys)
    half = stats.t.ppf(0.5 + confidence / 2, len(xs) - 2) * fit.stderr
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.stderr),
                      float(fit.slope - half), float(fit.slope + half), len(xs))


@dataclass
class Derandomization:
    best_seed: int
    trace: FidelityTrace
    ranking: list   # (seed, F_e at the objective time), best first


def candidate_seeds(master_seed: int, n: int) -> list[int]:
    state = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


def derandomize(cfg: RunConfig, n_candidates: int, t_objective: float) -> Derandomization:
    """Pick the single random realization with the best ``F_e`` at ``t_objective``."""
    if not cfg.protocol.randomized:
        raise DomainError("derandomization needs a randomized protocol")
    if cfg.system.anisotropy is not None:
        raise DomainError("derandomization needs a static system")
    if n_candidates < 1:
        raise ValueError("need at least one candidate")
    scored = []
    traces = {}
    for seed in candidate_seeds(cfg.master_seed, n_candidates):
        tr = run_protocol(replace(cfg, master_seed=seed, n_realizations=1))
        traces[seed] = tr
        scored.append((seed, float(tr.mean[tr.at(t_objective)])))
    ranking = sorted(scored, key=lambda s: -s[1])
    best = ranking[0][0]
    return Derandomization(best, traces[best], ranking)


# CSV ------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.17g}"


def traces_to_csv(traces) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for tr in traces:
        for t, m, s in zip(tr.t, tr.mean, tr.stderr):
            w.writerow((tr.label, tr.seed, tr.n_real, _fmt(t), _fmt(m), _fmt(s)))
    return buf.getvalue()


def write_csv(traces, path):
    with open(path, "w", newline="") as fh:
        fh.write(traces_to_csv(traces))


def read_csv(path_or_text) -> list[FidelityTrace]:
    """Load traces back from CSV; accepts a path or the CSV text itself."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text, newline="") as fh:
            text = fh.read()
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {tuple(rows[0].keys())}")
    order: list[str] = []
    grouped: dict[str, list] = {}
    for row in rows:
        key = row["protocol"]
        if key not in grouped:
            order.append(key)
            grouped[key] = []
        grouped[key].append(row)
    out = []
    for key in order:
        g = grouped[key]
        meta = {"protocol": key, "seed": int(g[0]["seed"])}
        out.append(FidelityTrace(
            np.array([float(r["t_J"]) for r in g]),
            np.array([float(r["fe_mean"]) for r in g]),
            np.array([float(r["fe_stderr"]) for r in g]),
            int(g[0]["n_real"]), meta))
    return out
