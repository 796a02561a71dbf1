import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from oracles import nn_dense, physical_frame_propagator
from randdd.errors import ConfigError, DomainError
from randdd.experiment import (CSV_HEADER, THREADS_ENV, FidelityTrace, RunConfig,
                               candidate_seeds, derandomize, read_csv, realization_streams,
                               run_comparison, run_protocol, scaling_fit, traces_to_csv,
                               write_csv)
from randdd.groups import nested_pauli_group, nn_collective_group
from randdd.hamiltonian import Anisotropy, HamiltonianSpec, build_hamiltonian
from randdd.propagator import EvolutionConfig, entanglement_fidelity
from randdd.protocols import ProtocolSpec, control_frames

HEIS2 = HamiltonianSpec(2, coupling="nearest_neighbor")
DIP3 = HamiltonianSpec(3)
G3 = nested_pauli_group(3)


def cfg(kind, system=DIP3, group=G3, dt=0.05, total=1.6, n=8, stride=None, **kw):
    extra = {k: kw.pop(k) for k in ("outer_group", "level", "seed") if k in kw}
    return RunConfig(system, ProtocolSpec(kind, group, **extra),
                     EvolutionConfig(dt, sample_stride=stride), total, n, **kw)


def test_free_trace_is_exact():
    tr = run_protocol(cfg("free", stride=4))
    assert tr.n_real == 1 and np.all(tr.stderr == 0)
    _, h = build_hamiltonian(DIP3)
    ref = [entanglement_fidelity(expm(-1j * h * t)) for t in tr.t]
    np.testing.assert_allclose(tr.mean, ref, atol=1e-12)


def test_deterministic_static_runs_once():
    tr = run_protocol(cfg("pdd", n=50))
    assert tr.n_real == 1 and np.all(tr.stderr == 0)


def test_random_protocol_statistics():
    tr = run_protocol(cfg("nrd", n=12))
    assert tr.n_real == 12
    assert tr.samples.shape == (12, len(tr.t))
    np.testing.assert_allclose(tr.mean, tr.samples.mean(axis=0))
    np.testing.assert_allclose(tr.stderr, tr.samples.std(axis=0, ddof=1) / np.sqrt(12))
    assert np.all(tr.stderr > 0)


def test_trace_matches_dense_oracle_per_realization():
    c = cfg("rpd", n=3, total=0.8, stride=16)
    tr = run_protocol(c)
    _, h = build_hamiltonian(DIP3)
    for r in range(3):
        control, _ = realization_streams(c.master_seed, r)
        frames = control_frames(c.protocol, c.n_intervals, control).frames
        u = physical_frame_propagator(h, frames, 0.05)
        assert tr.samples[r, -1] == pytest.approx(entanglement_fidelity(u), abs=1e-12)


def test_anisotropy_pairs_disorder_across_protocols():
    sys8 = HamiltonianSpec(4, coupling="nearest_neighbor", anisotropy=Anisotropy())
    g = nn_collective_group(4)
    a, b = run_comparison([cfg("free", sys8, g, total=0.4, n=4),
                           cfg("pdd", sys8, g, total=0.4, n=4)])
    assert a.n_real == b.n_real == 4
    assert np.all(a.stderr > 0)
    # realizations differ only through the rates, drawn from a separate stream
    _, d0 = realization_streams(0, 0)
    _, d0_again = realization_streams(0, 0)
    assert Anisotropy().sample(d0) == Anisotropy().sample(d0_again)


def test_frozen_disorder():
    sys4 = HamiltonianSpec(4, coupling="nearest_neighbor", anisotropy=Anisotropy())
    g = nn_collective_group(4)
    tr = run_protocol(cfg("pdd", sys4, g, total=0.4, n=3, freeze_disorder=True))
    assert np.all(tr.stderr < 1e-14)


def test_streams_are_independent_of_protocol_list():
    a = run_comparison([cfg("nrd", n=5)])[0]
    b = run_comparison([cfg("pdd", n=5), cfg("nrd", n=5), cfg("rpd", n=5)])[1]
    np.testing.assert_array_equal(a.samples, b.samples)


def test_protocol_seed_gives_a_distinct_stream():
    a, b, c = run_comparison([cfg("srpd", n=4), cfg("srpd", n=4, seed=1, label="s1"),
                              cfg("srpd", n=4, seed=1, label="s1b")])
    assert not np.array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(b.samples, c.samples)


def test_reproducible_csv():
    runs = [cfg("nrd", n=6), cfg("sdd"), cfg("emd", n=6, outer_group=G3)]
    assert traces_to_csv(run_comparison(runs)) == traces_to_csv(run_comparison(runs))


def test_worker_processes_do_not_change_results(monkeypatch):
    runs = [cfg("nrd", n=6), cfg("rpd", n=6)]
    serial = traces_to_csv(run_comparison(runs))
    monkeypatch.setenv(THREADS_ENV, "2")
    assert traces_to_csv(run_comparison(runs)) == serial


def test_mixed_dt_on_common_grid():
    fine = cfg("pdd", dt=0.025, stride=32)
    coarse = cfg("nrd", dt=0.05, stride=16, n=4)
    a, b = run_comparison([fine, coarse])
    np.testing.assert_array_equal(a.t, b.t)


def test_incompatible_runs_rejected():
    with pytest.raises(ConfigError):
        run_comparison([cfg("pdd"), cfg("nrd", master_seed=3)])
    with pytest.raises(ConfigError):
        run_comparison([cfg("pdd", stride=4), cfg("nrd", stride=8)])
    with pytest.raises(ConfigError):
        run_comparison([cfg("pdd"), cfg("pdd", system=HamiltonianSpec(3, omega=1.0))])
    with pytest.raises(ValueError):
        run_comparison([])


def test_run_config_validation():
    with pytest.raises(ConfigError):
        cfg("pdd", n=0)
    with pytest.raises(ConfigError):
        cfg("pdd", total=-1)
    with pytest.raises(ConfigError):
        cfg("pdd", system=HEIS2)
    with pytest.raises(ConfigError):
        _ = cfg("pdd", total=0.01).n_intervals


def test_trace_lookup():
    tr = FidelityTrace.from_samples([0.1, 0.2], [[1.0, 0.9]], {"protocol": "x"})
    assert tr.at(0.2) == 1 and tr.n_real == 1 and np.all(tr.stderr == 0)
    with pytest.raises(ValueError):
        tr.at(0.15)


def synthetic(dts, slope, t_probe=0.8, scale=3.0):
    out = []
    for dt in dts:
        infid = scale * dt ** slope
        out.append(FidelityTrace.from_samples([t_probe], [[1 - infid]], {}))
    return out


def test_scaling_fit_recovers_slope():
    dts = [0.00125, 0.0025, 0.005, 0.01]
    fit = scaling_fit(dts, synthetic(dts, 2.0), 0.8)
    assert fit.slope == pytest.approx(2.0, abs=1e-6)
    assert fit.n_points == 4
    noisy = [FidelityTrace.from_samples([0.8], [[1 - 3 * dt ** 2 * f]], {})
             for dt, f in zip(dts, (1.1, 0.95, 1.05, 0.9))]
    fit = scaling_fit(dts, noisy, 0.8)
    assert fit.ci_low < fit.slope < fit.ci_high
    assert fit.ci_low <= 2.0 <= fit.ci_high


def test_scaling_fit_floor_and_size():
    dts = [0.001, 0.002, 0.004, 0.008]
    traces = synthetic(dts, 2.0)
    traces[0] = FidelityTrace.from_samples([0.8], [[1.0]], {})
    with pytest.warns(UserWarning, match="floor"), pytest.raises(ValueError, match="4 usable"):
        scaling_fit(dts, traces, 0.8)
    with pytest.raises(ValueError):
        scaling_fit(dts[:3], traces, 0.8)


def test_csv_round_trip(tmp_path):
    traces = run_comparison([cfg("nrd", n=4), cfg("pdd")])
    path = tmp_path / "out.csv"
    write_csv(traces, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    back = read_csv(path)
    assert [t.label for t in back] == ["nrd", "pdd"]
    for a, b in zip(traces, back):
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.stderr, b.stderr)
        np.testing.assert_array_equal(a.t, b.t)
        assert a.n_real == b.n_real
    assert traces_to_csv(back) == path.read_text()


def test_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


# de-randomization -----------------------------------------------------

def _heis_cfg(**kw):
    return RunConfig(HEIS2, ProtocolSpec("rpd", nested_pauli_group(2)),
                     EvolutionConfig(0.1, sample_stride=1), 0.3, 1, **kw)


def test_derandomize_single_candidate():
    c = _heis_cfg(master_seed=5)
    res = derandomize(c, 1, 0.3)
    assert res.best_seed == candidate_seeds(5, 1)[0]
    assert len(res.ranking) == 1


def test_derandomize_against_exhaustive_paths():
    c = _heis_cfg(master_seed=1)
    h = nn_dense(2)
    group = c.protocol.group
    # F_e at t = 3 dt for each of the six identity-first orderings
    exhaustive = {}
    for perm in itertools.permutations(range(1, 4)):
        frames = [group[i] for i in (0, *perm)][:3]
        exhaustive[perm] = entanglement_fidelity(physical_frame_propagator(h, frames, 0.1))
    res = derandomize(c, 30, 0.3)
    scores = dict(res.ranking)
    seen = set()
    for seed in scores:
        control, _ = realization_streams(seed, 0)
        frames = control_frames(c.protocol, 3, control).frames
        perm = tuple(group.index_of(f) for f in frames[1:3])
        match = [p for p in exhaustive if p[:2] == perm]
        seen.update(match)
        assert scores[seed] == pytest.approx(exhaustive[match[0]], abs=1e-12)
    assert len(seen) == 6
    assert res.ranking[0][1] == pytest.approx(max(exhaustive.values()), abs=1e-12)
    assert res.ranking[0][1] >= np.median([s for _, s in res.ranking])


def test_derandomize_rejects():
    with pytest.raises(DomainError):
        derandomize(cfg("pdd"), 3, 0.8)
    sys4 = HamiltonianSpec(4, coupling="nearest_neighbor", anisotropy=Anisotropy())
    with pytest.raises(DomainError):
        derandomize(cfg("nrd", sys4, nn_collective_group(4)), 3, 0.8)
