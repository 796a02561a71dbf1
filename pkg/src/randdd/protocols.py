"""
Control-frame sequences for deterministic and randomized decoupling.

Every protocol is reduced to a list of frames ``g_0, g_1, ...``: the
cumulative control operator in force during each interval of length ``dt``.
Pulses are derived as ratios of successive frames.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .groups import ControlPath, DecouplingGroup
from .pauli import PauliString, pauli_mul

KINDS = ("free", "pdd", "sdd", "cdd", "nrd", "emd", "rpd", "srpd", "interpolated")
RANDOM_KINDS = frozenset({"nrd", "emd", "rpd", "srpd", "interpolated"})


@dataclass(frozen=True)
class ProtocolSpec:
    """Tagged description of a decoupling protocol.

    ``path`` is required for the deterministic kinds and EMD, ``outer_group``
    for EMD, ``level`` for CDD and interpolated DD.  ``arity`` is the number
    of copies of the previous level in each concatenation step and defaults
    to the group order.  ``switch_index`` (interpolated DD only) is the
    interval at which concatenated DD hands over to symmetric random paths.
    """

    kind: str
    group: DecouplingGroup | None = None
    path: ControlPath | None = None
    outer_group: DecouplingGroup | None = None
    level: int = 1
    arity: int | None = None
    switch_index: int = 0
    seed: int | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ConfigError(f"unknown protocol kind {self.kind!r}")
        if self.group is None and self.path is not None:
            object.__setattr__(self, "group", self.path.group)
        if self.group is None:
            raise ConfigError(f"protocol {kind} needs a decoupling group")
        if kind in ("pdd", "sdd", "cdd", "emd", "interpolated") and self.path is None:
            object.__setattr__(self, "path", ControlPath.listed(self.group))
        if self.path is not None and self.path.group is not self.group \
                and self.path.group != self.group:
            raise ConfigError("control path does not belong to the protocol group")
        if kind == "emd":
            if self.outer_group is None:
                raise ConfigError("EMD needs an outer group")
            if self.outer_group.n_qubits != self.group.n_qubits:
                raise ConfigError("outer group acts on a different number of qubits")
        if self.level < 0:
            raise ConfigError("concatenation level must be non-negative")
        if self.arity is not None and self.group is not None \
                and not 1 <= self.arity <= len(self.group):
            raise ConfigError(f"arity must lie in 1..{len(self.group)}")
        if kind == "interpolated":
            if self.switch_index < 0 or self.switch_index % len(self.group):
                raise ConfigError("switch_index must be a whole number of cycles")

    @property
    def randomized(self) -> bool:
        return self.kind in RANDOM_KINDS

    @property
    def group_size(self) -> int:
        return len(self.group)

    @property
    def label(self) -> str:
        if self.kind == "cdd":
            return f"cdd{self.level}"
        return self.kind


@dataclass(frozen=True)
class FrameSequence:
    frames: tuple[PauliString, ...]
    cycle_len: int

    def __len__(self):
        return len(self.frames)

    def __getitem__(self, i):
        return self.frames[i]


def _repeat(cycle, n):
    reps = -(-n // len(cycle))
    return (tuple(cycle) * reps)[:n]


def _cdd_pulses(path: ControlPath, level: int, arity: int) -> list[PauliString]:
    """Pulse applied after each interval of the level-``level`` sequence.

    Level 1 is the periodic sequence with ``P_k = g_k g_{k-1}^dagger`` and a
    closing pulse back to ``g_0``.  Level ``l+1`` is ``C_l Q_1 C_l Q_2 ...
    C_l Q_arity`` where ``Q`` uses the first ``arity`` frames of the path;
    a ``Q`` pulse coinciding with the last pulse of ``C_l`` is merged into it.
    """
    g = path.frames
    m = len(g)
    base = [pauli_mul(g[(k + 1) % m], g[k].dagger()) for k in range(m)]
    outer = [pauli_mul(g[(k + 1) % arity], g[k].dagger()) for k in range(arity)]
    seq = base
    for _ in range(level - 1):
        nxt = []
        for q in outer:
            block = list(seq)
            block[-1] = pauli_mul(q, block[-1])
            nxt.extend(block)
        seq = nxt
    return seq


def cdd_length(path: ControlPath, level: int, arity: int | None = None) -> int:
    if level == 0:
        return 1
    a = len(path) if arity is None else arity
    return len(path) * a ** (level - 1)


def _cdd_frames(spec: ProtocolSpec, n: int):
    ident = PauliString.identity(spec.group.n_qubits)
    if spec.level == 0:
        return (ident,) * n, 1
    arity = spec.arity or len(spec.group)
    length = cdd_length(spec.path, spec.level, arity)
    if n < length:
        warnings.warn(
            f"CDD level {spec.level} needs {length} intervals; truncated to {n}",
            stacklevel=3)
    pulses = _cdd_pulses(spec.path, spec.level, arity)
    frames = [ident]
    for k in range(n - 1):
        frames.append(pauli_mul(pulses[k % length], frames[-1]))
    return tuple(frames), length


def _random_cycles(group, rng):
    """Uniformly random orderings of the group, the first one identity-first.

    Only the very first frame is pinned to the identity; later cycles start
    anywhere, which amounts to a random group border on every cycle.
    """
    size = len(group)
    order = np.concatenate(([0], 1 + rng.permutation(size - 1)))
    while True:
        yield [group.elements[i] for i in order]
        order = rng.permutation(size)


def _rpd_frames(group, n, rng):
    out = []
    cycles = _random_cycles(group, rng)
    while len(out) < n:
        out.extend(next(cycles))
    return out[:n]


def _srpd_frames(group, n, rng):
    out = []
    cycles = _random_cycles(group, rng)
    while len(out) < n:
        cyc = next(cycles)
        out.extend(cyc + cyc[::-1])
    return out[:n]


def _emd_frames(spec, n, rng):
    inner = spec.path.frames
    outer = spec.outer_group.elements
    out = []
    first = True
    while len(out) < n:
        b = outer[0] if first else outer[int(rng.integers(len(outer)))]
        first = False
        out.extend(pauli_mul(b, g) for g in inner)
    return out[:n]


def control_frames(spec: ProtocolSpec, n_intervals: int,
                   rng: np.random.Generator | None = None) -> FrameSequence:
    """Frames for the first ``n_intervals`` intervals of ``spec``.

    Frame 0 is the identity for every kind; random kinds draw from ``rng``
    (or a generator seeded from ``spec.seed``).
    """
    if n_intervals < 1:
        raise ValueError("n_intervals must be at least 1")
    if spec.randomized and rng is None:
        if spec.seed is None:
            raise ConfigError(f"protocol {spec.kind} is randomized and needs an rng")
        rng = np.random.default_rng(spec.seed)
    n = n_intervals
    kind = spec.kind
    G = spec.group_size
    if kind == "free":
        return FrameSequence((PauliString.identity(spec.group.n_qubits),) * n, G)
    if kind == "pdd":
        return FrameSequence(_repeat(spec.path.frames, n), G)
    if kind == "sdd":
        pal = spec.path.frames + spec.path.frames[::-1]
        return FrameSequence(_repeat(pal, n), 2 * G)
    if kind == "cdd":
        frames, length = _cdd_frames(spec, n)
        return FrameSequence(frames, length)
    if kind == "nrd":
        idx = rng.integers(G, size=n)
        idx[0] = 0
        return FrameSequence(tuple(spec.group.elements[i] for i in idx), G)
    if kind == "rpd":
        return FrameSequence(tuple(_rpd_frames(spec.group, n, rng)), G)
    if kind == "srpd":
        return FrameSequence(tuple(_srpd_frames(spec.group, n, rng)), 2 * G)
    if kind == "emd":
        return FrameSequence(tuple(_emd_frames(spec, n, rng)), G)
    # interpolated: concatenated prefix, then symmetric random paths
    k = min(spec.switch_index, n)
    head = _cdd_frames(spec, k)[0] if k else ()
    tail = _srpd_frames(spec.group, n - k, rng) if n > k else []
    return FrameSequence(tuple(head) + tuple(tail), 2 * G)


def pulses_from_frames(frames) -> list[PauliString]:
    """``P_k = g_k g_{k-1}^dagger`` for ``k = 1 .. len(frames) - 1``."""
    fr = frames.frames if isinstance(frames, FrameSequence) else tuple(frames)
    if not fr:
        raise ValueError("frame sequence is empty")
    return [pauli_mul(fr[k], fr[k - 1].dagger()) for k in range(1, len(fr))]


def frames_from_pulses(first: PauliString, pulses) -> list[PauliString]:
    """Inverse of :func:`pulses_from_frames` given the initial frame."""
    out = [first]
    for p in pulses:
        out.append(pauli_mul(p, out[-1]))
    return out
