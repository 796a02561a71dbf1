"""
Logical-frame propagation under Pauli control frames.

The toggled propagator after ``K`` intervals is

    U(T) = prod_{m<K} g_m^dagger U_m g_m ,

with ``U_m`` the free evolution over interval ``m``.  Because every frame is
a Pauli string, ``g^dagger U g`` is an index permutation with phases and
never needs a matrix product.

Hamiltonians of the form handled here often commute with the global parity
operators ``prod Z`` and ``prod X``.  Pauli conjugation preserves that
property, so all propagators are block diagonal in the joint eigenbasis of
those parities.  :class:`BlockBasis` picks the largest such symmetry present
and stores every operator as a stack of diagonal blocks.  Pauli strings stay
phased permutations in that basis, which keeps conjugation cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, ValidationError
from .hamiltonian import (AnisotropyRealization, HamiltonianSpec, anisotropy_delta,
                          check_hermitian, hamiltonian_terms, terms_to_matrix)
from .pauli import PauliString, monomial_action

UNITARITY_TOL = 1e-8
SUBSTEPS_PER_PERIOD = 40
INTEGRATORS = ("midpoint", "magnus4")


@dataclass(frozen=True)
class EvolutionConfig:
    """Interval length ``dt`` (units of 1/J) and sampling options.

    ``substeps`` splits each interval for time-dependent Hamiltonians; None
    picks :func:`default_substeps`.  ``sample_stride`` is the number of
    intervals between fidelity samples; None uses the protocol cycle.
    """

    dt: float
    substeps: int | None = None
    sample_stride: int | None = None
    integrator: str = "magnus4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.substeps is not None and self.substeps < 1:
            raise ValueError("substeps must be at least 1")
        if self.sample_stride is not None and self.sample_stride < 1:
            raise ValueError("sample_stride must be at least 1")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")


def default_substeps(spec: HamiltonianSpec, dt: float) -> int:
    """Substeps per interval resolving the fastest anisotropy harmonic."""
    if spec.anisotropy is None:
        return 1
    period = 2 * math.pi / (spec.anisotropy.max_rate * spec.J)
    return max(1, math.ceil(SUBSTEPS_PER_PERIOD * dt / period - 1e-9))


# dense helpers --------------------------------------------------------

def step_unitary(h: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i H dt)`` through a Hermitian eigendecomposition."""
    h = np.asarray(h)
    check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def entanglement_fidelity(u: np.ndarray, d: int | None = None) -> float:
    """``|tr(U) / d|**2``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {u.shape}")
    d = u.shape[0] if d is None else d
    return float(min(1.0, abs(np.trace(u) / d) ** 2))


def _expm_blocks(h, tau):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * tau)[..., None, :]) @ v.conj().transpose(0, 2, 1)


# block basis ----------------------------------------------------------

class BlockBasis:
    """Joint eigenbasis of the global parities shared by a set of terms.

    ``kind`` is ``"zx"`` (both parities, even ``n``: four blocks), ``"z"``
    (``prod Z`` only: two blocks in the computational basis) or ``"dense"``
    (a single block).
    """

    def __init__(self, n_qubits: int, kind: str = "dense"):
        self.n_qubits = n = n_qubits
        self.d = d = 1 << n
        self.kind = kind
        c = np.arange(d, dtype=np.int64)
        parity = np.bitwise_count(c) & 1
        if kind == "dense":
            self.nb = 1
            reps, signs = c, np.ones(d, dtype=np.int64)
        elif kind == "z":
            self.nb = 2
            reps = np.concatenate([c[parity == 0], c[parity == 1]])
            signs = np.ones(d, dtype=np.int64)
        elif kind == "zx":
            if n % 2 or n < 2:
                raise ValueError("zx block basis needs an even number of qubits")
            self.nb = 4
            half = c[: d // 2]
            hp = parity[: d // 2]
            reps = np.concatenate([half[hp == 0], half[hp == 0], half[hp == 1], half[hp == 1]])
            q = d // 4
            signs = np.concatenate([np.ones(q), -np.ones(q), np.ones(q), -np.ones(q)]).astype(np.int64)
        else:
            raise ValueError(f"unknown block basis kind {kind!r}")
        self.m = d // self.nb
        self.reps = reps
        self.signs = signs
        lookup = np.full((d, 2), -1, dtype=np.int64)
        lookup[reps, (signs < 0).astype(np.int64)] = np.arange(d)
        self._lookup = lookup
        v = np.zeros((d, d))
        if kind == "zx":
            v[reps, np.arange(d)] = 1 / math.sqrt(2)
            v[reps ^ (d - 1), np.arange(d)] = signs / math.sqrt(2)
        else:
            v[reps, np.arange(d)] = 1.0
        self.V = v
        self._actions = {}

    @classmethod
    def for_terms(cls, terms, n_qubits: int) -> BlockBasis:
        """Largest parity symmetry commuting with every ``(coef, P)`` term."""
        paulis = [p for _, p in terms]
        z_sym = all(p.x.bit_count() % 2 == 0 for p in paulis)
        x_sym = all(p.z.bit_count() % 2 == 0 for p in paulis)
        if z_sym and x_sym and n_qubits % 2 == 0:
            return cls(n_qubits, "zx")
        if z_sym:
            return cls(n_qubits, "z")
        return cls(n_qubits, "dense")

    def identity(self) -> np.ndarray:
        return np.broadcast_to(np.eye(self.m, dtype=complex), (self.nb, self.m, self.m)).copy()

    def to_blocks(self, mat: np.ndarray, check: bool = True) -> np.ndarray:
        if mat.shape != (self.d, self.d):
            raise DimensionError(f"matrix shape {mat.shape} does not match dimension {self.d}")
        full = self.V.T @ mat @ self.V
        m = self.m
        blocks = np.stack([full[b * m:(b + 1) * m, b * m:(b + 1) * m] for b in range(self.nb)])
        if check and self.nb > 1:
            off = np.abs(full).sum() - np.abs(blocks).sum()
            if off > 1e-9 * max(1.0, np.abs(full).sum()):
                raise ValidationError("matrix is not block diagonal in the parity basis")
        return blocks

    def from_blocks(self, blocks: np.ndarray) -> np.ndarray:
        m = self.m
        full = np.zeros((self.d, self.d), dtype=complex)
        for b in range(self.nb):
            full[b * m:(b + 1) * m, b * m:(b + 1) * m] = blocks[b]
        return self.V @ full @ self.V.T

    def action(self, g: PauliString):
        """Block permutation, in-block targets and phases of ``g``.

        Returns ``(tb, tj, phi)``: basis vector ``j`` of block ``b`` is sent
        to ``phi[b, j]`` times vector ``tj[b, j]`` of block ``tb[b]``.
        """
        key = g.key
        hit = self._actions.get(key)
        if hit is not None and hit[0] == g.phase:
            return hit[1]
        target, values = monomial_action(g)
        reps, signs = self.reps, self.signs
        phi = values[reps]
        q = target[reps]
        if self.kind == "zx":
            s2 = signs * (-1) ** (g.z.bit_count() % 2)
            flip = q >= self.d // 2
            q = np.where(flip, q ^ (self.d - 1), q)
            phi = phi * np.where(flip, s2, 1)
        else:
            s2 = signs
        t = self._lookup[q, (s2 < 0).astype(np.int64)]
        tb = (t // self.m).reshape(self.nb, self.m)
        if np.any(tb != tb[:, :1]):
            raise ValidationError("frame does not preserve the parity blocks")
        out = (tb[:, 0], (t % self.m).reshape(self.nb, self.m), phi.reshape(self.nb, self.m))
        if len(self._actions) < 65536:
            self._actions[key] = (g.phase, out)
        return out

    def conjugate(self, blocks: np.ndarray, g: PauliString) -> np.ndarray:
        """``g^dagger W g`` for a block-diagonal ``W``."""
        tb, tj, phi = self.action(g)
        gathered = blocks[tb[:, None, None], tj[:, :, None], tj[:, None, :]]
        return phi.conj()[:, :, None] * gathered * phi[:, None, :]


# evolution ------------------------------------------------------------

class Evolver:
    """Interval propagators for one system and interval length.

    Static systems are exponentiated once and toggled copies are cached by
    frame.  Time-dependent systems are integrated per interval with
    ``substeps`` steps of the chosen integrator and are not cached.
    """

    def __init__(self, spec: HamiltonianSpec, cfg: EvolutionConfig,
                 cache_bytes: int = 256 * 2 ** 20):
        self.spec = spec
        self.cfg = cfg
        static, modulated = hamiltonian_terms(spec)
        n = spec.n_qubits
        self.basis = BlockBasis.for_terms(static + modulated, n)
        self.h_static = self.basis.to_blocks(terms_to_matrix(static, n))
        self.h_mod = (self.basis.to_blocks(terms_to_matrix(modulated, n))
                      if modulated else None)
        self.dt = cfg.dt
        self.substeps = cfg.substeps or default_substeps(spec, cfg.dt)
        self.static = self.h_mod is None
        self._w_static = _expm_blocks(self.h_static, self.dt) if self.static else None
        entry = self.h_static.nbytes
        self._cache_limit = max(16, cache_bytes // max(entry, 1))
        self._cache: dict = {}
        if self.h_mod is not None:
            self._comm = self.h_mod @ self.h_static - self.h_static @ self.h_mod

    @property
    def d(self) -> int:
        return self.basis.d

    def interval(self, m: int, real: AnisotropyRealization | None = None) -> np.ndarray:
        """Physical-frame propagator over interval ``m`` (block form)."""
        if self.static:
            return self._w_static
        if real is None:
            raise ValidationError("time-dependent system needs an anisotropy realization")
        s = self.substeps
        tau = self.dt / s
        t0 = m * self.dt
        u = None
        for k in range(s):
            a = t0 + k * tau
            if self.cfg.integrator == "midpoint":
                delta = anisotropy_delta(a + tau / 2, real, self.spec.J)
                h = self.h_static + delta * self.h_mod
            else:
                # two-point Gauss-Legendre Magnus step, fourth order
                c = math.sqrt(3) / 6
                d1, d2 = anisotropy_delta(np.array([a + (0.5 - c) * tau, a + (0.5 + c) * tau]),
                                          real, self.spec.J)
                # [H2, H1] = (d2 - d1) [B, A] with H_i = A + d_i B
                h = (self.h_static + 0.5 * (d1 + d2) * self.h_mod
                     + 1j * math.sqrt(3) * tau / 12 * (d1 - d2) * self._comm)
            step = _expm_blocks(h, tau)
            u = step if u is None else step @ u
        return u

    def toggled(self, w: np.ndarray, g: PauliString) -> np.ndarray:
        if not self.static:
            return self.basis.conjugate(w, g)
        key = g.key
        hit = self._cache.get(key)
        if hit is None:
            hit = self.basis.conjugate(w, g)
            if len(self._cache) < self._cache_limit:
                self._cache[key] = hit
        return hit


@dataclass
class Propagation:
    times: np.ndarray
    fidelity: np.ndarray             # (n_sequences, n_samples)
    unitarity: float                 # worst residual seen
    unitaries: list | None = None    # per sequence, list of block stacks


def _unitarity_residual(u):
    eye = np.eye(u.shape[-1])
    r = u.conj().transpose(0, 2, 1) @ u - eye
    return float(np.sqrt((np.abs(r) ** 2).sum(axis=(1, 2))).max())


def propagate(evolver: Evolver, frame_seqs, n_intervals: int, stride: int,
              real: AnisotropyRealization | None = None,
              keep: bool = False) -> Propagation:
    """Evolve several frame sequences in lockstep and sample ``F_e``.

    All sequences share the physical interval propagators, so paired
    protocols see identical disorder.  Samples are taken after every
    ``stride`` intervals.
    """
    if stride < 1:
        raise ValueError("stride must be at least 1")
    seqs = [s.frames if hasattr(s, "frames") else tuple(s) for s in frame_seqs]
    for s in seqs:
        if len(s) < n_intervals:
            raise ValueError(f"frame sequence has {len(s)} frames, need {n_intervals}")
        if s and s[0].n_qubits != evolver.spec.n_qubits:
            raise DimensionError("frames and system act on different qubit counts")
    basis = evolver.basis
    us = [basis.identity() for _ in seqs]
    n_samples = n_intervals // stride
    fid = np.empty((len(seqs), n_samples))
    kept = [[] for _ in seqs] if keep else None
    worst = 0.0
    d = basis.d
    sample = 0
    for m in range(n_intervals):
        w = evolver.interval(m, real)
        for i, s in enumerate(seqs):
            us[i] = np.matmul(evolver.toggled(w, s[m]), us[i])
        if (m + 1) % stride == 0:
            for i, u in enumerate(us):
                res = _unitarity_residual(u)
                worst = max(worst, res)
                if not res < UNITARITY_TOL:
                    raise NumericalError(
                        f"propagator lost unitarity (residual {res:.3e}) at interval {m + 1}")
                tr = np.trace(u, axis1=1, axis2=2).sum()
                fid[i, sample] = min(1.0, abs(tr / d) ** 2)
                if keep:
                    kept[i].append(u.copy())
            sample += 1
    times = evolver.dt * stride * np.arange(1, n_samples + 1)
    return Propagation(times, fid, worst, kept)


def toggled_evolution(system: HamiltonianSpec, frames, cfg: EvolutionConfig,
                      real: AnisotropyRealization | None = None):
    """Dense logical-frame propagators at every sample point.

    Returns a list of ``(t, U)`` pairs; ``cfg.sample_stride`` defaults to 1.
    """
    ev = Evolver(system, cfg)
    frames = frames.frames if hasattr(frames, "frames") else tuple(frames)
    stride = cfg.sample_stride or 1
    prop = propagate(ev, [frames], len(frames), stride, real, keep=True)
    return [(float(t), ev.basis.from_blocks(u)) for t, u in zip(prop.times, prop.unitaries[0])]
