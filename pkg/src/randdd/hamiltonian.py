"""
Spin-chain Hamiltonians built from single-qubit fields and pairwise
``sigma^a sigma^a`` couplings.

Energies are measured in units of the reference coupling ``J`` and times in
units of ``1/J``.  A Hamiltonian is kept both as a list of ``(coefficient,
PauliString)`` terms and, on demand, as a dense Hermitian matrix.  Couplings
can be static or, for nearest-neighbour ``zz`` bonds, modulated by a random
multi-harmonic anisotropy signal.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError, ResourceError, ValidationError
from .pauli import MAX_DENSE_QUBITS, PauliString, monomial_action

COUPLING_KINDS = ("dipolar", "nearest_neighbor", "explicit")
_AXES = "XYZ"


@dataclass(frozen=True)
class AnisotropyRealization:
    """One draw of the harmonic rates ``R_k``."""

    rates: tuple[float, ...]
    base_rate: float = 10 * np.pi

    def delta(self, t):
        return anisotropy_delta(t, self)


@dataclass(frozen=True)
class Anisotropy:
    """Descriptor for ``Delta(t) = sum_k sin(base_rate * R_k * J t)``.

    ``R_k`` are drawn uniformly from ``[r_lo, r_hi]``.
    """

    harmonics: int = 5
    base_rate: float = 10 * np.pi
    r_lo: float = 0.9
    r_hi: float = 1.1

    def __post_init__(self):
        if self.harmonics < 1:
            raise ValueError("anisotropy needs at least one harmonic")
        if not self.r_lo <= self.r_hi:
            raise ValueError("anisotropy rate range is empty")

    def sample(self, rng: np.random.Generator) -> AnisotropyRealization:
        rates = rng.uniform(self.r_lo, self.r_hi, size=self.harmonics)
        return AnisotropyRealization(tuple(float(r) for r in rates), self.base_rate)

    @property
    def max_rate(self) -> float:
        """Fastest angular frequency of the signal, in units of J."""
        return self.base_rate * max(abs(self.r_lo), abs(self.r_hi))


def anisotropy_delta(t, real: AnisotropyRealization, J: float = 1.0):
    """Evaluate ``sum_k sin(base_rate * R_k * J * t)``; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    rates = np.asarray(real.rates, dtype=float)
    out = np.sin(real.base_rate * J * np.multiply.outer(t, rates)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters of a chain of ``n_qubits`` spins-1/2 with open boundaries.

    ``omega`` is the common Larmor frequency and ``detuning`` optional
    per-qubit offsets, so qubit ``i`` precesses at ``omega + detuning[i]``.
    ``coupling`` selects the pair profile: ``"dipolar"`` gives
    ``J |i-j|**-exponent`` on all three axes, ``"nearest_neighbor"`` gives
    ``J`` on adjacent pairs, and ``"explicit"`` reads ``table`` with shape
    ``(3, n, n)`` (axis, i, j).
    """

    n_qubits: int
    omega: float = 0.0
    coupling: str = "dipolar"
    exponent: float = 3.0
    J: float = 1.0
    table: tuple | None = None
    anisotropy: Anisotropy | None = None
    detuning: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.coupling not in COUPLING_KINDS:
            raise ValueError(f"unknown coupling kind {self.coupling!r}")
        if self.detuning and len(self.detuning) != self.n_qubits:
            raise ValueError("detuning list must have one entry per qubit")
        object.__setattr__(self, "detuning", tuple(float(d) for d in self.detuning))
        if self.coupling == "explicit":
            if self.table is None:
                raise ValueError("explicit coupling needs a table")
            arr = np.asarray(self.table, dtype=float)
            n = self.n_qubits
            if arr.shape == (3, n * n):     # the stored, flattened form
                arr = arr.reshape(3, n, n)
            if arr.shape != (3, n, n):
                raise ValueError(f"coupling table must have shape (3, {n}, {n})")
            if not np.allclose(arr, arr.transpose(0, 2, 1)):
                raise ValueError("coupling table must be symmetric in (i, j)")
            if np.any(np.diagonal(arr, axis1=1, axis2=2) != 0):
                raise ValueError("coupling table must vanish on the diagonal")
            object.__setattr__(self, "table", tuple(map(tuple, arr.reshape(3, -1))))

    @property
    def frequencies(self) -> np.ndarray:
        f = np.full(self.n_qubits, float(self.omega))
        if self.detuning:
            f += np.asarray(self.detuning)
        return f

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


def coupling_profile(kind: str, i: int, j: int, exponent: float = 3.0,
                     J: float = 1.0) -> float:
    """Pair strength between sites ``i`` and ``j`` for a built-in profile."""
    if i == j:
        raise DomainError("coupling profile is undefined for i == j")
    r = abs(i - j)
    if kind == "dipolar":
        return J * r ** (-exponent)
    if kind == "nearest_neighbor":
        return J if r == 1 else 0.0
    raise DomainError(f"no closed-form profile for coupling kind {kind!r}")


def coupling_tensor(spec: HamiltonianSpec) -> np.ndarray:
    """Static couplings ``J_ij^(a)`` as an array of shape ``(3, n, n)``."""
    n = spec.n_qubits
    if spec.coupling == "explicit":
        return np.asarray(spec.table, dtype=float).reshape(3, n, n).copy()
    out = np.zeros((3, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = coupling_profile(spec.coupling, i, j, spec.exponent, spec.J)
            out[:, i, j] = out[:, j, i] = v
    return out


def _pair_term(n, i, j, axis) -> PauliString:
    ch = _AXES[axis]
    return PauliString.from_sites(n, {i + 1: ch, j + 1: ch})


def hamiltonian_terms(spec: HamiltonianSpec):
    """Split the Hamiltonian into ``(static, modulated)`` term lists.

    The full operator at time ``t`` is ``sum(static) + Delta(t) *
    sum(modulated)``; ``modulated`` is empty without anisotropy.  Each list
    holds ``(coefficient, PauliString)`` pairs with real coefficients.
    """
    n = spec.n_qubits
    static: list[tuple[float, PauliString]] = []
    modulated: list[tuple[float, PauliString]] = []
    for i, w in enumerate(spec.frequencies):
        if w != 0.0:
            static.append((w / 2, PauliString.from_sites(n, {i + 1: "Z"})))
    J = coupling_tensor(spec)
    for i in range(n):
        for j in range(i + 1, n):
            for a in range(3):
                v = J[a, i, j]
                if v == 0.0:
                    continue
                term = (float(v), _pair_term(n, i, j, a))
                if spec.anisotropy is not None and a == 2 and j == i + 1:
                    modulated.append(term)
                else:
                    static.append(term)
    return static, modulated


def terms_to_matrix(terms, n_qubits: int) -> np.ndarray:
    """Dense matrix of ``sum coef * P`` over ``(coef, P)`` pairs."""
    if n_qubits > MAX_DENSE_QUBITS:
        raise ResourceError(f"{n_qubits} qubits exceeds the dense-matrix guard")
    d = 1 << n_qubits
    m = np.zeros((d, d), dtype=complex)
    cols = np.arange(d)
    for coef, p in terms:
        target, values = monomial_action(p)
        m[target, cols] += coef * values
    return m


def build_hamiltonian(spec: HamiltonianSpec, t: float = 0.0,
                      real: AnisotropyRealization | None = None):
    """Return ``(terms, matrix)`` for the Hamiltonian at time ``t``."""
    static, modulated = hamiltonian_terms(spec)
    terms = list(static)
    if modulated:
        if real is None:
            raise ConfigError("anisotropy is configured but no realization was given")
        delta = anisotropy_delta(t, real, spec.J)
        terms += [(c * delta, p) for c, p in modulated if c * delta != 0.0]
    return terms, terms_to_matrix(terms, spec.n_qubits)


def rotating_frame_hamiltonian(spec: HamiltonianSpec):
    """Move to the frame rotating at the common frequency ``omega``.

    Returns ``(spec_R, exact)``.  ``spec_R`` drops the uniform field and
    keeps the detunings.  ``exact`` is False when some pair has unequal
    ``x`` and ``y`` couplings, because such terms do not commute with the
    collective ``Z`` rotation and would pick up a ``2*omega`` time
    dependence that a static spec cannot represent.
    """
    J = coupling_tensor(spec)
    exact = spec.omega == 0.0 or bool(np.allclose(J[0], J[1]))
    return replace(spec, omega=0.0), exact


def check_hermitian(h: np.ndarray, atol: float = 1e-10):
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    resid = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if resid > atol:
        raise ValidationError(f"matrix is not Hermitian (residual {resid:.3e})")


def spectral_norm(h: np.ndarray) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    h = np.asarray(h)
    check_hermitian(h)
    if h.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(h))))
