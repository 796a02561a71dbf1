"""
Decoupling groups, control paths through them, and averaging verifiers.

A group is an ordered list of Pauli strings with the identity first.  A path
is an ordering of the group that a periodic sequence visits once per cycle.
The verifiers compute the zeroth- and first-order average Hamiltonians of a
frame sequence directly from dense matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, ResourceError
from .pauli import PauliString, conjugate_matrix, pauli_mul

FIRST_ORDER_TOL = 1e-10
USER_PATH_TOL = 1e-8

_NESTED_LETTERS = "IXZY"

G8_LISTING = (
    "I",
    "Z3Z4Y5Y6X7X8",
    "Z2Y3X4Z6Y7X8",
    "Z2X3Y4Y5X6Z7",
    "Y2Y4X5Z6X7Z8",
    "Y2Z3X4Z5X6Y8",
    "X2Y3Z4X5Z7Y8",
    "X2X3Z5Y6Y7Z8",
)


@dataclass(frozen=True)
class DecouplingGroup:
    """Ordered set of Pauli strings, identity first, distinct up to phase."""

    elements: tuple[PauliString, ...]
    label: str = "custom"

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("a decoupling group needs at least the identity")
        n = els[0].n_qubits
        if any(g.n_qubits != n for g in els):
            raise DimensionError("group elements act on different qubit counts")
        if not els[0].is_identity():
            raise ValueError("element 0 of a decoupling group must be the identity")
        keys = [g.key for g in els]
        if len(set(keys)) != len(keys):
            raise ValueError("decoupling group has duplicate letter patterns")

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    @property
    def n_qubits(self) -> int:
        return self.elements[0].n_qubits

    def index_of(self, p: PauliString) -> int | None:
        """Position of the element matching ``p`` up to phase, or None."""
        table = self.__dict__.get("_index")
        if table is None:
            table = {g.key: i for i, g in enumerate(self.elements)}
            object.__setattr__(self, "_index", table)
        return table.get(p.key)

    def closure_defects(self) -> list[tuple[int, int]]:
        """Index pairs whose product falls outside the group."""
        bad = []
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                if self.index_of(pauli_mul(a, b)) is None:
                    bad.append((i, j))
        return bad

    def is_closed(self) -> bool:
        return not self.closure_defects()


@dataclass(frozen=True)
class ControlPath:
    """An identity-first ordering of the elements of ``group``."""

    group: DecouplingGroup
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(len(self.group))):
            raise ValueError("path order must be a permutation of the group indices")
        if order[0] != 0:
            raise ValueError("path must start at the identity")

    def __len__(self):
        return len(self.order)

    @property
    def frames(self) -> tuple[PauliString, ...]:
        return tuple(self.group.elements[i] for i in self.order)

    @classmethod
    def listed(cls, group: DecouplingGroup) -> ControlPath:
        """The path that visits elements in their stored order."""
        return cls(group, tuple(range(len(group))))


# built-in groups --------------------------------------------------------

def nested_pauli_group(n_qubits: int) -> DecouplingGroup:
    """All Pauli strings on qubits ``2..N`` with qubit 1 left untouched.

    Element ``k`` has base-4 digits (qubit 2 most significant, qubit ``N``
    least) selecting letters in the order ``I, X, Z, Y``.
    """
    if not 2 <= n_qubits <= 8:
        raise ResourceError(
            f"nested Pauli group supports 2 <= N <= 8 (4**(N-1) elements), got N={n_qubits}")
    els = []
    for digits in product(range(4), repeat=n_qubits - 1):
        letters = "I" + "".join(_NESTED_LETTERS[d] for d in digits)
        els.append(PauliString.from_letters(letters))
    return DecouplingGroup(tuple(els), label=f"nested{n_qubits}")


def g8_group() -> DecouplingGroup:
    """The eight-element group for eight dipolar-coupled qubits."""
    els = tuple(PauliString.parse(s, 8) for s in G8_LISTING)
    return DecouplingGroup(els, label="g8")


def nn_collective_group(n_qubits: int) -> DecouplingGroup:
    """Four collective rotations that cancel nearest-neighbour couplings.

    ``{1, Z_odd, Z_odd Y_even, Y_even}`` for an even number of qubits.
    """
    if n_qubits < 2 or n_qubits % 2:
        raise DomainError("nearest-neighbour collective group needs an even N >= 2")
    odd = {q: "Z" for q in range(1, n_qubits + 1, 2)}
    even = {q: "Y" for q in range(2, n_qubits + 1, 2)}
    els = (
        PauliString.identity(n_qubits),
        PauliString.from_sites(n_qubits, odd),
        PauliString.from_sites(n_qubits, {**odd, **even}),
        PauliString.from_sites(n_qubits, even),
    )
    return DecouplingGroup(els, label=f"nn{n_qubits}")


def _reflected_gray(n_digits: int, radix: int = 4):
    if n_digits == 0:
        return [()]
    inner = _reflected_gray(n_digits - 1, radix)
    out = []
    for d in range(radix):
        seq = inner if d % 2 == 0 else inner[::-1]
        out.extend((d,) + rest for rest in seq)
    return out


def gray_code_path(group: DecouplingGroup) -> ControlPath:
    """Path through a nested Pauli group that changes one qubit per pulse.

    Follows the reflected base-4 Gray code over the digits of the nested
    indexing, so every pulse (including the one closing the cycle) acts on
    exactly one qubit.
    """
    n = group.n_qubits
    if n < 2 or n > 8 or len(group) != 4 ** (n - 1):
        raise DomainError("gray_code_path needs a nested Pauli group")
    reference = nested_pauli_group(n)
    if [g.key for g in group.elements] != [g.key for g in reference.elements]:
        raise DomainError("gray_code_path needs a nested Pauli group")
    weights = [4 ** (n - 2 - k) for k in range(n - 1)]
    order = [sum(d * w for d, w in zip(code, weights)) for code in _reflected_gray(n - 1)]
    return ControlPath(group, tuple(order))


def symmetrize_path(frames) -> tuple[PauliString, ...]:
    """Palindromic frame sequence: the path followed by its reversal."""
    if isinstance(frames, ControlPath):
        frames = frames.frames
    frames = tuple(frames)
    return frames + frames[::-1]


# group / path files ------------------------------------------------------

def read_pauli_lines(text: str, n_qubits: int) -> list[PauliString]:
    """Parse one Pauli string per line; blank lines and ``#`` comments skipped."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(PauliString.parse(line, n_qubits))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def load_path_file(path, n_qubits: int) -> ControlPath:
    """Read a group file whose line order is the control path."""
    els = read_pauli_lines(Path(path).read_text(), n_qubits)
    group = DecouplingGroup(tuple(els), label=Path(path).stem)
    return ControlPath.listed(group)


def format_pauli_lines(frames) -> str:
    return "".join(f"{p}\n" for p in frames)


# verifiers --------------------------------------------------------------

def _frame_list(frames):
    if isinstance(frames, ControlPath):
        return frames.frames
    if isinstance(frames, DecouplingGroup):
        return frames.elements
    frames = tuple(frames)
    if not frames:
        raise ValueError("frame sequence is empty")
    return frames


def toggled_matrices(frames, h: np.ndarray) -> list[np.ndarray]:
    frames = _frame_list(frames)
    d = h.shape[0]
    if d != 1 << frames[0].n_qubits:
        raise DimensionError(
            f"Hamiltonian of size {d} does not match {frames[0].n_qubits}-qubit frames")
    return [conjugate_matrix(g, h) for g in frames]


def _traceless(m):
    return m - np.trace(m) / m.shape[0] * np.eye(m.shape[0])


def _norm(m) -> float:
    if not m.size:
        return 0.0
    return float(np.linalg.norm(m, 2))


def average_hamiltonian(frames, h: np.ndarray) -> np.ndarray:
    """Uniform average of ``g^dagger H g`` over the frames."""
    hs = toggled_matrices(frames, h)
    return sum(hs) / len(hs)


def verify_first_order(frames, h: np.ndarray) -> float:
    """Spectral norm of the traceless part of the frame-averaged Hamiltonian."""
    return _norm(_traceless(average_hamiltonian(frames, h)))


def first_order_correction(frames, h: np.ndarray, dt: float) -> np.ndarray:
    """Second Magnus term of a piecewise-constant cycle, per unit cycle time.

    ``-i / (2 T_c) * sum_{n>m} [H_n, H_m] dt**2`` with ``T_c = len(frames) dt``.
    """
    hs = toggled_matrices(frames, h)
    acc = np.zeros_like(hs[0])
    prefix = np.zeros_like(hs[0])
    for hn in hs:
        acc += hn @ prefix - prefix @ hn
        prefix += hn
    tc = len(hs) * dt
    return -1j / (2 * tc) * acc * dt ** 2


def verify_second_order(frames, h: np.ndarray, dt: float) -> float:
    """Spectral norm of :func:`first_order_correction`."""
    return _norm(first_order_correction(frames, h, dt))
