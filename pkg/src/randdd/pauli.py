"""
Exact Pauli-string arithmetic with tracked phases.

A Pauli string on ``n`` qubits is stored as two bitmasks ``x`` and ``z`` plus
a phase exponent ``p`` (the phase is ``1j**p``).  Qubit ``i`` (1-based) lives
in bit ``n - i`` of both masks, which matches the computational-basis index
convention where qubit 1 is the leftmost tensor factor.  The single-site
letter encoded by ``(x, z)`` is::

    (0, 0) -> I    (1, 0) -> X    (0, 1) -> Z    (1, 1) -> Y

and the operator represented is ``1j**p * prod_i sigma_i``.  Products follow
the usual multiplication table (XY = iZ, YZ = iX, ZX = iY).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ResourceError

MAX_DENSE_QUBITS = 12

_PHASE_TEXT = ("+1", "+i", "-1", "-i")
_PHASE_VALUES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_SITE_RE = re.compile(r"([IXYZ])(\d+)")


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True, slots=True)
class PauliString:
    """Immutable Pauli string ``1j**phase * sigma_1 ... sigma_n``."""

    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("bitmask wider than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> PauliString:
        """Build from a dense letter string, ``letters[0]`` being qubit 1."""
        n = len(letters)
        x = z = 0
        for i, ch in enumerate(letters.upper()):
            try:
                bx, bz = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            bit = n - 1 - i
            x |= bx << bit
            z |= bz << bit
        return cls(n, x, z, phase)

    @classmethod
    def from_sites(cls, n_qubits: int, sites: dict[int, str],
                   phase: int = 0) -> PauliString:
        """Build from a ``{qubit (1-based): letter}`` mapping."""
        x = z = 0
        for q, ch in sites.items():
            if not 1 <= q <= n_qubits:
                raise ValueError(f"qubit index {q} out of range 1..{n_qubits}")
            bx, bz = _LETTER_BITS[ch.upper()]
            bit = n_qubits - q
            x |= bx << bit
            z |= bz << bit
        return cls(n_qubits, x, z, phase)

    @classmethod
    def parse(cls, text: str, n_qubits: int) -> PauliString:
        """Parse the text form produced by ``str()``, e.g. ``"-i X2Z5"``.

        The phase token is optional and defaults to ``+1``.
        """
        tokens = text.split()
        if not tokens:
            raise ValueError("empty Pauli string")
        phase = 0
        if tokens[0] in _PHASE_TEXT:
            phase = _PHASE_TEXT.index(tokens[0])
            tokens = tokens[1:]
        elif tokens[0] in ("+", "-", "1", "i", "-i", "+i"):
            raise ValueError(f"malformed phase token {tokens[0]!r}")
        body = "".join(tokens)
        if body in ("", "I"):
            return cls(n_qubits, 0, 0, phase)
        pos = 0
        sites: dict[int, str] = {}
        for m in _SITE_RE.finditer(body):
            if m.start() != pos:
                break
            pos = m.end()
            q = int(m.group(2))
            if q in sites:
                raise ValueError(f"qubit {q} appears twice in {text!r}")
            if m.group(1) != "I":
                sites[q] = m.group(1)
        if pos != len(body):
            raise ValueError(f"cannot parse Pauli string {text!r}")
        return cls.from_sites(n_qubits, sites, phase)

    # views ------------------------------------------------------------

    @property
    def letters(self) -> str:
        n = self.n_qubits
        return "".join(
            _BITS_LETTER[((self.x >> (n - 1 - i)) & 1, (self.z >> (n - 1 - i)) & 1)]
            for i in range(n)
        )

    @property
    def key(self) -> tuple[int, int]:
        """Letter pattern, i.e. the string with its phase forgotten."""
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def coefficient(self) -> complex:
        return _PHASE_VALUES[self.phase]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def support(self) -> list[int]:
        """1-based qubits carrying a non-identity letter."""
        s = self.x | self.z
        return [q for q in range(1, self.n_qubits + 1) if (s >> (self.n_qubits - q)) & 1]

    def __str__(self) -> str:
        n = self.n_qubits
        body = "".join(
            f"{ch}{q}" for q, ch in enumerate(self.letters, start=1) if ch != "I"
        )
        return f"{_PHASE_TEXT[self.phase]} {body or 'I'}"

    # algebra ----------------------------------------------------------

    def dagger(self) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, -self.phase)

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, phase)

    def commutes(self, other: PauliString) -> bool:
        _check_size(self, other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: PauliString) -> PauliString:
        return pauli_mul(self, other)

    def to_matrix(self) -> np.ndarray:
        return pauli_to_matrix(self)


def _check_size(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(
            f"Pauli strings act on {a.n_qubits} and {b.n_qubits} qubits")


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` including the phase."""
    _check_size(a, b)
    # sigma(x,z) = i^{x.z} X^x Z^z; moving Z^{z_a} past X^{x_b} costs (-1)^{z_a.x_b}
    x = a.x ^ b.x
    z = a.z ^ b.z
    e = (a.phase + b.phase
         + _popcount(a.x & a.z) + _popcount(b.x & b.z)
         + 2 * _popcount(a.z & b.x) - _popcount(x & z))
    return PauliString(a.n_qubits, x, z, e)


def conjugate_term(g: PauliString, term: PauliString) -> PauliString:
    """Return ``g^dagger @ term @ g``; only the sign of ``term`` can change."""
    _check_size(g, term)
    flip = (_popcount(g.x & term.z) + _popcount(g.z & term.x)) % 2
    return PauliString(term.n_qubits, term.x, term.z, term.phase + 2 * flip)


def monomial_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Columns of ``p`` as a phased permutation.

    Returns ``(target, values)`` with ``p |c> = values[c] |target[c]>`` for
    every computational basis index ``c``.
    """
    d = 1 << p.n_qubits
    c = np.arange(d, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(c & p.z) & 1).astype(np.int64)
    base = _PHASE_VALUES[(p.phase + _popcount(p.x & p.z)) % 4]
    return c ^ p.x, base * signs


def pauli_to_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``p`` (phase included)."""
    if p.n_qubits > MAX_DENSE_QUBITS:
        raise ResourceError(
            f"dense matrix for {p.n_qubits} qubits exceeds the {MAX_DENSE_QUBITS}-qubit guard")
    d = 1 << p.n_qubits
    target, values = monomial_action(p)
    m = np.zeros((d, d), dtype=complex)
    m[target, np.arange(d)] = values
    return m


def conjugate_matrix(g: PauliString, m: np.ndarray) -> np.ndarray:
    """Dense ``g^dagger @ m @ g`` computed by index permutation."""
    d = 1 << g.n_qubits
    if m.shape != (d, d):
        raise DimensionError(f"matrix of shape {m.shape} does not match {g.n_qubits} qubits")
    target, values = monomial_action(g)
    return values.conj()[:, None] * m[np.ix_(target, target)] * values[None, :]


def decompose_matrix(m: np.ndarray, atol: float = 1e-9) -> PauliString:
    """Recover the Pauli string proportional to ``m`` (a phase times a Pauli).

    Used as an independent route when checking products against dense
    matrices.
    """
    d = m.shape[0]
    n = d.bit_length() - 1
    if m.shape != (d, d) or (1 << n) != d:
        raise DimensionError(f"matrix of shape {m.shape} is not a qubit operator")
    col0 = m[:, 0]
    r = int(np.argmax(np.abs(col0)))
    x = r
    # diagonal of X^x m gives the Z part and phase
    diag = m[np.arange(d) ^ x, np.arange(d)]
    z = 0
    for k in range(n):
        if np.real(diag[1 << k] / diag[0]) < 0:
            z |= 1 << k
    cand = PauliString(n, x, z, 0)
    ref = pauli_to_matrix(cand)
    for p in range(4):
        if np.allclose(m, _PHASE_VALUES[p] * ref, atol=atol):
            return cand.with_phase(p)
    raise ValueError("matrix is not a phase times a Pauli string")
