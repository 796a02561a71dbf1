"""
Decoupling groups and their first-order certificates
====================================================

A decoupling group averages a Hamiltonian away to first order when the
uniform average of its toggled copies is proportional to the identity.
This walk-through builds the three shipped groups and checks them.
"""

# %%
# Pauli strings are bitmasks with a phase; products follow XY = iZ.
from randdd.pauli import PauliString

x = PauliString.from_letters("X")
y = PauliString.from_letters("Y")
print("X * Y =", x * y)
print("parsed:", PauliString.parse("Z3Z4Y5Y6X7X8", 8))

# %%
# The nested group acts on every qubit but the first.  For three qubits it
# has 16 elements and the reflected Gray-code path changes one qubit per pulse.
from randdd.groups import gray_code_path, nested_pauli_group

g3 = nested_pauli_group(3)
path = gray_code_path(g3)
print(len(g3), "elements;", " -> ".join(str(f).split()[1] for f in path.frames[:6]), "...")

# %%
# Certificates on dense matrices.  The residual is the norm of the traceless
# part of the averaged Hamiltonian.
from randdd.groups import g8_group, nn_collective_group, verify_first_order
from randdd.hamiltonian import HamiltonianSpec, build_hamiltonian

cases = [
    ("nested, 4 dipolar spins", nested_pauli_group(4), HamiltonianSpec(4)),
    ("g8, 8 dipolar spins", g8_group(), HamiltonianSpec(8)),
    ("nn, 8 Heisenberg spins", nn_collective_group(8),
     HamiltonianSpec(8, coupling="nearest_neighbor")),
]
for name, group, spec in cases:
    _, h = build_hamiltonian(spec)
    print(f"{name:26s} residual {verify_first_order(group, h):.2e}")

# %%
# The four-element group only handles nearest neighbours: on a dipolar chain
# the longer-range couplings survive.
_, h_dip = build_hamiltonian(HamiltonianSpec(8))
print("nn group on dipolar chain:", f"{verify_first_order(nn_collective_group(8), h_dip):.3f}")
