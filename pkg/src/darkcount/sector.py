"""Fixed-excitation sectors of an N-qubit register, encoded as bitmasks.

A basis state is an integer whose bit j (0-based) is set iff qubit j+1 is
excited.  The s-sector holds every N-bit pattern with exactly s set bits,
ordered by unsigned integer value.  That order is canonical everywhere in
this package: matrices, projectors and protocol outputs all index into it.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

MAX_QUBITS_DEFAULT = 24


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of the sector with ``n_excited`` of ``n_qubits`` qubits excited."""

    n_qubits: int
    n_excited: int
    states: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.states)

    def bitstring(self, state: int) -> str:
        """Render a pattern as a binary numeral (qubit 1 = rightmost character)."""
        return format(state, f"0{self.n_qubits}b")


def _check_sector_args(n_qubits: int, n_excited: int, max_qubits: int) -> None:
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    if n_qubits > max_qubits:
        raise ValueError(
            f"n_qubits={n_qubits} exceeds the cap of {max_qubits}; "
            "pass max_qubits explicitly to override"
        )
    if not 0 <= n_excited <= n_qubits:
        raise ValueError(f"n_excited must lie in [0, {n_qubits}], got {n_excited}")


def enumerate_sector(
    n_qubits: int, n_excited: int, max_qubits: int = MAX_QUBITS_DEFAULT
) -> SectorBasis:
    """Enumerate the s-sector in canonical (ascending integer) order.

    Uses Gosper's hack to walk the patterns in increasing order directly,
    so the result is deterministic across runs and platforms.
    """
    _check_sector_args(n_qubits, n_excited, max_qubits)
    if n_excited == 0:
        return SectorBasis(n_qubits, 0, (0,))
    states = []
    m = (1 << n_excited) - 1
    limit = 1 << n_qubits
    while m < limit:
        states.append(m)
        c = m & -m
        r = m + c
        m = (((r ^ m) >> 2) // c) | r
    return SectorBasis(n_qubits, n_excited, tuple(states))


def state_index(basis: SectorBasis, state: int) -> int:
    """Position of ``state`` in ``basis.states`` via colexicographic ranking, O(N).

    The canonical order (patterns as ascending integers) is colexicographic
    in the set of excited-bit positions, so the rank is the standard
    combinatorial sum of binomials over those positions.
    """
    if state < 0 or state >> basis.n_qubits:
        raise ValueError(
            f"state {state:#x} has bits outside the {basis.n_qubits}-qubit register"
        )
    if state.bit_count() != basis.n_excited:
        raise ValueError(
            f"state {basis.bitstring(state)} has {state.bit_count()} excited qubits, "
            f"expected {basis.n_excited}"
        )
    idx = 0
    i = 0
    m = state
    while m:
        b = m & -m
        i += 1
        idx += comb(b.bit_length() - 1, i)
        m ^= b
    return idx


def arrangements(
    n_qubits: int, n_excited: int, max_qubits: int = MAX_QUBITS_DEFAULT
) -> list[int]:
    """All rearrangements of s excited qubits over N sites.

    These coincide with the sector basis states, in the same canonical order;
    the protocol iterates over exactly this list.
    """
    return list(enumerate_sector(n_qubits, n_excited, max_qubits).states)
