"""Fermionic Fock bases and dense many-body operator matrices.

Basis states are occupation bitstrings stored as plain integers with mode 0
on the least significant bit.  Operators are lifted to the many-body space
with the usual anticommutation sign, counting occupied modes strictly below
the mode acted on.  Spinful layouts place the up/down modes of site ``j`` at
``2j`` / ``2j + 1`` so that spatial bipartitions stay contiguous in mode
index.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

MAX_MODES = 20
HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class Sector:
    """Symmetry-sector constraint for basis construction.

    n_particles restricts the total occupation.  spin_z restricts the total
    spin projection (in units of hbar) and requires the spinful mode layout,
    i.e. an even number of modes with even = up, odd = down.
    """

    n_particles: Optional[int] = None
    spin_z: Optional[float] = None

    def __post_init__(self):
        if self.spin_z is not None and abs(2 * self.spin_z - round(2 * self.spin_z)) > 1e-12:
            raise ValueError(f"spin_z must be a half-integer, got {self.spin_z}")

    def admits(self, state: int, n_modes: int) -> bool:
        if self.n_particles is not None and state.bit_count() != self.n_particles:
            return False
        if self.spin_z is not None:
            n_up = sum((state >> m) & 1 for m in range(0, n_modes, 2))
            n_dn = state.bit_count() - n_up
            if n_up - n_dn != round(2 * self.spin_z):
                return False
        return True


class OccupationBasis:
    """Ordered collection of occupation bitstrings for ``n_modes`` fermionic modes.

    States are unique and kept in the order given (build_basis produces
    ascending integer order).  Immutable after construction.
    """

    def __init__(self, n_modes: int, states, sector: Optional[Sector] = None):
        states = tuple(int(s) for s in states)
        if len(set(states)) != len(states):
            raise ValueError("basis states must be unique")
        for s in states:
            if s < 0 or s >= (1 << n_modes):
                raise ValueError(f"state {s} out of range for {n_modes} modes")
            if sector is not None and not sector.admits(s, n_modes):
                raise ValueError(f"state {s:b} violates the sector constraint {sector}")
        self.n_modes = int(n_modes)
        self.states = states
        self.index_of = {s: i for i, s in enumerate(states)}
        self.sector = sector

    @property
    def dim(self) -> int:
        return len(self.states)

    def occupations(self, state: int) -> np.ndarray:
        """Occupation numbers (n_0, ..., n_{N-1}) of a bitstring."""
        return np.array([(state >> m) & 1 for m in range(self.n_modes)], dtype=float)

    def __repr__(self):
        return f"OccupationBasis(n_modes={self.n_modes}, dim={self.dim}, sector={self.sector})"


@dataclass(frozen=True)
class ManyBodyOperator:
    """Dense Hermitian matrix over an OccupationBasis (real entries)."""

    basis: OccupationBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"matrix shape {m.shape} does not match basis dim {self.basis.dim}")
        if np.abs(m - m.T).max(initial=0.0) > HERMITICITY_TOL:
            raise ValueError("operator matrix is not Hermitian")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.basis.dim


def build_basis(n_modes: int, sector: Optional[Sector] = None) -> OccupationBasis:
    """Enumerate the occupation basis, ascending in bitstring value.

    Parameters
    ----------
    n_modes : number of fermionic modes, 1 <= n_modes <= 20.
    sector  : optional Sector restriction; an unsatisfiable sector raises
              rather than returning an empty basis.
    """
    if not 1 <= n_modes <= MAX_MODES:
        raise ValueError(f"n_modes must be in [1, {MAX_MODES}], got {n_modes}")
    if sector is not None and sector.spin_z is not None and n_modes % 2:
        raise ValueError("spin_z sector requires an even number of modes (spinful layout)")
    if sector is None:
        states = range(1 << n_modes)
    else:
        states = [s for s in range(1 << n_modes) if sector.admits(s, n_modes)]
        if not states:
            raise ValueError(f"sector {sector} admits no states for {n_modes} modes")
    return OccupationBasis(n_modes, states, sector)


def hopping_element(state: int, i: int, j: int, n_modes: int):
    """Apply c_i^dag c_j to a bitstring.

    Returns (target_state, sign) with sign in {+1, -1}, or None when the
    operator annihilates the state.  The sign counts occupied modes strictly
    below the acted-on mode, once per leg.  i == j is the number operator.
    """
    for m in (i, j):
        if not 0 <= m < n_modes:
            raise ValueError(f"mode index {m} out of range for {n_modes} modes")
    if not (state >> j) & 1:
        return None
    sign = -1 if (state & ((1 << j) - 1)).bit_count() & 1 else 1
    inter = state ^ (1 << j)
    if (inter >> i) & 1:
        return None
    if (inter & ((1 << i) - 1)).bit_count() & 1:
        sign = -sign
    return inter | (1 << i), sign


def build_quadratic(basis: OccupationBasis, kernel) -> ManyBodyOperator:
    """Lift a one-body kernel sum_ij h_ij c_i^dag c_j to the many-body basis.

    The kernel must be real symmetric within 1e-12 and match basis.n_modes.
    The result commutes with total particle number; if the kernel couples
    states outside a restricted basis sector, that is an error.
    """
    h = np.asarray(kernel, dtype=float)
    n = basis.n_modes
    if h.shape != (n, n):
        raise ValueError(f"kernel shape {h.shape} does not match n_modes={n}")
    if np.abs(h - h.T).max(initial=0.0) > HERMITICITY_TOL:
        raise ValueError("kernel is not Hermitian")
    mat = np.zeros((basis.dim, basis.dim))
    nz = [(i, j) for i in range(n) for j in range(n) if h[i, j] != 0.0]
    for col, s in enumerate(basis.states):
        for i, j in nz:
            hop = hopping_element(s, i, j, n)
            if hop is None:
                continue
            target, sign = hop
            row = basis.index_of.get(target)
            if row is None:
                raise ValueError(
                    f"kernel element ({i},{j}) maps state {s:b} outside the basis sector"
                )
            mat[row, col] += sign * h[i, j]
    return ManyBodyOperator(basis, mat)


def build_density_density(basis: OccupationBasis, coupling) -> ManyBodyOperator:
    """Lift sum_ij V_ij n_i n_j (diagonal in the occupation basis).

    A nonzero diagonal V_ii contributes V_ii * n_i since n_i^2 = n_i for
    fermions; such input is accepted as-is.
    """
    v = np.asarray(coupling, dtype=float)
    n = basis.n_modes
    if v.shape != (n, n):
        raise ValueError(f"coupling shape {v.shape} does not match n_modes={n}")
    if np.abs(v - v.T).max(initial=0.0) > HERMITICITY_TOL:
        raise ValueError("coupling matrix is not symmetric")
    diag = np.empty(basis.dim)
    for idx, s in enumerate(basis.states):
        occ = basis.occupations(s)
        diag[idx] = occ @ v @ occ
    return ManyBodyOperator(basis, np.diag(diag))
