"""Exact diagonalization and probability spectra of density matrices.

Two kinds of spectra are produced: thermal (Boltzmann weights of an energy
spectrum) and entanglement (eigenvalues of a reduced density matrix obtained
by tracing out part of a pure state).  Both are normalized, descending
probability vectors.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fock import ManyBodyOperator, OccupationBasis

MAX_DIM = 1 << 14
CLAMP_TOL = 1e-14
NORM_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and (optionally) orthonormal eigenvectors."""

    energies: np.ndarray
    vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)
        if self.vectors is not None:
            v = np.asarray(self.vectors, dtype=float)
            v.flags.writeable = False
            object.__setattr__(self, "vectors", v)


@dataclass(frozen=True)
class ProbabilitySpectrum:
    """Normalized, descending eigenvalue list of a density matrix.

    Entries below 1e-14 are clamped to zero but retained, so the length
    records the dimension of the underlying density matrix.
    """

    probs: np.ndarray
    origin: str = ""

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probability spectrum must be a nonempty vector")
        if p.min() < -CLAMP_TOL:
            raise ValueError(f"negative probability {p.min()} below clamp tolerance")
        p[p < CLAMP_TOL] = 0.0
        total = p.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")
        p[::-1].sort()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    def entanglement_energies(self) -> np.ndarray:
        """-log of the nonzero probabilities, ascending."""
        nz = self.probs[self.probs > 0.0]
        return -np.log(nz)


def exact_diagonalize(op: ManyBodyOperator, keep_vectors: bool = True) -> EigenSystem:
    """Dense symmetric eigendecomposition of a many-body operator."""
    if op.dim > MAX_DIM:
        raise ValueError(f"operator dimension {op.dim} exceeds cap {MAX_DIM}")
    if keep_vectors:
        energies, vectors = np.linalg.eigh(op.matrix)
        return EigenSystem(energies, vectors)
    return EigenSystem(np.linalg.eigvalsh(op.matrix))


def boltzmann_weights(energies, beta: float) -> np.ndarray:
    """exp(-beta E_k) / Z, stabilized by subtracting the minimum energy."""
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("empty energy list")
    if not np.isfinite(beta) or beta <= 0:
        raise ValueError(f"beta must be finite and positive, got {beta}")
    if not np.all(np.isfinite(e)):
        raise ValueError("energies must be finite")
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def thermal_probabilities(energies, beta: float) -> ProbabilitySpectrum:
    """Gibbs spectrum of an energy list at inverse temperature beta."""
    p = boltzmann_weights(energies, beta)
    return ProbabilitySpectrum(p, origin=f"thermal(beta={beta:g})")


def _bipartition_tables(basis: OccupationBasis, region_a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row/column indices and reordering signs for an A|B mode split.

    Each basis state maps to (a, b, sign) where a packs the A-mode bits in
    ascending mode order, b the complement, and sign is the parity of moving
    all occupied A modes in front of the occupied B modes.
    """
    n = basis.n_modes
    a_modes = sorted(set(int(m) for m in region_a))
    if any(m < 0 or m >= n for m in a_modes):
        raise ValueError(f"region_a contains modes outside [0, {n})")
    if not a_modes or len(a_modes) == n:
        raise ValueError("region_a must be a proper nonempty subset of the modes")
    b_modes = [m for m in range(n) if m not in a_modes]
    a_pos = {m: k for k, m in enumerate(a_modes)}
    b_pos = {m: k for k, m in enumerate(b_modes)}
    rows = np.empty(basis.dim, dtype=np.int64)
    cols = np.empty(basis.dim, dtype=np.int64)
    signs = np.empty(basis.dim)
    a_set = set(a_modes)
    for idx, s in enumerate(basis.states):
        a = b = 0
        inversions = 0
        seen_a = 0
        for m in range(n - 1, -1, -1):
            if not (s >> m) & 1:
                continue
            if m in a_set:
                a |= 1 << a_pos[m]
                seen_a += 1
            else:
                b |= 1 << b_pos[m]
                inversions += seen_a
        rows[idx] = a
        cols[idx] = b
        signs[idx] = -1.0 if inversions & 1 else 1.0
    return rows, cols, signs


def reduced_density_spectrum(state, basis: OccupationBasis, region_a) -> ProbabilitySpectrum:
    """Spectrum of the reduced density matrix of a pure state over region A.

    The amplitude vector is reshaped into a matrix with rows indexed by
    A-mode occupations and columns by B-mode occupations (fermionic
    reordering signs applied when A is not a mode-index prefix); the spectrum
    is the squared singular values, zero-padded to dimension 2^|A|.

    Parameters
    ----------
    state    : amplitude vector over basis.states, normalized within 1e-10.
    basis    : OccupationBasis the amplitudes refer to.
    region_a : iterable of mode indices kept after the partial trace.
    """
    psi = np.asarray(state, dtype=float)
    if psi.shape != (basis.dim,):
        raise ValueError(f"state length {psi.shape} does not match basis dim {basis.dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")
    rows, cols, signs = _bipartition_tables(basis, region_a)
    n_a = len(set(int(m) for m in region_a))
    m = np.zeros((1 << n_a, 1 << (basis.n_modes - n_a)))
    m[rows, cols] = signs * psi
    sv = np.linalg.svd(m, compute_uv=False)
    p = np.zeros(1 << n_a)
    p[: sv.size] = sv**2
    p /= p.sum()
    tag = ",".join(str(x) for x in sorted(set(int(v) for v in region_a)))
    return ProbabilitySpectrum(p, origin=f"entanglement(modes={tag})")
