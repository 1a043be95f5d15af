"""Free-fermion spectra: kernel diagonalization and combinatorial generation.

A free system is fully described by a reference energy and the single
particle energies of its quadratic kernel; the many-body spectrum is the set
of all subset sums on top of the reference.  Thermal probabilities of such a
spectrum factorize over the modes, which is used as an independent check of
the brute-force route.
"""

from dataclasses import dataclass

import numpy as np

from .fock import HERMITICITY_TOL
from .spectra import ProbabilitySpectrum

MAX_FREE_MODES = 20


@dataclass(frozen=True)
class FreeSpectrumParams:
    """Reference energy plus single-particle energies, stored ascending."""

    e0: float
    epsilons: np.ndarray

    def __post_init__(self):
        eps = np.sort(np.asarray(self.epsilons, dtype=float).ravel())
        if not np.all(np.isfinite(eps)) or not np.isfinite(self.e0):
            raise ValueError("free-spectrum parameters must be finite")
        eps.flags.writeable = False
        object.__setattr__(self, "epsilons", eps)

    @property
    def n_modes(self) -> int:
        return self.epsilons.size


def diagonalize_kernel(kernel) -> np.ndarray:
    """Single-particle energies of a real symmetric kernel, ascending."""
    h = np.asarray(kernel, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"kernel must be square, got shape {h.shape}")
    if np.abs(h - h.T).max(initial=0.0) > HERMITICITY_TOL:
        raise ValueError("kernel is not Hermitian")
    return np.linalg.eigvalsh(h)


def subset_sums(epsilons) -> np.ndarray:
    """All 2^N sums of subsets of epsilons, indexed by occupation bitstring."""
    eps = np.asarray(epsilons, dtype=float).ravel()
    if eps.size > MAX_FREE_MODES:
        raise ValueError(f"too many free modes ({eps.size} > {MAX_FREE_MODES})")
    levels = np.zeros(1)
    for e in eps:
        levels = np.concatenate([levels, levels + e])
    return levels


def free_many_body_spectrum(params: FreeSpectrumParams) -> np.ndarray:
    """Energies E_0 + sum_j eps_j n_j(k) for every occupation pattern k."""
    return params.e0 + subset_sums(params.epsilons)


def free_partition_function(epsilons, beta: float) -> float:
    """Factorized partition function prod_j (1 + exp(-beta eps_j)).

    The reference energy is excluded; it cancels in any normalized quantity.
    """
    eps = np.asarray(epsilons, dtype=float).ravel()
    return float(np.prod(1.0 + np.exp(-beta * eps)))


def free_probabilities(params: FreeSpectrumParams, beta: float) -> ProbabilitySpectrum:
    """Gibbs spectrum of a free many-body spectrum; the reference drops out."""
    if not np.isfinite(beta) or beta <= 0:
        raise ValueError(f"beta must be finite and positive, got {beta}")
    levels = free_many_body_spectrum(params)
    w = np.exp(-beta * (levels - levels.min()))
    return ProbabilitySpectrum(w / w.sum(), origin=f"thermal(beta={beta:g})")


def greedy_single_particle_gaps(levels, n_modes: int, match_tol: float = 1e-9,
                                filler: float = None) -> np.ndarray:
    """Greedy decomposition of a level list into n_modes single-particle gaps.

    The lowest level is taken as the reference; repeatedly, every sum of the
    gaps found so far is matched against the remaining levels and the
    smallest unexplained level becomes the next gap.  Exact for a spectrum
    with the free subset-sum structure; a heuristic otherwise.  Modes the
    level list cannot resolve are assigned ``filler`` (default: one above the
    top level) so they carry negligible weight.
    """
    lv = np.sort(np.asarray(levels, dtype=float).ravel())
    lv = lv[np.isfinite(lv)]
    if lv.size == 0:
        raise ValueError("no finite levels to decompose")
    lv = lv - lv[0]
    top = lv[-1]
    if filler is None:
        filler = top + 1.0
    scale = max(1.0, abs(top))
    gaps = []
    sums = [0.0]
    for _ in range(n_modes):
        remaining = list(lv)
        for s in sorted(sums):
            for idx, val in enumerate(remaining):
                if abs(val - s) <= match_tol * scale:
                    del remaining[idx]
                    break
        if not remaining:
            gaps.append(filler)
            continue
        e = remaining[0]
        gaps.append(e)
        sums += [s + e for s in sums]
    return np.array(gaps)
