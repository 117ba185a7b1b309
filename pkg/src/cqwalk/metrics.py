"""Walker readout and similarity scoring.

The measured observable is the position distribution: P(j) is the
population with qutrit j excited (e or f), the walker "being at site
j".  Population that decayed to the joint ground state or is stuck in
a cavity at readout time is reported separately and counts against the
non-renormalized similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statespace import E, F, G, StateSpace


@dataclass
class Distribution:
    """Walker position probabilities plus leaked population.

    p[j-1] is the probability of finding the walker at qutrit j;
    residual_vacuum is the fully relaxed population and residual_cavity
    everything else (photons still in flight, multi-excitation leakage
    in full mode).
    """

    p: np.ndarray
    residual_vacuum: float
    residual_cavity: float

    def total(self) -> float:
        return float(np.sum(self.p) + self.residual_vacuum
                     + self.residual_cavity)


def extract_distribution(rho: np.ndarray, space: StateSpace) -> Distribution:
    """Diagonal readout of the walker position from a density matrix."""
    diag = np.real(np.diagonal(rho))
    if space.mode == "truncated":
        p = np.empty(space.n_qutrits)
        for j in range(1, space.n_qutrits + 1):
            p[j - 1] = (diag[space.qutrit_index(j, E)]
                        + diag[space.qutrit_index(j, F)])
        vac = float(diag[space.vacuum_index])
        cav = float(sum(diag[space.cavity_index(j)]
                        for j in range(1, space.n_cavities + 1)))
        return Distribution(p, vac, cav)

    p = np.zeros(space.n_qutrits)
    vac = 0.0
    cav = 0.0
    for idx, (levels, photons) in enumerate(space.labels):
        excited = [j for j, lv in enumerate(levels) if lv != G]
        n_phot = sum(photons)
        if not excited and n_phot == 0:
            vac += diag[idx]
        elif len(excited) == 1 and n_phot == 0:
            p[excited[0]] += diag[idx]
        else:
            cav += diag[idx]
    return Distribution(p, float(vac), float(cav))


def similarity(p_measured: np.ndarray, p_ideal: np.ndarray) -> float:
    """Squared Bhattacharyya overlap (sum_j sqrt(Pm(j) Pi(j)))^2.

    Equals 1 iff the distributions match including total weight, so
    population lost from the walker manifold lowers the score.  Tiny
    negative entries from floating-point readout are clipped; anything
    below -1e-9 is treated as corrupt input.
    """
    pm = np.asarray(p_measured, dtype=float)
    pi = np.asarray(p_ideal, dtype=float)
    if pm.shape != pi.shape:
        raise ValueError("distributions have different lengths")
    if pm.min(initial=0.0) < -1e-9 or pi.min(initial=0.0) < -1e-9:
        raise ValueError("negative probability in distribution")
    pm = np.clip(pm, 0.0, None)
    pi = np.clip(pi, 0.0, None)
    return float(np.sum(np.sqrt(pm * pi)) ** 2)


@dataclass(frozen=True)
class SimilarityResult:
    s: float
    s_renorm: float


def similarity_report(p_measured: np.ndarray,
                      p_ideal: np.ndarray) -> SimilarityResult:
    """Similarity plus the variant with the measured distribution
    renormalized to unit walker population (leakage discarded)."""
    s = similarity(p_measured, p_ideal)
    total = float(np.sum(np.clip(p_measured, 0.0, None)))
    if total > 0.0:
        s_renorm = similarity(np.clip(p_measured, 0.0, None) / total, p_ideal)
    else:
        s_renorm = 0.0
    return SimilarityResult(s=s, s_renorm=s_renorm)
