"""Eigenphase spectra of Floquet unitaries.

Eigenpairs follow the convention U v = exp(-i phi) v with phi in [0, 2 pi),
so a small positive potential shifts phases positively.  Diagonalization
goes through a complex Schur decomposition: for a normal matrix the Schur
form is diagonal and the transform is exactly unitary, so orthonormality
of the eigenbasis survives arbitrarily close eigenphase pairs (dense r
sweeps sit on many of those).  Within clusters of phases closer than 1e-8
the basis is additionally re-orthonormalized by QR as a roundoff guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import DomainError, NumericalError
from .model import MapFamily, PlanckScale
from .quantize import FloquetOperator

RESIDUAL_TOL = 1e-10
CLUSTER_GAP = 1e-8
_UNITARY_INPUT_TOL = 1e-8


def mean_spacing(N: int) -> float:
    """Mean eigenphase spacing 2 pi / N on the unit circle."""
    if N < 1:
        raise DomainError(f"spectral: dimension must be positive, got {N}")
    return 2.0 * np.pi / N


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Sorted eigenphases with matching orthonormal eigenvector columns."""

    N: int
    family: MapFamily
    scale: PlanckScale
    phases: np.ndarray
    vectors: np.ndarray
    max_residual: float

    def __post_init__(self):
        self.phases.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Unimodular eigenvalues exp(-i phi) in phase order."""
        return np.exp(-1j * self.phases)

    @property
    def mean_spacing(self) -> float:
        return mean_spacing(self.N)


def phase_clusters(phases: np.ndarray, gap: float = CLUSTER_GAP) -> list:
    """Chains of consecutive phases separated by less than ``gap``.

    Clusters may wrap through the 0 / 2 pi seam; indices are returned in
    chain order, so a wrapping cluster lists the top-of-circle members
    first.
    """
    N = phases.size
    if N == 0:
        return []
    breaks = np.flatnonzero(np.diff(phases) >= gap)
    clusters = []
    start = 0
    for b in breaks:
        clusters.append(list(range(start, b + 1)))
        start = b + 1
    clusters.append(list(range(start, N)))
    if len(clusters) > 1 and (phases[0] + 2.0 * np.pi - phases[-1]) < gap:
        clusters[0] = clusters.pop() + clusters[0]
    return clusters


def decompose_unitary(U: np.ndarray):
    """Eigenphases and eigenvectors of a unitary matrix.

    Returns (phases, vectors, max_residual) with phases sorted ascending in
    [0, 2 pi), vectors[:, n] the matching eigenvector, and max_residual the
    largest 2-norm of U v - exp(-i phi) v over the basis.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError(f"spectral: expected a square matrix, got shape {U.shape}")
    gram = U.conj().T @ U
    np.fill_diagonal(gram, gram.diagonal() - 1.0)
    defect = float(np.max(np.abs(gram)))
    if defect >= _UNITARY_INPUT_TOL:
        raise DomainError(
            f"spectral: input is not unitary (max |U*U - 1| = {defect:.3e})")

    T, Z = schur(U, output="complex")
    mu = np.diagonal(T)
    phases = np.mod(-np.angle(mu), 2.0 * np.pi)
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vectors = Z[:, order].copy()

    # the Schur transform is unitary to machine precision already; inside
    # (quasi-)degenerate clusters re-orthonormalize anyway so the contract
    # does not ride on the backend
    for cluster in phase_clusters(phases):
        if len(cluster) > 1:
            idx = np.array(cluster)
            Q, _ = np.linalg.qr(vectors[:, idx])
            vectors[:, idx] = Q

    deviation = U @ vectors - vectors * np.exp(-1j * phases)[None, :]
    residuals = np.linalg.norm(deviation, axis=0)
    worst = float(residuals.max())
    if worst >= RESIDUAL_TOL:
        bad = np.flatnonzero(residuals >= RESIDUAL_TOL)
        raise NumericalError(
            f"spectral: eigenpair residual {worst:.3e} at or above "
            f"{RESIDUAL_TOL:.0e} (levels {bad[:8].tolist()} of {U.shape[0]})"
        )
    return phases, vectors, worst


def diagonalize(op: FloquetOperator) -> SpectralData:
    """Full spectral data of a Floquet operator, residuals certified to 1e-10."""
    phases, vectors, worst = decompose_unitary(op.U)
    return SpectralData(
        N=op.N,
        family=op.family,
        scale=op.scale,
        phases=phases,
        vectors=vectors,
        max_residual=worst,
    )
