"""Coarse-grained ergodicity diagnostics in the eigenbasis.

Three views of the same matrix M = V* A V of an observable A in the
eigenbasis of a Floquet operator:

  * diagonal elements d_n against the microcanonical average a0,
  * the smoothed two-point sum F(T) = (1/N) sum_{n,m} |M_nm|^2
    exp(-delta_nm^2 T^2 / 2) with wrapped phase gaps delta_nm, which decays
    from F(0) = tr(A^2)/N to F(inf) = (1/N) sum_n |M_nn|^2,
  * raw off-diagonal elements across near-degenerate phase pairs.

All three fill different slices of one ErgodicityReport.

F(T) is assembled as (diag_sum + offdiag_sum(T)) / N with one shared
diag_sum and same-shaped weight arrays for every T, so the inequalities
F(inf) <= F(T2) <= F(T1) for T1 <= T2 hold exactly in floating point, not
just to a tolerance: the summands are dominated elementwise and the
summation tree is identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import CorrelatorCurve, microcanonical_average
from .errors import DomainError, NumericalError
from .quantize import FloquetOperator, ObservableMatrix
from .spectral import SpectralData, phase_clusters

DIAGONAL_IMAG_TOL = 1e-8
QUANTUM_REAL_TOL = 1e-9
_IDENTITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ErgodicityReport:
    """Eigenbasis statistics of one observable; fields fill per diagnostic.

    diagonals/mean/variance come from the diagonal elements, F_curve and
    F_infinity from the smoothed two-point sum, offdiag_max from the
    near-degenerate scan (None when no pair qualifies), and
    classical_deviation from the correlator comparison.
    """

    N: int
    observable: str
    a0: float | None = None
    diagonals: np.ndarray | None = None
    mean: float | None = None
    variance: float | None = None
    F_curve: tuple | None = None
    F_infinity: float | None = None
    offdiag_max: float | None = None
    offdiag_pair_count: int | None = None
    offdiag_gap_tol: float | None = None
    classical_deviation: float | None = None

    def __post_init__(self):
        if self.diagonals is not None:
            self.diagonals.setflags(write=False)


def _eigenbasis_matrix(data: SpectralData, obs: ObservableMatrix) -> np.ndarray:
    if obs.N != data.N:
        raise DomainError(
            f"ergodicity: observable dimension {obs.N} != spectrum dimension {data.N}")
    return data.vectors.conj().T @ obs.matrix @ data.vectors


def _wrapped_gaps(phases: np.ndarray) -> np.ndarray:
    """Antisymmetric matrix of phase differences wrapped to [-pi, pi]."""
    raw = phases[:, None] - phases[None, :]
    return np.mod(raw + np.pi, 2.0 * np.pi) - np.pi


def diagonal_elements_report(data: SpectralData, obs: ObservableMatrix,
                             a0: float | None = None) -> ErgodicityReport:
    """Mean-square and worst-case deviation of <n|A|n> from the average a0.

    a0 defaults to the microcanonical average of the observable's classical
    symbol.  Diagonals of a Hermitian matrix are real; the imaginary parts
    are checked against 1e-8 and then discarded.
    """
    M = _eigenbasis_matrix(data, obs)
    diag = np.diagonal(M)
    worst_imag = float(np.max(np.abs(diag.imag)))
    if worst_imag >= DIAGONAL_IMAG_TOL:
        raise NumericalError(
            f"ergodicity: diagonal element imaginary part {worst_imag:.3e} "
            f"breaks Hermiticity (threshold {DIAGONAL_IMAG_TOL:.0e})")
    d = diag.real.copy()
    if a0 is None:
        a0 = microcanonical_average(obs.classical_label)

    mean = float(np.mean(d))
    variance = float(np.mean((d - a0) ** 2))
    F_inf = float(np.mean(d * d))

    # var about a0 and the T -> inf plateau are two readings of the same
    # moments; a mismatch means the bases or labels got out of sync
    recombined = F_inf - 2.0 * a0 * mean + a0 * a0
    if abs(variance - recombined) >= _IDENTITY_TOL:
        raise NumericalError(
            f"ergodicity: variance identity defect {abs(variance - recombined):.3e}")

    return ErgodicityReport(
        N=data.N,
        observable=obs.classical_label,
        a0=float(a0),
        diagonals=d,
        mean=mean,
        variance=variance,
        F_infinity=F_inf,
    )


def quantum_F_curve(data: SpectralData, obs: ObservableMatrix,
                    T_grid) -> ErgodicityReport:
    """Evaluate F(T) on an ascending grid; F_infinity is the diagonal term."""
    T_grid = np.asarray(T_grid, dtype=float)
    if T_grid.ndim != 1 or T_grid.size == 0:
        raise DomainError("ergodicity: need a non-empty 1-d grid of T values")
    if np.any(T_grid < 0.0):
        raise DomainError("ergodicity: smoothing times must be non-negative")
    if np.any(np.diff(T_grid) <= 0.0):
        raise DomainError("ergodicity: T grid must be strictly ascending")

    M = _eigenbasis_matrix(data, obs)
    P = np.abs(M) ** 2
    diag_sum = float(np.sum(np.diagonal(P)))
    np.fill_diagonal(P, 0.0)
    delta = _wrapped_gaps(data.phases)

    N = data.N
    values = np.empty_like(T_grid)
    for i, T in enumerate(T_grid):
        w = np.exp(-0.5 * np.square(delta * T))
        np.fill_diagonal(w, 0.0)
        offdiag = float(np.sum(P * w))
        values[i] = (diag_sum + offdiag) / N
    return ErgodicityReport(
        N=N,
        observable=obs.classical_label,
        F_curve=tuple((float(T), float(F)) for T, F in zip(T_grid, values)),
        F_infinity=diag_sum / N,
    )


def offdiag_near_degenerate(data: SpectralData, obs: ObservableMatrix,
                            gap_tol: float = 1e-8) -> ErgodicityReport:
    """Largest |A_nm| between levels with wrapped phase gap below gap_tol.

    Inside exactly degenerate eigenspaces (gaps below 1e-8) the eigenbasis
    is an arbitrary rotation, so the observable is re-diagonalized there
    first; elements across merely close pairs are basis independent and
    reported as found.  offdiag_max is None when no pair qualifies.
    """
    if gap_tol <= 0.0:
        raise DomainError(f"ergodicity: gap_tol must be positive, got {gap_tol}")
    if obs.N != data.N:
        raise DomainError(
            f"ergodicity: observable dimension {obs.N} != spectrum dimension {data.N}")

    vectors = np.array(data.vectors)
    for cluster in phase_clusters(data.phases):
        if len(cluster) < 2:
            continue
        idx = np.array(cluster)
        block = vectors[:, idx]
        A_block = block.conj().T @ obs.matrix @ block
        _, W = np.linalg.eigh(0.5 * (A_block + A_block.conj().T))
        vectors[:, idx] = block @ W

    M = vectors.conj().T @ obs.matrix @ vectors
    gaps = np.abs(_wrapped_gaps(data.phases))
    n_idx, m_idx = np.nonzero(np.triu(gaps < gap_tol, k=1))
    elements = np.abs(M[n_idx, m_idx])

    return ErgodicityReport(
        N=data.N,
        observable=obs.classical_label,
        offdiag_max=float(elements.max()) if elements.size else None,
        offdiag_pair_count=int(elements.size),
        offdiag_gap_tol=float(gap_tol),
    )


def quantum_correlator(op: FloquetOperator, obs: ObservableMatrix,
                       t_range: int) -> np.ndarray:
    """Trace autocorrelation f(t) = tr(A U^t A U^-t) / N for t = 0 .. t_range.

    Works by conjugating A one period at a time, never diagonalizing, so it
    cross-checks the eigenbasis route instead of sharing its failure modes.
    f(t) must come out real to 1e-9; a larger imaginary part means U lost
    unitarity or A lost Hermiticity.
    """
    if t_range < 0:
        raise DomainError(f"ergodicity: t_range must be >= 0, got {t_range}")
    if obs.N != op.N:
        raise DomainError(
            f"ergodicity: observable dimension {obs.N} != operator dimension {op.N}")
    A = obs.matrix
    U = op.U
    Ud = U.conj().T
    B = A.copy()
    values = np.empty(t_range + 1)
    for t in range(t_range + 1):
        if t > 0:
            B = U @ B @ Ud
        f_t = np.trace(A @ B) / op.N
        if abs(f_t.imag) >= QUANTUM_REAL_TOL:
            raise NumericalError(
                f"ergodicity: f({t}) has imaginary part {f_t.imag:.3e}; "
                "Hermiticity/unitarity failure")
        values[t] = f_t.real
    return values


def quantum_correlator_eigenbasis(data: SpectralData, obs: ObservableMatrix,
                                  t_range: int) -> np.ndarray:
    """Same trace autocorrelation evaluated from eigenphases and |M_nm|^2."""
    if t_range < 0:
        raise DomainError(f"ergodicity: t_range must be >= 0, got {t_range}")
    M = _eigenbasis_matrix(data, obs)
    P = np.abs(M) ** 2
    delta = _wrapped_gaps(data.phases)
    values = np.empty(t_range + 1)
    for t in range(t_range + 1):
        values[t] = float(np.sum(P * np.cos(delta * t))) / data.N
    return values


def quantum_classical_compare(op: FloquetOperator, obs: ObservableMatrix,
                              classical: CorrelatorCurve,
                              t_range: int) -> float:
    """Max |f(t) - C_cl(t)| over 0 <= t <= t_range against a sampled curve."""
    if t_range > classical.t_max:
        raise DomainError(
            f"ergodicity: t_range {t_range} exceeds classical curve t_max "
            f"{classical.t_max}")
    f = quantum_correlator(op, obs, t_range)
    return float(np.max(np.abs(f - classical.C[:t_range + 1])))
