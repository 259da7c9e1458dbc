"""Matrix-pair witnesses for genuine multipartite entanglement.

The vector witness of :mod:`covrepair.entanglement` generalizes to a pair
of positive semidefinite matrices (X, P): for rank-1 pairs X = h h^T,
P = g g^T the separability bound |h_A . g_A| + |h_B . g_B| becomes

    B_A(X, P) = tr sqrt(sqrt(X_A) P_A sqrt(X_A))
              + tr sqrt(sqrt(X_B) P_B sqrt(X_B)),

with X_A the submatrix on the modes of group A.  The measured value and
its standard deviation pair the witness against the covariance blocks:

    G(X, P)     = sum_ij xx_ij X_ij + pp_ij P_ij,
    sigma(X, P) = sqrt( sum_ij sxx_ij^2 X_ij^2 + spp_ij^2 P_ij^2 ),

which reduce exactly to the vector-witness formulas in the rank-1 case.
A state is certified genuinely multipartite entangled when one (X, P)
pair violates the bound with confidence above threshold simultaneously
for every bipartition.  The per-bipartition bound is evaluated at
supplied maximizer pairs (X', P') when available; otherwise (X, P) itself
is used, which only yields a lower bound on the violation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import Bipartition, CovarianceMatrix, SigmaMatrix
from .entanglement import DEFAULT_CONFIDENCE_THRESHOLD, DegenerateSigmaError

#: Eigenvalues in [-PSD_TOL, 0) are treated as zero inside matrix square
#: roots; anything more negative (relative to scale) aborts.
PSD_TOL = 1e-9
CLIP_ABORT_REL = 1e-8


class InvalidWitnessError(ValueError):
    """Raised when a witness matrix is too far from positive semidefinite."""


def _checked_psd(a, name: str) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.abs(m - m.T).max() > 1e-4:
        raise ValueError(f"{name} is not symmetric")
    m = (m + m.T) / 2
    if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
        raise InvalidWitnessError(f"{name} has eigenvalues below -{PSD_TOL}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class MatrixWitness:
    """PSD witness pair: x_mat pairs with the xx block, p_mat with pp.

    Inputs are symmetrized by averaging (tiny printed asymmetries occur in
    transcribed datasets) and must be positive semidefinite within 1e-9;
    at least one of the two matrices must be nonzero.
    """

    x_mat: np.ndarray
    p_mat: np.ndarray

    def __post_init__(self):
        x = _checked_psd(self.x_mat, "x_mat")
        p = _checked_psd(self.p_mat, "p_mat")
        if x.shape != p.shape:
            raise ValueError("witness matrices must have equal shape")
        if not (np.any(x != 0.0) or np.any(p != 0.0)):
            raise ValueError("witness matrices must not both vanish")
        object.__setattr__(self, "x_mat", x)
        object.__setattr__(self, "p_mat", p)

    @property
    def n(self) -> int:
        return self.x_mat.shape[0]

    @classmethod
    def from_vectors(cls, x_coeff, p_coeff) -> "MatrixWitness":
        """Rank-1 pair (h h^T, g g^T) from coefficient vectors."""
        h = np.asarray(x_coeff, dtype=float)
        g = np.asarray(p_coeff, dtype=float)
        return cls(x_mat=np.outer(h, h), p_mat=np.outer(g, g))


@dataclass(frozen=True, eq=False)
class GmeVerdict:
    """Violation of the separability bound for one bipartition.

    ``lower_bound_only`` marks verdicts whose bound was evaluated at the
    base pair because no maximizer was supplied.
    """

    bipartition: Bipartition
    bound: float
    measured: float
    sigma: float
    violation: float
    maximizer: Optional[MatrixWitness]
    lower_bound_only: bool


def _psd_root(matrix: np.ndarray, what: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    scale = max(abs(vals[0]), abs(vals[-1]))
    if vals[0] < -max(PSD_TOL, CLIP_ABORT_REL * scale):
        raise InvalidWitnessError(f"{what} is not positive semidefinite")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def trace_sqrt_pair(x_mat: np.ndarray, p_mat: np.ndarray, modes: Sequence[int]) -> float:
    """tr sqrt( sqrt(X_A) P_A sqrt(X_A) ) for the given 1-based mode group.

    For rank-1 X = h h^T, P = g g^T this equals |h_A . g_A|.  Since
    sqrt(X_A) P_A sqrt(X_A) = M^T M with M = sqrt(P_A) sqrt(X_A), the value
    is the nuclear norm of M, which is what gets computed: summing singular
    values propagates roundoff linearly, where eigendecomposing the product
    would lose half the digits at small eigenvalues.  Swapping the two
    matrices transposes M and leaves the value unchanged.
    """
    modes = tuple(int(i) for i in modes)
    if not modes:
        raise ValueError("mode group must be nonempty")
    if any(i < 1 or i > x_mat.shape[0] for i in modes):
        raise ValueError(f"mode group {modes} out of range")
    idx = np.array(modes) - 1
    root_x = _psd_root(x_mat[np.ix_(idx, idx)], "witness x submatrix")
    root_p = _psd_root(p_mat[np.ix_(idx, idx)], "witness p submatrix")
    return float(np.sum(np.linalg.svd(root_p @ root_x, compute_uv=False)))


def witness_expectation(witness: MatrixWitness, gamma: CovarianceMatrix) -> float:
    """G(X, P): trace pairing of the witness with the covariance blocks."""
    if witness.n != gamma.n:
        raise ValueError("witness and matrix sizes disagree")
    if gamma.has_cross_block:
        raise ValueError("witness evaluation requires a vanishing xp block")
    return float(np.sum(gamma.xx * witness.x_mat) + np.sum(gamma.pp * witness.p_mat))


def witness_sigma(witness: MatrixWitness, sigma: SigmaMatrix) -> float:
    """sigma(X, P): standard deviation of the measured pairing value."""
    if witness.n != sigma.n:
        raise ValueError("witness and sigma sizes disagree")
    var = float(np.sum(sigma.xx**2 * witness.x_mat**2) + np.sum(sigma.pp**2 * witness.p_mat**2))
    if var <= 0.0:
        raise DegenerateSigmaError("error propagation produced a vanishing denominator")
    return float(np.sqrt(var))


def evaluate(
    witness: MatrixWitness,
    gamma: CovarianceMatrix,
    sigma: SigmaMatrix,
    maximizers: Optional[Mapping[Bipartition, MatrixWitness]] = None,
    bipartitions: Optional[Sequence[Bipartition]] = None,
    strict: bool = True,
) -> list[GmeVerdict]:
    """Violations (bound - G) / sigma for the requested bipartitions.

    G and sigma always come from the base pair; the separability bound
    uses the maximizer pair for a bipartition when one is supplied.  With
    ``strict`` a missing maximizer raises; otherwise that verdict falls
    back to the base pair and is marked lower-bound-only.
    """
    if bipartitions is None:
        from .entanglement import enumerate_bipartitions

        bipartitions = enumerate_bipartitions(gamma.n)
    value = witness_expectation(witness, gamma)
    noise = witness_sigma(witness, sigma)
    verdicts = []
    for bp in bipartitions:
        if bp.n != gamma.n:
            raise ValueError(f"bipartition {bp.label} does not match the mode count")
        pair = None if maximizers is None else maximizers.get(bp)
        if pair is None and maximizers is not None and strict:
            raise ValueError(f"no maximizer supplied for bipartition {bp.label}")
        basis = pair if pair is not None else witness
        bound = trace_sqrt_pair(basis.x_mat, basis.p_mat, bp.group_a) + trace_sqrt_pair(
            basis.x_mat, basis.p_mat, bp.group_b
        )
        verdicts.append(
            GmeVerdict(
                bipartition=bp,
                bound=float(bound),
                measured=value,
                sigma=noise,
                violation=float((bound - value) / noise),
                maximizer=pair,
                lower_bound_only=pair is None,
            )
        )
    return verdicts


def certifies(verdicts: Sequence[GmeVerdict], threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> bool:
    """Genuine multipartite entanglement requires every bipartition to be
    violated with confidence at least ``threshold`` simultaneously."""
    return bool(verdicts) and all(v.violation >= threshold for v in verdicts)
