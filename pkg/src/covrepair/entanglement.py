"""Partial-transposition entanglement tests with statistical confidence.

Separability across a bipartition requires the partially transposed state
to be physical; for block-diagonal covariance matrices that reduces to
positive semidefiniteness of

    [[xx, E/2], [E/2, pp]],   E = diag(+1 on group A, -1 on group B).

A negative eigenvalue certifies entanglement, and the corresponding
eigenvector z = (h, g) supplies quadrature combinations u = (h, x),
v = (g, p) whose summed variance every separable state keeps above
|h_A . g_A| + |h_B . g_B|.  Because the matrix elements carry measurement
errors, a violation only counts if it clears the bound by a margin: the
confidence level

    s0 = (bound - <(du)^2 + (dv)^2>) / sigma(h, g)

measures the violation in standard deviations of the measured quadratic
form.  ``scan`` runs this over every bipartition of the modes.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .core import Bipartition, CovarianceMatrix, SigmaMatrix, _paired_block_matrix

DEFAULT_CONFIDENCE_THRESHOLD = 3.0


class DegenerateSigmaError(ValueError):
    """Raised when the error-propagated denominator sigma(h, g) vanishes."""


def _require_block_diagonal(gamma: CovarianceMatrix, where: str) -> None:
    if gamma.has_cross_block:
        raise ValueError(
            f"{where} requires a vanishing xp block; partially transpose the matrix "
            "and use the full physicality test instead"
        )


@dataclass(frozen=True, eq=False)
class WitnessVector:
    """Coefficient pair (x_coeff, p_coeff) of the quadrature combinations
    u = (x_coeff, x) and v = (p_coeff, p); stored normalized so the squared
    norms of the two parts sum to 1."""

    x_coeff: np.ndarray
    p_coeff: np.ndarray

    def __post_init__(self):
        h = np.array(self.x_coeff, dtype=float).reshape(-1)
        g = np.array(self.p_coeff, dtype=float).reshape(-1)
        if h.shape != g.shape:
            raise ValueError("witness parts must have equal length")
        norm = np.sqrt(h @ h + g @ g)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("witness vectors must not both vanish")
        h = h / norm
        g = g / norm
        h.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "x_coeff", h)
        object.__setattr__(self, "p_coeff", g)

    @property
    def n(self) -> int:
        return self.x_coeff.shape[0]


@dataclass(frozen=True, eq=False)
class BipartitionVerdict:
    """Entanglement evidence for one bipartition.

    Witness-dependent fields are None when the partial transposition is
    positive semidefinite (nothing to certify).  ``degenerate`` flags a
    (numerically) repeated most-negative eigenvalue, where any vector in
    the eigenspace would be an equally valid witness.
    """

    bipartition: Bipartition
    ppt_min_eig: float
    witness: Optional[WitnessVector]
    bound: Optional[float]
    measured: Optional[float]
    sigma_hg: Optional[float]
    s0: Optional[float]
    certified: bool
    degenerate: bool = False


def ppt_matrix(gamma: CovarianceMatrix, bipartition: Bipartition) -> np.ndarray:
    """The 2n x 2n separability test matrix [[xx, E/2], [E/2, pp]].

    Positive semidefiniteness is necessary for separability across the
    bipartition.  The two sign choices of E are related by a similarity,
    so only one is built.  Only block-diagonal matrices are supported.
    """
    if bipartition.n != gamma.n:
        raise ValueError("bipartition and matrix mode counts disagree")
    _require_block_diagonal(gamma, "ppt_matrix")
    return _paired_block_matrix(gamma.xx, gamma.pp, bipartition.signs())


def _ppt_eigensystem(gamma, bipartition):
    vals, vecs = np.linalg.eigh(ppt_matrix(gamma, bipartition))
    vec = vecs[:, 0].copy()
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    return vals, vec


def extract_witness(
    gamma: CovarianceMatrix, bipartition: Bipartition, tol: float = 1e-9
) -> Optional[WitnessVector]:
    """Witness from the most negative eigenvector of the test matrix.

    Returns None if the minimum eigenvalue is >= -tol.  The eigenvector
    z splits into x-part and p-part; a unit eigenvector already satisfies
    the witness normalization.
    """
    vals, vec = _ppt_eigensystem(gamma, bipartition)
    if vals[0] >= -tol:
        return None
    n = gamma.n
    return WitnessVector(x_coeff=vec[:n], p_coeff=vec[n:])


def confidence(
    witness: WitnessVector,
    bipartition: Bipartition,
    gamma: CovarianceMatrix,
    sigma: SigmaMatrix,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> BipartitionVerdict:
    """Confidence level of the witness violation on the given matrix.

    measured = h.xx.h + g.pp.g is the value of the witnessed variance sum,
    bound = |h_A . g_A| + |h_B . g_B| is what separable states satisfy,
    and sigma_hg propagates the elementwise errors through the quadratic
    form.  s0 = (bound - measured) / sigma_hg; both numerator and
    denominator are homogeneous of degree 2 in (h, g), so s0 does not
    depend on the witness scale.
    """
    n = gamma.n
    if witness.n != n or bipartition.n != n:
        raise ValueError("witness, bipartition and matrix sizes disagree")
    if sigma.n != n:
        raise ValueError("sigma has a different mode count")
    _require_block_diagonal(gamma, "confidence")
    h = witness.x_coeff
    g = witness.p_coeff
    measured = float(h @ gamma.xx @ h + g @ gamma.pp @ g)
    ia = [i - 1 for i in bipartition.group_a]
    ib = [i - 1 for i in bipartition.group_b]
    bound = float(abs(h[ia] @ g[ia]) + abs(h[ib] @ g[ib]))
    h2 = h**2
    g2 = g**2
    var = float(h2 @ sigma.xx**2 @ h2 + g2 @ sigma.pp**2 @ g2)
    if var <= 0.0:
        raise DegenerateSigmaError("error propagation produced a vanishing denominator")
    sigma_hg = float(np.sqrt(var))
    s0 = (bound - measured) / sigma_hg
    vals = np.linalg.eigvalsh(ppt_matrix(gamma, bipartition))
    return BipartitionVerdict(
        bipartition=bipartition,
        ppt_min_eig=float(vals[0]),
        witness=witness,
        bound=bound,
        measured=measured,
        sigma_hg=sigma_hg,
        s0=float(s0),
        certified=bool(s0 >= threshold),
    )


def enumerate_bipartitions(n: int) -> list[Bipartition]:
    """All 2^(n-1) - 1 canonical bipartitions of n modes.

    Ordered by the size of the group containing mode 1, then
    lexicographically within each size.
    """
    if n < 2:
        raise ValueError("bipartitions need at least two modes")
    rest = range(2, n + 1)
    out = []
    for size in range(0, n - 1):
        for extra in combinations(rest, size):
            out.append(Bipartition.from_group((1,) + extra, n))
    return out


def scan(
    gamma: CovarianceMatrix,
    sigma: SigmaMatrix,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    tol: float = 1e-9,
) -> list[BipartitionVerdict]:
    """One verdict per bipartition, in enumeration order.

    Bipartitions whose test matrix stays positive get a witness-less
    verdict; a repeated most-negative eigenvalue (within ``tol``) is
    flagged as degenerate.
    """
    _require_block_diagonal(gamma, "scan")
    verdicts = []
    for bp in enumerate_bipartitions(gamma.n):
        vals, vec = _ppt_eigensystem(gamma, bp)
        if vals[0] >= -tol:
            verdicts.append(
                BipartitionVerdict(
                    bipartition=bp,
                    ppt_min_eig=float(vals[0]),
                    witness=None,
                    bound=None,
                    measured=None,
                    sigma_hg=None,
                    s0=None,
                    certified=False,
                )
            )
            continue
        witness = WitnessVector(x_coeff=vec[: gamma.n], p_coeff=vec[gamma.n :])
        verdict = confidence(witness, bp, gamma, sigma, threshold=threshold)
        if vals[1] - vals[0] <= tol:
            verdict = dataclasses.replace(verdict, degenerate=True)
        verdicts.append(verdict)
    return verdicts
