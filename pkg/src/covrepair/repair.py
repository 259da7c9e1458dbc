"""Minimax physicality repair of measured covariance matrices.

Given a measured matrix gamma0 (typically slightly nonphysical) and the
per-element standard deviations sigma, the repaired matrix is the
physical covariance matrix minimizing

    max_ij |gamma_ij - gamma0_ij| / sigma_ij ,

so every element of the result stays inside the smallest possible
sigma-interval around its measured value.  With sigma omitted all weights
are 1 and the plain Chebyshev-nearest physical matrix is returned.

The minimum is computed as a semidefinite program: an epigraph variable s
bounds all weighted deviations through scalar constraints (two per
independent matrix element), and physicality enters as the real 4n x 4n
test-matrix block.  Only upper-triangle elements are variables; symmetry
is structural.  The module also provides the crude diagonal-shift repair
used as a baseline for comparison, and elementwise deviation reports.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sdp
from .core import CovarianceMatrix, SigmaMatrix, physicality_defect

#: The baseline shift adds this multiple of |lambda_min| to the diagonal;
#: slightly above 1 so the result clears the boundary.
SHIFT_FACTOR = 1.001


class SolverFailure(RuntimeError):
    """Raised when the repair SDP does not reach an optimal solution."""

    def __init__(self, message: str, solution: Optional[sdp.SdpSolution] = None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True, eq=False)
class RepairResult:
    """Optimal minimax level and the repaired matrix.

    ``s_star`` is dimensionless (units of sigma); ``weighted`` records
    whether measured standard deviations were used or all weights were 1.
    """

    s_star: float
    gamma_star: CovarianceMatrix
    solution: sdp.SdpSolution
    weighted: bool


@dataclass(frozen=True, eq=False)
class DeviationReport:
    """Elementwise deviations between two covariance matrices.

    ``ratios`` is the full 2n x 2n matrix |gamma_ij - gamma0_ij| / sigma_ij
    (absolute deviations if no sigma was given); ``count_above`` counts the
    independent elements (upper triangles, plus the cross block when
    present) strictly exceeding ``threshold``.
    """

    ratios: np.ndarray
    max_ratio: float
    argmax: tuple[int, int]
    count_above: int
    threshold: float


def _element_layout(n: int, include_xp: bool) -> list[tuple[str, int, int]]:
    """Order of the independent gamma elements behind variable s."""
    layout = [("xx", i, j) for i in range(n) for j in range(i, n)]
    if include_xp:
        layout += [("xp", i, j) for i in range(n) for j in range(n)]
    layout += [("pp", i, j) for i in range(n) for j in range(i, n)]
    return layout


def _dense_placements(kind: str, i: int, j: int, n: int) -> list[tuple[int, int]]:
    """Positions of one gamma element inside the 4n x 4n test matrix,
    block order (x, x', p, p'); upper-triangle coordinates."""
    if kind == "xx":
        return [(i, j), (n + i, n + j)]
    if kind == "pp":
        return [(2 * n + i, 2 * n + j), (3 * n + i, 3 * n + j)]
    return [(i, 2 * n + j), (n + i, 3 * n + j)]  # xp rows always above the diagonal


def assemble(gamma0: CovarianceMatrix, sigma: Optional[SigmaMatrix] = None) -> sdp.LmiProblem:
    """Build the repair LMI for a measured matrix.

    Variables are (s, upper triangle of xx, all of xp, upper triangle of
    pp); the xp variables are omitted when the measured cross block is
    exactly zero.  The constraint stacks a scalar block (s >= 0 plus the
    two deviation bounds per element) with the 4n x 4n physicality block,
    giving 2n^2+n+1 variables of total dimension 4n^2+6n+1 in general and
    n^2+n+1 / 2n^2+6n+1 in the block-diagonal case.
    """
    n = gamma0.n
    if sigma is not None and sigma.n != n:
        raise ValueError(f"sigma is for {sigma.n} modes, matrix has {n}")
    include_xp = gamma0.has_cross_block
    layout = _element_layout(n, include_xp)
    m = 1 + len(layout)

    gval = {"xx": gamma0.xx, "xp": gamma0.xp, "pp": gamma0.pp}
    if sigma is None:
        ones = np.ones((n, n))
        sval = {"xx": ones, "xp": ones, "pp": ones}
    else:
        sval = {"xx": sigma.xx, "xp": sigma.xp, "pp": sigma.pp}

    objective = np.zeros(m)
    objective[0] = 1.0

    # scalar block: s >= 0, then (s sig + g - g0 >= 0, s sig - g + g0 >= 0)
    # per element, in layout order
    const = [0.0]
    entries: list[tuple[int, int, float]] = [(0, 0, -1.0)]
    row = 1
    for var, (kind, i, j) in enumerate(layout, start=1):
        g0 = float(gval[kind][i, j])
        sg = float(sval[kind][i, j])
        const.append(-g0)
        entries.append((0, row, -sg))
        entries.append((var, row, -1.0))
        row += 1
        const.append(g0)
        entries.append((0, row, -sg))
        entries.append((var, row, 1.0))
        row += 1
    scalar_block = sdp.DiagBlock(dim=row, constant=np.array(const), entries=tuple(entries))

    # physicality block: constant part carries the +-I/2 couplings, each
    # gamma variable subtracts its placements
    d = 4 * n
    constant = np.zeros((d, d))
    for i in range(n):
        constant[i, 3 * n + i] = constant[3 * n + i, i] = -0.5
        constant[n + i, 2 * n + i] = constant[2 * n + i, n + i] = 0.5
    dense_entries = []
    for var, (kind, i, j) in enumerate(layout, start=1):
        for r, c in _dense_placements(kind, i, j, n):
            dense_entries.append((var, r, c, -1.0))
    dense_block = sdp.DenseBlock(dim=d, constant=constant, entries=tuple(dense_entries))

    return sdp.LmiProblem(
        num_vars=m, objective=objective, blocks=(scalar_block, dense_block)
    )


def _gamma_from_solution(x: np.ndarray, n: int, include_xp: bool) -> CovarianceMatrix:
    xx = np.zeros((n, n))
    xp = np.zeros((n, n))
    pp = np.zeros((n, n))
    for var, (kind, i, j) in enumerate(_element_layout(n, include_xp), start=1):
        val = x[var]
        if kind == "xx":
            xx[i, j] = xx[j, i] = val
        elif kind == "pp":
            pp[i, j] = pp[j, i] = val
        else:
            xp[i, j] = val
    return CovarianceMatrix(xx=xx, pp=pp, xp=xp if include_xp else None)


def repair(
    gamma0: CovarianceMatrix, sigma: Optional[SigmaMatrix] = None, **solver_options
) -> RepairResult:
    """Most probable physical covariance matrix for a measured one.

    Solves the minimax problem above; keyword options are passed to
    :func:`covrepair.sdp.solve`.  A physical input comes back unchanged up
    to solver tolerance with s_star ~ 0.  Raises :class:`SolverFailure` if
    the solver does not report an optimal solution.
    """
    problem = assemble(gamma0, sigma)
    solution = sdp.solve(problem, **solver_options)
    if solution.status != sdp.STATUS_OPTIMAL:
        raise SolverFailure(f"repair SDP ended with status {solution.status!r}", solution)
    gamma_star = _gamma_from_solution(solution.x, gamma0.n, gamma0.has_cross_block)
    return RepairResult(
        s_star=float(solution.x[0]),
        gamma_star=gamma_star,
        solution=solution,
        weighted=sigma is not None,
    )


def baseline_shift(gamma: CovarianceMatrix) -> CovarianceMatrix:
    """Crude repair: add 1.001 |lambda_min| to every diagonal element.

    Returns the input unchanged when it is already physical.  The result
    is physical but can sit many standard deviations away from the
    measured diagonal, which is what the minimax repair avoids.
    """
    report = physicality_defect(gamma)
    if report.min_eig >= 0.0:
        return gamma
    shift = SHIFT_FACTOR * abs(report.min_eig) * np.eye(gamma.n)
    return CovarianceMatrix(xx=gamma.xx + shift, pp=gamma.pp + shift, xp=gamma.xp)


def deviation_report(
    gamma0: CovarianceMatrix,
    gamma: CovarianceMatrix,
    sigma: Optional[SigmaMatrix] = None,
    threshold: float = 1.0,
) -> DeviationReport:
    """Elementwise |gamma - gamma0| / sigma with summary statistics.

    With sigma omitted the ratios are plain absolute deviations.  The
    count of elements above threshold runs over independent elements only:
    both upper triangles, plus the full cross block when either matrix has
    one.
    """
    if gamma.n != gamma0.n:
        raise ValueError("matrices have different mode counts")
    if sigma is not None and sigma.n != gamma0.n:
        raise ValueError("sigma has a different mode count")
    n = gamma0.n
    delta = np.abs(gamma.matrix - gamma0.matrix)
    ratios = delta / sigma.matrix if sigma is not None else delta
    flat = int(np.argmax(ratios))
    argmax = (flat // (2 * n), flat % (2 * n))

    upper = np.triu_indices(n)
    independent = [ratios[:n, :n][upper], ratios[n:, n:][upper]]
    if gamma.has_cross_block or gamma0.has_cross_block:
        independent.append(ratios[:n, n:].ravel())
    independent = np.concatenate(independent)
    return DeviationReport(
        ratios=ratios,
        max_ratio=float(ratios[argmax]),
        argmax=argmax,
        count_above=int(np.sum(independent > threshold)),
        threshold=float(threshold),
    )
