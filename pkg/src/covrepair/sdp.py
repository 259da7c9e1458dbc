"""Small dense LMI solver: min c.x subject to B - sum_i x_i A_i >= 0.

Problems are described block-diagonally: full symmetric blocks for matrix
inequalities plus a dedicated diagonal block type for scalar constraints,
which dominate the constraint count in the repair problems (two rows per
matrix element).  Coefficients are stored sparsely as index/value triplets.

The numerical engine is cvxopt's cone LP solver (primal-dual
path-following with Nesterov-Todd scaling and dense normal equations),
which this module drives through a conversion of the block structure to
the nonnegative-orthant and semidefinite cones.  ``verify`` recomputes the
constraint blocks from the raw problem data and eigendecomposes them,
giving a certificate check that is independent of the solver.

Solves are deterministic: the same problem and options produce the same
iteration count and solution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers
from cvxopt import spmatrix as cvx_spmatrix

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-8
#: Relative duality-gap tolerance.  The interior-point iterate this selects
#: on a degenerate optimal face is part of the contract: the bundled
#: regression values were produced at this setting.
DEFAULT_REL_GAP_TOL = 1e-6
DEFAULT_MAX_ITER = 200

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITERATIONS = "max-iterations"
STATUS_NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True, eq=False)
class DenseBlock:
    """One full symmetric block of the constraint B - sum_i x_i A_i >= 0.

    ``entries`` holds the coefficient matrices A_i as (var, row, col, value)
    triplets with row <= col; the mirrored element is implied.  Repeated
    triplets accumulate.
    """

    dim: int
    constant: np.ndarray
    entries: tuple[tuple[int, int, int, float], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("block dimension must be positive")
        b = np.array(self.constant, dtype=float)
        if b.shape != (self.dim, self.dim):
            raise ValueError(f"constant block must be {self.dim}x{self.dim}")
        if not np.all(np.isfinite(b)):
            raise ValueError("constant block contains non-finite entries")
        if np.abs(b - b.T).max() > 1e-12 * max(1.0, np.abs(b).max()):
            raise ValueError("constant block must be symmetric")
        b = (b + b.T) / 2
        b.setflags(write=False)
        ent = tuple((int(v), int(r), int(c), float(x)) for v, r, c, x in self.entries)
        for v, r, c, x in ent:
            if v < 0:
                raise ValueError("negative variable index in block entry")
            if not (0 <= r <= c < self.dim):
                raise ValueError(f"entry position ({r}, {c}) invalid: need row <= col < {self.dim}")
            if not np.isfinite(x):
                raise ValueError("non-finite coefficient in block entry")
        object.__setattr__(self, "constant", b)
        object.__setattr__(self, "entries", ent)

    def coefficient(self, var: int) -> np.ndarray:
        """Dense A_var for this block."""
        a = np.zeros((self.dim, self.dim))
        for v, r, c, x in self.entries:
            if v == var:
                a[r, c] += x
                if r != c:
                    a[c, r] += x
        return a

    def slack(self, x: np.ndarray) -> np.ndarray:
        """B - sum_i x_i A_i as a dense symmetric matrix."""
        s = self.constant.copy()
        for v, r, c, val in self.entries:
            s[r, c] -= val * x[v]
            if r != c:
                s[c, r] -= val * x[v]
        return s

    def variables(self) -> set[int]:
        return {v for v, _, _, _ in self.entries}


@dataclass(frozen=True, eq=False)
class DiagBlock:
    """A run of scalar constraints b_k - sum_i x_i a_ik >= 0.

    Equivalent to 1x1 dense blocks but stored and solved as a batch;
    ``entries`` are (var, position, value) triplets.
    """

    dim: int
    constant: np.ndarray
    entries: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("block dimension must be positive")
        b = np.array(self.constant, dtype=float).reshape(-1)
        if b.shape != (self.dim,):
            raise ValueError(f"constant vector must have length {self.dim}")
        if not np.all(np.isfinite(b)):
            raise ValueError("constant vector contains non-finite entries")
        b.setflags(write=False)
        ent = tuple((int(v), int(p), float(x)) for v, p, x in self.entries)
        for v, p, x in ent:
            if v < 0 or not (0 <= p < self.dim):
                raise ValueError(f"entry (var={v}, pos={p}) out of range")
            if not np.isfinite(x):
                raise ValueError("non-finite coefficient in block entry")
        object.__setattr__(self, "constant", b)
        object.__setattr__(self, "entries", ent)

    def slack(self, x: np.ndarray) -> np.ndarray:
        s = self.constant.copy()
        for v, p, val in self.entries:
            s[p] -= val * x[v]
        return s

    def variables(self) -> set[int]:
        return {v for v, _, _ in self.entries}


Block = Union[DenseBlock, DiagBlock]


@dataclass(frozen=True, eq=False)
class LmiProblem:
    """min objective.x subject to every block slack being PSD/nonnegative."""

    num_vars: int
    objective: np.ndarray
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("problem must have at least one variable")
        c = np.array(self.objective, dtype=float).reshape(-1)
        if c.shape != (self.num_vars,):
            raise ValueError(f"objective must have length {self.num_vars}")
        c.setflags(write=False)
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("problem must have at least one block")
        for blk in blocks:
            top = max(blk.variables(), default=-1)
            if top >= self.num_vars:
                raise ValueError(f"block references variable {top} >= num_vars={self.num_vars}")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "blocks", blocks)

    @property
    def total_dim(self) -> int:
        """Sum of all block dimensions (the stacked constraint size)."""
        return sum(b.dim for b in self.blocks)


@dataclass(frozen=True, eq=False)
class SdpSolution:
    """Solver outcome; ``x`` is None unless an iterate is available."""

    x: Optional[np.ndarray]
    objective: Optional[float]
    status: str
    duality_gap: Optional[float]
    iterations: int


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    """Independent recomputation of the constraint blocks at a point."""

    block_min_eigs: tuple[float, ...]
    min_eig: float
    objective: float


def _conelp_parts(problem: LmiProblem):
    """Stack blocks into cone-LP (G, h, dims): linear rows first, then one
    semidefinite block per DenseBlock, each vectorized column-major."""
    diag_blocks = [b for b in problem.blocks if isinstance(b, DiagBlock)]
    dense_blocks = [b for b in problem.blocks if isinstance(b, DenseBlock)]
    m = problem.num_vars

    h_parts = []
    gi: list[int] = []  # row indices of G triplets
    gj: list[int] = []  # col (variable) indices
    gv: list[float] = []

    offset = 0
    for blk in diag_blocks:
        h_parts.append(blk.constant)
        for v, p, val in blk.entries:
            gi.append(offset + p)
            gj.append(v)
            gv.append(val)
        offset += blk.dim

    sdims = []
    for blk in dense_blocks:
        d = blk.dim
        h_parts.append(blk.constant.flatten(order="F"))
        for v, r, c, val in blk.entries:
            gi.append(offset + c * d + r)
            gj.append(v)
            gv.append(val)
            if r != c:
                gi.append(offset + r * d + c)
                gj.append(v)
                gv.append(val)
        offset += d * d
        sdims.append(d)

    g = cvx_spmatrix(gv, gi, gj, size=(offset, m))
    h = cvx_matrix(np.concatenate(h_parts) if h_parts else np.zeros(0))
    dims = {"l": sum(b.dim for b in diag_blocks), "q": [], "s": sdims}
    return g, h, dims, diag_blocks, dense_blocks


def _primalstart(problem: LmiProblem, x0: np.ndarray, diag_blocks, dense_blocks):
    """Build a strictly feasible conelp starting point from x0, or raise."""
    s_parts = []
    for blk in diag_blocks:
        s = blk.slack(x0)
        if np.min(s) <= 0:
            raise ValueError("supplied starting point is not strictly feasible")
        s_parts.append(s)
    for blk in dense_blocks:
        s = blk.slack(x0)
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            raise ValueError("supplied starting point is not strictly feasible") from None
        s_parts.append(s.flatten(order="F"))
    return {"x": cvx_matrix(np.asarray(x0, dtype=float)), "s": cvx_matrix(np.concatenate(s_parts))}


def solve(
    problem: LmiProblem,
    *,
    feas_tol: float = DEFAULT_FEAS_TOL,
    gap_tol: float = DEFAULT_GAP_TOL,
    rel_gap_tol: float = DEFAULT_REL_GAP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: Optional[np.ndarray] = None,
) -> SdpSolution:
    """Solve the LMI problem.

    Termination declares ``optimal`` once the iterate is feasible within
    feas_tol and the duality gap is below gap_tol absolutely or below
    rel_gap_tol relative to the objective.  An infeasible problem is
    reported as ``infeasible`` (certificate found), an unbounded one as
    ``unbounded``.  ``x0``, if given, must be strictly feasible and is used
    as the starting point; by default the solver cold-starts.
    """
    used = set()
    for blk in problem.blocks:
        used |= blk.variables()
    missing = set(range(problem.num_vars)) - used
    if missing:
        raise ValueError(f"variables {sorted(missing)} appear in no constraint block")

    g, h, dims, diag_blocks, dense_blocks = _conelp_parts(problem)
    start = None
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.shape != (problem.num_vars,):
            raise ValueError("x0 has wrong length")
        start = _primalstart(problem, x0, diag_blocks, dense_blocks)

    options = {
        "show_progress": False,
        "maxiters": int(max_iter),
        "abstol": float(gap_tol),
        "reltol": float(rel_gap_tol),
        "feastol": float(feas_tol),
    }
    try:
        sol = cvx_solvers.conelp(
            cvx_matrix(problem.objective), g, h, dims, primalstart=start, options=options
        )
    except ArithmeticError:
        return SdpSolution(
            x=None, objective=None, status=STATUS_NUMERICAL_FAILURE, duality_gap=None, iterations=0
        )

    iterations = int(sol.get("iterations", 0))
    raw = sol["status"]
    x = np.array(sol["x"]).reshape(-1) if sol["x"] is not None else None
    objective = float(problem.objective @ x) if x is not None else None
    gap = float(sol["gap"]) if sol.get("gap") is not None else None

    if raw == "optimal":
        status = STATUS_OPTIMAL
    elif raw == "primal infeasible":
        status = STATUS_INFEASIBLE
        x, objective, gap = None, None, None
    elif raw == "dual infeasible":
        # x is an unbounded-ray certificate, not an optimum
        status = STATUS_UNBOUNDED
        objective, gap = None, None
    elif iterations >= max_iter:
        status = STATUS_MAX_ITERATIONS
    else:
        status = STATUS_NUMERICAL_FAILURE
    return SdpSolution(
        x=x, objective=objective, status=status, duality_gap=gap, iterations=iterations
    )


def verify(problem: LmiProblem, x: np.ndarray) -> FeasibilityReport:
    """Recompute every block at x and report the minimum eigenvalues.

    Works from the raw triplet data only, so it independently certifies a
    solver result: a feasible point has all block minima >= -tolerance.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (problem.num_vars,):
        raise ValueError(f"x must have length {problem.num_vars}")
    mins = []
    for blk in problem.blocks:
        s = blk.slack(x)
        if isinstance(blk, DiagBlock):
            mins.append(float(np.min(s)))
        else:
            mins.append(float(np.linalg.eigvalsh(s)[0]))
    return FeasibilityReport(
        block_min_eigs=tuple(mins),
        min_eig=min(mins),
        objective=float(problem.objective @ x),
    )
