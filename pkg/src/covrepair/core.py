"""Core domain types and physicality tests for multimode covariance matrices.

A state of n bosonic modes is described here by its matrix of second-order
quadrature moments, stored in three blocks::

    gamma = [[xx, xp],
             [xp.T, pp]]

with the convention that the vacuum state has variance 1/2 in every
quadrature.  A real symmetric 2n x 2n matrix is a valid covariance matrix
of a quantum state iff gamma + (i/2) J >= 0, where J is the symplectic
form.  This module provides that test (in an equivalent real 4n x 4n
form), the weaker paired-block test that ignores the cross block, partial
transposition of a mode group, and the variance inequality underlying
both.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

#: Default absolute tolerance on eigenvalues used by the physicality tests.
#: Measured data enters at ~1e-5 precision and solver residuals sit around
#: 1e-8, so anything above this is a genuine violation.
DEFAULT_TOL = 1e-9

#: Asymmetry level of an input block above which construction warns.
ASYMMETRY_WARN = 1e-6


def _as_square(a, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _symmetrized(a: np.ndarray, name: str) -> tuple[np.ndarray, float]:
    defect = float(np.abs(a - a.T).max())
    if defect > ASYMMETRY_WARN:
        warnings.warn(
            f"{name} deviates from symmetry by {defect:.3g}; symmetrizing by averaging",
            stacklevel=4,
        )
    return (a + a.T) / 2.0, defect


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Second-moment matrix of an n-mode state in (xx, xp, pp) block form.

    xx and pp are symmetrized by averaging on construction; the largest
    asymmetry found is recorded in ``asymmetry_defect`` and a warning is
    emitted if it exceeds 1e-6.  ``xp`` defaults to the zero block.
    """

    xx: np.ndarray
    pp: np.ndarray
    xp: Optional[np.ndarray] = None
    asymmetry_defect: float = field(init=False)

    def __post_init__(self):
        xx = _as_square(self.xx, "xx")
        pp = _as_square(self.pp, "pp")
        n = xx.shape[0]
        if pp.shape[0] != n:
            raise ValueError(f"xx is {n}x{n} but pp is {pp.shape[0]}x{pp.shape[0]}")
        if self.xp is None:
            xp = np.zeros((n, n))
        else:
            xp = _as_square(self.xp, "xp")
            if xp.shape[0] != n:
                raise ValueError(f"xp block has shape {xp.shape}, expected ({n}, {n})")
        xx, dxx = _symmetrized(xx, "xx")
        pp, dpp = _symmetrized(pp, "pp")
        object.__setattr__(self, "xx", _freeze(xx))
        object.__setattr__(self, "pp", _freeze(pp))
        object.__setattr__(self, "xp", _freeze(xp))
        object.__setattr__(self, "asymmetry_defect", max(dxx, dpp))

    @property
    def n(self) -> int:
        """Number of modes."""
        return self.xx.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Assembled 2n x 2n matrix [[xx, xp], [xp.T, pp]]."""
        return np.block([[self.xx, self.xp], [self.xp.T, self.pp]])

    @property
    def has_cross_block(self) -> bool:
        """True if any xp entry is nonzero (exact comparison, no threshold)."""
        return bool(np.any(self.xp != 0.0))

    @classmethod
    def from_matrix(cls, m) -> "CovarianceMatrix":
        """Split a 2n x 2n matrix into blocks."""
        m = _as_square(m, "matrix")
        if m.shape[0] % 2:
            raise ValueError("full matrix must have even dimension")
        n = m.shape[0] // 2
        return cls(xx=m[:n, :n], pp=m[n:, n:], xp=m[:n, n:])

    @classmethod
    def vacuum(cls, n: int) -> "CovarianceMatrix":
        """Covariance matrix of the n-mode vacuum, diag(1/2, ..., 1/2)."""
        if n < 1:
            raise ValueError("mode count must be positive")
        return cls(xx=np.eye(n) / 2, pp=np.eye(n) / 2)


@dataclass(frozen=True, eq=False)
class SigmaMatrix:
    """Per-element standard deviations of a measured covariance matrix.

    Blocks mirror the covariance layout; all entries must be strictly
    positive.  The cross block defaults to ones so unweighted problems and
    datasets without cross-block errors share one code path.
    """

    xx: np.ndarray
    pp: np.ndarray
    xp: Optional[np.ndarray] = None

    def __post_init__(self):
        xx = _as_square(self.xx, "sigma xx")
        pp = _as_square(self.pp, "sigma pp")
        n = xx.shape[0]
        if pp.shape[0] != n:
            raise ValueError("sigma blocks disagree in size")
        xp = np.ones((n, n)) if self.xp is None else _as_square(self.xp, "sigma xp")
        if xp.shape[0] != n:
            raise ValueError("sigma xp block has wrong size")
        xx, _ = _symmetrized(xx, "sigma xx")
        pp, _ = _symmetrized(pp, "sigma pp")
        for name, blk in (("xx", xx), ("xp", xp), ("pp", pp)):
            if np.any(blk <= 0.0):
                raise ValueError(f"sigma {name} entries must be strictly positive")
        object.__setattr__(self, "xx", _freeze(xx))
        object.__setattr__(self, "pp", _freeze(pp))
        object.__setattr__(self, "xp", _freeze(xp))

    @property
    def n(self) -> int:
        return self.xx.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Assembled 2n x 2n matrix of standard deviations."""
        return np.block([[self.xx, self.xp], [self.xp.T, self.pp]])

    @classmethod
    def uniform(cls, n: int, value: float) -> "SigmaMatrix":
        """Constant standard deviation on every element."""
        full = np.full((n, n), float(value))
        return cls(xx=full, pp=full.copy(), xp=full.copy())


@dataclass(frozen=True)
class Bipartition:
    """Split of the modes {1..n} into two nonempty groups.

    Mode indices are 1-based.  The canonical form keeps mode 1 in
    ``group_a``, which removes the {A,B} vs {B,A} duplicate; constructors
    swap the groups if needed.
    """

    group_a: tuple[int, ...]
    group_b: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(i) for i in self.group_a))
        b = tuple(sorted(int(i) for i in self.group_b))
        if not a or not b:
            raise ValueError("both groups of a bipartition must be nonempty")
        n = len(a) + len(b)
        if set(a) & set(b):
            raise ValueError("bipartition groups must be disjoint")
        if set(a) | set(b) != set(range(1, n + 1)):
            raise ValueError(f"bipartition groups must cover modes 1..{n}")
        if 1 in b:
            a, b = b, a
        object.__setattr__(self, "group_a", a)
        object.__setattr__(self, "group_b", b)

    @classmethod
    def from_group(cls, modes: Sequence[int], n: int) -> "Bipartition":
        """Bipartition with the given modes on one side, complement on the other."""
        modes = set(int(i) for i in modes)
        if not modes <= set(range(1, n + 1)):
            raise ValueError(f"modes {sorted(modes)} out of range for n={n}")
        rest = set(range(1, n + 1)) - modes
        if not modes or not rest:
            raise ValueError("bipartition side must be a proper nonempty subset")
        return cls(tuple(sorted(modes)), tuple(sorted(rest)))

    @classmethod
    def parse(cls, spec: str, n: int) -> "Bipartition":
        """Parse ``"1,4"`` or ``"1,4|2,3"`` into a bipartition of n modes."""
        spec = spec.strip()
        left, _, right = spec.partition("|")
        try:
            modes = [int(t) for t in left.split(",") if t.strip()]
        except ValueError:
            raise ValueError(f"cannot parse bipartition spec {spec!r}") from None
        bp = cls.from_group(modes, n)
        if right:
            try:
                other = set(int(t) for t in right.split(",") if t.strip())
            except ValueError:
                raise ValueError(f"cannot parse bipartition spec {spec!r}") from None
            if other != set(bp.group_b) and other != set(bp.group_a):
                raise ValueError(f"sides of {spec!r} do not partition modes 1..{n}")
        return bp

    @property
    def n(self) -> int:
        return len(self.group_a) + len(self.group_b)

    @property
    def label(self) -> str:
        """Canonical spec string, e.g. ``"1,4|2,3"``."""
        return ",".join(map(str, self.group_a)) + "|" + ",".join(map(str, self.group_b))

    def signs(self) -> np.ndarray:
        """Length-n vector with +1 on group_a modes and -1 on group_b modes."""
        e = np.empty(self.n)
        e[[i - 1 for i in self.group_a]] = 1.0
        e[[i - 1 for i in self.group_b]] = -1.0
        return e


@dataclass(frozen=True, eq=False)
class PhysicalityReport:
    """Outcome of a physicality eigenvalue test."""

    min_eig: float
    is_physical: bool
    eigvec: np.ndarray
    tol: float


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n symplectic form [[0, I], [-I, 0]]."""
    if n < 1:
        raise ValueError("mode count must be positive")
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


def _real_test_matrix(xx: np.ndarray, xp: np.ndarray, pp: np.ndarray) -> np.ndarray:
    # Real 4n x 4n equivalent of the Hermitian condition gamma + (i/2) J >= 0,
    # block order (x, x', p, p').  The opposite sign choice is a similar
    # matrix, so testing one suffices.
    n = xx.shape[0]
    half = np.eye(n) / 2
    zero = np.zeros((n, n))
    return np.block(
        [
            [xx, zero, xp, -half],
            [zero, xx, half, xp],
            [xp.T, half, pp, zero],
            [-half, xp.T, zero, pp],
        ]
    )


def _paired_block_matrix(xx: np.ndarray, pp: np.ndarray, signs: np.ndarray) -> np.ndarray:
    # [[xx, diag(signs)/2], [diag(signs)/2, pp]]; used by the weak test
    # (all +1) and by the partial-transposition test (signs per mode group).
    off = np.diag(signs) / 2
    return np.block([[xx, off], [off, pp]])


def physicality_test_matrix(gamma: CovarianceMatrix) -> np.ndarray:
    """Real 4n x 4n matrix whose positive semidefiniteness is equivalent to
    physicality of ``gamma``."""
    return _real_test_matrix(gamma.xx, gamma.xp, gamma.pp)


def _min_eig_report(matrix: np.ndarray, tol: float) -> PhysicalityReport:
    vals, vecs = np.linalg.eigh(matrix)
    # eigh sorts ascending, so index 0 is the most negative eigenvalue; ties
    # resolve to the lowest index.
    vec = vecs[:, 0].copy()
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    return PhysicalityReport(
        min_eig=float(vals[0]),
        is_physical=bool(vals[0] >= -tol),
        eigvec=_freeze(vec),
        tol=tol,
    )


def physicality_defect(gamma: CovarianceMatrix, tol: float = DEFAULT_TOL) -> PhysicalityReport:
    """Minimum eigenvalue of the full physicality test matrix.

    The reported ``min_eig`` equals the most negative eigenvalue of
    gamma + (i/2) J; the state is physical iff it is >= -tol.  The
    eigenvector has length 4n (real-form coordinates).
    """
    return _min_eig_report(physicality_test_matrix(gamma), tol)


def weak_physicality_defect(gamma: CovarianceMatrix, tol: float = DEFAULT_TOL) -> PhysicalityReport:
    """Minimum eigenvalue of [[xx, I/2], [I/2, pp]].

    Necessary but not sufficient for physicality (the cross block is
    ignored); for block-diagonal matrices it is equivalent to the full
    test.  The eigenvector has length 2n.
    """
    n = gamma.n
    return _min_eig_report(_paired_block_matrix(gamma.xx, gamma.pp, np.ones(n)), tol)


def partial_transpose(gamma: CovarianceMatrix, bipartition: Bipartition) -> CovarianceMatrix:
    """Covariance matrix of the partially transposed state.

    Transposition of the ``group_b`` modes flips the sign of their momentum
    rows and columns: pp[i, j] -> pp[i, j] * e_i * e_j and
    xp[i, j] -> xp[i, j] * e_j, with e_k = -1 for k in group_b.  Diagonal
    pp entries are untouched (their sign flips twice), and applying the
    operation twice restores the input exactly.
    """
    if bipartition.n != gamma.n:
        raise ValueError(f"bipartition is over {bipartition.n} modes, matrix has {gamma.n}")
    e = bipartition.signs()
    return CovarianceMatrix(
        xx=gamma.xx,
        pp=gamma.pp * np.outer(e, e),
        xp=gamma.xp * e[np.newaxis, :],
    )


def general_variance_test(
    gamma: CovarianceMatrix,
    h: np.ndarray,
    h_prime: np.ndarray,
    g: np.ndarray,
    g_prime: np.ndarray,
) -> float:
    """Margin of the two-combination variance inequality.

    For u = (h, x), u' = (h', x), v = (g, p), v' = (g', p) every physical
    state satisfies

        <(du + dv')^2 + (du' + dv)^2>  >=  |h.g - h'.g'|,

    and validity for all vectors is equivalent to physicality.  Returns
    LHS - RHS; with h' = g' = 0 this reduces to the single-combination
    inequality <(du)^2 + (dv)^2> >= |h.g|.
    """
    n = gamma.n
    vecs = [np.asarray(v, dtype=float) for v in (h, h_prime, g, g_prime)]
    if any(v.shape != (n,) for v in vecs):
        raise ValueError(f"witness vectors must have length {n}")
    h, hp, g, gp = vecs
    lhs = (
        h @ gamma.xx @ h
        + gp @ gamma.pp @ gp
        + 2 * h @ gamma.xp @ gp
        + hp @ gamma.xx @ hp
        + g @ gamma.pp @ g
        + 2 * hp @ gamma.xp @ g
    )
    return float(lhs - abs(h @ g - hp @ gp))
