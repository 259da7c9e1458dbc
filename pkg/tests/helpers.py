"""Shared generators for randomized tests.

Physical covariance matrices are built constructively so the tests never
depend on the code under test for their own premises: symplectic
conjugation of the vacuum (plus optional positive noise) is physical by
construction, and in the block-diagonal case the Schur-complement
characterization pp >= xx^{-1}/4 is used directly.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from covrepair import Bipartition, CovarianceMatrix


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """exp(J K) with K symmetric is symplectic."""
    k = rng.standard_normal((2 * n, 2 * n)) * scale
    k = (k + k.T) / 2
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return expm(j @ k)


def random_physical_cm(n: int, rng: np.random.Generator, noise: float = 0.1) -> CovarianceMatrix:
    """S (I/2) S^T plus positive noise; generally has a nonzero cross block."""
    s = random_symplectic(n, rng)
    g = s @ s.T / 2
    q = rng.standard_normal((2 * n, 2 * n)) * noise
    g = g + q @ q.T / (2 * n)
    return CovarianceMatrix.from_matrix(g)


def random_block_diagonal_physical(
    n: int, rng: np.random.Generator, margin: float = 0.05
) -> CovarianceMatrix:
    """xp = 0 and pp = xx^{-1}/4 + PSD + margin*I, physical with margin to spare."""
    q = rng.standard_normal((n, n))
    xx = q @ q.T / n + 0.3 * np.eye(n)
    k = rng.standard_normal((n, n))
    pp = np.linalg.inv(xx) / 4 + 0.1 * k @ k.T / n + margin * np.eye(n)
    return CovarianceMatrix(xx=xx, pp=pp)


def direct_sum(bp: Bipartition, cm_a: CovarianceMatrix, cm_b: CovarianceMatrix) -> CovarianceMatrix:
    """Separable state: group A carries cm_a, group B carries cm_b, no cross
    correlations between the groups."""
    if cm_a.n != len(bp.group_a) or cm_b.n != len(bp.group_b):
        raise ValueError("group sizes do not match the component matrices")
    n = bp.n
    xx = np.zeros((n, n))
    xp = np.zeros((n, n))
    pp = np.zeros((n, n))
    for cm, modes in ((cm_a, bp.group_a), (cm_b, bp.group_b)):
        idx = np.array(modes) - 1
        sel = np.ix_(idx, idx)
        xx[sel] = cm.xx
        xp[sel] = cm.xp
        pp[sel] = cm.pp
    return CovarianceMatrix(xx=xx, pp=pp, xp=xp)


def two_mode_squeezed(r: float) -> CovarianceMatrix:
    """Entangled two-mode squeezed state with squeezing parameter r."""
    c = np.cosh(2 * r) / 2
    s = np.sinh(2 * r) / 2
    return CovarianceMatrix(
        xx=np.array([[c, s], [s, c]]),
        pp=np.array([[c, -s], [-s, c]]),
    )
