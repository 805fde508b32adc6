"""Signed spectral split of symmetric matrices, with pseudoinverses and exponentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graphs import as_symmetric

RANK_TOL = 1e-10


def spectral_norm(m) -> float:
    """Largest singular value; 0 for empty matrices."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _sym(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2


def _eigh_descending(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(m)
    return w[::-1], v[:, ::-1]


@dataclass(frozen=True, eq=False)
class SignedSplit:
    """``G = g_plus - g_minus`` with both parts PSD and mutually orthogonal.

    Eigenvalues are sorted descending; ``eigvecs`` columns follow the same
    order, so the first ``rank_plus`` columns span the positive subspace and
    the last ``rank_minus`` span the negative one.
    """

    g_plus: np.ndarray
    g_minus: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    g_plus_pinv: np.ndarray
    g_minus_pinv: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    rank_plus: int
    rank_minus: int

    @property
    def n(self) -> int:
        return len(self.eigvals)

    @property
    def rank(self) -> int:
        return self.rank_plus + self.rank_minus

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.n

    @property
    def matrix(self) -> np.ndarray:
        return self.g_plus - self.g_minus

    def inverse(self) -> np.ndarray:
        """``g_plus_pinv - g_minus_pinv``; the true inverse when full rank."""
        return self.g_plus_pinv - self.g_minus_pinv

    @property
    def positive_vectors(self) -> np.ndarray:
        return self.eigvecs[:, : self.rank_plus]

    @property
    def negative_vectors(self) -> np.ndarray:
        return self.eigvecs[:, self.n - self.rank_minus :]

    @property
    def positive_values(self) -> np.ndarray:
        return self.eigvals[: self.rank_plus]

    @property
    def negative_values(self) -> np.ndarray:
        return self.eigvals[self.n - self.rank_minus :]


def split_signed(G, rank_tol: float = RANK_TOL) -> SignedSplit:
    """Split a symmetric matrix into its positive and negative parts.

    Eigenvalues with ``|lambda| <= rank_tol * max|lambda|`` count as zero and
    belong to neither part. Rank deficiency is reported through
    ``SignedSplit.rank_deficient`` rather than raised.

    Raises:
        NotSymmetric: if ``G`` is not symmetric.
    """
    g = as_symmetric(G, "G")
    n = g.shape[0]
    w, v = _eigh_descending(g)
    cutoff = rank_tol * (np.max(np.abs(w)) if n else 0.0)
    pos = w > cutoff
    neg = w < -cutoff
    vp, vn = v[:, pos], v[:, neg]
    wp, wn = w[pos], -w[neg]

    def assemble(vecs, vals):
        return _sym((vecs * vals) @ vecs.T)

    return SignedSplit(
        g_plus=assemble(vp, wp),
        g_minus=assemble(vn, wn),
        p_plus=_sym(vp @ vp.T),
        p_minus=_sym(vn @ vn.T),
        g_plus_pinv=assemble(vp, 1 / wp),
        g_minus_pinv=assemble(vn, 1 / wn),
        eigvals=w,
        eigvecs=v,
        rank_plus=int(pos.sum()),
        rank_minus=int(neg.sum()),
    )


def matrix_exp_sym(G, s: float) -> np.ndarray:
    """``exp(s G)`` for symmetric ``G`` through its eigendecomposition."""
    g = as_symmetric(G, "G")
    w, v = np.linalg.eigh(g)
    return _sym((v * np.exp(s * w)) @ v.T)


class ProjectorLimit(NamedTuple):
    """Diagnostics for the exponential factorization and its large-alpha limit.

    Attributes:
        factorization: relative residual of ``exp(+-aG) = exp(-aG_-+) exp(aG_+-)``;
            exact for every alpha because the two parts commute.
        decay_plus: ``||exp(-a g_plus) - (I - p_plus)||``, bounded by
            ``exp(-a * smallest positive eigenvalue)``.
        decay_minus: the same for ``g_minus``.
    """

    factorization: float
    decay_plus: float
    decay_minus: float

    @property
    def residual(self) -> float:
        return self.factorization


def check_projector_limit(split: SignedSplit, alpha: float) -> ProjectorLimit:
    G = split.matrix
    eye = np.eye(split.n)
    fac = 0.0
    for sign, grow, shrink in ((1, split.g_plus, split.g_minus), (-1, split.g_minus, split.g_plus)):
        full = matrix_exp_sym(G, sign * alpha)
        product = matrix_exp_sym(shrink, -alpha) @ matrix_exp_sym(grow, alpha)
        fac = max(fac, spectral_norm(full - product) / spectral_norm(full))
    decay_plus = spectral_norm(matrix_exp_sym(split.g_plus, -alpha) - (eye - split.p_plus))
    decay_minus = spectral_norm(matrix_exp_sym(split.g_minus, -alpha) - (eye - split.p_minus))
    return ProjectorLimit(fac, decay_plus, decay_minus)
