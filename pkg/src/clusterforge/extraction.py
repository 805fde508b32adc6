"""Recover a weighted bipartite cluster graph from a full-rank squeezing matrix.

Given ``G = V nu V^T``, choose which output modes play the "+" role, then
column-reduce the positive eigenvectors to ``[I; A0^T]`` and the negative
ones to ``[-A0; I]``. The reduction matrices turn ``nu`` into
``diag(B, -C)``, so that ``G`` (renumbered) equals ``synthesize_G(A0, B, C)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ExtractionInconsistency, PivotFailure, RankDeficient
from .graphs import ClusterGraph, TMSGraph, block_adjacency
from .spectral import RANK_TOL, spectral_norm, split_signed
from .synthesis import SynthesisFreedom, synthesize_G

MAX_BLOCK_COND = 1e12
EXHAUSTIVE_LIMIT = 12
TIE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Cluster block ``A0`` with freedom ``B``, ``C`` and the mode renumbering.

    ``perm[i]`` is the position of original mode ``i`` after renumbering:
    the "+" modes first, then the "-" modes, each in ascending original order.
    """

    A0: np.ndarray
    B: np.ndarray
    C: np.ndarray
    perm: tuple[int, ...]
    L: int

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def plus_modes(self) -> tuple[int, ...]:
        return tuple(sorted(i for i, p in enumerate(self.perm) if p < self.L))

    def permutation_matrix(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        P[list(self.perm), range(self.n)] = 1.0
        return P

    def cluster_graph(self) -> ClusterGraph:
        """The extracted cluster in renumbered (canonical) order."""
        return ClusterGraph(block_adjacency(self.A0.reshape(self.L, self.n - self.L)))

    def cluster_graph_original_order(self) -> ClusterGraph:
        """The extracted cluster relabeled back onto the original modes."""
        a = self.cluster_graph().adjacency
        order = np.asarray(self.perm)
        return ClusterGraph(a[np.ix_(order, order)])

    def freedom(self) -> SynthesisFreedom:
        return SynthesisFreedom(self.B, self.C)

    def to_dict(self) -> dict:
        return {
            "perm": [p + 1 for p in self.perm],
            "L": self.L,
            "A0": self.A0.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
        }


def _greedy_rows(vectors: np.ndarray) -> list[int]:
    """Pick ``k`` rows of an ``n x k`` matrix with large volume.

    Pivoted Gram-Schmidt on the rows: take the row with the largest residual
    norm, project it out of the rest, repeat. Near-ties go to the lowest index.
    """
    n, k = vectors.shape
    residual = vectors.copy()
    chosen: list[int] = []
    for _ in range(k):
        norms = np.linalg.norm(residual, axis=1)
        norms[chosen] = -1.0
        best = norms.max()
        pick = int(np.flatnonzero(norms >= best * (1 - TIE_TOL))[0])
        chosen.append(pick)
        if best <= 0:
            break
        u = residual[pick] / norms[pick]
        residual -= np.outer(residual @ u, u)
    return chosen


def _cond(block: np.ndarray) -> float:
    if block.size == 0:
        return 1.0
    return float(np.linalg.cond(block))


def _select_rows(vp: np.ndarray, vn: np.ndarray) -> tuple[list[int], list[int], float]:
    n, L = vp.shape
    plus = sorted(_greedy_rows(vp))
    minus = [i for i in range(n) if i not in set(plus)]
    worst = max(_cond(vp[plus]), _cond(vn[minus]))
    if worst <= MAX_BLOCK_COND:
        return plus, minus, worst
    if n > EXHAUSTIVE_LIMIT:
        raise PivotFailure(f"greedy row selection failed for n={n} (exhaustive search limited to n<={EXHAUSTIVE_LIMIT})", worst)
    best = None
    for combo in itertools.combinations(range(n), L):
        rest = [i for i in range(n) if i not in combo]
        c = max(_cond(vp[list(combo)]), _cond(vn[rest]))
        if best is None or c < best[0]:
            best = (c, list(combo), rest)
    if best is None or best[0] > MAX_BLOCK_COND:
        raise PivotFailure("no row selection gives invertible blocks", best[0] if best else math.inf)
    return best[1], best[2], best[0]


def extract_cluster(G, tol: float = RANK_TOL, plus_modes=None) -> ExtractionResult:
    """Find ``A0``, ``B``, ``C`` and a renumbering such that ``G`` generates the cluster.

    The "+" modes are chosen by greedy volume-maximizing pivoting unless
    ``plus_modes`` (0-based, one per positive eigenvalue) fixes them. For a
    fixed choice the result is unique.

    Raises:
        RankDeficient: ``G`` has an eigenvalue below ``tol`` relative.
        PivotFailure: no well-conditioned choice of "+" rows exists.
        ExtractionInconsistency: the two reductions disagree on ``A0``.
    """
    split = split_signed(G, rank_tol=tol)
    n = split.n
    if split.rank_deficient:
        raise RankDeficient(split.rank, n)
    vp, vn = split.positive_vectors, split.negative_vectors
    nu_plus, nu_minus = split.positive_values, split.negative_values
    L = split.rank_plus
    if plus_modes is None:
        plus, minus, _ = _select_rows(vp, vn)
    else:
        plus = sorted({int(i) for i in plus_modes})
        if len(plus) != L or any(i < 0 or i >= n for i in plus):
            raise PivotFailure(f"plus_modes must name {L} distinct modes in 0..{n - 1}", math.inf)
        minus = [i for i in range(n) if i not in set(plus)]
        worst = max(_cond(vp[plus]), _cond(vn[minus]))
        if worst > MAX_BLOCK_COND:
            raise PivotFailure("requested plus_modes give singular blocks", worst)

    top = vp[plus]  # L x L
    bottom = vn[minus]  # (n-L) x (n-L)
    reduced_plus = np.linalg.solve(top.T, vp.T).T if L else np.zeros((n, 0))
    reduced_minus = np.linalg.solve(bottom.T, vn.T).T if n - L else np.zeros((n, 0))
    A0 = reduced_plus[minus].T  # rows "-" of [I; A0^T]
    A0_check = -reduced_minus[plus]  # rows "+" of [-A0; I]
    scale = 1.0 + (spectral_norm(A0) if A0.size else 0.0)
    gap = float(np.max(np.abs(A0 - A0_check), initial=0.0))
    if gap > 1e-8 * scale:
        raise ExtractionInconsistency(f"positive and negative reductions disagree on A0 by {gap:.3e}")

    B = (top * nu_plus) @ top.T
    C = -(bottom * nu_minus) @ bottom.T
    perm = [0] * n
    for pos, mode in enumerate(plus + minus):
        perm[mode] = pos
    return ExtractionResult(
        A0=A0.reshape(L, n - L),
        B=(B + B.T) / 2,
        C=(C + C.T) / 2,
        perm=tuple(perm),
        L=L,
    )


def resynthesis_check(G, result: ExtractionResult) -> float:
    """``||synthesize_G(A0, B, C) - P G P^T|| / ||G||``."""
    g = G.matrix if isinstance(G, TMSGraph) else np.asarray(G, dtype=float)
    order = np.argsort(np.asarray(result.perm))
    target = g[np.ix_(order, order)]
    rebuilt = synthesize_G(result.A0, result.freedom()).matrix
    return spectral_norm(rebuilt - target) / spectral_norm(g)
