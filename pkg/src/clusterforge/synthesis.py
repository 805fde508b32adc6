"""Build squeezing matrices G that generate a given bipartite cluster graph."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FormatError, NotPositiveDefinite, NotSymmetric
from .gaussian import nullifier_report
from .graphs import (
    BipartitePartition,
    ClusterGraph,
    TMSGraph,
    as_symmetric,
    bipartite_partition,
    partition_from_plus_set,
)
from .spectral import RANK_TOL, spectral_norm, split_signed

PD_TOL = 1e-10


def _check_pd(m: np.ndarray, name: str, pd_tol: float) -> None:
    if m.size == 0:
        return
    w = np.linalg.eigvalsh(m)
    if w[0] <= pd_tol * max(w[-1], 0.0) or w[0] <= 0:
        raise NotPositiveDefinite(f"{name} is not positive definite (smallest eigenvalue {w[0]:.3e})")


@dataclass(frozen=True, eq=False)
class SynthesisFreedom:
    """Symmetric positive-definite ``B`` (L x L) and ``C`` ((n-L) x (n-L))."""

    B: np.ndarray
    C: np.ndarray
    pd_tol: float = PD_TOL

    def __post_init__(self):
        for name in ("B", "C"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.size == 0:
                m = np.zeros((0, 0))
            else:
                try:
                    m = as_symmetric(m, name)
                except NotSymmetric:
                    raise NotSymmetric(f"{name} must be symmetric") from None
            _check_pd(m, name, self.pd_tol)
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @classmethod
    def identity(cls, L: int, m: int) -> SynthesisFreedom:
        return cls(np.eye(L), np.eye(m))

    @classmethod
    def half(cls, L: int, m: int) -> SynthesisFreedom:
        """``B = C = I/2``; for the square cluster this gives ``G = A``."""
        return cls(np.eye(L) / 2, np.eye(m) / 2)

    def to_dict(self) -> dict:
        return {"B": self.B.tolist(), "C": self.C.tolist()}

    @classmethod
    def from_json(cls, text: str) -> SynthesisFreedom:
        try:
            data = json.loads(text)
            B, C = data["B"], data["C"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"freedom file needs 'B' and 'C' matrices: {exc}") from None
        try:
            return cls(np.array(B, dtype=float), np.array(C, dtype=float))
        except (ValueError, TypeError) as exc:
            if isinstance(exc, (NotSymmetric, NotPositiveDefinite)):
                raise
            raise FormatError(f"freedom matrices are malformed: {exc}") from None


def _as_block(A0) -> np.ndarray:
    A0 = np.asarray(A0, dtype=float)
    if A0.ndim != 2:
        raise DimensionMismatch(f"A0 must be a 2-D block, got shape {A0.shape}")
    return A0


def _check_dims(A0: np.ndarray, freedom: SynthesisFreedom) -> None:
    L, m = A0.shape
    if freedom.B.shape != (L, L) or freedom.C.shape != (m, m):
        raise DimensionMismatch(
            f"A0 is {L}x{m}, so B must be {L}x{L} and C {m}x{m}; "
            f"got {freedom.B.shape} and {freedom.C.shape}"
        )


def gpm_from_choice(A0, freedom: SynthesisFreedom) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative parts ``[I; A0^T] B [I, A0]`` and ``[-A0; I] C [-A0^T, I]``."""
    A0 = _as_block(A0)
    _check_dims(A0, freedom)
    L, m = A0.shape
    left_plus = np.vstack([np.eye(L), A0.T])
    left_minus = np.vstack([-A0, np.eye(m)])
    g_plus = left_plus @ freedom.B @ left_plus.T
    g_minus = left_minus @ freedom.C @ left_minus.T
    return (g_plus + g_plus.T) / 2, (g_minus + g_minus.T) / 2


def synthesize_G(A0, freedom: SynthesisFreedom | None = None, rank_tol: float = RANK_TOL) -> TMSGraph:
    """Squeezing matrix for the cluster ``[[0, A0], [A0^T, 0]]``.

    Blockwise this is ``[[B - A0 C A0^T, B A0 + A0 C], [C A0^T + A0^T B,
    A0^T B A0 - C]]``, a congruence of ``diag(B, -C)`` and therefore full
    rank. ``freedom`` defaults to identities. The result is in canonical
    order: the "+" modes come first.
    """
    A0 = _as_block(A0)
    if freedom is None:
        freedom = SynthesisFreedom.identity(*A0.shape)
    g_plus, g_minus = gpm_from_choice(A0, freedom)
    G = TMSGraph(g_plus - g_minus)
    if G.n and not G.is_full_rank(rank_tol):
        warnings.warn("synthesized G is numerically rank deficient; B or C is badly conditioned", RuntimeWarning)
    return G


def synthesize_for_graph(
    g: ClusterGraph, freedom: SynthesisFreedom | None = None
) -> tuple[TMSGraph, BipartitePartition]:
    """Synthesize ``G`` for ``g`` and return it in ``g``'s own node labeling."""
    p = bipartite_partition(g)
    G = synthesize_G(p.A0, freedom)
    order = np.asarray(p.perm)
    return TMSGraph(G.matrix[np.ix_(order, order)]), p


def verify_orthogonality(A0, g_plus, g_minus) -> float:
    """``max(||[-A0^T, I] g_plus||, ||[I, A0] g_minus||)``; zero when the parts fit ``A0``."""
    A0 = _as_block(A0)
    L, m = A0.shape
    g_plus = np.asarray(g_plus, dtype=float)
    g_minus = np.asarray(g_minus, dtype=float)
    n = L + m
    if g_plus.shape != (n, n) or g_minus.shape != (n, n):
        raise DimensionMismatch(f"A0 is {L}x{m}; expected {n}x{n} parts, got {g_plus.shape} and {g_minus.shape}")
    q_rows = np.hstack([-A0.T, np.eye(m)])
    p_rows = np.hstack([np.eye(L), A0])
    return max(spectral_norm(q_rows @ g_plus), spectral_norm(p_rows @ g_minus))


def verify_sufficiency(A, G, alpha: float, partition: BipartitePartition | None = None) -> float:
    """Spectral norm of the finite-alpha nullifier matrix ``(-A, I) T U_alpha``.

    ``A`` is expected in canonical block form with the "+" modes first.
    Unless ``partition`` is given, the "+" set is the first ``L`` modes where
    ``L`` counts the positive eigenvalues of ``G``. The value decays to zero
    with ``alpha`` exactly when ``G`` generates ``A``.
    """
    graph = A if isinstance(A, ClusterGraph) else ClusterGraph(np.asarray(A, dtype=float))
    g = as_symmetric(G, "G")
    if g.shape != graph.adjacency.shape:
        raise DimensionMismatch(f"A is {graph.n}x{graph.n} but G is {g.shape[0]}x{g.shape[0]}")
    if partition is None:
        L = split_signed(g).rank_plus
        partition = partition_from_plus_set(graph, range(L))
    report = nullifier_report(graph, partition, g, alpha)
    # ||K||_2 = sqrt(largest eigenvalue of K K^T)
    top = np.linalg.eigvalsh(report.covariance)[-1]
    return float(np.sqrt(max(top, 0.0)))
