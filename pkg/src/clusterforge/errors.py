"""Exception types raised across the toolkit."""

from __future__ import annotations


class ClusterForgeError(Exception):
    """Base class for every error raised by clusterforge."""


class InvalidParam(ClusterForgeError, ValueError):
    pass


class FormatError(ClusterForgeError, ValueError):
    pass


class DimensionMismatch(ClusterForgeError, ValueError):
    pass


class NotSymmetric(ClusterForgeError, ValueError):
    pass


class NotPositiveDefinite(ClusterForgeError, ValueError):
    pass


class PartitionMismatch(ClusterForgeError, ValueError):
    pass


class NotBipartite(ClusterForgeError):
    """Raised when a graph contains an odd cycle.

    The offending cycle is kept on ``cycle`` as a list of 1-based node
    labels, listed in walking order (the closing edge returns from the last
    node to the first).
    """

    def __init__(self, cycle: list[int]):
        self.cycle = list(cycle)
        super().__init__(f"graph is not bipartite: odd cycle {self.cycle}")


class RankDeficient(ClusterForgeError):
    def __init__(self, rank: int, n: int):
        self.rank = rank
        self.n = n
        super().__init__(f"matrix is rank deficient: rank {rank} < {n}")


class PivotFailure(ClusterForgeError):
    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (block condition number {condition:.3e})")


class ExtractionInconsistency(ClusterForgeError):
    """The two subspace reductions produced different off-diagonal blocks."""
