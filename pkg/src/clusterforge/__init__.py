"""Map bipartite CV cluster graphs onto single-OPO squeezing matrices and back."""

from .errors import (
    ClusterForgeError,
    DimensionMismatch,
    ExtractionInconsistency,
    FormatError,
    InvalidParam,
    NotBipartite,
    NotPositiveDefinite,
    NotSymmetric,
    PartitionMismatch,
    PivotFailure,
    RankDeficient,
)
from .extraction import ExtractionResult, extract_cluster, resynthesis_check
from .gaussian import (
    NullifierReport,
    Sweep,
    SymplecticTransform,
    heisenberg_transform,
    nullifier_matrix,
    nullifier_report,
    output_covariance,
    phase_shift_matrix,
    sweep_alpha,
    symplectic_eigenvalues,
)
from .graphs import (
    BipartitePartition,
    ClusterGraph,
    TMSGraph,
    bipartite_partition,
    block_adjacency,
    canonical_permute,
    generate,
    parse_graph,
    parse_tms,
    partition_from_plus_set,
    serialize_graph,
    serialize_tms,
)
from .spectral import SignedSplit, check_projector_limit, matrix_exp_sym, split_signed
from .synthesis import (
    SynthesisFreedom,
    gpm_from_choice,
    synthesize_for_graph,
    synthesize_G,
    verify_orthogonality,
    verify_sufficiency,
)

__version__ = "0.1.0"
