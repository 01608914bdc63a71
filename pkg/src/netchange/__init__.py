"""Vertex-level change detection in dynamic weighted networks.

The library embeds each snapshot of a dynamic network through a
regularized, degree-normalized spectral decomposition, aligns the recent
embeddings into a window profile with generalized Procrustes analysis, and
scores every vertex by its aligned displacement.  A block-model simulator,
two activity-vector baselines, and a statistical evaluation harness
support controlled experiments.
"""

__version__ = "0.1.0"

from .baselines import (
    ActivityVector,
    ProfileVector,
    act_scores,
    activity,
    actm_scores,
    run_baseline,
)
from .dcsbm import (
    ConstantTheta,
    DcsbmModel,
    GroundTruth,
    PowerLawTheta,
    ScenarioSpec,
    block_matrix,
    catalog,
    generate_sequence,
    psi,
    sample_snapshot,
    sample_theta,
    scenario,
)
from .embedding import (
    Embedding,
    SpectrumResult,
    embed,
    estimate_rank_d,
    random_sign_flip,
    spectral_norm,
    symmetric_spectrum,
)
from .errors import (
    DegenerateShape,
    DimensionError,
    EmptyGraph,
    EmptyPartition,
    FormatError,
    InvalidProbability,
    InvalidShape,
    InvalidWeight,
    NetchangeError,
    NotSymmetric,
    UndefinedTest,
)
from .evaluation import (
    ExperimentResult,
    PerformanceSeries,
    estimate_phi,
    log_odds,
    log_odds_ratio,
    run_experiment,
    sign_test,
)
from .graph import (
    DegreeSummary,
    RepresentationMatrix,
    SnapshotMatrix,
    degree_summary,
    log_transform,
    max_scale,
    regularizer_tau,
    representation_matrix,
)
from .pipeline import (
    CdpConfig,
    ScoreSeries,
    normalize_and_detect,
    run_cdp,
)
from .procrustes import (
    AlignmentResult,
    PreShape,
    ScoreVector,
    change_scores,
    gpa_align,
    optimal_rotation,
    pad_to_dim,
    pre_shape,
    profile_embedding,
)
