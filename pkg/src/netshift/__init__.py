"""Vertex-wise shift detection between networks on a shared vertex set."""

__version__ = "0.1.0"

from .align import AlignmentMap, DegenerateSeedError, align, indefinite_align, procrustes, rectangular_align
from .embed import Embedding, EmbeddingError, embed, embed_matrix, scree, select_dimension
from .graph import (
    GRDPG_B,
    SBM_B,
    Graph,
    LatentModel,
    ShiftScenario,
    make_rank_mismatch_scenario,
    make_rdpg_scenario,
    make_sbm_scenario,
    sample_graph,
    sample_pair,
)
from .mirror import MirrorCurve, build_mirror, cmds, iso_mirror, network_distance_matrix, vertex_distance_matrix
from .pairfilter import FilterStats, bonferroni_threshold, sample_feasible_candidates, ttilde, upsilon_hat
from .seedfree import NoViableCandidateError, SeedFreeConfig, SeedFreeTrace, required_candidates, run_seedfree
from .shift import EmbeddedPair, ShiftReport, benjamini_hochberg, gamma_hat, gamma_true, run_seeded

__all__ = [
    "AlignmentMap", "DegenerateSeedError", "align", "indefinite_align", "procrustes", "rectangular_align",
    "Embedding", "EmbeddingError", "embed", "embed_matrix", "scree", "select_dimension",
    "GRDPG_B", "SBM_B", "Graph", "LatentModel", "ShiftScenario", "make_rank_mismatch_scenario", "make_rdpg_scenario",
    "make_sbm_scenario", "sample_graph", "sample_pair",
    "MirrorCurve", "build_mirror", "cmds", "iso_mirror", "network_distance_matrix", "vertex_distance_matrix",
    "FilterStats", "bonferroni_threshold", "sample_feasible_candidates", "ttilde", "upsilon_hat",
    "NoViableCandidateError", "SeedFreeConfig", "SeedFreeTrace", "required_candidates", "run_seedfree",
    "EmbeddedPair", "ShiftReport", "benjamini_hochberg", "gamma_hat", "gamma_true", "run_seeded",
]
