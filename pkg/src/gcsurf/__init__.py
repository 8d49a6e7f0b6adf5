"""Goldberg-Coxeter (2,0) subdivision of trivalent discrete surfaces in R^3."""

from .flow import (
    Embedding,
    FaceSystem,
    StepMode,
    SubdivisionRun,
    VertexCapError,
    gc_eigenvalues,
    iterate,
    restrict_embedding,
    solve_face,
    subdivide_step,
)
from .generators import fixture, generate_c60, generate_hex_patch, hex_torus, k4_chunk, k4_leaf, mackay_patch
from .graph import (
    Leaf,
    LeafExtractionError,
    StructuralError,
    SurfaceGraph,
    ValidationReport,
    branched_edges,
    extract_leaf,
    validate,
)
from .metrics import (
    CurvatureReport,
    LimitReport,
    StepMetrics,
    balancing_residual,
    curvature,
    curvature_report,
    dirichlet_energy,
    energy_bound,
    hausdorff_distance,
    hausdorff_error_bound,
    limit_report,
    minimality_residual,
    vertex_normal,
)
from .subdivide import BranchedGraphError, Provenance, gc_subdivide, gc_subdivide_leafwise

__version__ = "0.1.0"

__all__ = [
    "BranchedGraphError",
    "CurvatureReport",
    "Embedding",
    "FaceSystem",
    "Leaf",
    "LeafExtractionError",
    "LimitReport",
    "Provenance",
    "StepMetrics",
    "StepMode",
    "StructuralError",
    "SubdivisionRun",
    "SurfaceGraph",
    "ValidationReport",
    "VertexCapError",
    "balancing_residual",
    "branched_edges",
    "curvature",
    "curvature_report",
    "dirichlet_energy",
    "energy_bound",
    "extract_leaf",
    "fixture",
    "gc_eigenvalues",
    "gc_subdivide",
    "gc_subdivide_leafwise",
    "generate_c60",
    "generate_hex_patch",
    "hausdorff_distance",
    "hausdorff_error_bound",
    "hex_torus",
    "iterate",
    "k4_chunk",
    "k4_leaf",
    "limit_report",
    "mackay_patch",
    "restrict_embedding",
    "solve_face",
    "subdivide_step",
    "validate",
]
