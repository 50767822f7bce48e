"""Splines on branched covers of the torus."""

from .base_splines import BaseBasis, BasePoint, Poly2, TorusGrid, base_basis_eval, bspline_eval_1d, support_cells
from .branched_basis import (
    BranchedBasis, CoverPoint, LiftComponent, classify_component, enumerate_components, eval_branched_spline,
)
from .cover import (
    BranchedCoverSpec, CoverTopology, CutCrossing, cover_topology, example_double_cover, example_triple_cover,
    transport_sheet, validate_cover, vertex_monodromy,
)
from .geometry import EmbeddingConfig, QuadMesh, export_obj, mesh_report, sample_control_net, tessellate, torus_embed

__version__ = "0.1.0"
