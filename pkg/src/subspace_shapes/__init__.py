"""Shaded subspace shapes for high-dimensional cluster exploration."""

from .analysis import (
    BrushStroke,
    brush_assign,
    compact_labels,
    depth_cue_opacities,
    detect_outliers,
    nearest_triangles,
)
from .ao import AOParams, bake_occlusion, cosine_hemisphere_directions, shade_vertices
from .dataset import Dataset, TableError, load_table, normalize_columns
from .export import export_scene
from .isosurface import (
    IsoLayerMesh,
    extract_layers,
    extract_surface,
    field_normals,
    marching_tetrahedra,
)
from .pipeline import PipelineError, SceneParams, SceneState
from .subspace import (
    Basis3,
    BasisError,
    PointCloud3,
    axis_basis,
    dimension_influence,
    orthonormalize,
    project,
    rotate_basis,
    transition_basis,
)
from .voxel import (
    DensityGrid,
    GridError,
    GridSpec,
    box_filter,
    grid_spec_for,
    sample_density,
    splat,
    trilinear_sample,
)

__all__ = [
    "AOParams",
    "Basis3",
    "BasisError",
    "BrushStroke",
    "Dataset",
    "DensityGrid",
    "GridError",
    "GridSpec",
    "IsoLayerMesh",
    "PipelineError",
    "PointCloud3",
    "SceneParams",
    "SceneState",
    "TableError",
    "axis_basis",
    "bake_occlusion",
    "box_filter",
    "brush_assign",
    "compact_labels",
    "cosine_hemisphere_directions",
    "depth_cue_opacities",
    "detect_outliers",
    "dimension_influence",
    "export_scene",
    "extract_layers",
    "extract_surface",
    "field_normals",
    "grid_spec_for",
    "load_table",
    "marching_tetrahedra",
    "nearest_triangles",
    "normalize_columns",
    "orthonormalize",
    "project",
    "rotate_basis",
    "sample_density",
    "shade_vertices",
    "splat",
    "transition_basis",
    "trilinear_sample",
]
