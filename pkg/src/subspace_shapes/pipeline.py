"""End-to-end scene pipeline with a depth-1 cache of the previous scene."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import BrushStroke, brush_assign, compact_labels, depth_cue_opacities, detect_outliers
from .ao import AOParams, bake_occlusion, shade_vertices
from .dataset import Dataset
from .isosurface import IsoLayerMesh, extract_layers
from .subspace import Basis3, PointCloud3, project, rotate_basis, transition_basis
from .voxel import DensityGrid, box_filter, grid_spec_for, splat

log = logging.getLogger(__name__)

MODES = ("scatter", "shape", "combo")
OPACITY_PRESETS = (1.0, 0.7, 0.5)
COMBO_OPACITY_CAP = 0.5


class PipelineError(RuntimeError):
    """Stage failure during a scene rebuild; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class SceneParams:
    mode: str = "scatter"
    opacity: float = 1.0
    layers: int = 1
    tau_out_fraction: float = 0.1
    resolution: int = 64
    filter_half_width: int = 1
    iterations: int = 3
    ao: AOParams = field(default_factory=AOParams)
    show_outliers: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.opacity <= 1:
            raise ValueError("opacity must lie in (0, 1]")
        if self.layers < 1:
            raise ValueError("need at least one layer")
        if self.resolution < 8:
            raise ValueError("resolution must be >= 8")
        if not 0 < self.tau_out_fraction < 0.5:
            raise ValueError("tau_out_fraction must lie in (0, 0.5)")


@dataclass
class CachedScene:
    basis: Basis3
    params: SceneParams
    labels: np.ndarray
    cloud: PointCloud3 | None
    grid: DensityGrid | None
    meshes: list[IsoLayerMesh]
    outliers: np.ndarray
    timings: dict[str, float]


class SceneState:
    """Session-scoped bundle: dataset, basis, parameters, built meshes.

    Meshes go stale on any basis/parameter/label mutation and are refreshed
    only by an explicit build(); a failed build leaves the prior scene
    servable. The cache holds at most one previous scene.
    """

    def __init__(self, dataset: Dataset, basis: Basis3, params: SceneParams | None = None):
        basis.validate()
        self.dataset = dataset
        self.labels = dataset.labels.copy()
        self.basis = basis
        self.params = params or SceneParams()
        self.cloud: PointCloud3 | None = None
        self.grid: DensityGrid | None = None
        self.meshes: list[IsoLayerMesh] = []
        self.outliers: np.ndarray = np.zeros(0, dtype=np.int64)
        self.timings: dict[str, float] = {}
        self.stale = True
        self._cache: CachedScene | None = None
        # Inputs the current meshes were built from; the live basis, params
        # and labels may already have moved on while the scene is stale.
        self._built_basis: Basis3 | None = None
        self._built_params: SceneParams | None = None
        self._built_labels: np.ndarray | None = None

    # -- state mutation ---------------------------------------------------

    def set_mode(self, mode: str) -> None:
        self.params = replace(self.params, mode=mode)  # validated by __post_init__

    def set_params(self, **changes) -> None:
        geometry_keys = {
            "layers",
            "tau_out_fraction",
            "resolution",
            "filter_half_width",
            "iterations",
            "ao",
            "opacity",
        }
        self.params = replace(self.params, **changes)
        if geometry_keys & changes.keys():
            self.stale = True

    def rotate(self, rot: np.ndarray) -> None:
        self.basis = rotate_basis(self.basis, rot)
        self.stale = True

    def transition(self, slot: str, target: np.ndarray, t: float) -> None:
        self.basis = transition_basis(self.basis, slot, target, t)
        self.stale = True

    def projection(self) -> PointCloud3:
        """Current projection; cheap, recomputed on demand."""
        cloud = project(self._labeled_dataset(), self.basis)
        return cloud

    def _labeled_dataset(self) -> Dataset:
        return Dataset(
            column_names=self.dataset.column_names,
            values=self.dataset.values,
            labels=self.labels,
            point_ids=self.dataset.point_ids,
        )

    # -- the pipeline -----------------------------------------------------

    def build(self) -> None:
        """Run the full pipeline and publish the new scene atomically."""
        p = self.params
        timings: dict[str, float] = {}

        def stage(name, fn):
            t0 = time.perf_counter()
            try:
                result = fn()
            except Exception as exc:
                raise PipelineError(name, exc) from exc
            timings[name] = time.perf_counter() - t0
            return result

        cloud = stage("project", self.projection)
        spec = stage(
            "grid_spec",
            lambda: grid_spec_for(cloud, p.resolution, p.filter_half_width, p.iterations),
        )
        raw = stage("splat", lambda: splat(cloud, spec))
        grid = stage("box_filter", lambda: box_filter(raw, p.filter_half_width, p.iterations))

        def contour():
            meshes = []
            for cid in sorted(grid.fields):
                fmax = float(grid.fields[cid].max())
                meshes.extend(
                    extract_layers(grid, cid, p.layers, p.opacity, p.tau_out_fraction * fmax)
                )
            return meshes

        meshes = stage("extract_layers", contour)

        def bake():
            from .ao import cell_max_field

            union = grid.union_field()
            union_max = cell_max_field(union)
            for mesh in meshes:
                mesh.occlusion = bake_occlusion(
                    mesh, grid, p.ao, occluder_field=union, occluder_cell_max=union_max
                )
                mesh.colors = shade_vertices(mesh, p.ao)

        stage("ao_shading", bake)

        def outliers():
            taus = {
                cid: p.tau_out_fraction * float(f.max()) for cid, f in grid.fields.items()
            }
            return detect_outliers(cloud, grid, taus)

        outlier_idx = stage("detect_outliers", outliers)
        timings["total"] = sum(timings.values())

        # Publish: previous scene moves into the depth-1 cache.
        if self.meshes:
            self._cache = CachedScene(
                basis=self._built_basis,
                params=self._built_params,
                labels=self._built_labels,
                cloud=self.cloud,
                grid=self.grid,
                meshes=self.meshes,
                outliers=self.outliers,
                timings=self.timings,
            )
        self._built_basis = self.basis
        self._built_params = self.params
        self._built_labels = self.labels.copy()
        self.cloud = cloud
        self.grid = grid
        self.meshes = meshes
        self.outliers = outlier_idx
        self.timings = timings
        self.stale = False

    def restore_previous(self) -> bool:
        """Swap current and cached scenes without recomputation."""
        if self._cache is None:
            log.warning("restore requested with an empty cache; state unchanged")
            return False
        cached = self._cache
        self._cache = CachedScene(
            basis=self._built_basis,
            params=self._built_params,
            labels=self._built_labels,
            cloud=self.cloud,
            grid=self.grid,
            meshes=self.meshes,
            outliers=self.outliers,
            timings=self.timings,
        )
        self.basis = cached.basis
        self.params = cached.params
        self.labels = cached.labels.copy()
        self._built_basis = cached.basis
        self._built_params = cached.params
        self._built_labels = cached.labels
        self.cloud = cached.cloud
        self.grid = cached.grid
        self.meshes = cached.meshes
        self.outliers = cached.outliers
        self.timings = cached.timings
        self.stale = self.cloud is None
        return True

    # -- interaction ------------------------------------------------------

    def apply_brush(self, stroke: BrushStroke) -> None:
        """Reassign painted points, remap labels contiguously, and rebuild."""
        if self.stale or not self.meshes:
            raise PipelineError("brush", RuntimeError("no built scene to brush on"))
        outer = next(
            (m for m in self.meshes if m.cluster_id == stroke.cluster_id and m.layer == 0),
            None,
        )
        if outer is None:
            raise PipelineError("brush", RuntimeError(f"no mesh for cluster {stroke.cluster_id}"))
        assert self.cloud is not None
        new_labels = brush_assign(stroke, outer, self.cloud, self.labels)
        if np.array_equal(new_labels, self.labels):
            return
        self.labels = compact_labels(new_labels)
        self.stale = True
        self.build()

    # -- served views -----------------------------------------------------

    def scatter_points(self) -> dict:
        cloud = self.projection()
        depths = -cloud.positions[:, 2]  # camera looks along -z
        return {
            "positions": cloud.positions,
            "labels": cloud.labels,
            "point_ids": cloud.point_ids,
            "opacities": depth_cue_opacities(depths),
        }

    def served_meshes(self) -> list[IsoLayerMesh]:
        """Meshes for the current mode; combo caps opacity at 0.5."""
        if self.params.mode == "scatter":
            return []
        if self.params.mode == "combo":
            capped = []
            for m in self.meshes:
                c = replace_mesh_opacity(m, min(m.opacity, COMBO_OPACITY_CAP))
                capped.append(c)
            return capped
        return self.meshes

    def served_outliers(self) -> np.ndarray:
        if self.params.mode == "combo" or (
            self.params.mode == "shape" and self.params.show_outliers
        ):
            return self.outliers
        return np.zeros(0, dtype=np.int64)


def replace_mesh_opacity(mesh: IsoLayerMesh, opacity: float) -> IsoLayerMesh:
    clone = IsoLayerMesh(
        vertices=mesh.vertices,
        triangles=mesh.triangles,
        normals=mesh.normals,
        occlusion=mesh.occlusion,
        cluster_id=mesh.cluster_id,
        layer=mesh.layer,
        iso=mesh.iso,
        opacity=opacity,
        base_color=mesh.base_color,
        colors=mesh.colors,
    )
    return clone
