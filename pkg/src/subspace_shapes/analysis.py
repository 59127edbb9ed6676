"""Outlier detection, depth-cue opacities, and surface brushing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .isosurface import IsoLayerMesh
from .subspace import PointCloud3
from .voxel import DensityGrid, trilinear_sample


@dataclass(frozen=True)
class BrushStroke:
    """Painted triangles on one cluster's outermost layer."""

    cluster_id: int
    triangle_indices: np.ndarray
    new_cluster_id: int
    brush_color: tuple[float, float, float] = (0.9, 0.8, 0.1)

    def __post_init__(self):
        if self.new_cluster_id == self.cluster_id:
            raise ValueError("new cluster id must differ from the touched cluster")


def detect_outliers(
    cloud: PointCloud3, grid: DensityGrid, tau_out: float | dict[int, float]
) -> np.ndarray:
    """Indices of points whose own-cluster density falls below the outer iso.

    tau_out may be a single iso value or a per-cluster mapping (the layer-0
    iso differs per cluster when derived from each field's maximum).
    """
    if cloud.n_points == 0:
        return np.zeros(0, dtype=np.int64)
    outliers = []
    for cid, field in grid.fields.items():
        mask = cloud.labels == cid
        if not mask.any():
            continue
        iso = tau_out[cid] if isinstance(tau_out, dict) else tau_out
        density = trilinear_sample(field, grid.spec, cloud.positions[mask])
        idx = np.nonzero(mask)[0][density < iso]
        outliers.append(idx)
    if not outliers:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(outliers))


def depth_cue_opacities(
    view_depths: np.ndarray, alpha_max: float = 1.0, alpha_min: float = 0.15
) -> np.ndarray:
    """Linear map from [nearest, farthest] depth to [alpha_max, alpha_min]."""
    if alpha_min < 0 or alpha_max < alpha_min:
        raise ValueError("need alpha_max >= alpha_min >= 0")
    depths = np.asarray(view_depths, dtype=np.float64)
    if depths.size == 0:
        return np.zeros(0)
    lo, hi = depths.min(), depths.max()
    if hi - lo <= 0:
        return np.full(depths.shape, alpha_max)
    t = (depths - lo) / (hi - lo)
    return alpha_max + t * (alpha_min - alpha_max)


def closest_triangle_distances(points: np.ndarray, tri_points: np.ndarray) -> np.ndarray:
    """(n_points, n_triangles) Euclidean point-to-triangle distances.

    tri_points has shape (n_triangles, 3, 3). Uses the region-based closest
    point construction on each (point, triangle) pair, fully vectorized.
    """
    a = tri_points[None, :, 0]
    b = tri_points[None, :, 1]
    c = tri_points[None, :, 2]
    p = points[:, None]

    ab = b - a
    ac = c - a
    ap = p - a
    d1 = (ab * ap).sum(-1)
    d2 = (ac * ap).sum(-1)
    bp = p - b
    d3 = (ab * bp).sum(-1)
    d4 = (ac * bp).sum(-1)
    cp = p - c
    d5 = (ab * cp).sum(-1)
    d6 = (ac * cp).sum(-1)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    denom = va + vb + vc
    denom = np.where(denom == 0, 1.0, denom)
    v = vb / denom
    w = vc / denom
    closest = a + v[..., None] * ab + w[..., None] * ac

    # Edge/vertex regions override the interior solution.
    t_ab = np.clip(d1 / np.where(d1 - d3 == 0, 1.0, d1 - d3), 0, 1)
    on_ab = a + t_ab[..., None] * ab
    t_ac = np.clip(d2 / np.where(d2 - d6 == 0, 1.0, d2 - d6), 0, 1)
    on_ac = a + t_ac[..., None] * ac
    t_bc = np.clip(
        (d4 - d3) / np.where((d4 - d3) + (d5 - d6) == 0, 1.0, (d4 - d3) + (d5 - d6)), 0, 1
    )
    on_bc = b + t_bc[..., None] * (c - b)

    closest = np.where((vc <= 0)[..., None] & (d1 >= 0)[..., None] & (d3 <= 0)[..., None], on_ab, closest)
    closest = np.where((vb <= 0)[..., None] & (d2 >= 0)[..., None] & (d6 <= 0)[..., None], on_ac, closest)
    closest = np.where(
        (va <= 0)[..., None] & ((d4 - d3) >= 0)[..., None] & ((d5 - d6) >= 0)[..., None], on_bc, closest
    )
    closest = np.where((d1 <= 0)[..., None] & (d2 <= 0)[..., None], a, closest)
    closest = np.where((d3 >= 0)[..., None] & (d4 <= d3)[..., None], b, closest)
    closest = np.where((d6 >= 0)[..., None] & (d5 <= d6)[..., None], c, closest)
    return np.linalg.norm(p - closest, axis=-1)


def nearest_triangles(
    points: np.ndarray, mesh: IsoLayerMesh, chunk: int = 4096
) -> np.ndarray:
    """Index of the nearest triangle of mesh for every point."""
    tri_points = mesh.vertices[mesh.triangles]
    best_dist = np.full(len(points), np.inf)
    best_idx = np.zeros(len(points), dtype=np.int64)
    for start in range(0, len(tri_points), chunk):
        d = closest_triangle_distances(points, tri_points[start : start + chunk])
        idx = d.argmin(axis=1)
        dist = d[np.arange(len(points)), idx]
        better = dist < best_dist
        best_dist[better] = dist[better]
        best_idx[better] = idx[better] + start
    return best_idx


def brush_assign(
    stroke: BrushStroke, outer_mesh: IsoLayerMesh, cloud: PointCloud3, labels: np.ndarray
) -> np.ndarray:
    """Reassign painted surface points and the points underneath them.

    Every point of the touched cluster whose nearest layer-0 triangle is in
    the painted set moves to the new cluster id; all other labels are
    untouched. An empty painted set is a no-op.
    """
    if outer_mesh.cluster_id != stroke.cluster_id or outer_mesh.layer != 0:
        raise ValueError("stroke must reference the touched cluster's layer-0 mesh")
    painted = np.asarray(stroke.triangle_indices, dtype=np.int64)
    new_labels = labels.copy()
    if painted.size == 0:
        return new_labels
    if painted.min() < 0 or painted.max() >= outer_mesh.n_triangles:
        raise ValueError("painted triangle index out of range")
    member = np.nonzero(labels == stroke.cluster_id)[0]
    nearest = nearest_triangles(cloud.positions[member], outer_mesh)
    hit = np.isin(nearest, painted)
    new_labels[member[hit]] = stroke.new_cluster_id
    return new_labels


def compact_labels(labels: np.ndarray) -> np.ndarray:
    """Remap labels to a contiguous 0..k-1 range, first appearance first."""
    seen: dict[int, int] = {}
    return np.array([seen.setdefault(int(l), len(seen)) for l in labels], dtype=np.int64)
