"""Watertight iso-surface extraction from density grids.

Cells are decomposed into 6 tetrahedra sharing the cube's main diagonal.
The decomposition is translation-invariant, so face diagonals of adjacent
cells coincide and the contoured mesh is a closed 2-manifold by construction.
Vertices are welded on global grid-edge keys, so coincident vertices merge
exactly and every edge ends up shared by exactly two triangles.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .palette import cluster_color
from .voxel import DensityGrid, GridSpec, trilinear_sample


class MeshError(ValueError):
    """Raised on invalid contouring requests."""


@dataclass
class IsoLayerMesh:
    """Triangle mesh for one (cluster, layer) pair."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int32
    normals: np.ndarray  # (n, 3) unit
    occlusion: np.ndarray  # (n,) in [0, 1]
    cluster_id: int
    layer: int  # 0 = outermost
    iso: float
    opacity: float
    base_color: np.ndarray  # (3,) RGB in [0, 1]
    colors: np.ndarray | None = dataclass_field(default=None)  # shaded, set by ao_shading

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


# Local corner index k = dx*4 + dy*2 + dz.
_CORNERS = [(dx, dy, dz) for dx in (0, 1) for dy in (0, 1) for dz in (0, 1)]

# Six tetrahedra along the 0 -> 7 main diagonal, one per axis permutation.
_TETS = np.array(
    [
        (0, 4, 6, 7),
        (0, 4, 5, 7),
        (0, 2, 6, 7),
        (0, 2, 3, 7),
        (0, 1, 5, 7),
        (0, 1, 3, 7),
    ],
    dtype=np.int64,
)


def _tet_case_table():
    """triangles per inside-mask: list of triangles, each a triple of corner pairs."""
    table: list[list[tuple[tuple[int, int], ...]]] = [[] for _ in range(16)]
    for mask in range(1, 15):
        inside = [i for i in range(4) if mask >> i & 1]
        outside = [i for i in range(4) if not mask >> i & 1]
        if len(inside) == 1:
            a = inside[0]
            table[mask] = [tuple((a, b) for b in outside)]
        elif len(inside) == 3:
            a = outside[0]
            table[mask] = [tuple((b, a) for b in inside)]
        else:
            (a, b), (c, d) = inside, outside
            table[mask] = [
                ((a, c), (a, d), (b, d)),
                ((a, c), (b, d), (b, c)),
            ]
    return table


_CASES = _tet_case_table()


def _vid_to_position(vids: np.ndarray, res, origin, spacing) -> np.ndarray:
    ny, nz = res[1], res[2]
    ix = vids // (ny * nz)
    iy = (vids // nz) % ny
    iz = vids % nz
    return origin + spacing * np.stack([ix, iy, iz], axis=-1).astype(np.float64)


def marching_tetrahedra(
    field: np.ndarray, origin: np.ndarray, spacing: float, iso: float
) -> tuple[np.ndarray, np.ndarray]:
    """Contour field at iso; returns (vertices, triangles).

    Deterministic for identical input. The surface encloses the region
    where field > iso; triangles are wound so their normals point outward
    (toward decreasing field values).
    """
    nx, ny, nz = field.shape
    res = (nx, ny, nz)
    inside = field > iso

    count = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.int8)
    for dx, dy, dz in _CORNERS:
        count += inside[dx : nx - 1 + dx, dy : ny - 1 + dy, dz : nz - 1 + dz]
    ax, ay, az = np.nonzero((count > 0) & (count < 8))
    if len(ax) == 0:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32)

    offsets = np.array([(dx * ny + dy) * nz + dz for dx, dy, dz in _CORNERS], dtype=np.int64)
    base = (ax * ny + ay) * nz + az
    corner_vids = base[:, None] + offsets[None, :]  # (A, 8)
    tet_vids = corner_vids[:, _TETS].reshape(-1, 4)  # (6A, 4)
    flat = field.ravel()
    tet_vals = flat[tet_vids]
    tet_mask = (tet_vals > iso) @ np.array([1, 2, 4, 8])

    edge_a: list[np.ndarray] = []
    edge_b: list[np.ndarray] = []
    ref_dirs: list[np.ndarray] = []
    for m in range(1, 15):
        rows = np.nonzero(tet_mask == m)[0]
        if len(rows) == 0:
            continue
        tv = tet_vids[rows]
        pos = _vid_to_position(tv, res, origin, spacing)  # (r, 4, 3)
        ins = np.array([bool(m >> i & 1) for i in range(4)])
        centroid_in = pos[:, ins].mean(axis=1)
        centroid_out = pos[:, ~ins].mean(axis=1)
        ref = centroid_out - centroid_in
        for tri in _CASES[m]:
            ia = np.array([e[0] for e in tri])
            ib = np.array([e[1] for e in tri])
            edge_a.append(tv[:, ia])
            edge_b.append(tv[:, ib])
            ref_dirs.append(ref)

    ea = np.concatenate(edge_a)  # (M, 3) one global vid per triangle corner
    eb = np.concatenate(edge_b)
    ref = np.concatenate(ref_dirs)  # (M, 3)

    lo = np.minimum(ea, eb)
    hi = np.maximum(ea, eb)
    n_grid_vertices = nx * ny * nz
    keys = lo.astype(np.int64) * n_grid_vertices + hi
    uniq, inverse = np.unique(keys, return_inverse=True)
    triangles = inverse.reshape(-1, 3).astype(np.int32)

    va_id = uniq // n_grid_vertices
    vb_id = uniq % n_grid_vertices
    va = flat[va_id]
    vb = flat[vb_id]
    t = (iso - va) / (vb - va)
    pa = _vid_to_position(va_id, res, origin, spacing)
    pb = _vid_to_position(vb_id, res, origin, spacing)
    vertices = pa + t[:, None] * (pb - pa)

    # Fix winding: triangle normal must point from inside to outside.
    p = vertices[triangles]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    flip = (n * ref).sum(axis=1) < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    # Drop triangles whose welded corners collapsed onto the same vertex.
    # Each such triangle repeats one undirected edge twice, so removal
    # preserves the even edge-use parity. Tiny but id-distinct triangles
    # must stay: removing them would open holes in the closed surface.
    distinct = (
        (triangles[:, 0] != triangles[:, 1])
        & (triangles[:, 1] != triangles[:, 2])
        & (triangles[:, 0] != triangles[:, 2])
    )
    triangles = triangles[distinct]

    used, renum = np.unique(triangles, return_inverse=True)
    return vertices[used], renum.reshape(-1, 3).astype(np.int32)


def triangle_vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted average of incident triangle normals, normalized."""
    p = vertices[triangles]
    face = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])  # length = 2*area
    acc = np.zeros_like(vertices)
    for c in range(3):
        np.add.at(acc, triangles[:, c], face)
    norms = np.linalg.norm(acc, axis=1, keepdims=True)
    norms[norms < 1e-300] = 1.0
    return acc / norms


def field_normals(
    vertices: np.ndarray,
    triangles: np.ndarray,
    field: np.ndarray,
    spec: GridSpec,
) -> np.ndarray:
    """Outward unit normals from the negated central-difference field gradient.

    Vertices with a vanishing gradient fall back to area-weighted incident
    triangle normals.
    """
    if len(vertices) == 0:
        return np.zeros((0, 3))
    gx, gy, gz = np.gradient(field, spec.spacing)
    g = np.stack(
        [
            trilinear_sample(gx, spec, vertices),
            trilinear_sample(gy, spec, vertices),
            trilinear_sample(gz, spec, vertices),
        ],
        axis=1,
    )
    normals = -g
    norms = np.linalg.norm(normals, axis=1)
    degenerate = norms < 1e-12
    if degenerate.any():
        fallback = triangle_vertex_normals(vertices, triangles)
        normals[degenerate] = fallback[degenerate]
        norms = np.linalg.norm(normals, axis=1)
        norms[norms < 1e-300] = 1.0
    return normals / norms[:, None]


def extract_surface(grid: DensityGrid, cluster_id: int, iso: float) -> IsoLayerMesh:
    """Single closed iso-surface of one cluster's field (occlusion unbaked)."""
    if iso <= 0:
        raise MeshError("iso value must be positive")
    field = grid.fields[cluster_id]
    vertices, triangles = marching_tetrahedra(field, grid.spec.origin, grid.spec.spacing, iso)
    normals = field_normals(vertices, triangles, field, grid.spec)
    return IsoLayerMesh(
        vertices=vertices,
        triangles=triangles,
        normals=normals,
        occlusion=np.zeros(len(vertices)),
        cluster_id=cluster_id,
        layer=0,
        iso=iso,
        opacity=1.0,
        base_color=cluster_color(cluster_id),
    )


def extract_layers(
    grid: DensityGrid,
    cluster_id: int,
    layers: int = 1,
    base_opacity: float = 1.0,
    tau_out: float | None = None,
) -> list[IsoLayerMesh]:
    """Nested iso-surfaces from tau_out (layer 0) to half the field maximum.

    Layer l gets opacity base_opacity*(l+1)/layers, so the innermost layer
    carries the full base opacity and outer layers fade out.
    """
    if layers < 1:
        raise MeshError("need at least one layer")
    if not 0 < base_opacity <= 1:
        raise MeshError("base opacity must lie in (0, 1]")
    fmax = float(grid.fields[cluster_id].max())
    if tau_out is None:
        tau_out = 0.1 * fmax
    if not 0 < tau_out < fmax:
        raise MeshError("tau_out must lie strictly between 0 and the field maximum")
    if layers > 1 and tau_out >= 0.5 * fmax:
        raise MeshError("tau_out >= half the field maximum: layers would coincide")
    isos = np.linspace(tau_out, 0.5 * fmax, layers)
    meshes = []
    for l, iso in enumerate(isos):
        mesh = extract_surface(grid, cluster_id, float(iso))
        mesh.layer = l
        mesh.opacity = base_opacity * (l + 1) / layers
        meshes.append(mesh)
    return meshes
