"""Per-vertex ambient occlusion baked by probing the density field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .isosurface import IsoLayerMesh
from .voxel import DensityGrid


@dataclass(frozen=True)
class AOParams:
    """Hemisphere probing parameters.

    max_distance and step default to 0.25x the grid extent and 0.5x the
    voxel spacing when left unset; they are resolved against the grid at
    bake time.
    """

    n_directions: int = 64
    max_distance: float | None = None
    step: float | None = None
    ambient_floor: float = 0.2

    def __post_init__(self):
        if self.n_directions < 8:
            raise ValueError("need at least 8 probe directions")
        if self.max_distance is not None and self.max_distance <= 0:
            raise ValueError("max_distance must be positive")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if not 0 <= self.ambient_floor < 1:
            raise ValueError("ambient_floor must lie in [0, 1)")


def _radical_inverse_base2(i: np.ndarray) -> np.ndarray:
    bits = i.astype(np.uint32)
    bits = (bits << np.uint32(16)) | (bits >> np.uint32(16))
    bits = ((bits & np.uint32(0x55555555)) << np.uint32(1)) | (
        (bits & np.uint32(0xAAAAAAAA)) >> np.uint32(1)
    )
    bits = ((bits & np.uint32(0x33333333)) << np.uint32(2)) | (
        (bits & np.uint32(0xCCCCCCCC)) >> np.uint32(2)
    )
    bits = ((bits & np.uint32(0x0F0F0F0F)) << np.uint32(4)) | (
        (bits & np.uint32(0xF0F0F0F0)) >> np.uint32(4)
    )
    bits = ((bits & np.uint32(0x00FF00FF)) << np.uint32(8)) | (
        (bits & np.uint32(0xFF00FF00)) >> np.uint32(8)
    )
    return bits.astype(np.float64) * 2.0**-32


def cosine_hemisphere_directions(n: int) -> np.ndarray:
    """Deterministic low-discrepancy cosine-weighted set in the +z hemisphere."""
    i = np.arange(n)
    u1 = (i + 0.5) / n
    u2 = _radical_inverse_base2(i)
    r = np.sqrt(u1)
    phi = 2 * np.pi * u2
    z = np.sqrt(np.maximum(0.0, 1.0 - u1))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def cell_max_field(field: np.ndarray) -> np.ndarray:
    """Per-cell maximum over the 8 corner values.

    A trilinear sample inside a cell is a convex combination of its corners,
    so cells whose maximum is below the iso value can never register a hit;
    the bake kernel uses this to skip full interpolation in empty space.
    """
    nx, ny, nz = field.shape
    out = np.full((nx - 1, ny - 1, nz - 1), -np.inf)
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                np.maximum(out, field[dx : nx - 1 + dx, dy : ny - 1 + dy, dz : nz - 1 + dz], out=out)
    return out


@njit(parallel=True, cache=True, fastmath=True)
def _bake_kernel(
    vertices,
    normals,
    field,
    cell_max,
    origin,
    spacing,
    iso,
    dirs,
    start_offset,
    max_distance,
    step,
):  # pragma: no cover - exercised through bake_occlusion
    nv = vertices.shape[0]
    nd = dirs.shape[0]
    nx, ny, nz = field.shape
    n_steps = int(max_distance / step)
    occlusion = np.zeros(nv)
    for v in prange(nv):
        n0, n1, n2 = normals[v, 0], normals[v, 1], normals[v, 2]
        # Orthonormal frame around the normal (z axis = normal).
        if abs(n0) < 0.9:
            t0, t1, t2 = 0.0, -n2, n1
        else:
            t0, t1, t2 = -n2, 0.0, n0
        tn = (t0 * t0 + t1 * t1 + t2 * t2) ** 0.5
        t0, t1, t2 = t0 / tn, t1 / tn, t2 / tn
        b0 = n1 * t2 - n2 * t1
        b1 = n2 * t0 - n0 * t2
        b2 = n0 * t1 - n1 * t0
        # Ray setup in grid coordinates; steps become pure additions.
        inv = 1.0 / spacing
        gx0 = (vertices[v, 0] + start_offset * n0 - origin[0]) * inv
        gy0 = (vertices[v, 1] + start_offset * n1 - origin[1]) * inv
        gz0 = (vertices[v, 2] + start_offset * n2 - origin[2]) * inv
        scale = step * inv
        hits = 0
        for d in range(nd):
            sx = (dirs[d, 0] * t0 + dirs[d, 1] * b0 + dirs[d, 2] * n0) * scale
            sy = (dirs[d, 0] * t1 + dirs[d, 1] * b1 + dirs[d, 2] * n1) * scale
            sz = (dirs[d, 0] * t2 + dirs[d, 1] * b2 + dirs[d, 2] * n2) * scale
            px = gx0
            py = gy0
            pz = gz0
            for k in range(n_steps + 1):
                if px < 0 or py < 0 or pz < 0 or px > nx - 1 or py > ny - 1 or pz > nz - 1:
                    break
                i = min(int(px), nx - 2)
                j = min(int(py), ny - 2)
                l = min(int(pz), nz - 2)
                if cell_max[i, j, l] > iso:
                    fx = px - i
                    fy = py - j
                    fz = pz - l
                    c00 = field[i, j, l] * (1 - fx) + field[i + 1, j, l] * fx
                    c10 = field[i, j + 1, l] * (1 - fx) + field[i + 1, j + 1, l] * fx
                    c01 = field[i, j, l + 1] * (1 - fx) + field[i + 1, j, l + 1] * fx
                    c11 = field[i, j + 1, l + 1] * (1 - fx) + field[i + 1, j + 1, l + 1] * fx
                    value = (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (
                        c01 * (1 - fy) + c11 * fy
                    ) * fz
                    if value > iso:
                        hits += 1
                        break
                px += sx
                py += sy
                pz += sz
        occlusion[v] = hits / nd
    return occlusion


def bake_occlusion(
    mesh: IsoLayerMesh,
    grid: DensityGrid,
    params: AOParams = AOParams(),
    occluder_field: np.ndarray | None = None,
    occluder_cell_max: np.ndarray | None = None,
) -> np.ndarray:
    """Occluded hemisphere fraction per vertex.

    Cosine-weighted directions around the vertex normal are ray-marched from
    a start point offset by one voxel along the normal; a direction counts as
    occluded once the sampled density exceeds the mesh's iso value within
    max_distance. By default rays test the union of all clusters' fields so
    neighboring shapes darken each other.
    """
    if mesh.n_vertices == 0:
        return np.zeros(0)
    spec = grid.spec
    if occluder_field is None:
        occluder_field = grid.union_field()
    if occluder_cell_max is None:
        occluder_cell_max = cell_max_field(occluder_field)
    max_distance = params.max_distance
    if max_distance is None:
        max_distance = 0.25 * float(spec.extent.max())
    step = params.step
    if step is None:
        step = 0.5 * spec.spacing
    dirs = cosine_hemisphere_directions(params.n_directions)
    occ = _bake_kernel(
        np.ascontiguousarray(mesh.vertices),
        np.ascontiguousarray(mesh.normals),
        np.ascontiguousarray(occluder_field),
        np.ascontiguousarray(occluder_cell_max),
        np.ascontiguousarray(spec.origin),
        spec.spacing,
        mesh.iso,
        np.ascontiguousarray(dirs),
        spec.spacing,
        max_distance,
        step,
    )
    return np.clip(occ, 0.0, 1.0)


def shade_vertices(mesh: IsoLayerMesh, params: AOParams = AOParams()) -> np.ndarray:
    """Fold occlusion into displayable RGB: ambient floor plus open fraction."""
    k_a = params.ambient_floor
    lum = k_a + (1.0 - k_a) * (1.0 - mesh.occlusion)
    return np.clip(lum[:, None] * mesh.base_color[None, :], 0.0, 1.0)
