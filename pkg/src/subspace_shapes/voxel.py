"""Per-cluster density grids: trilinear splatting and iterated box filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .subspace import PointCloud3


class GridError(ValueError):
    """Raised on invalid grid construction or use."""


@dataclass(frozen=True)
class GridSpec:
    """Regular vertex grid with cubic voxels and a zero padding shell.

    resolution counts grid vertices per axis. pad_voxels is sized so that
    splatted mass, after all filter iterations, never reaches the outermost
    shell: pad_voxels >= iterations * filter_half_width + 1.
    """

    resolution: tuple[int, int, int]
    origin: np.ndarray
    spacing: float
    pad_voxels: int

    def __post_init__(self):
        if min(self.resolution) < 2:
            raise GridError("grid needs at least 2 vertices per axis")
        if self.spacing <= 0:
            raise GridError("spacing must be positive")

    @property
    def extent(self) -> np.ndarray:
        """World-space size of the full (padded) grid."""
        return (np.asarray(self.resolution) - 1) * self.spacing

    def interior_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = self.origin + self.pad_voxels * self.spacing
        hi = self.origin + (np.asarray(self.resolution) - 1 - self.pad_voxels) * self.spacing
        return lo, hi


@dataclass(frozen=True)
class DensityGrid:
    """One smoothed scalar field per cluster id on a shared GridSpec."""

    spec: GridSpec
    fields: dict[int, np.ndarray]
    counts: dict[int, int]

    def union_field(self) -> np.ndarray:
        """Sum of all cluster fields (used for cross-cluster occlusion)."""
        total = np.zeros(self.spec.resolution, dtype=np.float64)
        for f in self.fields.values():
            total += f
        return total


def grid_spec_for(
    cloud: PointCloud3, resolution: int = 64, filter_half_width: int = 1, iterations: int = 3
) -> GridSpec:
    """Fit a padded cubic-voxel grid around the cloud's bounding box."""
    if cloud.n_points == 0:
        raise GridError("cannot build a grid for an empty cloud")
    if resolution < 8:
        raise GridError("resolution must be >= 8")
    lo = cloud.positions.min(axis=0)
    hi = cloud.positions.max(axis=0)
    extent = hi - lo
    longest = float(extent.max())
    spacing = longest / resolution if longest > 0 else 1.0
    cells = np.maximum(1, np.ceil(extent / spacing - 1e-9).astype(int))
    pad = iterations * filter_half_width + 1
    res = tuple(int(c) + 2 * pad + 1 for c in cells)
    origin = lo - pad * spacing
    return GridSpec(resolution=res, origin=origin, spacing=spacing, pad_voxels=pad)


def _splat_indices(positions: np.ndarray, spec: GridSpec):
    g = (positions - spec.origin) / spec.spacing
    res = np.asarray(spec.resolution)
    i0 = np.floor(g).astype(np.int64)
    # Points exactly on the upper interior face belong to the last cell.
    i0 = np.clip(i0, 0, res - 2)
    frac = g - i0
    return i0, frac


def splat(cloud: PointCloud3, spec: GridSpec) -> DensityGrid:
    """Deposit unit mass per point onto its cell's 8 vertices (trilinear)."""
    lo, hi = spec.interior_bounds()
    eps = 1e-9 * max(spec.spacing, 1.0)
    if np.any(cloud.positions < lo - eps) or np.any(cloud.positions > hi + eps):
        raise GridError("point outside the grid interior")
    fields: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    for cid in np.unique(cloud.labels):
        mask = cloud.labels == cid
        pos = cloud.positions[mask]
        field = np.zeros(spec.resolution, dtype=np.float64)
        i0, f = _splat_indices(pos, spec)
        for dx in (0, 1):
            wx = f[:, 0] if dx else 1.0 - f[:, 0]
            for dy in (0, 1):
                wy = f[:, 1] if dy else 1.0 - f[:, 1]
                for dz in (0, 1):
                    wz = f[:, 2] if dz else 1.0 - f[:, 2]
                    np.add.at(
                        field,
                        (i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz),
                        wx * wy * wz,
                    )
        fields[int(cid)] = field
        counts[int(cid)] = int(mask.sum())
    return DensityGrid(spec=spec, fields=fields, counts=counts)


def box_filter(grid: DensityGrid, filter_half_width: int = 1, iterations: int = 3) -> DensityGrid:
    """Apply K passes of the normalized (2h+1)^3 mean filter, separably."""
    h, k = filter_half_width, iterations
    if h < 1 or k < 0:
        raise GridError("need filter_half_width >= 1 and iterations >= 0")
    if grid.spec.pad_voxels < k * h + 1:
        raise GridError("insufficient padding for the requested filter")
    size = 2 * h + 1
    fields = {}
    for cid, field in grid.fields.items():
        out = field
        for _ in range(k):
            for axis in range(3):
                out = ndimage.uniform_filter1d(out, size=size, axis=axis, mode="constant")
        # The padding invariant guarantees the true outer shell is exactly 0
        # and all values non-negative; scrub the running-sum rounding noise.
        out = np.maximum(out, 0.0)
        out[0, :, :] = 0.0
        out[-1, :, :] = 0.0
        out[:, 0, :] = 0.0
        out[:, -1, :] = 0.0
        out[:, :, 0] = 0.0
        out[:, :, -1] = 0.0
        fields[cid] = out
    return DensityGrid(spec=grid.spec, fields=fields, counts=dict(grid.counts))


def trilinear_sample(field: np.ndarray, spec: GridSpec, positions: np.ndarray) -> np.ndarray:
    """Trilinearly interpolate field values at world positions; outside -> 0."""
    positions = np.atleast_2d(positions)
    g = (positions - spec.origin) / spec.spacing
    res = np.asarray(spec.resolution)
    in_bounds = np.all((g >= 0) & (g <= res - 1), axis=1)
    gi = np.clip(g, 0, res - 1 - 1e-12)
    i0 = np.floor(gi).astype(np.int64)
    i0 = np.minimum(i0, res - 2)
    f = gi - i0
    value = np.zeros(len(positions))
    for dx in (0, 1):
        wx = f[:, 0] if dx else 1.0 - f[:, 0]
        for dy in (0, 1):
            wy = f[:, 1] if dy else 1.0 - f[:, 1]
            for dz in (0, 1):
                wz = f[:, 2] if dz else 1.0 - f[:, 2]
                value += wx * wy * wz * field[i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz]
    return np.where(in_bounds, value, 0.0)


def sample_density(grid: DensityGrid, cluster_id: int, position: np.ndarray) -> float:
    """Trilinear density of one cluster's field at a world position."""
    field = grid.fields[cluster_id]
    return float(trilinear_sample(field, grid.spec, np.asarray(position, dtype=np.float64))[0])


def dump_field(grid: DensityGrid, cluster_id: int) -> bytes:
    """Debug dump: text header plus f32-LE samples in x-fastest order."""
    spec = grid.spec
    header = (
        f"resolution {spec.resolution[0]} {spec.resolution[1]} {spec.resolution[2]}\n"
        f"origin {float(spec.origin[0])!r} {float(spec.origin[1])!r} {float(spec.origin[2])!r}\n"
        f"spacing {float(spec.spacing)!r}\n"
        "data f32-le x-fastest\n"
    )
    raw = grid.fields[cluster_id].transpose(2, 1, 0).astype("<f4").tobytes()
    return header.encode("ascii") + raw


def load_field_dump(blob: bytes) -> tuple[np.ndarray, np.ndarray, float]:
    """Inverse of dump_field; returns (field, origin, spacing)."""
    head, _, rest = blob.partition(b"data f32-le x-fastest\n")
    lines = dict(line.split(maxsplit=1) for line in head.decode("ascii").strip().split("\n"))
    res = tuple(int(x) for x in lines["resolution"].split())
    origin = np.array([float(x) for x in lines["origin"].split()])
    spacing = float(lines["spacing"])
    flat = np.frombuffer(rest, dtype="<f4")
    field = flat.reshape(res[2], res[1], res[0]).transpose(2, 1, 0).astype(np.float64)
    return field, origin, spacing
