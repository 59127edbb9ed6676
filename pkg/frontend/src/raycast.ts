/** Ray-triangle picking for the surface brush. */

export interface Hit {
  triangle: number;
  distance: number;
}

/**
 * Moller-Trumbore intersection of one ray against an indexed triangle list.
 * Returns the nearest front- or back-facing hit, or null.
 */
export function pickTriangle(
  origin: [number, number, number],
  dir: [number, number, number],
  positions: Float32Array,
  indices: Uint32Array,
): Hit | null {
  let best: Hit | null = null;
  const nTris = indices.length / 3;
  for (let t = 0; t < nTris; t++) {
    const ia = indices[3 * t] * 3;
    const ib = indices[3 * t + 1] * 3;
    const ic = indices[3 * t + 2] * 3;
    const e1x = positions[ib] - positions[ia];
    const e1y = positions[ib + 1] - positions[ia + 1];
    const e1z = positions[ib + 2] - positions[ia + 2];
    const e2x = positions[ic] - positions[ia];
    const e2y = positions[ic + 1] - positions[ia + 1];
    const e2z = positions[ic + 2] - positions[ia + 2];
    const px = dir[1] * e2z - dir[2] * e2y;
    const py = dir[2] * e2x - dir[0] * e2z;
    const pz = dir[0] * e2y - dir[1] * e2x;
    const det = e1x * px + e1y * py + e1z * pz;
    if (Math.abs(det) < 1e-12) continue;
    const inv = 1 / det;
    const tx = origin[0] - positions[ia];
    const ty = origin[1] - positions[ia + 1];
    const tz = origin[2] - positions[ia + 2];
    const u = (tx * px + ty * py + tz * pz) * inv;
    if (u < 0 || u > 1) continue;
    const qx = ty * e1z - tz * e1y;
    const qy = tz * e1x - tx * e1z;
    const qz = tx * e1y - ty * e1x;
    const v = (dir[0] * qx + dir[1] * qy + dir[2] * qz) * inv;
    if (v < 0 || u + v > 1) continue;
    const dist = (e2x * qx + e2y * qy + e2z * qz) * inv;
    if (dist <= 0) continue;
    if (best === null || dist < best.distance) best = { triangle: t, distance: dist };
  }
  return best;
}

/** Accumulates unique painted triangles over the course of one drag. */
export class BrushCapture {
  private touched = new Set<number>();

  constructor(
    private positions: Float32Array,
    private indices: Uint32Array,
  ) {}

  addRay(origin: [number, number, number], dir: [number, number, number]): void {
    const hit = pickTriangle(origin, dir, this.positions, this.indices);
    if (hit !== null) this.touched.add(hit.triangle);
  }

  get triangles(): number[] {
    return [...this.touched].sort((a, b) => a - b);
  }

  get isEmpty(): boolean {
    return this.touched.size === 0;
  }
}
