import { describe, expect, it } from "vitest";

import { BrushCapture, pickTriangle } from "../src/raycast.js";

const quadPositions = new Float32Array([
  0, 0, 0,
  1, 0, 0,
  1, 1, 0,
  0, 1, 0,
]);
const quadIndices = new Uint32Array([0, 1, 2, 0, 2, 3]);

describe("pickTriangle", () => {
  it("hits the lower triangle of a quad", () => {
    const hit = pickTriangle([0.7, 0.2, 5], [0, 0, -1], quadPositions, quadIndices);
    expect(hit).not.toBeNull();
    expect(hit!.triangle).toBe(0);
    expect(hit!.distance).toBeCloseTo(5, 10);
  });

  it("hits the upper triangle of a quad", () => {
    const hit = pickTriangle([0.2, 0.7, 5], [0, 0, -1], quadPositions, quadIndices);
    expect(hit!.triangle).toBe(1);
  });

  it("misses outside the quad", () => {
    expect(pickTriangle([2, 2, 5], [0, 0, -1], quadPositions, quadIndices)).toBeNull();
  });

  it("ignores hits behind the origin", () => {
    expect(pickTriangle([0.5, 0.5, -1], [0, 0, -1], quadPositions, quadIndices)).toBeNull();
  });

  it("returns the nearest of stacked triangles", () => {
    const positions = new Float32Array([
      0, 0, 0, 1, 0, 0, 0, 1, 0,
      0, 0, 2, 1, 0, 2, 0, 1, 2,
    ]);
    const indices = new Uint32Array([0, 1, 2, 3, 4, 5]);
    const hit = pickTriangle([0.2, 0.2, 5], [0, 0, -1], positions, indices);
    expect(hit!.triangle).toBe(1);
  });
});

describe("BrushCapture", () => {
  it("deduplicates and sorts painted triangles across a drag", () => {
    const brush = new BrushCapture(quadPositions, quadIndices);
    expect(brush.isEmpty).toBe(true);
    brush.addRay([0.2, 0.7, 5], [0, 0, -1]);
    brush.addRay([0.7, 0.2, 5], [0, 0, -1]);
    brush.addRay([0.7, 0.2, 5], [0, 0, -1]); // repeat
    brush.addRay([5, 5, 5], [0, 0, -1]); // miss
    expect(brush.triangles).toEqual([0, 1]);
    expect(brush.isEmpty).toBe(false);
  });
});
