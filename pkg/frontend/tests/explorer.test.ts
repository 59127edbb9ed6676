import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/client.js";
import {
  dimensionCircle,
  ExplorerState,
  OPACITY_PRESETS,
  renderLayers,
} from "../src/scene.js";
import { decodeArray } from "../src/wire.js";
import { MockService } from "./mockService.js";

let service: MockService;
let client: ApiClient;
let state: ExplorerState;

beforeEach(async () => {
  service = new MockService();
  client = new ApiClient("http://mock", service.fetchLike());
  const info = await client.createSession("dim0,dim1\n1,2\n");
  state = new ExplorerState(client, info.session_id);
  await state.refreshProjection();
});

describe("session basics", () => {
  it("exposes the projection payload", () => {
    const p = state.projection!;
    expect(decodeArray(p.positions).length).toBe(60 * 3);
    expect(p.columns.length).toBe(5);
    expect(state.knownClusters).toEqual([0, 1, 2]);
  });

  it("maps API failures to ApiError", async () => {
    await expect(client.projection("nope")).rejects.toBeInstanceOf(ApiError);
    await expect(
      client.rotate("mock", [
        [2, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
      ]),
    ).rejects.toMatchObject({ status: 422 });
  });
});

describe("opacity presets", () => {
  // [SECONDARY] presets 1.0 / 0.7 / 0.5 selectable, reflected in layer alpha
  it("offers exactly the three presets", () => {
    expect([...OPACITY_PRESETS]).toEqual([1.0, 0.7, 0.5]);
  });

  it.each([1.0, 0.7, 0.5])("preset %f lands in rendered layer alpha", async (preset) => {
    await state.setMode("shape");
    await client.setParams("mock", { layers: 2 });
    await state.setOpacityPreset(preset);
    const scene = await state.rebuild();
    const layers = renderLayers(scene.meshes, [0, 0, -1]);
    expect(layers.length).toBe(6);
    for (const layer of layers) {
      const expected = (preset * (layer.layer + 1)) / 2;
      expect(layer.alpha).toBeCloseTo(expected, 9);
    }
  });

  it("rejects arbitrary opacities", async () => {
    await expect(state.setOpacityPreset(0.42)).rejects.toThrow(/preset/);
  });
});

describe("shape toggle round trip", () => {
  // [SECONDARY] scatter -> shape -> scatter reproduces the projection payload
  it("returns the identical projection payload", async () => {
    const before = await client.projection("mock");
    await state.setMode("shape");
    await state.rebuild();
    await state.setMode("scatter");
    const after = await client.projection("mock");
    expect(after.positions.data).toBe(before.positions.data);
    expect(after.labels.data).toBe(before.labels.data);
    expect(after.basis).toEqual(before.basis);
    expect(after.mode).toBe("scatter");
  });

  it("scatter mode serves no meshes, shape mode serves them", async () => {
    await state.setMode("shape");
    const shapeScene = await state.rebuild();
    expect(shapeScene.meshes.length).toBeGreaterThan(0);
    await state.setMode("scatter");
    const scatterScene = await client.rebuild("mock");
    expect(scatterScene.meshes.length).toBe(0);
  });
});

describe("brush to new cluster", () => {
  // [SECONDARY] one stroke yields one new cluster color that persists
  // across a subspace transition
  it("creates a persistent new cluster", async () => {
    await state.setMode("shape");
    await state.rebuild();
    expect(state.knownClusters).toEqual([0, 1, 2]);

    const newId = 3;
    const scene = await state.brush(0, [0, 1], newId);
    const labels = decodeArray(scene.labels_full ?? scene.labels) as Int32Array;
    expect([...new Set(labels)].sort()).toContain(newId);
    expect(state.knownClusters).toContain(newId);
    const colorBefore = state.clusterColors().get(newId)!;

    await state.transition("w", 4, 1.0);
    await state.rebuild();
    expect(state.knownClusters).toContain(newId);
    expect(state.clusterColors().get(newId)).toEqual(colorBefore);
    const clusterIds = state.scene!.meshes.map((m) => m.cluster_id);
    expect(clusterIds).toContain(newId);
  });
});

describe("staleness flow", () => {
  it("rotation marks the scene stale until rebuild", async () => {
    await state.setMode("shape");
    await state.rebuild();
    expect(state.stale).toBe(false);
    await state.rotate([
      [0, -1, 0],
      [1, 0, 0],
      [0, 0, 1],
    ]);
    expect(state.stale).toBe(true);
    await state.rebuild();
    expect(state.stale).toBe(false);
  });

  it("restore-previous swaps back to the earlier scene", async () => {
    await state.setMode("shape");
    await state.rebuild();
    const basisBefore = state.projection!.basis.map((r) => [...r]);
    await state.rotate([
      [0, -1, 0],
      [1, 0, 0],
      [0, 0, 1],
    ]);
    await state.rebuild();
    const restored = await client.restorePrevious("mock");
    expect(restored.restored).toBe(true);
    expect(restored.basis).toEqual(basisBefore);
  });
});

describe("render helpers", () => {
  it("sorts translucent layers back to front", async () => {
    await state.setMode("shape");
    const scene = await state.rebuild();
    const layers = renderLayers(scene.meshes, [0, 0, -1]);
    for (let i = 1; i < layers.length; i++) {
      expect(layers[i].centroidDepth).toBeGreaterThanOrEqual(layers[i - 1].centroidDepth);
    }
  });

  it("lays dimensions out on a circle with their influence", () => {
    const handles = dimensionCircle([1, 0.5, 0, 0.2], 2);
    expect(handles.length).toBe(4);
    for (const h of handles) {
      expect(Math.hypot(h.x, h.y)).toBeCloseTo(2, 9);
    }
    expect(handles[0].weight).toBe(1);
    expect(handles.map((h) => h.weight)).toEqual([1, 0.5, 0, 0.2]);
  });
});
