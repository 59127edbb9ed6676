/** Explorer state: modes, opacity presets, blending order, cluster colors. */

import type { ApiClient } from "./client.js";
import type { MeshPayload, ProjectionPayload, ScenePayload } from "./wire.js";
import { decodeArray } from "./wire.js";

export const MODES = ["scatter", "shape", "combo"] as const;
export type Mode = (typeof MODES)[number];

export const OPACITY_PRESETS = [1.0, 0.7, 0.5] as const;

/** Matches the server's palette so colors agree across views. */
const TAB10: [number, number, number][] = [
  [0.122, 0.467, 0.706],
  [1.0, 0.498, 0.055],
  [0.173, 0.627, 0.173],
  [0.839, 0.153, 0.157],
  [0.58, 0.404, 0.741],
  [0.549, 0.337, 0.294],
  [0.89, 0.467, 0.761],
  [0.498, 0.498, 0.498],
  [0.737, 0.741, 0.133],
  [0.09, 0.745, 0.812],
];

export function clusterColor(clusterId: number): [number, number, number] {
  return TAB10[((clusterId % 10) + 10) % 10];
}

export interface RenderLayer {
  clusterId: number;
  layer: number;
  alpha: number;
  color: [number, number, number];
  positions: Float32Array;
  normals: Float32Array;
  vertexColors: Float32Array;
  indices: Uint32Array;
  centroidDepth: number;
}

/** Decode mesh payloads into render layers, back-to-front for blending. */
export function renderLayers(meshes: MeshPayload[], viewDir: [number, number, number]): RenderLayer[] {
  const layers = meshes.map((m) => {
    const positions = decodeArray(m.positions) as Float32Array;
    let depth = 0;
    for (let i = 0; i < positions.length; i += 3) {
      depth +=
        positions[i] * viewDir[0] + positions[i + 1] * viewDir[1] + positions[i + 2] * viewDir[2];
    }
    const n = Math.max(1, positions.length / 3);
    return {
      clusterId: m.cluster_id,
      layer: m.layer,
      alpha: m.opacity,
      color: [m.base_color[0], m.base_color[1], m.base_color[2]] as [number, number, number],
      positions,
      normals: decodeArray(m.normals) as Float32Array,
      vertexColors: decodeArray(m.colors) as Float32Array,
      indices: decodeArray(m.indices) as Uint32Array,
      centroidDepth: depth / n,
    };
  });
  // farthest first so translucent layers composite correctly
  layers.sort((a, b) => a.centroidDepth - b.centroidDepth);
  return layers;
}

/** Positions of the dimension handles on the influence circle. */
export function dimensionCircle(
  influence: number[],
  radius = 1,
): { x: number; y: number; weight: number }[] {
  const n = influence.length;
  return influence.map((weight, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    return { x: radius * Math.cos(angle), y: radius * Math.sin(angle), weight };
  });
}

export class ExplorerState {
  mode: Mode = "scatter";
  opacityPreset: number = OPACITY_PRESETS[0];
  stale = true;
  projection: ProjectionPayload | null = null;
  scene: ScenePayload | null = null;
  /** Cluster ids seen so far; brushing appends, colors stay stable. */
  knownClusters: number[] = [];

  constructor(
    private client: ApiClient,
    private sessionId: string,
  ) {}

  private noteClusters(labels: Int32Array): void {
    for (const l of labels) {
      if (!this.knownClusters.includes(l)) this.knownClusters.push(l);
    }
  }

  private takeProjection(p: ProjectionPayload): void {
    this.projection = p;
    this.stale = p.stale;
    this.noteClusters(decodeArray(p.labels) as Int32Array);
  }

  async refreshProjection(): Promise<void> {
    this.takeProjection(await this.client.projection(this.sessionId));
  }

  async setMode(mode: Mode): Promise<void> {
    await this.client.setParams(this.sessionId, { mode });
    this.mode = mode;
    await this.refreshProjection();
  }

  async setOpacityPreset(preset: number): Promise<void> {
    if (!OPACITY_PRESETS.includes(preset as (typeof OPACITY_PRESETS)[number])) {
      throw new Error(`opacity preset must be one of ${OPACITY_PRESETS.join("/")}`);
    }
    const resp = await this.client.setParams(this.sessionId, { opacity: preset });
    this.opacityPreset = preset;
    this.stale = resp.stale;
  }

  async rotate(matrix: number[][]): Promise<void> {
    this.takeProjection(await this.client.rotate(this.sessionId, matrix));
  }

  async transition(slot: "u" | "v" | "w", dim: number, t: number): Promise<void> {
    this.takeProjection(await this.client.transition(this.sessionId, slot, dim, t));
  }

  async rebuild(): Promise<ScenePayload> {
    const scene = await this.client.rebuild(this.sessionId);
    this.scene = scene;
    this.takeProjection(scene);
    return scene;
  }

  async brush(clusterId: number, triangles: number[], newClusterId: number): Promise<ScenePayload> {
    const scene = await this.client.brush(this.sessionId, clusterId, triangles, newClusterId);
    this.scene = scene;
    this.takeProjection(scene);
    return scene;
  }

  /** Per-cluster display colors, stable across label reassignment. */
  clusterColors(): Map<number, [number, number, number]> {
    const out = new Map<number, [number, number, number]>();
    for (const c of this.knownClusters) out.set(c, clusterColor(c));
    return out;
  }
}
