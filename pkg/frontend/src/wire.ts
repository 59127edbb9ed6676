/** Wire payload types and typed-array codecs for the session API. */

export interface WireArray {
  dtype: string;
  shape: number[];
  data: string; // base64, little-endian
}

export interface ProjectionPayload {
  mode: string;
  stale: boolean;
  positions: WireArray;
  labels: WireArray;
  point_ids: WireArray;
  opacities: WireArray;
  colors: number[][];
  influence: number[];
  columns: string[];
  basis: number[][];
}

export interface MeshPayload {
  cluster_id: number;
  layer: number;
  iso: number;
  opacity: number;
  base_color: number[];
  positions: WireArray;
  normals: WireArray;
  colors: WireArray;
  indices: WireArray;
}

export interface ScenePayload extends ProjectionPayload {
  meshes: MeshPayload[];
  outliers: WireArray;
  timings: Record<string, number>;
  labels_full?: WireArray;
  restored?: boolean;
}

export type DecodedArray = Float32Array | Int32Array | Uint32Array;

function base64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

function bytesToBase64(bytes: Uint8Array): string {
  let bin = "";
  for (let i = 0; i < bytes.length; i++) bin += String.fromCharCode(bytes[i]);
  return btoa(bin);
}

export function decodeArray(wire: WireArray): DecodedArray {
  const bytes = base64ToBytes(wire.data);
  const buf = bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.byteLength);
  switch (wire.dtype) {
    case "<f4":
      return new Float32Array(buf);
    case "<i4":
      return new Int32Array(buf);
    case "<u4":
      return new Uint32Array(buf);
    default:
      throw new Error(`unsupported dtype ${wire.dtype}`);
  }
}

export function encodeArray(values: DecodedArray, shape: number[]): WireArray {
  let dtype: string;
  if (values instanceof Float32Array) dtype = "<f4";
  else if (values instanceof Int32Array) dtype = "<i4";
  else dtype = "<u4";
  const bytes = new Uint8Array(values.buffer, values.byteOffset, values.byteLength);
  return { dtype, shape, data: bytesToBase64(bytes) };
}

/** Number of logical elements described by the shape. */
export function shapeSize(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}
