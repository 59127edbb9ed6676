"""OBJ and glTF export of built scenes (one object per cluster/layer)."""

from __future__ import annotations

import base64
import json

import numpy as np

from .isosurface import IsoLayerMesh


class ExportError(ValueError):
    """Raised when a scene cannot be exported."""


def _f32(x: float) -> str:
    # Shortest text that round-trips through 32-bit floats.
    return f"{float(np.float32(x)):.9g}"


def export_obj(meshes: list[IsoLayerMesh], mtl_name: str = "scene.mtl") -> dict[str, bytes]:
    """Wavefront OBJ plus sidecar MTL with per-object diffuse color/dissolve."""
    if not meshes:
        raise ExportError("no meshes built")
    obj: list[str] = [f"mtllib {mtl_name}"]
    mtl: list[str] = []
    offset = 1  # OBJ indices are 1-based
    for mesh in meshes:
        name = f"cluster{mesh.cluster_id}_layer{mesh.layer}"
        mtl.append(f"newmtl {name}")
        mtl.append(
            "Kd "
            + " ".join(_f32(c) for c in mesh.base_color)
        )
        mtl.append(f"d {_f32(mesh.opacity)}")
        mtl.append("")
        obj.append(f"o {name}")
        obj.append(f"usemtl {name}")
        for v in mesh.vertices:
            obj.append(f"v {_f32(v[0])} {_f32(v[1])} {_f32(v[2])}")
        for n in mesh.normals:
            obj.append(f"vn {_f32(n[0])} {_f32(n[1])} {_f32(n[2])}")
        for t in mesh.triangles:
            a, b, c = (int(i) + offset for i in t)
            obj.append(f"f {a}//{a} {b}//{b} {c}//{c}")
        offset += mesh.n_vertices
    return {
        "scene.obj": ("\n".join(obj) + "\n").encode("ascii"),
        mtl_name: ("\n".join(mtl) + "\n").encode("ascii"),
    }


def parse_obj(blob: bytes) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Read back per-object (positions, triangles) from an exported OBJ."""
    positions: list[list[float]] = []
    objects: dict[str, tuple[list, list]] = {}
    current: tuple[list, list] | None = None
    start = 0
    for line in blob.decode("ascii").splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "o":
            current = ([], [])
            objects[parts[1]] = current
            start = len(positions)
        elif parts[0] == "v":
            positions.append([float(x) for x in parts[1:4]])
            assert current is not None
            current[0].append(positions[-1])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) - 1 - start for p in parts[1:]]
            assert current is not None
            current[1].append(idx)
    return {
        name: (np.array(vs, dtype=np.float32), np.array(ts, dtype=np.int64))
        for name, (vs, ts) in objects.items()
    }


def export_gltf(meshes: list[IsoLayerMesh]) -> dict[str, bytes]:
    """glTF 2.0 with one node per mesh, COLOR_0 vertex colors, embedded buffer."""
    if not meshes:
        raise ExportError("no meshes built")
    buffer = bytearray()
    buffer_views = []
    accessors = []
    gltf_meshes = []
    materials = []
    nodes = []

    def add_view(data: bytes, target: int) -> int:
        # 4-byte alignment between views
        while len(buffer) % 4:
            buffer.append(0)
        buffer_views.append(
            {"buffer": 0, "byteOffset": len(buffer), "byteLength": len(data), "target": target}
        )
        buffer.extend(data)
        return len(buffer_views) - 1

    for mesh in meshes:
        pos = mesh.vertices.astype("<f4")
        nrm = mesh.normals.astype("<f4")
        col = (mesh.colors if mesh.colors is not None else np.tile(mesh.base_color, (mesh.n_vertices, 1))).astype("<f4")
        idx = mesh.triangles.astype("<u4").ravel()

        pos_acc = len(accessors)
        accessors.append(
            {
                "bufferView": add_view(pos.tobytes(), 34962),
                "componentType": 5126,
                "count": int(len(pos)),
                "type": "VEC3",
                "min": [float(x) for x in pos.min(axis=0)] if len(pos) else [0, 0, 0],
                "max": [float(x) for x in pos.max(axis=0)] if len(pos) else [0, 0, 0],
            }
        )
        nrm_acc = len(accessors)
        accessors.append(
            {
                "bufferView": add_view(nrm.tobytes(), 34962),
                "componentType": 5126,
                "count": int(len(nrm)),
                "type": "VEC3",
            }
        )
        col_acc = len(accessors)
        accessors.append(
            {
                "bufferView": add_view(col.tobytes(), 34962),
                "componentType": 5126,
                "count": int(len(col)),
                "type": "VEC3",
            }
        )
        idx_acc = len(accessors)
        accessors.append(
            {
                "bufferView": add_view(idx.tobytes(), 34963),
                "componentType": 5125,
                "count": int(len(idx)),
                "type": "SCALAR",
            }
        )
        mat = len(materials)
        materials.append(
            {
                "name": f"cluster{mesh.cluster_id}_layer{mesh.layer}",
                "pbrMetallicRoughness": {
                    "baseColorFactor": [1.0, 1.0, 1.0, float(mesh.opacity)],
                    "metallicFactor": 0.0,
                    "roughnessFactor": 1.0,
                },
                "alphaMode": "BLEND" if mesh.opacity < 1.0 else "OPAQUE",
                "doubleSided": False,
            }
        )
        gltf_meshes.append(
            {
                "name": f"cluster{mesh.cluster_id}_layer{mesh.layer}",
                "primitives": [
                    {
                        "attributes": {
                            "POSITION": pos_acc,
                            "NORMAL": nrm_acc,
                            "COLOR_0": col_acc,
                        },
                        "indices": idx_acc,
                        "material": mat,
                        "mode": 4,
                    }
                ],
            }
        )
        nodes.append({"mesh": len(gltf_meshes) - 1, "name": gltf_meshes[-1]["name"]})

    uri = "data:application/octet-stream;base64," + base64.b64encode(bytes(buffer)).decode("ascii")
    doc = {
        "asset": {"version": "2.0", "generator": "subspace-shapes"},
        "scene": 0,
        "scenes": [{"nodes": list(range(len(nodes)))}],
        "nodes": nodes,
        "meshes": gltf_meshes,
        "materials": materials,
        "accessors": accessors,
        "bufferViews": buffer_views,
        "buffers": [{"byteLength": len(buffer), "uri": uri}],
    }
    blob = json.dumps(doc, indent=1, sort_keys=True).encode("ascii")
    return {"scene.gltf": blob}


def parse_gltf(blob: bytes) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Read back per-node (positions, triangles) from an exported glTF."""
    doc = json.loads(blob)
    uri = doc["buffers"][0]["uri"]
    raw = base64.b64decode(uri.split(",", 1)[1])
    out = {}
    for mesh in doc["meshes"]:
        prim = mesh["primitives"][0]
        pos_acc = doc["accessors"][prim["attributes"]["POSITION"]]
        idx_acc = doc["accessors"][prim["indices"]]
        pv = doc["bufferViews"][pos_acc["bufferView"]]
        iv = doc["bufferViews"][idx_acc["bufferView"]]
        pos = np.frombuffer(
            raw, dtype="<f4", count=pos_acc["count"] * 3, offset=pv["byteOffset"]
        ).reshape(-1, 3)
        idx = np.frombuffer(
            raw, dtype="<u4", count=idx_acc["count"], offset=iv["byteOffset"]
        ).reshape(-1, 3)
        out[mesh["name"]] = (pos.copy(), idx.astype(np.int64))
    return out


def export_scene(meshes: list[IsoLayerMesh], fmt: str) -> dict[str, bytes]:
    """Dispatch on format; returns a mapping of file name to bytes."""
    if fmt == "obj":
        return export_obj(meshes)
    if fmt == "gltf":
        return export_gltf(meshes)
    raise ExportError(f"unknown export format {fmt!r}")
