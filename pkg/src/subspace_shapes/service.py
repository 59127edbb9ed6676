"""Session-scoped wire API for the interactive explorer."""

from __future__ import annotations

import base64
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .analysis import BrushStroke
from .dataset import TableError, load_table, normalize_columns
from .palette import cluster_color
from .pipeline import PipelineError, SceneState
from .subspace import BasisError, axis_basis, dimension_influence


def _b64(arr: np.ndarray, dtype: str) -> dict:
    a = np.ascontiguousarray(arr.astype(dtype))
    return {
        "dtype": dtype,
        "shape": list(a.shape),
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


class _Session:
    def __init__(self, state: SceneState):
        self.state = state
        self.lock = threading.Lock()


def create_app() -> FastAPI:
    app = FastAPI(title="subspace-shapes")
    sessions: dict[str, _Session] = {}

    def get_session(session_id: str) -> _Session:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail="unknown session")
        return sessions[session_id]

    @app.post("/sessions")
    def create_session(body: dict):
        table = body.get("table")
        if not isinstance(table, str) or not table:
            raise HTTPException(status_code=422, detail="missing 'table' text")
        try:
            dataset = normalize_columns(load_table(table, body.get("label_column")))
            dims = body.get("dims", [0, 1, 2])
            basis = axis_basis(dims[0], dims[1], dims[2], dataset.n_dims)
            state = SceneState(dataset, basis)
        except (TableError, BasisError, ValueError, IndexError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session_id = uuid.uuid4().hex
        sessions[session_id] = _Session(state)
        return {"session_id": session_id, "n_points": dataset.n_points, "n_dims": dataset.n_dims}

    @app.get("/sessions/{session_id}/projection")
    def projection(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            return _projection_payload(sess.state)

    @app.post("/sessions/{session_id}/rotation")
    def rotation(session_id: str, body: dict):
        sess = get_session(session_id)
        matrix = body.get("matrix")
        with sess.lock:
            try:
                sess.state.rotate(np.asarray(matrix, dtype=np.float64))
            except (BasisError, ValueError, TypeError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return _projection_payload(sess.state)

    @app.post("/sessions/{session_id}/transition")
    def transition(session_id: str, body: dict):
        sess = get_session(session_id)
        with sess.lock:
            state = sess.state
            try:
                slot = body["slot"]
                dim = int(body["target_dimension"])
                t = float(body["t"])
                target = np.zeros(state.dataset.n_dims)
                target[dim] = 1.0
                state.transition(slot, target, t)
            except (BasisError, ValueError, KeyError, IndexError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return _projection_payload(state)

    @app.post("/sessions/{session_id}/params")
    def params(session_id: str, body: dict):
        sess = get_session(session_id)
        with sess.lock:
            try:
                changes = dict(body)
                if "ao_directions" in changes:
                    from .ao import AOParams

                    changes["ao"] = AOParams(n_directions=int(changes.pop("ao_directions")))
                sess.state.set_params(**changes)
            except (ValueError, TypeError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return {"ok": True, "stale": sess.state.stale}

    @app.post("/sessions/{session_id}/rebuild")
    def rebuild(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            try:
                sess.state.build()
            except PipelineError as exc:
                # prior scene is preserved by SceneState.build
                raise HTTPException(status_code=500, detail=f"stage {exc.stage}: {exc.cause}") from exc
            return _scene_payload(sess.state)

    @app.post("/sessions/{session_id}/brush")
    def brush(session_id: str, body: dict):
        sess = get_session(session_id)
        with sess.lock:
            state = sess.state
            try:
                stroke = BrushStroke(
                    cluster_id=int(body["cluster_id"]),
                    triangle_indices=np.asarray(body.get("triangles", []), dtype=np.int64),
                    new_cluster_id=int(body["new_cluster_id"]),
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            try:
                state.apply_brush(stroke)
            except PipelineError as exc:
                raise HTTPException(status_code=500, detail=f"stage {exc.stage}: {exc.cause}") from exc
            payload = _scene_payload(state)
            payload["labels"] = _b64(state.labels, "<i4")
            return payload

    @app.post("/sessions/{session_id}/restore-previous")
    def restore(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            restored = sess.state.restore_previous()
            payload = _scene_payload(sess.state)
            payload["restored"] = restored
            return payload

    return app


def _projection_payload(state: SceneState) -> dict:
    points = state.scatter_points()
    labels = points["labels"]
    n_clusters = int(labels.max()) + 1 if len(labels) else 0
    return {
        "mode": state.params.mode,
        "stale": state.stale,
        "positions": _b64(points["positions"], "<f4"),
        "labels": _b64(labels, "<i4"),
        "point_ids": _b64(points["point_ids"], "<i4"),
        "opacities": _b64(points["opacities"], "<f4"),
        "colors": [list(map(float, cluster_color(c))) for c in range(n_clusters)],
        "influence": [float(x) for x in dimension_influence(state.basis)],
        "columns": state.dataset.column_names,
        "basis": state.basis.rows().tolist(),
    }


def _scene_payload(state: SceneState) -> dict:
    meshes = []
    for mesh in state.served_meshes():
        meshes.append(
            {
                "cluster_id": mesh.cluster_id,
                "layer": mesh.layer,
                "iso": mesh.iso,
                "opacity": mesh.opacity,
                "base_color": [float(c) for c in mesh.base_color],
                "positions": _b64(mesh.vertices, "<f4"),
                "normals": _b64(mesh.normals, "<f4"),
                "colors": _b64(
                    mesh.colors
                    if mesh.colors is not None
                    else np.tile(mesh.base_color, (mesh.n_vertices, 1)),
                    "<f4",
                ),
                "indices": _b64(mesh.triangles, "<u4"),
            }
        )
    payload = _projection_payload(state)
    payload["meshes"] = meshes
    outliers = state.served_outliers()
    payload["outliers"] = _b64(outliers, "<i4")
    payload["timings"] = state.timings
    return payload
