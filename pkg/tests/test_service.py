import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from subspace_shapes.service import create_app
from tests.conftest import iris_csv_bytes


def decode(payload: dict) -> np.ndarray:
    raw = base64.b64decode(payload["data"])
    return np.frombuffer(raw, dtype=payload["dtype"]).reshape(payload["shape"])


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture()
def session(client):
    resp = client.post(
        "/sessions", json={"table": iris_csv_bytes().decode(), "label_column": "class"}
    )
    assert resp.status_code == 200
    return resp.json()["session_id"]


class TestCreateSession:
    def test_reports_shape(self, client):
        resp = client.post(
            "/sessions", json={"table": iris_csv_bytes().decode(), "label_column": "class"}
        )
        body = resp.json()
        assert body["n_points"] == 150 and body["n_dims"] == 4

    def test_missing_table(self, client):
        assert client.post("/sessions", json={}).status_code == 422

    def test_bad_label_column(self, client):
        resp = client.post(
            "/sessions", json={"table": iris_csv_bytes().decode(), "label_column": "nope"}
        )
        assert resp.status_code == 422

    def test_bad_dims(self, client):
        resp = client.post(
            "/sessions",
            json={
                "table": iris_csv_bytes().decode(),
                "label_column": "class",
                "dims": [0, 0, 1],
            },
        )
        assert resp.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/deadbeef/projection").status_code == 404


class TestProjection:
    def test_payload_contract(self, client, session):
        body = client.get(f"/sessions/{session}/projection").json()
        pos = decode(body["positions"])
        assert pos.shape == (150, 3)
        assert decode(body["labels"]).shape == (150,)
        assert decode(body["opacities"]).shape == (150,)
        assert len(body["colors"]) == 3
        assert len(body["influence"]) == 4
        assert body["columns"][2] == "petal_length"
        assert body["stale"] is True and body["mode"] == "scatter"

    def test_axis_dims_select_columns(self, client, session):
        body = client.get(f"/sessions/{session}/projection").json()
        assert body["influence"] == pytest.approx([1, 1, 1, 0])


class TestRotation:
    def test_matches_library_rotation(self, client, session):
        from subspace_shapes import axis_basis, rotate_basis

        rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        body = client.post(f"/sessions/{session}/rotation", json={"matrix": rot}).json()
        expected = rotate_basis(axis_basis(0, 1, 2, 4), np.array(rot))
        np.testing.assert_allclose(body["basis"], expected.rows(), atol=1e-12)
        assert body["stale"] is True

    def test_rejects_non_rotation(self, client, session):
        rot = [[2.0, 0, 0], [0, 1, 0], [0, 0, 1]]
        resp = client.post(f"/sessions/{session}/rotation", json={"matrix": rot})
        assert resp.status_code == 422


class TestTransition:
    def test_full_swap(self, client, session):
        body = client.post(
            f"/sessions/{session}/transition",
            json={"slot": "w", "target_dimension": 3, "t": 1.0},
        ).json()
        np.testing.assert_allclose(body["basis"][2], [0, 0, 0, 1], atol=1e-12)

    def test_bad_slot(self, client, session):
        resp = client.post(
            f"/sessions/{session}/transition",
            json={"slot": "q", "target_dimension": 3, "t": 1.0},
        )
        assert resp.status_code == 422


class TestParamsAndRebuild:
    def test_rebuild_serves_meshes(self, client, session):
        client.post(f"/sessions/{session}/params", json={"mode": "shape", "layers": 2})
        body = client.post(f"/sessions/{session}/rebuild").json()
        assert body["stale"] is False
        assert len(body["meshes"]) == 6
        for m in body["meshes"]:
            pos = decode(m["positions"])
            idx = decode(m["indices"])
            assert decode(m["normals"]).shape == pos.shape
            assert decode(m["colors"]).shape == pos.shape
            assert idx.max() < len(pos)
        assert "total" in body["timings"]

    def test_scatter_mode_serves_no_meshes(self, client, session):
        body = client.post(f"/sessions/{session}/rebuild").json()
        assert body["meshes"] == []

    def test_ao_directions_mapped(self, client, session):
        resp = client.post(f"/sessions/{session}/params", json={"ao_directions": 16})
        assert resp.json() == {"ok": True, "stale": True}

    def test_invalid_params_rejected(self, client, session):
        resp = client.post(f"/sessions/{session}/params", json={"mode": "bogus"})
        assert resp.status_code == 422


class TestBrushAndRestore:
    def test_empty_brush_is_ok(self, client, session):
        client.post(f"/sessions/{session}/params", json={"mode": "shape"})
        client.post(f"/sessions/{session}/rebuild")
        body = client.post(
            f"/sessions/{session}/brush",
            json={"cluster_id": 0, "triangles": [], "new_cluster_id": 1},
        )
        assert body.status_code == 200
        labels = decode(body.json()["labels"])
        assert labels.shape == (150,)

    def test_brush_before_build_fails(self, client, session):
        resp = client.post(
            f"/sessions/{session}/brush",
            json={"cluster_id": 0, "triangles": [0], "new_cluster_id": 1},
        )
        assert resp.status_code == 500

    def test_brush_same_cluster_rejected(self, client, session):
        resp = client.post(
            f"/sessions/{session}/brush",
            json={"cluster_id": 0, "triangles": [0], "new_cluster_id": 0},
        )
        assert resp.status_code == 422

    def test_restore_empty_cache(self, client, session):
        body = client.post(f"/sessions/{session}/restore-previous").json()
        assert body["restored"] is False

    def test_restore_after_two_builds(self, client, session):
        client.post(f"/sessions/{session}/params", json={"mode": "shape"})
        client.post(f"/sessions/{session}/rebuild")
        rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        client.post(f"/sessions/{session}/rotation", json={"matrix": rot})
        client.post(f"/sessions/{session}/rebuild")
        body = client.post(f"/sessions/{session}/restore-previous").json()
        assert body["restored"] is True
        np.testing.assert_allclose(body["basis"], np.eye(4)[:3], atol=1e-12)


class TestIsolation:
    def test_sessions_do_not_share_state(self, client):
        ids = []
        for _ in range(2):
            resp = client.post(
                "/sessions",
                json={"table": iris_csv_bytes().decode(), "label_column": "class"},
            )
            ids.append(resp.json()["session_id"])
        rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        client.post(f"/sessions/{ids[0]}/rotation", json={"matrix": rot})
        other = client.get(f"/sessions/{ids[1]}/projection").json()
        np.testing.assert_allclose(other["basis"], np.eye(4)[:3], atol=1e-12)
