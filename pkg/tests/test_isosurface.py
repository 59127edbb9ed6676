import numpy as np
import pytest

from subspace_shapes import (
    axis_basis,
    box_filter,
    extract_layers,
    extract_surface,
    grid_spec_for,
    project,
    splat,
    trilinear_sample,
)
from subspace_shapes.isosurface import MeshError, field_normals
from subspace_shapes.voxel import DensityGrid
from tests.conftest import assert_watertight, blob_dataset, sphere_field


def grid_from_field(field, spec, cluster_id=0):
    return DensityGrid(spec=spec, fields={cluster_id: field}, counts={cluster_id: 1})


@pytest.fixture(scope="module")
def sphere_mesh():
    field, spec, center, radius = sphere_field(resolution=64)
    grid = grid_from_field(field, spec)
    mesh = extract_surface(grid, 0, radius)
    return mesh, spec, center, radius


class TestSphereOracle:
    def test_vertex_radii(self, sphere_mesh):
        # [DERIVED] analytic sphere: >= 99% of vertices within 0.75*spacing of R
        mesh, spec, center, radius = sphere_mesh
        radii = np.linalg.norm(mesh.vertices - center, axis=1)
        frac = (np.abs(radii - radius) <= 0.75 * spec.spacing).mean()
        assert frac >= 0.99

    def test_field_normals_radial(self, sphere_mesh):
        # [DERIVED] >= 95% of normals within 5 degrees of the radial direction
        mesh, spec, center, radius = sphere_mesh
        radial = mesh.vertices - center
        radial /= np.linalg.norm(radial, axis=1, keepdims=True)
        cosang = np.clip((mesh.normals * radial).sum(axis=1), -1, 1)
        frac = (np.degrees(np.arccos(cosang)) <= 5.0).mean()
        assert frac >= 0.95

    def test_watertight(self, sphere_mesh):
        assert_watertight(sphere_mesh[0])


def test_all_zero_field_gives_empty_mesh():
    field, spec, _, _ = sphere_field(resolution=16)
    grid = grid_from_field(np.zeros_like(field), spec)
    mesh = extract_surface(grid, 0, 0.5)
    assert mesh.n_vertices == 0 and mesh.n_triangles == 0


def test_iso_above_max_gives_empty_mesh():
    field, spec, _, radius = sphere_field(resolution=16)
    mesh = extract_surface(grid_from_field(field, spec), 0, field.max() * 2)
    assert mesh.n_triangles == 0


def test_non_positive_iso_rejected():
    field, spec, _, _ = sphere_field(resolution=16)
    with pytest.raises(MeshError, match="positive"):
        extract_surface(grid_from_field(field, spec), 0, 0.0)


def test_iris_clusters_closed_and_deterministic(iris_dataset):
    cloud = project(iris_dataset, axis_basis(0, 1, 2, 4))
    spec = grid_spec_for(cloud)
    grid = box_filter(splat(cloud, spec))
    for cid in range(3):
        iso = 0.1 * grid.fields[cid].max()
        mesh = extract_surface(grid, cid, iso)
        assert_watertight(mesh)
        again = extract_surface(grid, cid, iso)
        assert np.array_equal(mesh.vertices, again.vertices)
        assert np.array_equal(mesh.triangles, again.triangles)


def test_winding_agrees_with_vertex_normals(iris_dataset):
    cloud = project(iris_dataset, axis_basis(0, 1, 2, 4))
    spec = grid_spec_for(cloud)
    grid = box_filter(splat(cloud, spec))
    mesh = extract_surface(grid, 0, 0.1 * grid.fields[0].max())
    p = mesh.vertices[mesh.triangles]
    face = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    avg = mesh.normals[mesh.triangles].mean(axis=1)
    # area-weighted: sub-voxel slivers may disagree with the sampled gradient
    dots = (face * avg).sum(axis=1)
    areas = np.linalg.norm(face, axis=1)
    assert areas[dots > 0].sum() / areas.sum() >= 0.999


@pytest.fixture(scope="module")
def layer_grid():
    ds = blob_dataset(21, n_per_cluster=200, n_clusters=1)
    cloud = project(ds, axis_basis(0, 1, 2, ds.n_dims))
    spec = grid_spec_for(cloud, 32)
    return box_filter(splat(cloud, spec))


class TestExtractLayers:
    def test_single_layer_full_opacity(self, layer_grid):
        meshes = extract_layers(layer_grid, 0, layers=1, base_opacity=1.0)
        assert len(meshes) == 1
        assert meshes[0].opacity == 1.0
        assert meshes[0].layer == 0
        assert meshes[0].iso == pytest.approx(0.1 * layer_grid.fields[0].max())

    def test_two_layer_opacity_schedule(self, layer_grid):
        meshes = extract_layers(layer_grid, 0, layers=2, base_opacity=0.5)
        assert [m.opacity for m in meshes] == [0.25, 0.5]

    def test_iso_schedule_linear(self, layer_grid):
        fmax = layer_grid.fields[0].max()
        meshes = extract_layers(layer_grid, 0, layers=3, base_opacity=1.0, tau_out=0.1 * fmax)
        np.testing.assert_allclose(
            [m.iso for m in meshes], np.linspace(0.1 * fmax, 0.5 * fmax, 3)
        )

    def test_nested_containment(self, layer_grid):
        # [DERIVED] every inner-layer vertex lies inside the outermost surface
        meshes = extract_layers(layer_grid, 0, layers=3, base_opacity=1.0)
        iso0 = meshes[0].iso
        for mesh in meshes[1:]:
            density = trilinear_sample(layer_grid.fields[0], layer_grid.spec, mesh.vertices)
            assert (density >= iso0 - 1e-6).all()

    def test_coinciding_layers_rejected(self, layer_grid):
        fmax = layer_grid.fields[0].max()
        with pytest.raises(MeshError, match="coincide"):
            extract_layers(layer_grid, 0, layers=2, base_opacity=1.0, tau_out=0.6 * fmax)

    def test_all_layers_watertight(self, layer_grid):
        for mesh in extract_layers(layer_grid, 0, layers=3, base_opacity=1.0):
            if mesh.n_triangles:
                assert_watertight(mesh)


class TestFieldNormals:
    def test_planar_ramp_normals(self):
        # half-space field decreasing along +x: outward normal is +x everywhere
        field, spec, _, _ = sphere_field(resolution=24)
        n = field.shape[0]
        ramp = np.zeros_like(field)
        x = np.arange(n, dtype=float)
        ramp += np.maximum(0.0, (n / 2 - x))[:, None, None]
        ramp[0] = ramp[-1] = 0
        mesh = extract_surface(grid_from_field(ramp, spec), 0, n / 4)
        # skip the back cap near x = 0 whose outward normal points along -x
        interior = mesh.vertices[:, 0] > 2 * spec.spacing
        normals = mesh.normals[interior]
        angles = np.degrees(np.arccos(np.clip(normals @ np.array([1.0, 0, 0]), -1, 1)))
        assert (angles <= 1.0).all()

    def test_unit_length(self, sphere_mesh):
        mesh = sphere_mesh[0]
        np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-9)

    def test_degenerate_gradient_fallback(self):
        # constant field has zero gradient; fall back to triangle normals
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        tris = np.array([[0, 1, 2]], dtype=np.int32)
        field, spec, _, _ = sphere_field(resolution=16)
        flat = np.full_like(field, 2.0)
        normals = field_normals(verts, tris, flat, spec)
        np.testing.assert_allclose(np.abs(normals[:, 2]), 1.0, atol=1e-9)


def test_marching_tetrahedra_on_random_blobs():
    rng = np.random.default_rng(17)
    for trial in range(3):
        ds = blob_dataset(100 + trial, n_per_cluster=150, n_clusters=2)
        cloud = project(ds, axis_basis(0, 1, 2, ds.n_dims))
        spec = grid_spec_for(cloud, 24)
        grid = box_filter(splat(cloud, spec))
        for cid in (0, 1):
            mesh = extract_surface(grid, cid, 0.15 * grid.fields[cid].max())
            assert_watertight(mesh)
