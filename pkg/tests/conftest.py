import io

import numpy as np
import pytest
from sklearn.datasets import load_iris

import subspace_shapes as ss
from subspace_shapes.pipeline import SceneParams, SceneState
from subspace_shapes.voxel import GridSpec


def iris_csv_bytes() -> bytes:
    iris = load_iris()
    names = ["setosa", "versicolor", "virginica"]
    buf = io.StringIO()
    buf.write("sepal_length,sepal_width,petal_length,petal_width,class\n")
    for row, target in zip(iris.data, iris.target):
        buf.write(",".join(f"{x:g}" for x in row) + f",{names[target]}\n")
    return buf.getvalue().encode()


@pytest.fixture(scope="session")
def iris_csv() -> bytes:
    return iris_csv_bytes()


@pytest.fixture(scope="session")
def iris_dataset(iris_csv) -> ss.Dataset:
    return ss.normalize_columns(ss.load_table(iris_csv, "class"))


@pytest.fixture(scope="session")
def iris_scene(iris_dataset) -> SceneState:
    state = SceneState(
        iris_dataset,
        ss.axis_basis(0, 1, 2, iris_dataset.n_dims),
        SceneParams(mode="shape"),
    )
    state.build()
    return state


def blob_dataset(
    seed: int, n_per_cluster: int = 100, n_clusters: int = 3, n_dims: int = 5, spread: float = 0.06
) -> ss.Dataset:
    """Seeded Gaussian blobs in the unit cube, normalized."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.25, 0.75, (n_clusters, n_dims))
    values = np.concatenate(
        [c + rng.normal(0, spread, (n_per_cluster, n_dims)) for c in centers]
    )
    labels = np.repeat(np.arange(n_clusters), n_per_cluster)
    ds = ss.Dataset(
        [f"dim{i}" for i in range(n_dims)], values, labels, np.arange(len(values))
    )
    return ss.normalize_columns(ds)


def sales_scale_dataset(seed: int = 7) -> ss.Dataset:
    """900 points, 10 attributes, 3 clusters (sales-campaign scale)."""
    return blob_dataset(seed, n_per_cluster=300, n_clusters=3, n_dims=10, spread=0.07)


def sphere_field(resolution: int = 64, radius_voxels: float | None = None):
    """Analytic field 2R - |x - c| on a cubic grid; iso R is a radius-R sphere.

    Returns (field, spec, center, radius). The field is clamped at zero well
    outside the sphere so the boundary shell stays empty.
    """
    n = resolution + 9  # margin so the shell is far from the surface
    spacing = 1.0 / resolution
    spec = GridSpec(resolution=(n, n, n), origin=np.zeros(3), spacing=spacing, pad_voxels=1)
    radius = (radius_voxels if radius_voxels is not None else resolution * 0.3) * spacing
    center = np.full(3, (n - 1) / 2 * spacing)
    ax = np.arange(n) * spacing
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    dist = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2)
    field = np.maximum(2 * radius - dist, 0.0)
    return field, spec, center, radius


def edge_use_counts(triangles: np.ndarray) -> np.ndarray:
    edges = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    edges = np.sort(edges, axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    return counts


def assert_watertight(mesh):
    assert mesh.n_triangles > 0
    counts = edge_use_counts(mesh.triangles)
    assert counts.min() == 2 and counts.max() == 2
    tris = mesh.triangles
    # no corner repeats a vertex id (zero-area slivers are allowed, they
    # keep the surface closed where the iso level grazes a grid vertex)
    assert (tris[:, 0] != tris[:, 1]).all()
    assert (tris[:, 1] != tris[:, 2]).all()
    assert (tris[:, 0] != tris[:, 2]).all()
