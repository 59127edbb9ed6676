"""Orthonormal 3D bases over the D-dimensional data space and projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

ORTHO_TOL = 1e-9


class BasisError(ValueError):
    """Raised when a basis cannot be constructed or validated."""


@dataclass(frozen=True)
class Basis3:
    """Three orthonormal D-dimensional row vectors defining a 3D subspace."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def n_dims(self) -> int:
        return self.u.shape[0]

    def rows(self) -> np.ndarray:
        """Stacked (3, D) projection matrix."""
        return np.stack([self.u, self.v, self.w])

    def validate(self, tol: float = ORTHO_TOL) -> None:
        rows = self.rows()
        gram = rows @ rows.T
        if np.max(np.abs(gram - np.eye(3))) >= tol:
            raise BasisError("basis rows are not orthonormal")


@dataclass(frozen=True)
class PointCloud3:
    """Projected positions with carried-through labels and point ids."""

    positions: np.ndarray
    labels: np.ndarray
    point_ids: np.ndarray

    @property
    def n_points(self) -> int:
        return self.positions.shape[0]


def axis_basis(i: int, j: int, k: int, n_dims: int) -> Basis3:
    """Basis of standard unit vectors e_i, e_j, e_k."""
    idx = (i, j, k)
    if len(set(idx)) != 3:
        raise BasisError(f"duplicate dimension index in {idx}")
    if any(d < 0 or d >= n_dims for d in idx):
        raise BasisError(f"dimension index out of range for D={n_dims}: {idx}")
    eye = np.eye(n_dims)
    return Basis3(eye[i].copy(), eye[j].copy(), eye[k].copy())


def orthonormalize(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Basis3:
    """Modified Gram-Schmidt on three D-vectors spanning the same 3-space."""
    rows = [np.asarray(x, dtype=np.float64).copy() for x in (a, b, c)]
    out = []
    for r in rows:
        for q in out:
            r = r - (r @ q) * q
        norm = np.linalg.norm(r)
        if norm < ORTHO_TOL:
            raise BasisError("rank-deficient input: vectors are not linearly independent")
        out.append(r / norm)
    return Basis3(out[0], out[1], out[2])


def project(dataset: Dataset, basis: Basis3) -> PointCloud3:
    """Project every data row onto (u, v, w)."""
    if dataset.n_dims != basis.n_dims:
        raise BasisError(
            f"dimension mismatch: dataset has {dataset.n_dims}, basis has {basis.n_dims}"
        )
    positions = dataset.values @ basis.rows().T
    return PointCloud3(positions, dataset.labels.copy(), dataset.point_ids.copy())


def rotate_basis(basis: Basis3, rot: np.ndarray) -> Basis3:
    """Apply a 3x3 rotation to the stacked rows, then re-orthonormalize."""
    rot = np.asarray(rot, dtype=np.float64)
    if rot.shape != (3, 3):
        raise BasisError("rotation must be a 3x3 matrix")
    if np.max(np.abs(rot @ rot.T - np.eye(3))) >= ORTHO_TOL or not np.isclose(
        np.linalg.det(rot), 1.0, atol=1e-6
    ):
        raise BasisError("matrix is not a proper rotation")
    new_rows = rot @ basis.rows()
    return orthonormalize(new_rows[0], new_rows[1], new_rows[2])


def transition_basis(basis: Basis3, slot: str, target: np.ndarray, t: float) -> Basis3:
    """Blend one basis row toward a target direction.

    The target is first orthogonalized against the two kept rows; the chosen
    row is replaced by the normalized blend (1-t)*row + t*target_perp and the
    triple re-orthonormalized. t=0 reproduces the input basis.
    """
    slots = {"u": 0, "v": 1, "w": 2}
    if slot not in slots:
        raise BasisError(f"unknown slot {slot!r}, expected one of u/v/w")
    if not 0.0 <= t <= 1.0:
        raise BasisError("t must lie in [0, 1]")
    rows = basis.rows().copy()
    s = slots[slot]
    kept = [rows[i] for i in range(3) if i != s]
    target = np.asarray(target, dtype=np.float64)
    perp = target - sum((target @ q) * q for q in kept)
    norm = np.linalg.norm(perp)
    if norm < ORTHO_TOL:
        raise BasisError("degenerate target: lies inside the span of the kept rows")
    perp /= norm
    blended = (1.0 - t) * rows[s] + t * perp
    if np.linalg.norm(blended) < ORTHO_TOL:
        raise BasisError("degenerate blend: replaced row vanished")
    rows[s] = blended / np.linalg.norm(blended)
    # Orthonormalize starting from the replaced row so it survives verbatim.
    order = [s] + [i for i in range(3) if i != s]
    ortho = orthonormalize(rows[order[0]], rows[order[1]], rows[order[2]])
    ortho_rows = ortho.rows()
    inverse = np.argsort(order)
    final = ortho_rows[inverse]
    return Basis3(final[0], final[1], final[2])


def dimension_influence(basis: Basis3) -> np.ndarray:
    """Per-dimension weight sqrt(u_d^2 + v_d^2 + w_d^2), clamped to [0, 1]."""
    rows = basis.rows()
    return np.clip(np.sqrt((rows**2).sum(axis=0)), 0.0, 1.0)
