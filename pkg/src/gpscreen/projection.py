"""Seeded Gaussian random projection for high-dimensional molecule features.

Maps d-dimensional feature vectors to m dimensions (m <= d) with an m x d
matrix of i.i.d. N(0, 1/m) entries, which approximately preserves pairwise
distances (Johnson-Lindenstrauss).  Entries come from numpy's PCG64
generator via its ziggurat ``standard_normal``, so a matrix is fully
reproducible from ``(d, m, seed)`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InputError


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """An immutable m x d Gaussian projection, determined by (m, d, seed)."""

    m: int
    d: int
    seed: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.m, self.d):
            raise InputError(f"matrix shape {self.matrix.shape} != ({self.m}, {self.d})")


def build_projection(d: int, m: int, seed: int) -> ProjectionMatrix:
    """Build the projection for source dimension d, target dimension m.

    Entries are drawn N(0, 1/m) so that E||Px||^2 = ||x||^2.
    """
    if m < 1 or m > d:
        raise InputError(f"target dimension must satisfy 1 <= m <= d, got m={m}, d={d}")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((m, d)) / np.sqrt(m)
    matrix.setflags(write=False)
    return ProjectionMatrix(m=int(m), d=int(d), seed=int(seed), matrix=matrix)


def apply_projection(proj: ProjectionMatrix, x) -> np.ndarray:
    """Project one vector (d,) -> (m,) or a stack (N, d) -> (N, m)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.size != proj.d:
            raise InputError(f"vector has dimension {arr.size}, projection expects {proj.d}")
        return proj.matrix @ arr
    if arr.ndim == 2:
        if arr.shape[1] != proj.d:
            raise InputError(f"rows have dimension {arr.shape[1]}, projection expects {proj.d}")
        return arr @ proj.matrix.T
    raise InputError(f"expected a vector or matrix, got ndim={arr.ndim}")


def project_dataset(dataset: Dataset, m: int, seed: int) -> Dataset:
    """Project every feature vector of a dataset; ids and targets unchanged."""
    proj = build_projection(dataset.features.shape[1], m, seed)
    return Dataset(
        name=dataset.name,
        ids=dataset.ids,
        features=apply_projection(proj, dataset.features),
        targets=dataset.targets,
        provenance="projected",
        y_range=dataset.y_range,
    )
