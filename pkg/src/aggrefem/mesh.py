# -*- coding: utf-8 -*-

"""
Structured acute triangulations of rectangles.

Every cell of an n x n grid of macroelements is split into 14 acute
triangles: 4 corners, 4 edge midpoints and 4 interior nodes per cell,
with the interior quadrilateral cut along its short diagonal and a ring
of 12 triangles between it and the cell boundary.
"""
import logging
import math

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple
from typing import Sequence

import numpy as np

from scipy import sparse

from .exceptions import MeshError
from .exceptions import MeshQualityError

log = logging.getLogger('aggrefem.mesh')

# Macro nodes on a 10 x 10 integer lattice so shared nodes deduplicate exactly.
_LATTICE = 10
_MACRO_NODES = np.array([
    (0, 0), (5, 0), (10, 0), (10, 5), (10, 10), (5, 10), (0, 10), (0, 5),
    (3, 3), (6, 4), (7, 7), (4, 6),
], dtype=np.int64)
_MACRO_TRIANGLES = np.array([
    # outer ring, one triangle per boundary half-edge
    (0, 1, 8), (1, 2, 9), (2, 3, 9), (3, 4, 10),
    (4, 5, 10), (5, 6, 11), (6, 7, 11), (7, 0, 8),
    # one triangle per edge of the inner quadrilateral
    (1, 9, 8), (3, 10, 9), (5, 11, 10), (7, 8, 11),
    # inner quadrilateral, split along its short diagonal
    (8, 9, 11), (10, 11, 9),
], dtype=np.int64)


class Rectangle(NamedTuple):
    """Axis-aligned rectangle [x_min, x_max] x [y_min, y_max]"""
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


class AcutenessReport(NamedTuple):
    max_angle: float
    beta: float
    ok: bool


class MeshConstants(NamedTuple):
    c_neg_lower: float
    shape_reg: float
    quasi_unif: float


@dataclass(frozen=True, eq=False)
class ElementGeometry:
    """
    Per-element P1 geometry cache.

    grad_basis[e, i] is the constant gradient of the hat function of the
    i-th vertex of element e.
    """
    area: np.ndarray
    barycenter: np.ndarray
    incenter: np.ndarray
    inradius: np.ndarray
    grad_basis: np.ndarray
    diameter: np.ndarray


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Conforming triangulation with counter-clockwise elements.

    Arrays are read-only; a Mesh can be shared between workers.
    """
    nodes: np.ndarray
    elements: np.ndarray
    boundary_node_flags: np.ndarray
    geometry: ElementGeometry
    h: float

    @classmethod
    def from_arrays(cls, nodes, elements) -> 'Mesh':
        """
        Build a mesh from coordinates and connectivity.

        Raises:
            MeshError: on bad shapes, invalid or repeated node indices,
                or elements with non-positive signed area
        """
        nodes = np.array(nodes, dtype=float)
        elements = np.array(elements, dtype=np.int64)

        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise MeshError(f"nodes must have shape (N, 2), got {nodes.shape}")
        if elements.ndim != 2 or elements.shape[1] != 3 or len(elements) == 0:
            raise MeshError(f"elements must have shape (M, 3), got {elements.shape}")
        if elements.min() < 0 or elements.max() >= len(nodes):
            raise MeshError("element refers to a node index out of range")

        repeated = ((elements[:, 0] == elements[:, 1])
                    | (elements[:, 1] == elements[:, 2])
                    | (elements[:, 0] == elements[:, 2]))
        if repeated.any():
            raise MeshError(f"elements with repeated nodes: {np.flatnonzero(repeated)[:10].tolist()}")

        geometry = _element_geometry(nodes, elements)
        boundary = _boundary_flags(len(nodes), elements)

        for array in (nodes, elements, boundary, *vars(geometry).values()):
            array.flags.writeable = False

        return cls(
            nodes=nodes,
            elements=elements,
            boundary_node_flags=boundary,
            geometry=geometry,
            h=float(geometry.diameter.max()),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def area(self) -> float:
        return float(self.geometry.area.sum())

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted node pairs"""
        keys = np.unique(_edge_keys(self.n_nodes, self.elements))
        return np.stack([keys // self.n_nodes, keys % self.n_nodes], axis=1)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric node-to-node edge adjacency"""
        a, b = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        data = np.ones(len(rows), dtype=bool)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def euler_characteristic(self) -> int:
        """V - E + T, equal to 1 for a triangulated simply connected region"""
        return self.n_nodes - len(self.edges) + self.n_elements

    def angles(self) -> np.ndarray:
        """Interior angles (radians), shape (M, 3), angle i sits at vertex i"""
        p = self.nodes[self.elements]
        result = np.empty((self.n_elements, 3))
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            dot = (u * v).sum(axis=1)
            result[:, i] = np.arctan2(np.abs(cross), dot)
        return result


def _edge_keys(n_nodes: int, elements: np.ndarray) -> np.ndarray:
    pairs = np.concatenate([elements[:, [0, 1]], elements[:, [1, 2]], elements[:, [2, 0]]])
    pairs.sort(axis=1)
    return pairs[:, 0] * n_nodes + pairs[:, 1]


def _boundary_flags(n_nodes: int, elements: np.ndarray) -> np.ndarray:
    keys, counts = np.unique(_edge_keys(n_nodes, elements), return_counts=True)
    if (counts > 2).any():
        raise MeshError("non-manifold edge shared by more than two elements")
    outer = keys[counts == 1]
    flags = np.zeros(n_nodes, dtype=bool)
    flags[outer // n_nodes] = True
    flags[outer % n_nodes] = True
    return flags


def _element_geometry(nodes: np.ndarray, elements: np.ndarray) -> ElementGeometry:
    p = nodes[elements]
    x, y = p[..., 0], p[..., 1]

    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    if (det <= 0).any():
        bad = np.flatnonzero(det <= 0)
        raise MeshError(f"elements with non-positive signed area: {bad[:10].tolist()}")

    gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / det[:, None]
    gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / det[:, None]

    # side i is opposite vertex i
    sides = np.stack([
        np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
        np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
        np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
    ], axis=1)
    perimeter = sides.sum(axis=1)

    return ElementGeometry(
        area=0.5 * det,
        barycenter=p.mean(axis=1),
        incenter=(sides[:, :, None] * p).sum(axis=1) / perimeter[:, None],
        inradius=det / perimeter,
        grad_basis=np.stack([gx, gy], axis=2),
        diameter=sides.max(axis=1),
    )


def build_structured_acute_mesh(domain: Sequence[float], n_square: int) -> Mesh:
    """
    Split a rectangle into n_square x n_square macro cells of 14 acute triangles.

    Nodes are ordered lexicographically by (y, x). The result is certified
    with verify_acuteness before it is returned.

    Args:
        domain: (x_min, x_max, y_min, y_max)
        n_square: number of macro cells per side

    Returns:
        Mesh with 14 * n_square**2 elements

    Raises:
        MeshError: on a degenerate rectangle or n_square < 1
        MeshQualityError: if the stretched pattern is not strictly acute
    """
    rect = Rectangle(*map(float, domain))
    if not (rect.width > 0 and rect.height > 0):
        raise MeshError(f"rectangle must have positive width and height, got {tuple(rect)}")
    if isinstance(n_square, bool) or int(n_square) != n_square or n_square < 1:
        raise MeshError(f"n_square must be a positive integer, got {n_square!r}")
    n = int(n_square)

    cols, rows = np.meshgrid(np.arange(n, dtype=np.int64), np.arange(n, dtype=np.int64))
    origins = _LATTICE * np.stack([cols.ravel(), rows.ravel()], axis=1)
    lattice = (origins[:, None, :] + _MACRO_NODES[None, :, :]).reshape(-1, 2)

    # unique over (iy, ix) rows yields the (y, x) lexicographic order
    keys, inverse = np.unique(lattice[:, ::-1], axis=0, return_inverse=True)
    inverse = inverse.reshape(n * n, len(_MACRO_NODES))
    elements = inverse[:, _MACRO_TRIANGLES].reshape(-1, 3)

    scale = _LATTICE * n
    nodes = np.empty((len(keys), 2))
    nodes[:, 0] = rect.x_min + rect.width * (keys[:, 1] / scale)
    nodes[:, 1] = rect.y_min + rect.height * (keys[:, 0] / scale)

    mesh = Mesh.from_arrays(nodes, elements)
    report = verify_acuteness(mesh)
    if not report.ok:
        raise MeshQualityError(
            f"macro pattern on {rect.width:g} x {rect.height:g} with n={n} is not acute: "
            f"max angle {math.degrees(report.max_angle):.4f} deg"
        )

    log.info(
        "built mesh: %d nodes, %d elements, h=%.6g, beta=%.4f rad",
        mesh.n_nodes, mesh.n_elements, mesh.h, report.beta,
    )
    return mesh


def verify_acuteness(mesh: Mesh) -> AcutenessReport:
    """Largest interior angle and the margin beta = pi/2 - max_angle"""
    max_angle = float(mesh.angles().max())
    beta = 0.5 * math.pi - max_angle
    return AcutenessReport(max_angle=max_angle, beta=beta, ok=beta > 0)


def estimate_mesh_constants(mesh: Mesh) -> MeshConstants:
    """
    Empirical constants of the acute, shape-regular, quasi-uniform family.

    c_neg_lower is the smallest of -int_E grad phi_i . grad phi_j (i != j)
    and int_E |grad phi_i|^2 over all elements; in 2D the h^(2-d) factor is 1.
    """
    geo = mesh.geometry
    local = geo.area[:, None, None] * np.einsum('eik,ejk->eij', geo.grad_basis, geo.grad_basis)
    off = np.array([(0, 1), (1, 2), (0, 2)])
    coupling = -local[:, off[:, 0], off[:, 1]]
    diagonal = local[:, [0, 1, 2], [0, 1, 2]]

    return MeshConstants(
        c_neg_lower=float(min(coupling.min(), diagonal.min())),
        shape_reg=float((2.0 * geo.inradius).min() / mesh.h),
        quasi_unif=float(geo.diameter.max() / geo.diameter.min()),
    )
