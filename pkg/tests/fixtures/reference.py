"""
Reference oracles: naive convolution loops, a 7-point quadrature reference
and a node lookup by coordinates.
"""
import math

from typing import Callable

import numpy as np

# degree-5 rule on triangles: barycentric points and weights summing to 1
_A1, _B1, _W1 = 0.059715871789770, 0.470142064105115, 0.132394152788506
_A2, _B2, _W2 = 0.797426985353087, 0.101286507323456, 0.125939180544827
QUADRATURE_7 = (
    np.array([
        (1 / 3, 1 / 3, 1 / 3),
        (_A1, _B1, _B1), (_B1, _A1, _B1), (_B1, _B1, _A1),
        (_A2, _B2, _B2), (_B2, _A2, _B2), (_B2, _B2, _A2),
    ]),
    np.array([0.225, _W1, _W1, _W1, _W2, _W2, _W2]),
)


def brute_force_convolution(mesh, values, kernel_fn: Callable[[float, float], float]) -> np.ndarray:
    """Plain double loop over nodes and elements, barycenter rule"""
    out = np.zeros(mesh.n_nodes)
    for a in range(mesh.n_nodes):
        xa, ya = mesh.nodes[a]
        total = 0.0
        for e in range(mesh.n_elements):
            i, j, k = mesh.elements[e]
            (x0, y0), (x1, y1), (x2, y2) = mesh.nodes[i], mesh.nodes[j], mesh.nodes[k]
            area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
            bx, by = (x0 + x1 + x2) / 3.0, (y0 + y1 + y2) / 3.0
            rho_b = (values[i] + values[j] + values[k]) / 3.0
            total += kernel_fn(xa - bx, ya - by) * rho_b * area
        out[a] = total
    return out


def quadrature_convolution(mesh, rho_fn: Callable, kernel, point) -> float:
    """(K * rho)(point) with the exact density and 7 points per triangle"""
    bary, weights = QUADRATURE_7
    corners = mesh.nodes[mesh.elements]
    points = np.einsum('qi,eik->eqk', bary, corners)
    x = points[..., 0]
    y = points[..., 1]
    integrand = kernel.eval(np.stack([point[0] - x, point[1] - y], axis=-1)) * rho_fn(x, y)
    return float((mesh.geometry.area[:, None] * weights[None, :] * integrand).sum())


def node_index(mesh, point) -> int:
    distance = np.hypot(mesh.nodes[:, 0] - point[0], mesh.nodes[:, 1] - point[1])
    index = int(np.argmin(distance))
    if not math.isclose(distance[index], 0.0, abs_tol=1e-12):
        raise ValueError(f"{point} is not a mesh node")
    return index

