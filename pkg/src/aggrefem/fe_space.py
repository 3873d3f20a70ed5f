# -*- coding: utf-8 -*-

"""
P1 finite element algebra on a Mesh.

Lumped products, stiffness and weighted operators, nodal interpolation,
truncation and norms. Every assembled operator is a scipy CSR matrix with
rows indexed by the test function and columns by the trial function.
"""
import logging
import math

from dataclasses import dataclass
from typing import Callable
from typing import NamedTuple
from typing import Optional

import numpy as np

from scipy import sparse

from .exceptions import BoundsOverflowError
from .exceptions import FieldError
from .exceptions import MeshError
from .laws import DiffusionLaw
from .mesh import Mesh

log = logging.getLogger('aggrefem.fe_space')


@dataclass(frozen=True, eq=False)
class NodalField:
    """One finite value per mesh node, bound to its mesh by identity"""
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise FieldError(
                f"field has shape {values.shape}, mesh has {self.mesh.n_nodes} nodes"
            )
        if not np.isfinite(values).all():
            raise FieldError("field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, mesh: Mesh) -> 'NodalField':
        return cls(mesh, np.zeros(mesh.n_nodes))

    def with_values(self, values) -> 'NodalField':
        return NodalField(self.mesh, values)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class LumpedMass:
    """Nodal weights m_a = int phi_a"""
    values: np.ndarray

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def as_matrix(self) -> sparse.csr_matrix:
        return sparse.diags(self.values, format='csr')


@dataclass(frozen=True)
class TruncationBounds:
    """Nodal cap B of the truncation operator"""
    B: float

    def __post_init__(self):
        if not (self.B >= 0 and math.isfinite(self.B)):
            raise FieldError(f"truncation bound must be finite and >= 0, got {self.B}")


class Norms(NamedTuple):
    lumped_L2: float
    L2: float
    L1_lumped: float
    Linf_nodal: float
    mass_integral: float


def _check_same_mesh(field: NodalField, mesh: Mesh):
    if field.mesh is not mesh:
        raise FieldError("field is bound to a different mesh")


def _assemble(mesh: Mesh, local: np.ndarray) -> sparse.csr_matrix:
    """Sum element matrices local[e, a, b] into a global CSR matrix"""
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    n = mesh.n_nodes
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def lumped_mass(mesh: Mesh) -> LumpedMass:
    """m_a = sum of area(E) / 3 over the elements around node a"""
    weights = np.repeat(mesh.geometry.area / 3.0, 3)
    values = np.bincount(mesh.elements.ravel(), weights=weights, minlength=mesh.n_nodes)
    values.flags.writeable = False
    return LumpedMass(values)


def stiffness(mesh: Mesh) -> sparse.csr_matrix:
    """S[a, b] = int grad phi_a . grad phi_b"""
    geo = mesh.geometry
    local = geo.area[:, None, None] * np.einsum('eak,ebk->eab', geo.grad_basis, geo.grad_basis)
    return _assemble(mesh, local)


def element_gradients(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Constant gradient of the P1 interpolant on each element, shape (M, 2)"""
    # vertex differences: constants give an exact zero gradient
    local = np.asarray(values)[mesh.elements]
    return np.einsum('ei,eik->ek', local[:, 1:] - local[:, :1], mesh.geometry.grad_basis[:, 1:])


def truncate(field: NodalField, bounds: TruncationBounds) -> NodalField:
    """Nodal truncation [v]_T: clamp every value to [0, B]"""
    return field.with_values(np.clip(field.values, 0.0, bounds.B))


def compute_B_Linf(kernel, rho0: NodalField, T: float, mass: Optional[LumpedMass] = None) -> TruncationBounds:
    """
    B = exp(T * ||Lap K||_inf * ||rho0||_L1) * ||rho0||_Linf.

    Raises:
        ValueError: for negative T
        FieldError: if rho0 has negative values
        BoundsOverflowError: if B does not fit in a float
    """
    if T < 0:
        raise ValueError(f"final time must be >= 0, got {T}")
    if rho0.min < 0:
        raise FieldError(f"initial density must be nonnegative, min is {rho0.min:g}")
    if mass is None:
        mass = lumped_mass(rho0.mesh)

    l1 = float(np.dot(mass.values, rho0.values))
    linf = rho0.max
    if linf == 0.0:
        return TruncationBounds(0.0)
    try:
        growth = math.exp(T * kernel.norms().sup_lapK * l1)
    except OverflowError:
        raise BoundsOverflowError(
            f"B_Linf overflows: exponent {T * kernel.norms().sup_lapK * l1:.6g}"
        ) from None
    bound = growth * linf
    if not math.isfinite(bound):
        raise BoundsOverflowError(f"B_Linf overflows: {growth:g} * {linf:g}")
    return TruncationBounds(bound)


def nodal_map(field: NodalField, f: Callable) -> NodalField:
    """
    Apply f node by node; for P1 this is the nodal interpolant I_h f(v).

    Raises:
        FieldError: if f produces non-finite values
    """
    try:
        mapped = np.asarray(f(field.values), dtype=float)
    except (TypeError, ValueError):
        mapped = None
    if mapped is None or mapped.shape != field.values.shape:
        mapped = np.fromiter((f(v) for v in field.values), dtype=float, count=len(field.values))
    if not np.isfinite(mapped).all():
        bad = np.flatnonzero(~np.isfinite(mapped))
        raise FieldError(f"nodal map produced non-finite values at nodes {bad[:10].tolist()}")
    return field.with_values(mapped)


def consistent_l2(mesh: Mesh, values: np.ndarray) -> float:
    """Exact L2 norm of the P1 interpolant"""
    v = np.asarray(values)[mesh.elements]
    local = (mesh.geometry.area / 12.0) * (v.sum(axis=1) ** 2 + (v ** 2).sum(axis=1))
    return math.sqrt(max(float(local.sum()), 0.0))


def norms(field: NodalField, mass: LumpedMass) -> Norms:
    if len(mass.values) != len(field.values):
        raise FieldError("lumped mass and field belong to different meshes")
    v = field.values
    return Norms(
        lumped_L2=math.sqrt(float(np.dot(mass.values, v * v))),
        L2=consistent_l2(field.mesh, v),
        L1_lumped=float(np.dot(mass.values, np.abs(v))),
        Linf_nodal=float(np.abs(v).max()),
        mass_integral=float(np.dot(mass.values, v)),
    )


def dirichlet_energy(S: sparse.spmatrix, values: np.ndarray) -> float:
    """||grad v||^2 = v^T S v"""
    values = np.asarray(values)
    return float(values @ (S @ values))


def _secant_coefficients(mesh: Mesh, values: np.ndarray, law: DiffusionLaw) -> np.ndarray:
    geo = mesh.geometry
    grad = element_gradients(mesh, values)
    center = values[mesh.elements].mean(axis=1)
    v0 = center + ((geo.incenter - geo.barycenter) * grad).sum(axis=1)
    a0 = law(v0)
    offset = 0.5 * geo.inradius

    coefficients = np.zeros((mesh.n_elements, 2))
    for j in range(2):
        shift = geo.incenter - geo.barycenter
        shift[:, j] += offset
        inside = 1.0 / 3.0 + np.einsum('eik,ek->ei', geo.grad_basis, shift)
        if (inside <= 0).any():
            bad = np.flatnonzero((inside <= 0).any(axis=1))
            raise MeshError(f"secant sample point outside elements {bad[:10].tolist()}")

        vj = v0 + offset * grad[:, j]
        dv = vj - v0
        moved = dv != 0.0
        coefficients[moved, j] = (law(vj[moved]) - a0[moved]) / dv[moved]

    if law.monotone:
        np.maximum(coefficients, 0.0, out=coefficients)
    return coefficients


def assemble_secant_diffusion(mesh: Mesh, field: NodalField, law: DiffusionLaw) -> sparse.csr_matrix:
    """
    Matrix of u -> (D(field) grad u, grad .) with the per-element diagonal
    secant matrix D sampled at the incenter and at incenter + (r_E / 2) e_j.
    """
    _check_same_mesh(field, mesh)
    geo = mesh.geometry
    coefficients = _secant_coefficients(mesh, field.values, law)
    local = geo.area[:, None, None] * np.einsum(
        'eak,ebk,ek->eab', geo.grad_basis, geo.grad_basis, coefficients
    )
    return _assemble(mesh, local)


def assemble_convection(mesh: Mesh, w: NodalField) -> sparse.csr_matrix:
    """
    C[a, b] = sum_E int_E phi_b (grad w . grad phi_a).

    Rows are test indices, so the column sums vanish and testing with the
    constant function annihilates the term.
    """
    _check_same_mesh(w, mesh)
    geo = mesh.geometry
    flux = np.einsum('eak,ek->ea', geo.grad_basis, element_gradients(mesh, w.values))
    flux *= (geo.area / 3.0)[:, None]
    local = np.repeat(flux[:, :, None], 3, axis=2)
    return _assemble(mesh, local)


def monotone_gradient_gap(mesh: Mesh, rho: NodalField, f: Callable, lipschitz: float) -> np.ndarray:
    """
    Per-element |grad I_h f(rho)|^2 - L * grad rho . grad I_h f(rho).

    Nonpositive (up to roundoff) when f is monotone with Lipschitz constant L.
    """
    mapped = nodal_map(rho, f).values
    grad_f = element_gradients(mesh, mapped)
    grad_rho = element_gradients(mesh, rho.values)
    return (grad_f ** 2).sum(axis=1) - lipschitz * (grad_rho * grad_f).sum(axis=1)
