# -*- coding: utf-8 -*-

"""
Radial interaction kernels and the direct-sum convolution at mesh nodes.

The convolution is the midpoint rule over elements,

    (K * rho)(a) ~ sum_E K(a - b_E) rho(b_E) |E|,

with rho(b_E) the P1 value at the barycenter. The outer loop over nodes runs
on the numba thread pool; the inner sum always runs in element order, so the
result does not depend on the number of threads.
"""
import functools
import logging
import math

from typing import Callable
from typing import NamedTuple
from typing import Optional
from typing import Sequence

import numba
import numpy as np

from .exceptions import FieldError
from .exceptions import KernelError
from .fe_space import NodalField
from .mesh import Mesh
from .workers import worker_threads

log = logging.getLogger('aggrefem.interaction')


class KernelNorms(NamedTuple):
    sup_K: float
    sup_gradK: float
    sup_lapK: float

    @property
    def w2inf(self) -> float:
        """||K||_{W^{2,inf}} taken as the largest of the three sup norms"""
        return max(self.sup_K, self.sup_gradK, self.sup_lapK)


def _gaussian_profile(s2, params):
    return params[0] * np.exp(-params[1] * s2)


def _zero_profile(s2, params):
    return 0.0 * s2


@functools.lru_cache(maxsize=None)
def _direct_sum_for(profile_sq: Callable) -> Callable:
    kernel_sq = numba.njit(profile_sq)

    @numba.njit(parallel=True)
    def direct_sum(points, centers, weights, params):
        n_points = points.shape[0]
        out = np.zeros(n_points)
        for a in numba.prange(n_points):
            xa = points[a, 0]
            ya = points[a, 1]
            acc = 0.0
            for e in range(centers.shape[0]):
                w = weights[e]
                if w != 0.0:
                    dx = xa - centers[e, 0]
                    dy = ya - centers[e, 1]
                    acc += kernel_sq(dx * dx + dy * dy, params) * w
            out[a] = acc
        return out

    return direct_sum


class RadialKernel:
    """
    K(x) = r(|x|) given through its squared-radius profile.

    profile_sq(s2, params) must be written with numpy operations only so the
    same function serves vectorised evaluation and the compiled sum.
    """

    name = 'radial'

    def __init__(self, profile_sq: Callable, params: Sequence[float], norms: KernelNorms):
        self._profile_sq = profile_sq
        self.params = np.asarray(params, dtype=float)
        self._norms = KernelNorms(*map(float, norms))

    def profile(self, s):
        """Radial profile r(s), s >= 0"""
        s = np.asarray(s, dtype=float)
        return self._profile_sq(s * s, self.params)

    def eval(self, x):
        """K at offsets x of shape (..., 2)"""
        x = np.asarray(x, dtype=float)
        return self._profile_sq((x * x).sum(axis=-1), self.params)

    def norms(self) -> KernelNorms:
        return self._norms

    @property
    def direct_sum(self) -> Callable:
        return _direct_sum_for(self._profile_sq)

    def __repr__(self):
        return f"{type(self).__name__}(params={self.params.tolist()})"


class GaussianKernel(RadialKernel):
    """
    K(x) = amplitude * exp(-|x|^2 / width^2); the defaults give exp(-|x|^2) / pi.
    """

    name = 'gaussian'

    def __init__(self, amplitude: float = 1.0 / math.pi, width: float = 1.0):
        if not (amplitude >= 0 and math.isfinite(amplitude)):
            raise KernelError(f"amplitude must be finite and >= 0, got {amplitude}")
        if not (width > 0 and math.isfinite(width)):
            raise KernelError(f"width must be finite and > 0, got {width}")
        self.amplitude = float(amplitude)
        self.width = float(width)
        norms = KernelNorms(
            sup_K=self.amplitude,
            # max of 2 s e^{-s^2} at s = 1/sqrt(2), in units of the width
            sup_gradK=self.amplitude * math.sqrt(2.0) * math.exp(-0.5) / self.width,
            # |(4 s^2 - 4) e^{-s^2}| peaks at the origin
            sup_lapK=4.0 * self.amplitude / self.width ** 2,
        )
        super().__init__(_gaussian_profile, (self.amplitude, 1.0 / self.width ** 2), norms)


class ZeroKernel(RadialKernel):
    """K = 0: no interaction"""

    name = 'zero'

    def __init__(self):
        super().__init__(_zero_profile, (0.0,), KernelNorms(0.0, 0.0, 0.0))


def kernel_norms(kernel: RadialKernel) -> KernelNorms:
    return kernel.norms()


def estimate_kernel_norms(kernel: RadialKernel, r_max: float = 10.0, samples: int = 20001) -> KernelNorms:
    """
    Sampled sup |r|, sup |r'| and sup |r'' + r'/s| on [0, r_max].

    In 2D the Laplacian of a radial function is r'' + r'/s, which tends to
    2 r''(0) at the origin.
    """
    s = np.linspace(0.0, r_max, samples)
    r = kernel.profile(s)
    dr = np.gradient(r, s, edge_order=2)
    d2r = np.gradient(dr, s, edge_order=2)

    lap = np.empty_like(s)
    lap[0] = 2.0 * d2r[0]
    lap[1:] = d2r[1:] + dr[1:] / s[1:]

    return KernelNorms(
        sup_K=float(np.abs(r).max()),
        sup_gradK=float(np.abs(dr).max()),
        sup_lapK=float(np.abs(lap).max()),
    )


def check_radial_profile(kernel: RadialKernel, radii: Optional[np.ndarray] = None, directions: int = 8):
    """
    Spot-check the radial, nonincreasing contract.

    Raises:
        KernelError: if the profile increases or eval depends on direction
    """
    if radii is None:
        radii = np.linspace(0.0, 8.0, 801)
    radii = np.asarray(radii, dtype=float)

    profile = kernel.profile(radii)
    if np.any(np.diff(profile) > 1e-15 * max(1.0, float(np.abs(profile).max()))):
        raise KernelError(f"{kernel!r}: profile increases somewhere on [{radii[0]}, {radii[-1]}]")

    theta = np.linspace(0.0, 2.0 * math.pi, directions, endpoint=False)
    offsets = radii[:, None, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)[None, :, :]
    values = kernel.eval(offsets)
    spread = np.abs(values - profile[:, None]).max()
    if spread > 1e-12 * max(1.0, float(np.abs(profile).max())):
        raise KernelError(f"{kernel!r}: not radially symmetric (spread {spread:.3e})")


def convolve_at_nodes(
    mesh: Mesh,
    rho: NodalField,
    kernel: RadialKernel,
    *,
    workers: Optional[int] = None
) -> NodalField:
    """
    Nodal field I_h(K * rho) by barycenter quadrature.

    Args:
        mesh: mesh carrying rho
        rho: density; treated as zero outside the mesh
        kernel: interaction kernel
        workers: numba thread count for this call (None keeps the current one)

    Returns:
        NodalField bound to the same mesh
    """
    if rho.mesh is not mesh:
        raise FieldError("density is bound to a different mesh")

    geo = mesh.geometry
    weights = np.ascontiguousarray(geo.area * rho.values[mesh.elements].mean(axis=1))

    with worker_threads(workers):
        values = kernel.direct_sum(
            np.ascontiguousarray(mesh.nodes),
            np.ascontiguousarray(geo.barycenter),
            weights,
            kernel.params,
        )
    return NodalField(mesh, values)
