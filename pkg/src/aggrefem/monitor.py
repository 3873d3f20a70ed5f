# -*- coding: utf-8 -*-

"""
Run monitors: the discrete energy inequality and peak counting.
"""
import logging
import math

from dataclasses import dataclass
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np

from .fe_space import LumpedMass
from .fe_space import NodalField
from .fe_space import TruncationBounds
from .fe_space import dirichlet_energy
from .fe_space import lumped_mass
from .fe_space import nodal_map
from .fe_space import stiffness
from .mesh import Mesh

log = logging.getLogger('aggrefem.monitor')


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    lhs: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound * (1.0 + 1e-12)


class EnergyMonitor:
    """
    Streams the left-hand side of the energy inequality

        ||rho^n||_h^2 + sum_j ( ||rho^{j+1} - rho^j||_h^2
                               + k h^gamma ||grad rho^{j+1}||^2
                               + k ||grad I_h A_T(rho^{j+1})||^2 )

    against exp(T ||rho^0||_L1 ||K||_W2inf) ||rho^0||_h^2. The bound is
    reported as inf when it does not fit in a float.

    `config` needs k, gamma and t_final.
    """

    def __init__(
        self,
        mesh: Mesh,
        law,
        config,
        *,
        kernel,
        rho0: NodalField,
        mass: Optional[LumpedMass] = None,
        S=None,
        bounds: Optional[TruncationBounds] = None
    ):
        self.mesh = mesh
        self.k = config.k
        self.diffusion_weight = config.k * mesh.h ** config.gamma
        self.law = law.truncated(bounds.B) if bounds is not None else law
        self.mass = lumped_mass(mesh) if mass is None else mass
        self.S = stiffness(mesh) if S is None else S

        initial = self._lumped_sq(rho0.values)
        l1 = float(np.dot(self.mass.values, np.abs(rho0.values)))
        try:
            self.bound = math.exp(config.t_final * l1 * kernel.norms().w2inf) * initial
        except OverflowError:
            self.bound = math.inf

        self.accumulated = 0.0
        self.steps = 0
        self.series: List[EnergyRecord] = [EnergyRecord(0.0, initial, self.bound)]

    def _lumped_sq(self, values: np.ndarray) -> float:
        return float(np.dot(self.mass.values, values * values))

    def update(self, previous: NodalField, current: NodalField) -> EnergyRecord:
        u = current.values
        mapped = nodal_map(current, self.law).values
        self.accumulated += (
            self._lumped_sq(u - previous.values)
            + self.diffusion_weight * dirichlet_energy(self.S, u)
            + self.k * dirichlet_energy(self.S, mapped)
        )
        self.steps += 1
        record = EnergyRecord(self.steps * self.k, self._lumped_sq(u) + self.accumulated, self.bound)
        if not record.holds:
            log.warning("energy inequality violated at t=%.4g: %.6g > %.6g", record.t, record.lhs, record.bound)
        self.series.append(record)
        return record


def energy_monitor(
    history: Sequence[NodalField],
    mesh: Mesh,
    law,
    config,
    kernel,
    bounds: Optional[TruncationBounds] = None
) -> List[EnergyRecord]:
    """Replay a stored run (history[0] = rho^0) through EnergyMonitor"""
    if not history:
        return []
    monitor = EnergyMonitor(mesh, law, config, kernel=kernel, rho0=history[0], bounds=bounds)
    for previous, current in zip(history[:-1], history[1:]):
        monitor.update(previous, current)
    return list(monitor.series)


def count_local_maxima(mesh: Mesh, values, rel_floor: float = 0.0) -> int:
    """
    Nodes strictly above every edge neighbour and at least rel_floor * max.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_nodes,):
        raise ValueError(f"expected {mesh.n_nodes} values, got shape {values.shape}")
    adjacency = mesh.adjacency
    neighbour_max = np.maximum.reduceat(values[adjacency.indices], adjacency.indptr[:-1])
    peaks = (values > neighbour_max) & (values >= rel_floor * values.max())
    return int(np.count_nonzero(peaks))
