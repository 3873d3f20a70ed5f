# -*- coding: utf-8 -*-
"""
Aggrefem - finite element solver for the aggregation equation with degenerate diffusion

    d rho / dt = Lap A(rho) - div(rho grad(K * rho))

Features:
- Structured acute triangulations with certified angle margin
- Mass-lumped P1 discretisation with h^gamma stabilisation
- Semi-implicit time stepping, fixed-point linearised secant diffusion
- Parallel, thread-count independent nonlocal convolution (numba)
- CSV diagnostics and legacy VTK snapshots
"""

from .mesh import Mesh
from .mesh import Rectangle
from .mesh import build_structured_acute_mesh
from .mesh import verify_acuteness
from .mesh import estimate_mesh_constants

from .fe_space import NodalField
from .fe_space import LumpedMass
from .fe_space import TruncationBounds
from .fe_space import lumped_mass
from .fe_space import stiffness
from .fe_space import assemble_secant_diffusion
from .fe_space import assemble_convection
from .fe_space import truncate
from .fe_space import compute_B_Linf
from .fe_space import nodal_map
from .fe_space import norms

from .interaction import GaussianKernel
from .interaction import RadialKernel
from .interaction import ZeroKernel
from .interaction import convolve_at_nodes
from .interaction import kernel_norms

from .laws import DiffusionLaw
from .laws import PowerLaw

from .solver import TimeStepConfig
from .solver import SolverState
from .solver import DiagnosticsRecord
from .solver import init_from_function
from .solver import indicator_square
from .solver import constant
from .solver import gaussian_bump
from .solver import check_conditions
from .solver import step
from .solver import run

from .monitor import EnergyMonitor
from .monitor import energy_monitor
from .monitor import count_local_maxima

from .config import RunConfig
from .config import parse_config
from .config import load_config

from .output import write_diagnostics_csv
from .output import write_vtk_snapshot

from .exceptions import AggrefemError
from .exceptions import MeshError
from .exceptions import MeshQualityError
from .exceptions import FieldError
from .exceptions import BoundsOverflowError
from .exceptions import KernelError
from .exceptions import ConfigError
from .exceptions import OutputError
from .exceptions import SolverError
from .exceptions import LinearSolveError

__version__ = "0.1.0"
__license__ = "MIT"

__all__ = [
    # Mesh
    'Mesh',
    'Rectangle',
    'build_structured_acute_mesh',
    'verify_acuteness',
    'estimate_mesh_constants',

    # Finite element space
    'NodalField',
    'LumpedMass',
    'TruncationBounds',
    'lumped_mass',
    'stiffness',
    'assemble_secant_diffusion',
    'assemble_convection',
    'truncate',
    'compute_B_Linf',
    'nodal_map',
    'norms',

    # Interaction
    'GaussianKernel',
    'RadialKernel',
    'ZeroKernel',
    'convolve_at_nodes',
    'kernel_norms',

    # Time stepping
    'DiffusionLaw',
    'PowerLaw',
    'TimeStepConfig',
    'SolverState',
    'DiagnosticsRecord',
    'init_from_function',
    'indicator_square',
    'constant',
    'gaussian_bump',
    'check_conditions',
    'step',
    'run',
    'EnergyMonitor',
    'energy_monitor',
    'count_local_maxima',

    # Configuration and output
    'RunConfig',
    'parse_config',
    'load_config',
    'write_diagnostics_csv',
    'write_vtk_snapshot',

    # Exceptions
    'AggrefemError',
    'MeshError',
    'MeshQualityError',
    'FieldError',
    'BoundsOverflowError',
    'KernelError',
    'ConfigError',
    'OutputError',
    'SolverError',
    'LinearSolveError',
]
