# -*- coding: utf-8 -*-

"""
Semi-implicit time stepping for the aggregation equation with degenerate diffusion.

One step freezes the convolution velocity at the previous level and solves

    (m + k h^gamma S + k D(rho_i) - k C(w)) rho_{i+1} = m rho^n

by fixed-point iteration on the secant diffusion matrix D.
"""
import logging
import math

from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .exceptions import BoundsOverflowError
from .exceptions import ConfigError
from .exceptions import FieldError
from .exceptions import LinearSolveError
from .exceptions import SolverError
from .fe_space import LumpedMass
from .fe_space import NodalField
from .fe_space import TruncationBounds
from .fe_space import assemble_convection
from .fe_space import assemble_secant_diffusion
from .fe_space import compute_B_Linf
from .fe_space import consistent_l2
from .fe_space import lumped_mass
from .fe_space import norms
from .fe_space import stiffness
from .fe_space import truncate
from .interaction import RadialKernel
from .interaction import convolve_at_nodes
from .laws import DiffusionLaw
from .mesh import Mesh
from .monitor import EnergyMonitor
from .monitor import EnergyRecord

log = logging.getLogger('aggrefem.solver')

DEFAULT_SNAPSHOT_TIMES = (2.5, 5.0, 7.5, 10.0, 12.5, 15.0)

# Negative nodal input below this level is reported before a step.
_NEGATIVE_WARN = -1e-10


@dataclass(frozen=True)
class TimeStepConfig:
    """
    Time stepping parameters; defaults reproduce the reference experiment.
    """
    k: float = 0.1
    gamma: float = 0.99
    fp_tol: float = 1e-3
    fp_max_iters: int = 50
    lin_tol: float = 1e-10
    t_final: float = 150.0
    truncate_in_convolution: bool = False
    truncate_in_diffusion: bool = False
    snapshot_every: int = 0
    snapshot_times: Tuple[float, ...] = DEFAULT_SNAPSHOT_TIMES
    monitor_energy: bool = False
    direct_solve_limit: int = 5000

    def __post_init__(self):
        def require(ok, name, message, section='time'):
            if not ok:
                raise ConfigError(f"{section}.{name}: {message}, got {getattr(self, name)!r}")

        require(_finite(self.k) and self.k > 0, 'k', "must be > 0")
        require(_finite(self.gamma) and 0 < self.gamma < 1, 'gamma', "must lie in (0, 1)")
        require(_finite(self.fp_tol) and self.fp_tol > 0, 'fp_tol', "must be > 0")
        require(_is_int(self.fp_max_iters) and self.fp_max_iters >= 1, 'fp_max_iters', "must be an integer >= 1")
        require(_finite(self.lin_tol) and self.lin_tol > 0, 'lin_tol', "must be > 0")
        require(_finite(self.t_final) and self.t_final >= 0, 't_final', "must be >= 0")
        require(_is_int(self.snapshot_every) and self.snapshot_every >= 0, 'snapshot_every',
                "must be an integer >= 0", section='output')
        require(all(_finite(t) and t >= 0 for t in self.snapshot_times), 'snapshot_times',
                "must be finite and >= 0", section='output')
        require(_is_int(self.direct_solve_limit) and self.direct_solve_limit >= 0, 'direct_solve_limit',
                "must be an integer >= 0")
        object.__setattr__(self, 'snapshot_times', tuple(float(t) for t in self.snapshot_times))

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_final / self.k - 1e-9))

    def wants_snapshot(self, step_index: int) -> bool:
        if step_index == 0:
            return True
        if self.snapshot_every and step_index % self.snapshot_every == 0:
            return True
        return any(
            t <= self.t_final and step_index == int(round(t / self.k))
            for t in self.snapshot_times
        )


def _finite(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class SolverState:
    t: float
    rho: NodalField
    step_index: int


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    l1: float
    linf: float
    min: float
    fp_iters: int
    lin_residual: float
    fp_converged: bool = True


class ConditionsReport(NamedTuple):
    q_solv: float
    q_nonneg: float


@dataclass
class RunResult:
    final: SolverState
    diagnostics: List[DiagnosticsRecord]
    conditions: ConditionsReport
    bounds: Optional[TruncationBounds]
    energy: List[EnergyRecord] = field(default_factory=list)


def indicator_square(value: float = 0.25, half_width: float = 3.0, center=(0.0, 0.0)) -> Callable:
    """value on the closed square of the given half width, zero elsewhere"""
    cx, cy = center

    def rho0(points):
        points = np.asarray(points, dtype=float)
        inside = ((np.abs(points[..., 0] - cx) <= half_width)
                  & (np.abs(points[..., 1] - cy) <= half_width))
        return np.where(inside, float(value), 0.0)

    return rho0


def constant(value: float) -> Callable:
    def rho0(points):
        return np.full(np.asarray(points).shape[:-1], float(value))

    return rho0


def gaussian_bump(value: float = 1.0, width: float = 1.0, center=(0.0, 0.0)) -> Callable:
    cx, cy = center

    def rho0(points):
        points = np.asarray(points, dtype=float)
        r2 = (points[..., 0] - cx) ** 2 + (points[..., 1] - cy) ** 2
        return float(value) * np.exp(-r2 / width ** 2)

    return rho0


def init_from_function(mesh: Mesh, rho0_fn: Callable) -> NodalField:
    """
    Nodal sampling rho_h^0(a) = rho0_fn(a).

    rho0_fn may be vectorised over an (N, 2) array of points; otherwise it is
    called once per node with a length-2 array.

    Raises:
        FieldError: on negative or non-finite samples
    """
    values = None
    try:
        candidate = np.asarray(rho0_fn(mesh.nodes), dtype=float)
        if candidate.shape == (mesh.n_nodes,):
            values = candidate
    except (TypeError, ValueError, IndexError):
        pass
    if values is None:
        values = np.array([float(rho0_fn(point)) for point in mesh.nodes])

    field_ = NodalField(mesh, values)
    if field_.min < 0:
        raise FieldError(f"initial density has negative samples (min {field_.min:g})")
    return field_


def stability_products(k: float, h: float, gamma: float, w2inf: float, mass: float) -> ConditionsReport:
    """Dimensionless left-hand sides of the solvability and nonnegativity conditions"""
    return ConditionsReport(
        q_solv=k * (1.0 + 1.0 / h) * w2inf * mass,
        q_nonneg=h ** (1.0 - gamma) * w2inf * mass,
    )


def check_conditions(
    mesh: Mesh,
    kernel: RadialKernel,
    rho0: NodalField,
    config: TimeStepConfig,
    mass: Optional[LumpedMass] = None
) -> ConditionsReport:
    """Report the stability products; they are logged and never enforced"""
    if mass is None:
        mass = lumped_mass(mesh)
    integral = norms(rho0, mass).mass_integral
    report = stability_products(config.k, mesh.h, config.gamma, kernel.norms().w2inf, integral)
    log.info(
        "stability products: q_solv=%.4g (analysis asks <= 1/2 up to a constant), q_nonneg=%.4g",
        report.q_solv, report.q_nonneg,
    )
    return report


def solve_linear(
    system: sparse.csr_matrix,
    rhs: np.ndarray,
    config: TimeStepConfig,
    *,
    step_index: int,
    guess: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, float]:
    """
    Solve the nonsymmetric per-step system.

    Small systems use a sparse direct solve; larger ones use BiCGStab with a
    Jacobi preconditioner. The relative residual is always recomputed.

    Raises:
        LinearSolveError: if the residual exceeds config.lin_tol
    """
    size = system.shape[0]
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(size), 0.0

    def relative_residual(x):
        return float(np.linalg.norm(rhs - system @ x)) / rhs_norm

    if size < config.direct_solve_limit:
        x = sparse_linalg.spsolve(system.tocsc(), rhs)
        residual = relative_residual(x)
    else:
        diagonal = system.diagonal()
        diagonal = np.where(np.abs(diagonal) > 0.0, diagonal, 1.0)
        preconditioner = sparse.diags(1.0 / diagonal, format='csr')
        maxiter = int(math.ceil(10.0 * math.sqrt(size)))
        x = np.zeros(size) if guess is None else np.array(guess, dtype=float)
        residual = relative_residual(x)
        # restarts guard against drift between the recursive and true residual
        for _ in range(3):
            x, info = sparse_linalg.bicgstab(
                system, rhs, x0=x, rtol=config.lin_tol, atol=0.0, maxiter=maxiter, M=preconditioner
            )
            residual = relative_residual(x)
            if info < 0 or residual <= config.lin_tol:
                break

    if not math.isfinite(residual) or residual > config.lin_tol:
        raise LinearSolveError(step_index, residual, config.lin_tol)
    return x, residual


def diagnose(state: SolverState, mass: LumpedMass, fp_iters: int, lin_residual: float,
             fp_converged: bool = True) -> DiagnosticsRecord:
    measured = norms(state.rho, mass)
    return DiagnosticsRecord(
        t=state.t,
        mass=measured.mass_integral,
        l1=measured.L1_lumped,
        linf=measured.Linf_nodal,
        min=state.rho.min,
        fp_iters=fp_iters,
        lin_residual=lin_residual,
        fp_converged=fp_converged,
    )


def step(
    state: SolverState,
    mesh: Mesh,
    law: DiffusionLaw,
    kernel: RadialKernel,
    mass: LumpedMass,
    S: sparse.csr_matrix,
    config: TimeStepConfig,
    *,
    bounds: Optional[TruncationBounds] = None,
    workers: Optional[int] = None
) -> Tuple[SolverState, DiagnosticsRecord]:
    """
    Advance one time step.

    The convolution field is computed once from rho^n; the fixed point
    starts from rho^n and stops when successive iterates differ by less
    than fp_tol in L2, or after fp_max_iters iterations (the last iterate
    is accepted with a warning).

    Raises:
        SolverError: if truncation is requested without bounds
        LinearSolveError: if a linear solve misses lin_tol
    """
    rho_n = state.rho
    next_index = state.step_index + 1

    if rho_n.min < _NEGATIVE_WARN:
        log.warning("step %d: input density has negative values (min %.3e)", next_index, rho_n.min)

    truncating = config.truncate_in_convolution or config.truncate_in_diffusion
    if truncating and bounds is None:
        raise SolverError("truncation requested but no truncation bounds are available")

    source = truncate(rho_n, bounds) if config.truncate_in_convolution else rho_n
    w = convolve_at_nodes(mesh, source, kernel, workers=workers)
    diffusion = law.truncated(bounds.B) if config.truncate_in_diffusion else law

    k = config.k
    frozen = (mass.as_matrix() + (k * mesh.h ** config.gamma) * S - k * assemble_convection(mesh, w)).tocsr()
    rhs = mass.values * rho_n.values

    current = rho_n
    residual = 0.0
    converged = False
    iterations = 0
    while iterations < config.fp_max_iters:
        iterations += 1
        system = (frozen + k * assemble_secant_diffusion(mesh, current, diffusion)).tocsr()
        values, residual = solve_linear(system, rhs, config, step_index=next_index, guess=current.values)
        change = consistent_l2(mesh, values - current.values)
        current = NodalField(mesh, values)
        if change < config.fp_tol:
            converged = True
            break

    if not converged:
        log.warning(
            "step %d: fixed point stopped after %d iterations above tolerance %.3g",
            next_index, iterations, config.fp_tol,
        )

    new_state = SolverState(t=next_index * k, rho=current, step_index=next_index)
    record = diagnose(new_state, mass, iterations, residual, converged)
    log.debug(
        "step %d t=%.4g mass=%.12g linf=%.6g min=%.3e fp=%d res=%.2e",
        next_index, record.t, record.mass, record.linf, record.min, iterations, residual,
    )
    return new_state, record


def _truncation_bounds(kernel, rho0, config, mass) -> Optional[TruncationBounds]:
    try:
        bounds = compute_B_Linf(kernel, rho0, config.t_final, mass)
    except BoundsOverflowError as e:
        if config.truncate_in_convolution or config.truncate_in_diffusion:
            raise
        log.warning("truncation bound not representable (%s); truncation is off, continuing", e)
        return None
    log.info("truncation bound B_Linf=%.6g", bounds.B)
    return bounds


def run(
    mesh: Mesh,
    law: DiffusionLaw,
    kernel: RadialKernel,
    rho0: NodalField,
    config: TimeStepConfig,
    sinks: Sequence = (),
    *,
    workers: Optional[int] = None
) -> RunResult:
    """
    Step from t = 0 until t_final.

    Sinks receive record(diagnostics) every step and snapshot(mesh, state)
    at the configured cadence; every sink is closed even when a step fails.
    """
    try:
        mass = lumped_mass(mesh)
        S = stiffness(mesh)
        conditions = check_conditions(mesh, kernel, rho0, config, mass)
        bounds = _truncation_bounds(kernel, rho0, config, mass)

        monitor = None
        if config.monitor_energy:
            monitor = EnergyMonitor(mesh, law, config, kernel=kernel, rho0=rho0, mass=mass, S=S, bounds=bounds)

        state = SolverState(t=0.0, rho=rho0, step_index=0)
        diagnostics = [diagnose(state, mass, 0, 0.0)]

        for sink in sinks:
            sink.record(diagnostics[0])
            sink.snapshot(mesh, state)

        for _ in range(config.n_steps):
            new_state, record = step(
                state, mesh, law, kernel, mass, S, config, bounds=bounds, workers=workers
            )
            if monitor is not None:
                monitor.update(state.rho, new_state.rho)
            state = new_state
            diagnostics.append(record)
            for sink in sinks:
                sink.record(record)
                if config.wants_snapshot(state.step_index):
                    sink.snapshot(mesh, state)
    finally:
        for sink in sinks:
            sink.close()

    return RunResult(
        final=state,
        diagnostics=diagnostics,
        conditions=conditions,
        bounds=bounds,
        energy=list(monitor.series) if monitor is not None else [],
    )
