# -*- coding: utf-8 -*-

"""
Self-check suite run by ``aggrefem --seed-check``.

Each check builds small meshes and fields, verifies a structural property
of the discretisation and reports a CheckResult instead of raising.
"""
import logging
import math

from typing import Callable
from typing import List
from typing import NamedTuple
from typing import Optional

import numpy as np

from .fe_space import NodalField
from .fe_space import compute_B_Linf
from .fe_space import lumped_mass
from .fe_space import monotone_gradient_gap
from .fe_space import stiffness
from .interaction import GaussianKernel
from .interaction import convolve_at_nodes
from .laws import PowerLaw
from .mesh import build_structured_acute_mesh
from .mesh import estimate_mesh_constants
from .mesh import verify_acuteness
from .solver import SolverState
from .solver import TimeStepConfig
from .solver import step
from .workers import max_workers

log = logging.getLogger('aggrefem.invariants')

SQUARE = (-4.0, 4.0, -4.0, 4.0)
UNIT = (0.0, 1.0, 0.0, 1.0)
SEED = 20240901

# max angle of the macro pattern on a square is 3 pi / 4 - atan(3 / 2)
EXPECTED_BETA = math.atan(1.5) - math.pi / 4


def _expect(ok: bool, message: str):
    if not ok:
        raise AssertionError(message)


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: str


def expected_counts(n_square: int):
    """(nodes, elements) of the structured acute mesh"""
    n = n_square
    return (n + 1) ** 2 + 2 * n * (n + 1) + 4 * n * n, 14 * n * n


def check_mesh_counts(workers: Optional[int] = None) -> str:
    for n in (1, 2, 3):
        mesh = build_structured_acute_mesh(UNIT, n)
        nodes, elements = expected_counts(n)
        _expect((mesh.n_nodes, mesh.n_elements) == (nodes, elements),
                f"n={n}: got {mesh.n_nodes} nodes / {mesh.n_elements} elements, expected {nodes} / {elements}")
        _expect(mesh.euler_characteristic() == 1, f"n={n}: V - E + T = {mesh.euler_characteristic()}")
    return "counts and Euler identity for n = 1, 2, 3"


def check_acuteness(workers: Optional[int] = None) -> str:
    mesh = build_structured_acute_mesh(SQUARE, 3)
    report = verify_acuteness(mesh)
    _expect(report.ok, f"max angle {math.degrees(report.max_angle):.6f} deg")
    _expect(abs(report.beta - EXPECTED_BETA) < 1e-9, f"beta {report.beta:.12f}, expected {EXPECTED_BETA:.12f}")
    constants = estimate_mesh_constants(mesh)
    _expect(constants.c_neg_lower > 0, f"c_neg_lower {constants.c_neg_lower:g}")
    return f"beta={report.beta:.6f} c_neg={constants.c_neg_lower:.4f} shape={constants.shape_reg:.4f}"


def check_stiffness_signs(workers: Optional[int] = None) -> str:
    worst_off, worst_row = -math.inf, 0.0
    for n in (1, 4, 16, 40):
        S = stiffness(build_structured_acute_mesh(SQUARE, n)).tocoo()
        off = S.row != S.col
        worst_off = max(worst_off, float(S.data[off].max()))
        worst_row = max(worst_row, float(np.abs(np.asarray(S.sum(axis=1))).max()))
    _expect(worst_off <= 1e-14, f"positive off-diagonal entry {worst_off:.3e}")
    _expect(worst_row <= 1e-10, f"row sum {worst_row:.3e}")
    return f"max off-diagonal {worst_off:.3e}, max |row sum| {worst_row:.3e}"


def check_lumped_mass(workers: Optional[int] = None) -> str:
    mesh = build_structured_acute_mesh(SQUARE, 4)
    total = lumped_mass(mesh).total
    _expect(abs(total - 64.0) <= 1e-12 * 64.0, f"total {total!r}")
    return f"total {total:.15g}"


def check_mass_conservation(workers: Optional[int] = None, trials: int = 50) -> str:
    mesh = build_structured_acute_mesh(SQUARE, 8)
    mass = lumped_mass(mesh)
    S = stiffness(mesh)
    kernel = GaussianKernel()
    law = PowerLaw()
    config = TimeStepConfig(lin_tol=1e-12)
    rng = np.random.default_rng(SEED)

    worst = 0.0
    for _ in range(trials):
        rho = NodalField(mesh, rng.uniform(0.0, 1.0, mesh.n_nodes))
        before = float(mass.values @ rho.values)
        state, _ = step(SolverState(0.0, rho, 0), mesh, law, kernel, mass, S, config, workers=workers)
        after = float(mass.values @ state.rho.values)
        worst = max(worst, abs(after - before) / abs(before))
    _expect(worst <= 1e-8, f"relative mass change {worst:.3e}")
    return f"{trials} random fields, worst relative change {worst:.3e}"


def check_convolution(workers: Optional[int] = None) -> str:
    mesh = build_structured_acute_mesh(SQUARE, 4)
    kernel = GaussianKernel()
    rng = np.random.default_rng(SEED + 1)
    u = NodalField(mesh, rng.uniform(0.0, 1.0, mesh.n_nodes))
    v = NodalField(mesh, rng.uniform(0.0, 1.0, mesh.n_nodes))
    a, b = 0.75, -1.5

    combined = convolve_at_nodes(mesh, u.with_values(a * u.values + b * v.values), kernel, workers=workers).values
    separate = (a * convolve_at_nodes(mesh, u, kernel, workers=workers).values
                + b * convolve_at_nodes(mesh, v, kernel, workers=workers).values)
    error = float(np.abs(combined - separate).max() / np.abs(separate).max())
    _expect(error <= 1e-12, f"linearity error {error:.3e}")

    single = convolve_at_nodes(mesh, u, kernel, workers=1).values
    pooled = convolve_at_nodes(mesh, u, kernel, workers=max_workers()).values
    _expect(np.array_equal(single, pooled), "result depends on the worker count")
    return f"linearity error {error:.3e}; 1 and {max_workers()} workers agree bitwise"


def check_monotone_gradient(workers: Optional[int] = None, trials: int = 100) -> str:
    mesh = build_structured_acute_mesh(SQUARE, 8)
    mass = lumped_mass(mesh)
    kernel = GaussianKernel()
    law = PowerLaw()
    rng = np.random.default_rng(SEED + 2)

    worst = -math.inf
    for _ in range(trials):
        rho = NodalField(mesh, rng.uniform(0.0, 0.05, mesh.n_nodes))
        # T = 0 puts the cap at max rho so the truncation bites
        for t_final in (0.0, 1.0):
            bound = compute_B_Linf(kernel, rho, t_final, mass).B
            truncated = law.truncated(bound)
            lipschitz = truncated.lipschitz()
            gap = monotone_gradient_gap(mesh, rho, truncated, lipschitz)
            worst = max(worst, float(gap.max()))
    _expect(worst <= 1e-12, f"largest gap {worst:.3e}")
    return f"{trials} random fields at T = 0 and 1, largest gap {worst:.3e}"


CHECKS: List[Callable[..., str]] = [
    check_mesh_counts,
    check_acuteness,
    check_stiffness_signs,
    check_lumped_mass,
    check_mass_conservation,
    check_convolution,
    check_monotone_gradient,
]


def run_invariant_suite(workers: Optional[int] = None, checks=None) -> List[CheckResult]:
    """Run every check; assertion failures and any raised exception become failed results"""
    results = []
    for check in CHECKS if checks is None else checks:
        name = check.__name__.removeprefix('check_')
        try:
            detail = check(workers)
            result = CheckResult(name, True, detail)
        except AssertionError as e:
            result = CheckResult(name, False, str(e))
        except Exception as e:
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        log.info("%s %s: %s", 'PASS' if result.ok else 'FAIL', result.name, result.detail)
        results.append(result)
    return results
