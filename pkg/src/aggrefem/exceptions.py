# -*- coding: utf-8 -*-
"""
Aggrefem exceptions
"""


class AggrefemError(Exception):
    """Base exception for all aggrefem errors"""
    pass


class MeshError(AggrefemError):
    """Malformed mesh input or connectivity"""
    pass


class MeshQualityError(MeshError):
    """Mesh failed acuteness certification"""
    pass


class FieldError(AggrefemError):
    """Nodal field is inconsistent with its mesh or not finite"""
    pass


class BoundsOverflowError(FieldError):
    """Truncation bound is not representable as a float"""
    pass


class KernelError(AggrefemError):
    """Interaction kernel violates the radial, nonincreasing contract"""
    pass


class ConfigError(AggrefemError):
    """Invalid run configuration"""
    pass


class OutputError(AggrefemError):
    """Writing a result file failed"""

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path


class SolverError(AggrefemError):
    """Time stepping failed"""
    pass


class LinearSolveError(SolverError):
    """Per-step linear system did not reach the requested residual"""

    def __init__(self, step_index: int, residual: float, tolerance: float):
        super().__init__(
            f"step {step_index}: linear solve residual {residual:.3e} "
            f"exceeds tolerance {tolerance:.3e}"
        )
        self.step_index = step_index
        self.residual = residual
        self.tolerance = tolerance
