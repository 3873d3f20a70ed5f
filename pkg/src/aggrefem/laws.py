# -*- coding: utf-8 -*-

"""
Diffusion laws A(s) for the degenerate diffusion term.
"""
import math

from typing import Callable
from typing import Optional

import numpy as np

from .exceptions import ConfigError


class DiffusionLaw:
    """
    A nondecreasing function A with A(0) = 0.

    Evaluation is vectorised over numpy arrays. ``monotone`` tells the
    secant assembly it may clamp roundoff-negative slopes to zero.
    """

    monotone = True

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        *,
        name: str = 'custom'
    ):
        self._func = func
        self._derivative = derivative
        self.name = name

    def __call__(self, s):
        return self._func(np.asarray(s, dtype=float))

    def derivative(self, s):
        if self._derivative is None:
            raise NotImplementedError(f"law {self.name!r} has no derivative")
        return self._derivative(np.asarray(s, dtype=float))

    def lipschitz(self, upper: float) -> float:
        """sup of A' on [0, upper], sampled"""
        samples = np.linspace(0.0, upper, 1025)
        return float(np.max(self.derivative(samples)))

    def truncated(self, upper: float) -> 'DiffusionLaw':
        """A_T(s) = A(min(max(s, 0), upper))"""
        return TruncatedLaw(self, upper)

    def check_monotone(self, upper: float = 10.0, samples: int = 1001) -> bool:
        """A(0) = 0 and A nondecreasing on a sample of [0, upper]"""
        values = self(np.linspace(0.0, upper, samples))
        return bool(values[0] == 0.0 and np.all(np.diff(values) >= 0.0))

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


class PowerLaw(DiffusionLaw):
    """
    A(s) = (nu / m) * s**m for s >= 0.

    nu = 0 gives the zero law; nu = 1, m = 1 gives A(s) = s.
    """

    def __init__(self, nu: float = 0.1, m: float = 3.0):
        if not (nu >= 0 and math.isfinite(nu)):
            raise ConfigError(f"law.nu: must be finite and >= 0, got {nu}")
        if not (m >= 1 and math.isfinite(m)):
            raise ConfigError(f"law.m: must be finite and >= 1, got {m}")
        self.nu = float(nu)
        self.m = float(m)
        super().__init__(self._evaluate, self._slope, name=f"power(nu={nu:g}, m={m:g})")

    def _evaluate(self, s):
        return (self.nu / self.m) * np.power(np.maximum(s, 0.0), self.m)

    def _slope(self, s):
        return self.nu * np.power(np.maximum(s, 0.0), self.m - 1.0)

    def lipschitz(self, upper: float) -> float:
        return self.nu * max(upper, 0.0) ** (self.m - 1.0)


class TruncatedLaw(DiffusionLaw):
    """A evaluated on values clamped to [0, upper]"""

    def __init__(self, base: DiffusionLaw, upper: float):
        if not (upper >= 0 and math.isfinite(upper)):
            raise ValueError(f"truncation bound must be finite and >= 0, got {upper}")
        self.base = base
        self.upper = float(upper)
        super().__init__(self._evaluate, self._slope, name=f"{base.name} truncated at {upper:g}")

    def _evaluate(self, s):
        return self.base(np.clip(s, 0.0, self.upper))

    def _slope(self, s):
        inside = (s >= 0.0) & (s <= self.upper)
        return np.where(inside, self.base.derivative(np.clip(s, 0.0, self.upper)), 0.0)

    def lipschitz(self, upper: Optional[float] = None) -> float:
        return self.base.lipschitz(self.upper if upper is None else min(upper, self.upper))
