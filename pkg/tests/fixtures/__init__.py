"""
Reference oracles for aggrefem testing.

Independent, deliberately naive implementations of the convolution and a
high-order quadrature reference.
"""

from .reference import (
    brute_force_convolution,
    quadrature_convolution,
    node_index,
)

__all__ = [
    'brute_force_convolution',
    'quadrature_convolution',
    'node_index',
]
