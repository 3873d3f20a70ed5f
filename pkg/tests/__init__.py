"""
Test suite for aggrefem - finite element solver for the aggregation equation.

This package contains unit tests, property tests, command line integration
tests and the desk-scale experiment, plus reference oracles in fixtures/.
Markers are registered in pyproject.toml.
"""

__version__ = "0.1.0"
