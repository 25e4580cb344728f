"""Python access to the pinnsolve solver library."""

from ._core import Error, Solution, latin_hypercube, main, parse_equation, solve, validate

__all__ = ["Error", "Solution", "latin_hypercube", "main", "parse_equation", "solve", "validate"]
