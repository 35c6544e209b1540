"""Shared exception types.

Everything raised on purpose by this package derives from one of the
classes below, so callers can catch ``PolyequilError`` and get all of it.
ValueError subclasses signal bad inputs; ArithmeticError subclasses signal
a computation that left the reals or the representable range; RuntimeError
subclasses signal a solver that could not deliver what was asked.
"""


class PolyequilError(Exception):
    """Base class for every deliberate error in this package."""


# --- bad inputs -----------------------------------------------------------

class ArgError(PolyequilError, ValueError):
    """An argument is out of its documented range (negative tau, even node
    count, ...)."""


class ShapeError(PolyequilError, ValueError):
    """Demand-curve parameters violate the family's shape restrictions."""


class DomainError(PolyequilError, ValueError):
    """A quantity was requested outside the curve's declared domain."""


class ConfigError(PolyequilError, ValueError):
    """A scenario file or CLI flag could not be interpreted."""


# --- left the reals / the floats ------------------------------------------

class ComplexRootError(PolyequilError, ArithmeticError):
    """The learning-step quadratic has no real root at the expansion point."""


class ComplexForecastError(PolyequilError, ArithmeticError):
    """An agent's forecast quadratic has no real root at their known point."""


class ComplexError(PolyequilError, ArithmeticError):
    """A mixture aggregate would be complex for the requested weights."""


class NonFiniteError(PolyequilError, ArithmeticError):
    """The oracle met a NaN or infinity while scanning."""


# --- solver could not deliver ----------------------------------------------

class BracketError(PolyequilError, RuntimeError):
    """No sign change found where the solver needed one."""


class ExistenceError(PolyequilError, RuntimeError):
    """The requested object provably does not exist for these parameters."""


class QuadratureError(PolyequilError, RuntimeError):
    """Numerical integration failed its own accuracy check."""


class HypothesisError(PolyequilError, RuntimeError):
    """A check was requested whose premises the inputs do not satisfy."""


class UnknownEquationError(PolyequilError, KeyError):
    """The oracle has no residual registered under that name."""
