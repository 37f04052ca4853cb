"""Exception hierarchy for percolated-gff.

Every error raised on purpose by the library derives from
:class:`PercolatedGFFError`. The command-line interface maps the three
families onto exit codes:

    ConfigError   -> 2  (bad laws, parameters, config files)
    GeometryError -> 2  (empty clusters, supports escaping the domain, ...)
    NumericError  -> 3  (singular operators, weight underflow, tolerance misses)
"""


class PercolatedGFFError(Exception):
    """Base class for all library errors."""


class ConfigError(PercolatedGFFError, ValueError):
    """Invalid configuration value or configuration file."""


class LawError(ConfigError):
    """Invalid environment law parameters (p outside [0,1], w0 <= 0, ...)."""


class GeometryError(PercolatedGFFError, ValueError):
    """A lattice or domain precondition does not hold."""


class CapacityError(GeometryError):
    """Problem size exceeds a configured cap (e.g. the dense eigensolver)."""


class EmptyClusterError(GeometryError):
    """The environment has no open edge, or the domain misses the cluster."""


class EmptyRegionError(GeometryError):
    """An averaging region contains no lattice site."""


class ProvenanceError(GeometryError):
    """A field and a Green operator do not share domain and scale."""


class SupportError(GeometryError):
    """A mollifier support ball escapes the domain D."""


class NumericError(PercolatedGFFError, ArithmeticError):
    """A numerical procedure failed."""


class SingularOperatorError(NumericError):
    """The killed operator is singular (a component has no exit edge)."""


class ToleranceError(NumericError):
    """A residual or symmetry check exceeded its tolerance."""


class WeightUnderflowError(NumericError):
    """All importance weights underflowed to zero."""
