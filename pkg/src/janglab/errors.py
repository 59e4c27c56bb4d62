"""Exception hierarchy shared by all janglab modules."""


class JanglabError(Exception):
    """Base class for all janglab errors."""


class InvalidArgument(JanglabError, ValueError):
    """Bad argument (wrong sign, too few nodes, reversed bounds, ...)."""


class GenerationFailure(JanglabError):
    """Dataset generator exhausted its rejection/rescale budget."""


class NumericalDegeneracy(JanglabError):
    """Metric coefficients or derived quantities left the representable range."""


class DecViolation(JanglabError):
    """Strict dominant-energy margin is nonpositive somewhere on the grid."""


class ConfigFailure(JanglabError):
    """Constructed capillary configuration failed its own invariant audit."""


class DomainError(JanglabError, ValueError):
    """Evaluation requested outside the domain of definition."""


class QuadratureFailure(JanglabError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NoAdmissibleR0(JanglabError):
    """No candidate inner radius makes the barrier inequalities pass."""


class NewtonDivergence(JanglabError):
    """Damped Newton failed to converge."""


class SingularJacobian(JanglabError):
    """Linear solve inside Newton broke down."""


class ContinuationFailure(JanglabError):
    """Parameter continuation reached its minimum step without converging."""


class ExhaustionNonconvergence(JanglabError):
    """Cauchy criterion failed across the whole domain schedule."""


class AuditInapplicable(JanglabError):
    """Hypotheses of the requested audit fail for the given parameters."""


class ShieldingFailure(JanglabError):
    """Shielding construction did not pass its six-property audit."""


class InadmissibleTestFunction(JanglabError, ValueError):
    """Test function violates support or constancy requirements."""


class FitFailure(JanglabError):
    """Asymptotic fit residual too large; decay hypotheses violated numerically."""


class InsufficientData(JanglabError):
    """Too few usable nodes for a fit."""


class IOFailure(JanglabError, OSError):
    """Report files could not be written."""
