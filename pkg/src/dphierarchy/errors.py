"""Exception types shared across the package."""


class DPHierarchyError(Exception):
    """Base class for all errors raised by this package."""


# coefficient ring
class NotAMonomial(DPHierarchyError, ValueError):
    pass


class ZeroDivisor(DPHierarchyError, ZeroDivisionError):
    pass


class ZeroParameter(DPHierarchyError, ValueError):
    """The dispersion parameter c was zero."""


# differential series
class TruncMismatch(DPHierarchyError, ValueError):
    pass


class NonInvertibleConstantTerm(DPHierarchyError, ValueError):
    pass


# conserved functionals
class ParityViolation(DPHierarchyError):
    """An even-index functional acquired a quadratic part."""


class ClosedFormMismatch(DPHierarchyError):
    pass


class VanishingSn(DPHierarchyError):
    pass


class DegenerateLeadingCoefficient(DPHierarchyError):
    """The top quadratic coefficient needed for a triangular step is zero."""


# Fourier side
class ZeroMode(DPHierarchyError, ValueError):
    pass


class DuplicateIndex(DPHierarchyError, ValueError):
    pass


class CutoffMismatch(DPHierarchyError, ValueError):
    pass


class CutoffArtifact(DPHierarchyError):
    """A normal-form claim depends on modes beyond the cutoff."""


class ResonanceViolation(DPHierarchyError):
    """A certified normal-form term sits on a non-trivially resonant index."""


# simulation
class ConfigError(DPHierarchyError, ValueError):
    pass


class BlowUpDetected(DPHierarchyError):
    pass


class CubeRootDomain(DPHierarchyError):
    """|w| reached |c| somewhere, so (c + w)^(1/3) left its analytic domain."""
