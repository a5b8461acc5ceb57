"""
Errors
======

All exceptions raised by ``pyxbar`` derive from :class:`PyxbarError`. They are split
in two families, which the command line maps onto exit codes:

* :class:`PyxbarValidationError` (exit code 2): the input was wrong (bad file,
  bad design, impossible request).
* :class:`PyxbarNumericError` (exit code 3): the input was well formed but the
  numerics failed (singular matrix, no passband, no convergence, ...).

Each class also inherits from the closest builtin, so ``except ValueError`` keeps
working for library users.
"""


class PyxbarError(Exception):
    """Base class for every pyxbar error"""

    exit_code = 1


class PyxbarValidationError(PyxbarError, ValueError):
    exit_code = 2


class PyxbarNumericError(PyxbarError, ArithmeticError):
    exit_code = 3


# --- validation family -------------------------------------------------------


class KindMismatch(PyxbarValidationError):
    """Raised when an operation receives a two-port of the wrong kind"""


class NonPositiveReference(PyxbarValidationError):
    """Raised when a reference impedance has a real part <= 0"""


class EmptyDesign(PyxbarValidationError):
    """Raised when a filter is built from no resonators at all"""


class DuplicateResonance(PyxbarValidationError):
    """Raised when two motional branches resonate within 0.1% of each other"""


class InvalidDesign(PyxbarValidationError):
    """Raised when a design/spec document does not pass schema validation"""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}


class UnsupportedSchemaVersion(InvalidDesign):
    pass


class InfeasibleBounds(PyxbarValidationError):
    """Raised when optimizer bounds are empty, inverted or not finite"""


class MalformedOptionLine(PyxbarValidationError):
    pass


class NonMonotoneFrequency(PyxbarValidationError):
    pass


class UnsupportedParameter(PyxbarValidationError):
    pass


class ComplexReferenceUnsupported(PyxbarValidationError):
    pass


# --- numeric family ----------------------------------------------------------


class SingularConversion(PyxbarNumericError):
    pass


class FloatingNode(PyxbarNumericError):
    """Raised when nodal elimination hits a (near) zero pivot"""

    def __init__(self, node, frequency=None):
        self.node = node
        self.frequency = frequency
        where = f" at {frequency:.6g} Hz" if frequency is not None else ""
        super().__init__(f"Node {node!r} is floating{where}")


class RootNotBracketed(PyxbarNumericError):
    pass


class InfeasibleMatch(PyxbarNumericError):
    """Raised when no simultaneous conjugate match exists (Rollett K < 1)"""

    def __init__(self, message, rollett_k=None):
        super().__init__(message)
        self.rollett_k = rollett_k


class DegenerateDenominator(PyxbarNumericError):
    """Raised when a match reflection coefficient sits at Gamma = 1 (open circuit)

    The offending :class:`~pyxbar.matching.MatchSolution` is attached as
    ``solution`` so callers can still report Gamma, B, C and K.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class NonPositiveMatchResistance(PyxbarNumericError):
    pass


class UnilateralNetwork(PyxbarNumericError):
    pass


class NoPassband(PyxbarNumericError):
    pass


class BandTouchesSweepEdge(PyxbarNumericError):
    pass


class InsufficientPeaks(PyxbarNumericError):
    pass


class NonConvergence(PyxbarNumericError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PassivityViolation(PyxbarNumericError):
    pass


class BudgetExhausted(PyxbarNumericError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
