"""Exception hierarchy for qrflab."""


class QrfLabError(Exception):
    """Base class for every error raised by qrflab."""


# groups
class GroupError(QrfLabError, ValueError):
    pass


class InvalidOrder(GroupError):
    pass


class NotClosed(GroupError):
    pass


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NonInvertible(GroupError):
    pass


class IndexOutOfRange(GroupError, IndexError):
    pass


# states
class StateError(QrfLabError, ValueError):
    pass


class LabelOutOfRange(StateError):
    pass


class EmptyInput(StateError):
    pass


class EmptyKeepSet(StateError):
    pass


class TupleLengthMismatch(StateError):
    pass


class NotNormalized(StateError):
    pass


class InvalidDensityOp(StateError):
    pass


class DimensionMismatch(StateError):
    pass


# representations
class RepresentationError(QrfLabError, ValueError):
    pass


class NotUnitary(RepresentationError):
    def __init__(self, element, residual):
        self.element = element
        self.residual = residual
        super().__init__(f"matrix for element {element} is not unitary (residual {residual:.3e})")


class NotHomomorphism(RepresentationError):
    def __init__(self, g, h, residual):
        self.elements = (g, h)
        self.residual = residual
        super().__init__(f"U({g})U({h}) != U({g}*{h}) (residual {residual:.3e})")


class IdentityNotMappedToIdentity(RepresentationError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"identity element is not mapped to the identity matrix (residual {residual:.3e})")


class GroupMismatch(RepresentationError):
    pass


# frame changes
class TransformError(QrfLabError, ValueError):
    pass


class SameFrameIndices(TransformError):
    pass


class DomainViolation(TransformError):
    def __init__(self, leaked, tol):
        self.leaked = leaked
        super().__init__(f"input has norm {leaked:.3e} outside the transform domain (tolerance {tol:.0e})")


class NotAFramePart(TransformError):
    pass


# entanglement
class EntanglementError(QrfLabError, ValueError):
    pass


class InvalidBipartition(EntanglementError):
    pass


class NotTwoQubit(EntanglementError):
    pass


# verification / scenarios
class ConfigError(QrfLabError, ValueError):
    pass


class ScenarioError(QrfLabError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ScenarioError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class CheckFailure(ScenarioError):
    def __init__(self, action_index, message):
        self.action_index = action_index
        super().__init__(f"action {action_index}: {message}")
