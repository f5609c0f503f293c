"""Exception hierarchy."""


class SolitonLabError(Exception):
    pass


class DomainError(SolitonLabError, ValueError):
    """Elementary function evaluated outside its smooth domain."""


class JetDivisionByZero(SolitonLabError, ZeroDivisionError):
    pass


class ExprSyntaxError(SolitonLabError, SyntaxError):
    def __init__(self, message, offset, expected=None, text=None):
        super().__init__(message)
        self.msg = message
        self.offset = offset
        self.expected = expected
        self.text = text

    def __str__(self):
        s = f"{self.msg} at offset {self.offset}"
        if self.expected:
            s += f" (expected {self.expected})"
        return s


class ExpressionError(SolitonLabError):
    """Evaluation failure, annotated with the offending AST node."""

    def __init__(self, message, node=None, offset=None):
        super().__init__(message)
        self.node = node
        self.offset = offset


class DegenerateMetric(SolitonLabError, ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class VarianceMismatch(SolitonLabError, ValueError):
    pass


class SpecParseError(SolitonLabError, ValueError):
    def __init__(self, field, detail):
        super().__init__(f"{field}: {detail}")
        self.field = field
        self.detail = detail


class AsymmetricMetric(SolitonLabError, ValueError):
    pass


class UnknownManifold(SolitonLabError, KeyError):
    pass


class SolitonHypothesisFailed(SolitonLabError):
    """A proposition's soliton hypothesis does not hold; callers treat it as a skip."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonconstantGradientNorm(SolitonLabError):
    pass


class ZeroGradient(SolitonLabError):
    pass


class ThresholdViolation(SolitonLabError):
    pass


class NonCompactManifold(SolitonLabError):
    pass
