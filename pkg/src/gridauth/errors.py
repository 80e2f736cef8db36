"""Exception hierarchy.

Every protocol rejection is a ``ProtocolError``; scenario outcomes report
the concrete class name as the observed error kind.
"""


class GridAuthError(Exception):
    """Base class for all package errors."""

    @property
    def kind(self):
        return type(self).__name__


class CurveError(GridAuthError, ValueError):
    pass


class SingularCurve(CurveError):
    pass


class GeneratorOffCurve(CurveError):
    pass


class BadOrder(CurveError):
    pass


class PointOffCurve(GridAuthError, ValueError):
    pass


class WidthMismatch(GridAuthError, ValueError):
    pass


class BadTemplateLength(GridAuthError, ValueError):
    pass


class ProtocolError(GridAuthError):
    """A party refused a message or a local credential check."""


class StaleTimestamp(ProtocolError):
    pass


class DuplicateRegistration(ProtocolError):
    pass


class AuthenticationFailure(ProtocolError):
    pass


class UnknownUser(AuthenticationFailure):
    """No stored record matches.

    Subclasses ``AuthenticationFailure`` because during login the server
    cannot tell a forged masked identity from an unenrolled one.
    """


class InvalidPoint(ProtocolError):
    pass


class LocalAuthFailure(ProtocolError):
    pass


class DecodeError(GridAuthError, ValueError):
    """Malformed wire bytes or persisted state."""
