"""Exception hierarchy shared across the toolkit.

Every error carries a stable ``code`` string so the HTTP layer and the CLI
can map failures onto wire-level error bodies and exit codes without
string-matching messages.
"""

from __future__ import annotations


class GuiFusionError(Exception):
    """Base class for all domain errors."""

    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ModelParseError(GuiFusionError):
    """A model document is malformed or violates a validation rule.

    ``rule`` names the first violated rule (``SyntaxError``, ``SchemaError``,
    ``DuplicateId``, ``UnknownReference``, ``CapabilityMismatch``,
    ``InvalidBounds``, ``EmptyScreen``); ``location`` points at the offending
    spot, either ``line L column C`` or a ``$.path[i]`` breadcrumb.
    """

    code = "ModelParseError"

    def __init__(self, rule: str, location: str, message: str):
        super().__init__(f"{rule} at {location}: {message}")
        self.rule = rule
        self.location = location
        self.detail = message


class UnknownComponentError(GuiFusionError):
    code = "UnknownComponent"


class HistoryHitsCrashError(GuiFusionError):
    """A step history walks into a crash edge; no successor state exists."""

    code = "HistoryHitsCrash"

    def __init__(self, exception_name: str, ordinal: int):
        super().__init__(
            f"step {ordinal} crashes the app with {exception_name}; "
            "no further state exists"
        )
        self.exception_name = exception_name
        self.ordinal = ordinal


class EmptyTraceError(GuiFusionError):
    code = "EmptyTrace"


class UnknownTokenError(GuiFusionError):
    code = "UnknownToken"


class EmptyStepsError(GuiFusionError):
    code = "EmptySteps"


class UnresolvedComponentError(GuiFusionError):
    code = "UnresolvedComponent"


class AppMismatchError(GuiFusionError):
    code = "AppMismatch"


class EmptyOwnershipMapError(GuiFusionError):
    code = "EmptyOwnershipMap"


class MissingOwnershipMapError(GuiFusionError):
    code = "MissingOwnershipMap"


class UnknownAppError(GuiFusionError):
    code = "UnknownApp"


class UnknownSessionError(GuiFusionError):
    code = "UnknownSession"


class UnknownReportError(GuiFusionError):
    code = "UnknownReport"


class UnknownScreenshotError(GuiFusionError):
    code = "UnknownScreenshot"


class SessionClosedError(GuiFusionError):
    code = "SessionClosed"


class InvalidStepError(GuiFusionError):
    code = "InvalidStep"


class EmptyHistoryError(GuiFusionError):
    code = "EmptyHistory"


#: Errors that mean "the thing you named does not exist" (HTTP 404 family);
#: everything else in the hierarchy is a bad-input error (HTTP 400 family).
NOT_FOUND_ERRORS = (
    UnknownAppError,
    UnknownSessionError,
    UnknownReportError,
    UnknownScreenshotError,
    UnknownComponentError,
    MissingOwnershipMapError,
)
