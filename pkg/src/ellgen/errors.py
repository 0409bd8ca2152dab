"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` so the command line
front end can report it without parsing messages.
"""


class EllgenError(Exception):
    code = "error"

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        if self.context:
            out["context"] = {k: _plain(v) for k, v in self.context.items()}
        return out


def _plain(value):
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return str(value)


class IncompatibleOrder(EllgenError):
    code = "IncompatibleOrder"


class NotRational(EllgenError):
    code = "NotRational"


class NotInvertible(EllgenError):
    code = "NotInvertible"


class NotExact(EllgenError):
    """An exact division left a remainder."""

    code = "NotExact"


class BeyondTruncation(EllgenError):
    code = "BeyondTruncation"


class FractionalRootOfUnit(EllgenError):
    code = "FractionalRootOfUnit"


class ThetaVanishes(EllgenError):
    code = "ThetaVanishes"


class Unsupported(EllgenError):
    code = "Unsupported"


class DecompositionFailed(EllgenError):
    code = "DecompositionFailed"


class MissingGradingElement(EllgenError):
    code = "MissingGradingElement"


class InvalidWeights(EllgenError):
    code = "InvalidWeights"


class ValidationError(EllgenError):
    code = "ValidationError"
