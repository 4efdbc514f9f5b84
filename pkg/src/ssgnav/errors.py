"""Exception hierarchy. Every domain error derives from :class:`SSGNavError`."""


class SSGNavError(Exception):
    """Base class for all domain errors raised by ssgnav."""


class FormatError(SSGNavError):
    pass


class EmptyInput(SSGNavError):
    pass


class NoFloorFound(SSGNavError):
    pass


class NoFreeSpace(SSGNavError):
    pass


class SchemaError(SSGNavError):
    pass


class VersionMismatch(SchemaError):
    pass


class DanglingReference(SSGNavError):
    pass


class OutOfBounds(SSGNavError):
    pass


class MissingView(SSGNavError):
    pass


class MismatchedSizes(SSGNavError):
    pass


class IoError(SSGNavError, OSError):
    pass


class DanglingViewpoint(SchemaError):
    pass


class DisconnectedEpisode(SSGNavError):
    pass


class NegativeLength(SSGNavError, ValueError):
    pass


class EmptyPath(SSGNavError, ValueError):
    pass


class SpecError(SSGNavError):
    pass


class PolicyFailure(SSGNavError):
    pass


class GatewayTimeout(PolicyFailure):
    pass


class AuthError(PolicyFailure):
    pass


class ProtocolError(PolicyFailure):
    pass


class AnchorNotFound(SSGNavError):
    """A room-label anchor lies in no room. Collected as a warning, not raised."""
