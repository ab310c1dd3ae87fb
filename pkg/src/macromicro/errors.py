"""Exception types shared across the package."""


class MacroMicroError(Exception):
    """Base class for all errors raised by this package."""


class JointLimitError(MacroMicroError):
    """A commanded joint angle violates a rolling-interface or arm limit."""


class SingularityError(MacroMicroError):
    """Undamped least-squares step requested on a singular system."""


class SaturationError(MacroMicroError):
    """A pulley/servo command exceeds its travel range."""


class ProtocolError(MacroMicroError):
    """Wire-protocol encode/decode failure.

    ``offset`` is the byte offset of the offending token within the line.
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ConfigError(MacroMicroError):
    """Malformed or inconsistent configuration document."""


class ScenarioError(MacroMicroError):
    """Malformed scenario or stylus trajectory file."""


class TraceError(MacroMicroError):
    """Malformed trace file; ``frame_index`` points at the bad record."""

    def __init__(self, message: str, frame_index: int = -1):
        super().__init__(message)
        self.frame_index = frame_index
