"""Exception hierarchy for the engine, parser, and probe framework."""


class WasmError(Exception):
    """Base class for everything raised by this package."""


class MalformedBinary(WasmError):
    """The input bytes are not a well-formed module."""

    def __init__(self, offset, reason):
        super().__init__(f"malformed binary at offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class UnsupportedFeature(WasmError):
    """The module uses a feature outside the supported subset."""

    def __init__(self, name):
        super().__init__(f"unsupported feature: {name}")
        self.name = name


class ValidationError(WasmError):
    def __init__(self, location, reason):
        where = f" at {location}" if location is not None else ""
        super().__init__(f"validation error{where}: {reason}")
        self.location = location
        self.reason = reason


class LinkError(WasmError):
    pass


class NoSuchExport(WasmError):
    pass


class ArgumentError(WasmError):
    """Bad arguments passed to an exported function."""


class HostError(WasmError):
    """A host import misbehaved (wrong result count/type, or raised)."""


class TrapKind:
    UNREACHABLE = "unreachable"
    DIV_BY_ZERO = "divide-by-zero"
    INT_OVERFLOW = "integer-overflow"
    INVALID_CONVERSION = "invalid-conversion"
    OUT_OF_BOUNDS = "out-of-bounds"
    INDIRECT_CALL_MISMATCH = "indirect-call-mismatch"
    STACK_EXHAUSTED = "stack-exhausted"


class Trap(WasmError):
    """Wasm-level trap. `kind` is one of the TrapKind constants."""

    def __init__(self, kind, location=None):
        super().__init__(f"trap: {kind}" + (f" at {location}" if location else ""))
        self.kind = kind
        self.location = location


class ProbeError(WasmError):
    """Base for misuse of the probe API."""


class InvalidLocation(ProbeError):
    pass


class DuplicateInsert(ProbeError):
    pass


class NotInstalled(ProbeError):
    pass


class StaleAccessor(ProbeError):
    """The frame behind a FrameAccessor is no longer live."""


class IndexOutOfRange(ProbeError):
    pass


class TypeMismatch(ProbeError):
    pass


class WrongContext(ProbeError):
    """Probe API called from outside the engine context while running."""


class MonitorError(WasmError):
    """A probe callback raised; the run is aborted, Wasm state stays intact."""

    def __init__(self, probe, cause):
        super().__init__(f"probe {probe!r} raised {cause!r}")
        self.probe = probe
        self.cause = cause
