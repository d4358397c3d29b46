"""An embeddable WebAssembly (MVP) interpreter with a dynamically
insertable/removable probe instrumentation framework, a monitor zoo, a
CLI runner and bench harness, and a wire-protocol debug server."""

from .errors import (
    ArgumentError, DuplicateInsert, HostError, IndexOutOfRange,
    InvalidLocation, LinkError, MalformedBinary, MonitorError, NoSuchExport,
    NotInstalled, ProbeError, StaleAccessor, Trap, TrapKind, TypeMismatch,
    UnsupportedFeature, ValidationError, WasmError, WrongContext,
)
from .module import CodeLocation, FuncDecl, Module, Value
from .parser import (
    disassemble, encode_module, instruction_boundaries, parse_module,
)
from .validate import validate_module
from .interp import (
    DispatchMode, Engine, Execution, HostFunc, StepOutcome, StrippedEngine,
    default_imports,
)
from .probes import (
    CallbackProbe, CountProbe, FrameAccessor, OperandProbe, Probe,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "CallbackProbe", "CodeLocation", "CountProbe",
    "DispatchMode", "DuplicateInsert", "Engine", "Execution",
    "FrameAccessor", "FuncDecl", "HostError", "HostFunc", "IndexOutOfRange",
    "InvalidLocation", "LinkError", "MalformedBinary", "Module",
    "MonitorError", "NoSuchExport", "NotInstalled", "OperandProbe", "Probe",
    "ProbeError", "StaleAccessor", "StepOutcome", "StrippedEngine", "Trap",
    "TrapKind", "TypeMismatch", "UnsupportedFeature", "ValidationError",
    "Value", "WasmError", "WrongContext", "default_imports", "disassemble",
    "encode_module", "instruction_boundaries", "parse_module",
    "validate_module",
]
