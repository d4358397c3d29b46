"""In-memory representation of a decoded module.

Function bodies are kept twice: `body` is the live, mutable bytearray the
interpreter executes in place (and the instrumentation overwrites), while
`pristine` is an immutable copy of the original encoding used to recover
overwritten opcodes and to disassemble.
"""

import itertools
import struct
from typing import NamedTuple, Optional

I32, I64, F32, F64 = "i32", "i64", "f32", "f64"
VALUE_TYPES = (I32, I64, F32, F64)

VALTYPE_BYTES = {0x7F: I32, 0x7E: I64, 0x7D: F32, 0x7C: F64}
VALTYPE_TO_BYTE = {v: k for k, v in VALTYPE_BYTES.items()}

PAGE_SIZE = 64 * 1024
MAX_PAGES = 65536

_module_ids = itertools.count(1)


class Value(NamedTuple):
    """A typed Wasm value. Integer payloads are the raw unsigned bits."""

    type: str
    payload: object

    @staticmethod
    def i32(n):
        return Value(I32, n & 0xFFFFFFFF)

    @staticmethod
    def i64(n):
        return Value(I64, n & 0xFFFFFFFFFFFFFFFF)

    @staticmethod
    def f32(x):
        return Value(F32, struct.unpack("<f", struct.pack("<f", x))[0])

    @staticmethod
    def f64(x):
        return Value(F64, float(x))

    def signed(self):
        """Signed interpretation of an integer payload."""
        if self.type == I32:
            n = self.payload
            return n - 0x100000000 if n >= 0x80000000 else n
        if self.type == I64:
            n = self.payload
            return n - 0x10000000000000000 if n >= 0x8000000000000000 else n
        return self.payload

    def __repr__(self):
        if self.type in (I32, I64):
            return f"{self.type}:{self.signed()}"
        return f"{self.type}:{self.payload!r}"


def default_value(vtype):
    return 0 if vtype in (I32, I64) else 0.0


class CodeLocation(NamedTuple):
    """Address of one instruction: (module id, function index, byte offset)."""

    module_id: int
    func_index: int
    pc: int

    def __repr__(self):
        return f"m{self.module_id}:f{self.func_index}+{self.pc}"


class FuncType(NamedTuple):
    params: tuple
    results: tuple


class ImportDecl(NamedTuple):
    module: str
    name: str
    type_index: int


class ExportDecl(NamedTuple):
    name: str
    kind: str  # "func" | "table" | "memory" | "global"
    index: int


class GlobalDecl(NamedTuple):
    type: str
    mutable: bool
    init: object  # raw payload


class Limits(NamedTuple):
    min: int
    max: Optional[int]


class ElementSegment(NamedTuple):
    offset: int
    func_indices: tuple


class DataSegment(NamedTuple):
    offset: int
    data: bytes


class BranchInfo(NamedTuple):
    """Precomputed branch resolution: jump target plus stack fixup.

    `pop_to` is the operand depth (frame-relative) the stack is trimmed to,
    keeping the top `keep` values.
    """

    target: int
    pop_to: int
    keep: int


class FuncDecl:
    """One defined function: signature, locals, and its two bodies.

    The side table fields (next_pc, imm, depth_at, types_at, ...) are
    populated by validation and are derived purely from `pristine`, so they
    stay correct while probe opcodes are written into `body`.
    """

    __slots__ = (
        "type_index", "type", "local_types", "local_runs", "body", "pristine",
        "func_index", "module",
        # side table (filled by the validator)
        "next_pc", "imm", "depth_at", "types_at", "boundaries",
        "end_pc", "loop_headers", "return_pcs", "default_locals",
        # instrumentation state: pc -> ProbeList
        "probes",
    )

    def __init__(self, type_index, ftype, local_types, body):
        self.type_index = type_index
        self.type = ftype
        self.local_types = local_types  # params + declared locals
        self.local_runs = None          # original (count, type) runs
        self.body = bytearray(body)
        self.pristine = bytes(body)
        self.func_index = None
        self.module = None
        self.next_pc = None
        self.imm = None
        self.depth_at = None
        self.types_at = None
        self.boundaries = None
        self.end_pc = None
        self.loop_headers = None
        self.return_pcs = None
        self.default_locals = None
        self.probes = {}

    @property
    def num_params(self):
        return len(self.type.params)

    def location(self, pc):
        return CodeLocation(self.module.id, self.func_index, pc)

    def __repr__(self):
        return f"<func #{self.func_index} {self.type.params}->{self.type.results}>"


class Module:
    """A decoded module. Immutable after validation except live bodies."""

    def __init__(self):
        self.id = next(_module_ids)
        self.types = []          # list[FuncType]
        self.imports = []        # list[ImportDecl], functions only
        self.funcs = []          # list[FuncDecl], defined functions
        self.table = None        # Limits or None
        self.elements = []       # list[ElementSegment]
        self.memory = None       # Limits or None
        self.globals = []        # list[GlobalDecl]
        self.exports = []        # list[ExportDecl]
        self.start = None        # function index or None
        self.data = []           # list[DataSegment]
        self.custom = []         # list[(name, bytes)] preserved for re-encoding
        self.validated = False

    @property
    def num_imports(self):
        return len(self.imports)

    def func_at(self, func_index):
        """The FuncDecl for a function-space index; None for imports."""
        if func_index < self.num_imports:
            return None
        return self.funcs[func_index - self.num_imports]

    def func_type(self, func_index):
        if func_index < self.num_imports:
            return self.types[self.imports[func_index].type_index]
        return self.funcs[func_index - self.num_imports].type

    def defined_funcs(self):
        """Yields (function-space index, FuncDecl) for defined functions."""
        base = self.num_imports
        for j, f in enumerate(self.funcs):
            yield base + j, f

    def export_map(self):
        return {e.name: e for e in self.exports}
