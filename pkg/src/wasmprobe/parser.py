"""Binary-format decoding for the MVP subset, plus re-encoding and
disassembly helpers.

Decoding is strict: LEB128 immediates may not exceed their spec width and
unknown opcodes or post-MVP constructs fail fast. `disassemble` and
`instruction_boundaries` read the pristine copy of a body, so their output
is unaffected by installed probe opcodes.
"""

import struct

from .errors import MalformedBinary, UnsupportedFeature
from .module import (
    DataSegment, ElementSegment, ExportDecl, FuncDecl, FuncType, GlobalDecl,
    ImportDecl, Limits, Module, VALTYPE_BYTES, VALTYPE_TO_BYTE,
)
from .opcodes import (
    IMM_BLOCKTYPE, IMM_BR_TABLE, IMM_BYTE, IMM_CALL_INDIRECT, IMM_F32,
    IMM_F64, IMM_I32, IMM_I64, IMM_MEMARG, IMM_NONE, IMM_U32, OPCODES,
    POST_MVP_OPCODES,
)

MAGIC = b"\x00asm"
VERSION = b"\x01\x00\x00\x00"

SEC_CUSTOM, SEC_TYPE, SEC_IMPORT, SEC_FUNC, SEC_TABLE = 0, 1, 2, 3, 4
SEC_MEMORY, SEC_GLOBAL, SEC_EXPORT, SEC_START = 5, 6, 7, 8
SEC_ELEMENT, SEC_CODE, SEC_DATA = 9, 10, 11

_EXPORT_KINDS = {0: "func", 1: "table", 2: "memory", 3: "global"}
_EXPORT_KIND_BYTES = {v: k for k, v in _EXPORT_KINDS.items()}


class _Reader:
    def __init__(self, data, base=0):
        self.data = data
        self.pos = 0
        self.base = base  # offset of data[0] in the whole binary, for errors

    def off(self):
        return self.base + self.pos

    def eof(self):
        return self.pos >= len(self.data)

    def byte(self):
        if self.pos >= len(self.data):
            raise MalformedBinary(self.off(), "unexpected end of input")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def bytes(self, n):
        if self.pos + n > len(self.data):
            raise MalformedBinary(self.off(), "unexpected end of input")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return bytes(b)

    def u32(self):
        return self._uleb(32)

    def s32(self):
        return self._sleb(32)

    def s64(self):
        return self._sleb(64)

    def _uleb(self, bits):
        result = 0
        shift = 0
        start = self.off()
        while True:
            b = self.byte()
            result |= (b & 0x7F) << shift
            shift += 7
            if not (b & 0x80):
                break
            if shift >= ((bits + 6) // 7) * 7:
                raise MalformedBinary(start, f"u{bits} LEB128 too long")
        if result >= (1 << bits):
            raise MalformedBinary(start, f"u{bits} LEB128 out of range")
        return result

    def _sleb(self, bits):
        result = 0
        shift = 0
        start = self.off()
        while True:
            b = self.byte()
            result |= (b & 0x7F) << shift
            shift += 7
            if not (b & 0x80):
                if b & 0x40 and shift < bits + 7:
                    result |= -1 << shift
                break
            if shift >= ((bits + 6) // 7) * 7:
                raise MalformedBinary(start, f"s{bits} LEB128 too long")
        lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
        if not lo <= result <= hi:
            raise MalformedBinary(start, f"s{bits} LEB128 out of range")
        return result

    def name(self):
        n = self.u32()
        raw = self.bytes(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedBinary(self.off() - n, "invalid utf-8 name")

    def valtype(self):
        at = self.off()
        b = self.byte()
        if b not in VALTYPE_BYTES:
            raise MalformedBinary(at, f"bad value type 0x{b:02x}")
        return VALTYPE_BYTES[b]

    def limits(self):
        at = self.off()
        flag = self.byte()
        if flag == 0:
            return Limits(self.u32(), None)
        if flag == 1:
            return Limits(self.u32(), self.u32())
        raise MalformedBinary(at, f"bad limits flag 0x{flag:02x}")


def decode_instruction(code, pc):
    """Decode the instruction starting at `pc` of a body.

    Returns (opcode, mnemonic, immediates, next_pc). Immediates follow the
    disassembly convention: u32 -> [n], memarg -> [align, offset],
    br_table -> targets + [default], call_indirect -> [type_index],
    blocktype -> [] for void else [value type], consts -> [value].
    """
    r = _Reader(code, 0)
    r.pos = pc
    op = r.byte()
    if op not in OPCODES:
        if op in POST_MVP_OPCODES:
            raise UnsupportedFeature(POST_MVP_OPCODES[op])
        raise MalformedBinary(pc, f"illegal opcode 0x{op:02x}")
    info = OPCODES[op]
    kind = info.imm
    if kind == IMM_NONE:
        imms = []
    elif kind == IMM_U32:
        imms = [r.u32()]
    elif kind == IMM_BLOCKTYPE:
        at = r.off()
        b = r.byte()
        if b == 0x40:
            imms = []
        elif b in VALTYPE_BYTES:
            imms = [VALTYPE_BYTES[b]]
        else:
            raise UnsupportedFeature("non-MVP block type")
    elif kind == IMM_MEMARG:
        imms = [r.u32(), r.u32()]
    elif kind == IMM_BR_TABLE:
        n = r.u32()
        imms = [r.u32() for _ in range(n)]
        imms.append(r.u32())
    elif kind == IMM_CALL_INDIRECT:
        imms = [r.u32()]
        at = r.off()
        if r.byte() != 0:
            raise MalformedBinary(at, "call_indirect reserved byte must be 0")
    elif kind == IMM_BYTE:
        at = r.off()
        if r.byte() != 0:
            raise MalformedBinary(at, "memory index must be 0")
        imms = []
    elif kind == IMM_I32:
        imms = [r.s32()]
    elif kind == IMM_I64:
        imms = [r.s64()]
    elif kind == IMM_F32:
        imms = [struct.unpack("<f", r.bytes(4))[0]]
    elif kind == IMM_F64:
        imms = [struct.unpack("<d", r.bytes(8))[0]]
    else:  # pragma: no cover
        raise AssertionError(kind)
    return op, info.mnemonic, imms, r.pos


def iter_instructions(code):
    """Linear decode of a body: yields (pc, opcode, mnemonic, imms, next_pc)."""
    pc = 0
    n = len(code)
    while pc < n:
        op, mnem, imms, nxt = decode_instruction(code, pc)
        yield pc, op, mnem, imms, nxt
        pc = nxt


def disassemble(func):
    """Listing of (pc, mnemonic, immediates) decoded from the pristine body."""
    return [(pc, mnem, imms) for pc, _, mnem, imms, _ in iter_instructions(func.pristine)]


def instruction_boundaries(func):
    """The set of byte offsets at which instructions begin."""
    if func.boundaries is not None:
        return set(func.boundaries)
    return {pc for pc, _, _, _, _ in iter_instructions(func.pristine)}


def parse_module(data):
    """Decode a binary module. Bodies are checked to be decodable; full
    grammar and type checking happen in validate_module."""
    if len(data) < 8:
        raise MalformedBinary(0, "shorter than header")
    for i in range(4):
        if data[i] != MAGIC[i]:
            raise MalformedBinary(i, "bad magic")
    if data[4:8] != VERSION:
        raise MalformedBinary(4, f"unsupported version {data[4:8].hex()}")

    m = Module()
    r = _Reader(data[8:], 8)
    func_type_indices = None
    last_section = 0
    while not r.eof():
        at = r.off()
        sec_id = r.byte()
        size = r.u32()
        payload = r.bytes(size)
        sec = _Reader(payload, r.off() - size)
        if sec_id == SEC_CUSTOM:
            name = sec.name()
            m.custom.append((name, payload[sec.pos:]))
            continue
        if sec_id > SEC_DATA:
            if sec_id == 12:
                raise UnsupportedFeature("datacount section")
            raise MalformedBinary(at, f"unknown section id {sec_id}")
        if sec_id <= last_section:
            raise MalformedBinary(at, f"section {sec_id} out of order")
        last_section = sec_id

        if sec_id == SEC_TYPE:
            for _ in range(sec.u32()):
                fat = sec.off()
                form = sec.byte()
                if form != 0x60:
                    raise MalformedBinary(fat, f"bad type form 0x{form:02x}")
                params = tuple(sec.valtype() for _ in range(sec.u32()))
                nres = sec.u32()
                if nres > 1:
                    raise UnsupportedFeature("multi-value results")
                results = tuple(sec.valtype() for _ in range(nres))
                m.types.append(FuncType(params, results))
        elif sec_id == SEC_IMPORT:
            for _ in range(sec.u32()):
                mod = sec.name()
                name = sec.name()
                kat = sec.off()
                kind = sec.byte()
                if kind != 0:
                    raise UnsupportedFeature("non-function imports")
                m.imports.append(ImportDecl(mod, name, sec.u32()))
        elif sec_id == SEC_FUNC:
            func_type_indices = [sec.u32() for _ in range(sec.u32())]
        elif sec_id == SEC_TABLE:
            count = sec.u32()
            if count > 1:
                raise UnsupportedFeature("multiple tables")
            if count == 1:
                tat = sec.off()
                et = sec.byte()
                if et != 0x70:
                    raise MalformedBinary(tat, f"bad element type 0x{et:02x}")
                m.table = sec.limits()
        elif sec_id == SEC_MEMORY:
            count = sec.u32()
            if count > 1:
                raise UnsupportedFeature("multiple memories")
            if count == 1:
                m.memory = sec.limits()
        elif sec_id == SEC_GLOBAL:
            for _ in range(sec.u32()):
                gt = sec.valtype()
                mat = sec.off()
                mut = sec.byte()
                if mut > 1:
                    raise MalformedBinary(mat, f"bad mutability 0x{mut:02x}")
                init, ity = _const_expr(sec)
                m.globals.append(GlobalDecl(gt, bool(mut), (ity, init)))
        elif sec_id == SEC_EXPORT:
            for _ in range(sec.u32()):
                name = sec.name()
                kat = sec.off()
                kind = sec.byte()
                if kind not in _EXPORT_KINDS:
                    raise MalformedBinary(kat, f"bad export kind 0x{kind:02x}")
                m.exports.append(ExportDecl(name, _EXPORT_KINDS[kind], sec.u32()))
        elif sec_id == SEC_START:
            m.start = sec.u32()
        elif sec_id == SEC_ELEMENT:
            for _ in range(sec.u32()):
                tat = sec.off()
                if sec.u32() != 0:
                    raise MalformedBinary(tat, "element table index must be 0")
                off, ity = _const_expr(sec)
                if ity != "i32":
                    raise MalformedBinary(tat, "element offset must be i32")
                funcs = tuple(sec.u32() for _ in range(sec.u32()))
                m.elements.append(ElementSegment(off, funcs))
        elif sec_id == SEC_CODE:
            count = sec.u32()
            if func_type_indices is None or count != len(func_type_indices):
                raise MalformedBinary(at, "function/code section count mismatch")
            for i in range(count):
                body_size = sec.u32()
                entry_end = sec.pos + body_size
                if entry_end > len(payload):
                    raise MalformedBinary(sec.off(), "code entry overruns section")
                runs = []
                total = 0
                for _ in range(sec.u32()):
                    n = sec.u32()
                    t = sec.valtype()
                    runs.append((n, t))
                    total += n
                    if total > 50000:
                        raise MalformedBinary(sec.off(), "too many locals")
                expr = payload[sec.pos:entry_end]
                sec.pos = entry_end
                ti = func_type_indices[i]
                if ti >= len(m.types):
                    raise MalformedBinary(at, f"type index {ti} out of range")
                ftype = m.types[ti]
                local_types = list(ftype.params)
                for n, t in runs:
                    local_types.extend([t] * n)
                f = FuncDecl(ti, ftype, tuple(local_types), expr)
                f.local_runs = runs
                f.module = m
                f.func_index = len(m.imports) + len(m.funcs)
                m.funcs.append(f)
                # decodability check; structure and typing are validated later
                for _ in iter_instructions(f.pristine):
                    pass
        elif sec_id == SEC_DATA:
            for _ in range(sec.u32()):
                dat = sec.off()
                if sec.u32() != 0:
                    raise MalformedBinary(dat, "data memory index must be 0")
                off, ity = _const_expr(sec)
                if ity != "i32":
                    raise MalformedBinary(dat, "data offset must be i32")
                m.data.append(DataSegment(off, sec.bytes(sec.u32())))
        if not sec.eof():
            raise MalformedBinary(sec.off(), f"trailing bytes in section {sec_id}")

    if func_type_indices and not m.funcs:
        raise MalformedBinary(len(data), "function section without code section")
    return m


def _const_expr(r):
    """Decode `t.const <v> end`; returns (raw payload, type)."""
    at = r.off()
    op = r.byte()
    if op == 0x41:
        val, ty = r.s32() & 0xFFFFFFFF, "i32"
    elif op == 0x42:
        val, ty = r.s64() & 0xFFFFFFFFFFFFFFFF, "i64"
    elif op == 0x43:
        val, ty = struct.unpack("<f", r.bytes(4))[0], "f32"
    elif op == 0x44:
        val, ty = struct.unpack("<d", r.bytes(8))[0], "f64"
    elif op == 0x23:
        raise UnsupportedFeature("global.get initializers")
    else:
        raise MalformedBinary(at, f"unsupported init expression opcode 0x{op:02x}")
    eat = r.off()
    if r.byte() != 0x0B:
        raise MalformedBinary(eat, "init expression missing end")
    return val, ty


# ---------------------------------------------------------------------------
# re-encoding

def _uleb(n):
    out = bytearray()
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def _sleb(n):
    out = bytearray()
    while True:
        b = n & 0x7F
        n >>= 7
        done = (n == 0 and not b & 0x40) or (n == -1 and b & 0x40)
        if done:
            out.append(b)
            return bytes(out)
        out.append(b | 0x80)


def _name(s):
    raw = s.encode("utf-8")
    return _uleb(len(raw)) + raw


def _limits(lim):
    if lim.max is None:
        return b"\x00" + _uleb(lim.min)
    return b"\x01" + _uleb(lim.min) + _uleb(lim.max)


def _const_expr_bytes(ty, val):
    if ty == "i32":
        v = val - 0x100000000 if val >= 0x80000000 else val
        return b"\x41" + _sleb(v) + b"\x0b"
    if ty == "i64":
        v = val - 0x10000000000000000 if val >= 0x8000000000000000 else val
        return b"\x42" + _sleb(v) + b"\x0b"
    if ty == "f32":
        return b"\x43" + struct.pack("<f", val) + b"\x0b"
    return b"\x44" + struct.pack("<d", val) + b"\x0b"


def _section(sec_id, payload):
    return bytes([sec_id]) + _uleb(len(payload)) + payload


def _vec(items):
    return _uleb(len(items)) + b"".join(items)


def encode_module(m):
    """Re-encode a decoded module from its pristine bodies.

    Sections are emitted in canonical order with minimal LEB128 widths, so
    the result is byte-identical to the input for minimally-encoded modules
    (all fixtures in this repository).
    """
    out = bytearray(MAGIC + VERSION)
    if m.types:
        items = [
            b"\x60"
            + _vec([bytes([VALTYPE_TO_BYTE[t]]) for t in ft.params])
            + _vec([bytes([VALTYPE_TO_BYTE[t]]) for t in ft.results])
            for ft in m.types
        ]
        out += _section(SEC_TYPE, _vec(items))
    if m.imports:
        items = [
            _name(im.module) + _name(im.name) + b"\x00" + _uleb(im.type_index)
            for im in m.imports
        ]
        out += _section(SEC_IMPORT, _vec(items))
    if m.funcs:
        out += _section(SEC_FUNC, _vec([_uleb(f.type_index) for f in m.funcs]))
    if m.table is not None:
        out += _section(SEC_TABLE, _vec([b"\x70" + _limits(m.table)]))
    if m.memory is not None:
        out += _section(SEC_MEMORY, _vec([_limits(m.memory)]))
    if m.globals:
        items = [
            bytes([VALTYPE_TO_BYTE[g.type], 1 if g.mutable else 0])
            + _const_expr_bytes(g.init[0], g.init[1])
            for g in m.globals
        ]
        out += _section(SEC_GLOBAL, _vec(items))
    if m.exports:
        items = [
            _name(e.name) + bytes([_EXPORT_KIND_BYTES[e.kind]]) + _uleb(e.index)
            for e in m.exports
        ]
        out += _section(SEC_EXPORT, _vec(items))
    if m.start is not None:
        out += _section(SEC_START, _uleb(m.start))
    if m.elements:
        items = [
            _uleb(0) + _const_expr_bytes("i32", seg.offset)
            + _vec([_uleb(fi) for fi in seg.func_indices])
            for seg in m.elements
        ]
        out += _section(SEC_ELEMENT, _vec(items))
    if m.funcs:
        items = []
        for f in m.funcs:
            runs = getattr(f, "local_runs", None)
            if runs is None:
                runs = _compress_locals(f.local_types[f.num_params:])
            locals_bytes = _vec(
                [_uleb(n) + bytes([VALTYPE_TO_BYTE[t]]) for n, t in runs]
            )
            entry = locals_bytes + f.pristine
            items.append(_uleb(len(entry)) + entry)
        out += _section(SEC_CODE, _vec(items))
    if m.data:
        items = [
            _uleb(0) + _const_expr_bytes("i32", seg.offset)
            + _uleb(len(seg.data)) + seg.data
            for seg in m.data
        ]
        out += _section(SEC_DATA, _vec(items))
    for name, payload in m.custom:
        out += _section(SEC_CUSTOM, _name(name) + payload)
    return bytes(out)


def _compress_locals(types):
    runs = []
    for t in types:
        if runs and runs[-1][1] == t:
            runs[-1] = (runs[-1][0] + 1, t)
        else:
            runs.append((1, t))
    return runs
