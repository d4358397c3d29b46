"""In-place bytecode interpreter.

Dispatch is token-threaded: the run loop indexes a 256-entry handler table
with the live opcode byte at the current pc. The engine holds the table
selector (`self.dispatch`) in its own state so that enabling global probes
is a single reference swap; in NORMAL mode the table entries are the plain
handlers below and the per-instruction path contains no instrumentation
checks of any kind.

Handlers share the signature `handler(vm, frame) -> frame-or-None` and
execute exactly one instruction; `None` means the entry frame returned.
Immediates come from the validator's side table, never re-decoded.
"""

import enum
import math
import queue
import struct
import threading
import time

from .errors import (
    ArgumentError, HostError, LinkError, NoSuchExport, Trap, TrapKind,
    WasmError,
)
from .module import CodeLocation, PAGE_SIZE, Value, VALUE_TYPES
from .opcodes import NAME_TO_OPCODE, OPCODES, PROBE_OPCODE
from .probes import (
    Instrumenter, ProbeContext, ProbeList, global_probe_stub,
    interrupt_stub, probe_opcode_handler,
)

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF
SIGN32 = 0x80000000
SIGN64 = 0x8000000000000000

CALL_STACK_LIMIT = 10_000

_upf = struct.unpack_from
_pin = struct.pack_into


def _sgn32(n):
    return n - 0x100000000 if n & SIGN32 else n


def _sgn64(n):
    return n - 0x10000000000000000 if n & SIGN64 else n


def _idiv(a, b):
    # truncating division (Python // floors)
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _irem(a, b):
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _f32r(x):
    try:
        return struct.unpack("<f", struct.pack("<f", x))[0]
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def _fdiv(a, b):
    if b == 0.0:
        if a != a or a == 0.0:
            return math.nan
        neg = math.copysign(1.0, a) * math.copysign(1.0, b) < 0
        return -math.inf if neg else math.inf
    return a / b


def _fmin(a, b):
    if a != a or b != b:
        return math.nan
    if a == b:
        return a if math.copysign(1.0, a) < 0 else b
    return a if a < b else b


def _fmax(a, b):
    if a != a or b != b:
        return math.nan
    if a == b:
        return a if math.copysign(1.0, a) > 0 else b
    return a if a > b else b


def _ftrunc(x):
    if x != x or math.isinf(x) or x == 0.0:
        return x
    r = float(math.trunc(x))
    return math.copysign(r, x) if r == 0.0 else r


def _ffloor(x):
    if x != x or math.isinf(x) or x == 0.0:
        return x
    r = float(math.floor(x))
    return math.copysign(r, x) if r == 0.0 else r


def _fceil(x):
    if x != x or math.isinf(x) or x == 0.0:
        return x
    r = float(math.ceil(x))
    return math.copysign(r, x) if r == 0.0 else r


def _fnearest(x):
    if x != x or math.isinf(x) or x == 0.0:
        return x
    if abs(x) >= 2.0 ** 52:
        return x
    r = float(round(x))  # round-half-to-even
    return math.copysign(r, x) if r == 0.0 else r


def _fsqrt(x):
    if x != x:
        return x
    if x < 0.0:
        return math.nan
    return math.sqrt(x)


def _trunc_int(x, lo, hi):
    if x != x:
        raise Trap(TrapKind.INVALID_CONVERSION)
    if math.isinf(x):
        raise Trap(TrapKind.INT_OVERFLOW)
    t = math.trunc(x)
    if not lo <= t <= hi:
        raise Trap(TrapKind.INT_OVERFLOW)
    return t


class Frame:
    """One activation. `stack` is the engine's shared operand list; this
    frame's window starts at `base`."""

    __slots__ = ("func", "body", "nxt", "imm", "stack", "locals", "pc",
                 "base", "depth", "frame_id", "accessor_slot", "end_pc",
                 "arity")

    def __init__(self, func, stack, locals_, base, depth, frame_id):
        self.func = func
        self.body = func.body
        self.nxt = func.next_pc
        self.imm = func.imm
        self.stack = stack
        self.locals = locals_
        self.pc = 0
        self.base = base
        self.depth = depth
        self.frame_id = frame_id
        self.accessor_slot = None  # cleared on entry, by construction
        self.end_pc = func.end_pc
        self.arity = len(func.type.results)


def _push_frame(vm, func):
    if len(vm.frames) >= CALL_STACK_LIMIT:
        raise Trap(TrapKind.STACK_EXHAUSTED)
    stack = vm.stack
    np = func.num_params
    if np:
        locals_ = stack[-np:]
        del stack[-np:]
    else:
        locals_ = []
    locals_ += func.default_locals
    fid = vm.next_frame_id
    vm.next_frame_id = fid + 1
    fr = Frame(func, stack, locals_, len(stack), len(vm.frames) + 1, fid)
    vm.frames.append(fr)
    return fr


def _pop_frame(vm, frame):
    stack = frame.stack
    top = len(stack) - frame.arity
    if top > frame.base:
        del stack[frame.base:top]
    frames = vm.frames
    frames.pop()
    if frames:
        return frames[-1]
    return None


# ---------------------------------------------------------------------------
# handlers

HANDLERS = [None] * 256


def _op(name):
    def deco(fn):
        HANDLERS[NAME_TO_OPCODE[name]] = fn
        return fn
    return deco


def _install(name, fn):
    HANDLERS[NAME_TO_OPCODE[name]] = fn


@_op("unreachable")
def op_unreachable(vm, frame):
    raise Trap(TrapKind.UNREACHABLE)


@_op("nop")
def op_nop(vm, frame):
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("block")
def op_block(vm, frame):
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("loop")
def op_loop(vm, frame):
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("if")
def op_if(vm, frame):
    pc = frame.pc
    if frame.stack.pop():
        frame.pc = frame.nxt[pc]
    else:
        frame.pc = frame.imm[pc]
    return frame


@_op("else")
def op_else(vm, frame):
    # reached only by falling out of the then-arm; jump to the matching end
    frame.pc = frame.imm[frame.pc]
    return frame


@_op("end")
def op_end(vm, frame):
    pc = frame.pc
    if pc == frame.end_pc:
        return _pop_frame(vm, frame)
    frame.pc = frame.nxt[pc]
    return frame


def _take_branch(frame, info):
    s = frame.stack
    if info.keep:
        cut = frame.base + info.pop_to
        if len(s) > cut + 1:
            del s[cut:-1]
    else:
        cut = frame.base + info.pop_to
        if len(s) > cut:
            del s[cut:]
    frame.pc = info.target


@_op("br")
def op_br(vm, frame):
    _take_branch(frame, frame.imm[frame.pc])
    return frame


@_op("br_if")
def op_br_if(vm, frame):
    pc = frame.pc
    if frame.stack.pop():
        info = frame.imm[pc]
        s = frame.stack
        if info.keep:
            cut = frame.base + info.pop_to
            if len(s) > cut + 1:
                del s[cut:-1]
        else:
            cut = frame.base + info.pop_to
            if len(s) > cut:
                del s[cut:]
        frame.pc = info.target
    else:
        frame.pc = frame.nxt[pc]
    return frame


@_op("br_table")
def op_br_table(vm, frame):
    arms, default = frame.imm[frame.pc]
    idx = frame.stack.pop()
    _take_branch(frame, arms[idx] if idx < len(arms) else default)
    return frame


@_op("return")
def op_return(vm, frame):
    return _pop_frame(vm, frame)


def _call_host(vm, frame, host, pc):
    np = len(host.params)
    stack = frame.stack
    if np:
        args = stack[-np:]
        del stack[-np:]
    else:
        args = []
    try:
        res = host.fn(*args)
    except (Trap, WasmError):
        raise
    except Exception as e:
        raise HostError(f"host function {host.name!r} raised: {e!r}") from e
    if res is None:
        res = ()
    elif not isinstance(res, (tuple, list)):
        res = (res,)
    if len(res) != len(host.results):
        raise HostError(
            f"host function {host.name!r} returned {len(res)} values, "
            f"expected {len(host.results)}")
    for t, v in zip(host.results, res):
        if t == "i32":
            stack.append(v & MASK32)
        elif t == "i64":
            stack.append(v & MASK64)
        else:
            stack.append(float(v))
    frame.pc = frame.nxt[pc]
    return frame


@_op("call")
def op_call(vm, frame):
    pc = frame.pc
    target = vm.funcs[frame.imm[pc]]
    if target.__class__ is HostFunc:
        return _call_host(vm, frame, target, pc)
    frame.pc = frame.nxt[pc]
    return _push_frame(vm, target)


@_op("call_indirect")
def op_call_indirect(vm, frame):
    pc = frame.pc
    idx = frame.stack.pop()
    table = vm.table
    if idx >= len(table):
        raise Trap(TrapKind.INDIRECT_CALL_MISMATCH)
    fidx = table[idx]
    if fidx is None:
        raise Trap(TrapKind.INDIRECT_CALL_MISMATCH)
    expected = vm.module.types[frame.imm[pc]]
    target = vm.funcs[fidx]
    if target.__class__ is HostFunc:
        if (tuple(target.params), tuple(target.results)) != \
                (tuple(expected.params), tuple(expected.results)):
            raise Trap(TrapKind.INDIRECT_CALL_MISMATCH)
        return _call_host(vm, frame, target, pc)
    if target.type != expected:
        raise Trap(TrapKind.INDIRECT_CALL_MISMATCH)
    frame.pc = frame.nxt[pc]
    return _push_frame(vm, target)


@_op("drop")
def op_drop(vm, frame):
    frame.stack.pop()
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("select")
def op_select(vm, frame):
    s = frame.stack
    c = s.pop()
    b = s.pop()
    if not c:
        s[-1] = b
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("local.get")
def op_local_get(vm, frame):
    pc = frame.pc
    frame.stack.append(frame.locals[frame.imm[pc]])
    frame.pc = frame.nxt[pc]
    return frame


@_op("local.set")
def op_local_set(vm, frame):
    pc = frame.pc
    frame.locals[frame.imm[pc]] = frame.stack.pop()
    frame.pc = frame.nxt[pc]
    return frame


@_op("local.tee")
def op_local_tee(vm, frame):
    pc = frame.pc
    frame.locals[frame.imm[pc]] = frame.stack[-1]
    frame.pc = frame.nxt[pc]
    return frame


@_op("global.get")
def op_global_get(vm, frame):
    pc = frame.pc
    frame.stack.append(vm.globals[frame.imm[pc]])
    frame.pc = frame.nxt[pc]
    return frame


@_op("global.set")
def op_global_set(vm, frame):
    pc = frame.pc
    vm.globals[frame.imm[pc]] = frame.stack.pop()
    frame.pc = frame.nxt[pc]
    return frame


# memory access -------------------------------------------------------------

def _load(fmt, width, mask=None):
    def h(vm, frame):
        pc = frame.pc
        s = frame.stack
        ea = s[-1] + frame.imm[pc]
        mem = vm.mem
        if ea + width > len(mem):
            raise Trap(TrapKind.OUT_OF_BOUNDS)
        v = _upf(fmt, mem, ea)[0]
        s[-1] = v & mask if mask is not None else v
        frame.pc = frame.nxt[pc]
        return frame
    return h


def _store(fmt, width, wrap=None):
    def h(vm, frame):
        pc = frame.pc
        s = frame.stack
        v = s.pop()
        ea = s.pop() + frame.imm[pc]
        mem = vm.mem
        if ea + width > len(mem):
            raise Trap(TrapKind.OUT_OF_BOUNDS)
        _pin(fmt, mem, ea, v & wrap if wrap is not None else v)
        frame.pc = frame.nxt[pc]
        return frame
    return h


_install("i32.load", _load("<I", 4))
_install("i64.load", _load("<Q", 8))
_install("f32.load", _load("<f", 4))
_install("f64.load", _load("<d", 8))
_install("i32.load8_s", _load("<b", 1, MASK32))
_install("i32.load8_u", _load("<B", 1))
_install("i32.load16_s", _load("<h", 2, MASK32))
_install("i32.load16_u", _load("<H", 2))
_install("i64.load8_s", _load("<b", 1, MASK64))
_install("i64.load8_u", _load("<B", 1))
_install("i64.load16_s", _load("<h", 2, MASK64))
_install("i64.load16_u", _load("<H", 2))
_install("i64.load32_s", _load("<i", 4, MASK64))
_install("i64.load32_u", _load("<I", 4))
_install("i32.store", _store("<I", 4))
_install("i64.store", _store("<Q", 8))
_install("f32.store", _store("<f", 4))
_install("f64.store", _store("<d", 8))
_install("i32.store8", _store("<B", 1, 0xFF))
_install("i32.store16", _store("<H", 2, 0xFFFF))
_install("i64.store8", _store("<B", 1, 0xFF))
_install("i64.store16", _store("<H", 2, 0xFFFF))
_install("i64.store32", _store("<I", 4, MASK32))


@_op("memory.size")
def op_memory_size(vm, frame):
    frame.stack.append(len(vm.mem) // PAGE_SIZE)
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("memory.grow")
def op_memory_grow(vm, frame):
    s = frame.stack
    delta = s[-1]
    mem = vm.mem
    cur = len(mem) // PAGE_SIZE
    if cur + delta > vm.instance.mem_max:
        s[-1] = MASK32  # -1
    else:
        try:
            mem.extend(bytes(delta * PAGE_SIZE))
            s[-1] = cur
        except MemoryError:
            s[-1] = MASK32
    frame.pc = frame.nxt[frame.pc]
    return frame


# constants -------------------------------------------------------------------

def _const(vm, frame):
    pc = frame.pc
    frame.stack.append(frame.imm[pc])
    frame.pc = frame.nxt[pc]
    return frame


for _name in ("i32.const", "i64.const", "f32.const", "f64.const"):
    _install(_name, _const)


# numeric ops -----------------------------------------------------------------
# Hot i32 handlers are written out; the long tail is built from factories.

@_op("i32.add")
def op_i32_add(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = (s[-1] + b) & MASK32
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.sub")
def op_i32_sub(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = (s[-1] - b) & MASK32
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.mul")
def op_i32_mul(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = (s[-1] * b) & MASK32
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.and")
def op_i32_and(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] &= b
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.or")
def op_i32_or(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] |= b
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.xor")
def op_i32_xor(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] ^= b
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.eqz")
def op_i32_eqz(vm, frame):
    s = frame.stack
    s[-1] = 0 if s[-1] else 1
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.eq")
def op_i32_eq(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = 1 if s[-1] == b else 0
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.ne")
def op_i32_ne(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = 1 if s[-1] != b else 0
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.lt_u")
def op_i32_lt_u(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = 1 if s[-1] < b else 0
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.lt_s")
def op_i32_lt_s(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = 1 if _sgn32(s[-1]) < _sgn32(b) else 0
    frame.pc = frame.nxt[frame.pc]
    return frame


@_op("i32.gt_s")
def op_i32_gt_s(vm, frame):
    s = frame.stack
    b = s.pop()
    s[-1] = 1 if _sgn32(s[-1]) > _sgn32(b) else 0
    frame.pc = frame.nxt[frame.pc]
    return frame


def _bin(fn):
    def h(vm, frame):
        s = frame.stack
        b = s.pop()
        s[-1] = fn(s[-1], b)
        frame.pc = frame.nxt[frame.pc]
        return frame
    return h


def _un(fn):
    def h(vm, frame):
        s = frame.stack
        s[-1] = fn(s[-1])
        frame.pc = frame.nxt[frame.pc]
        return frame
    return h


def _cmp(fn):
    def h(vm, frame):
        s = frame.stack
        b = s.pop()
        s[-1] = 1 if fn(s[-1], b) else 0
        frame.pc = frame.nxt[frame.pc]
        return frame
    return h


def _i32_div_s(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    sa, sb = _sgn32(a), _sgn32(b)
    if sa == -SIGN32 and sb == -1:
        raise Trap(TrapKind.INT_OVERFLOW)
    return _idiv(sa, sb) & MASK32


def _i32_div_u(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return a // b


def _i32_rem_s(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return _irem(_sgn32(a), _sgn32(b)) & MASK32


def _i32_rem_u(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return a % b


def _i64_div_s(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    sa, sb = _sgn64(a), _sgn64(b)
    if sa == -SIGN64 and sb == -1:
        raise Trap(TrapKind.INT_OVERFLOW)
    return _idiv(sa, sb) & MASK64


def _i64_div_u(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return a // b


def _i64_rem_s(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return _irem(_sgn64(a), _sgn64(b)) & MASK64


def _i64_rem_u(a, b):
    if b == 0:
        raise Trap(TrapKind.DIV_BY_ZERO)
    return a % b


_NUMERIC = {
    "i32.clz": _un(lambda a: 32 - a.bit_length()),
    "i32.ctz": _un(lambda a: 32 if a == 0 else (a & -a).bit_length() - 1),
    "i32.popcnt": _un(lambda a: a.bit_count()),
    "i32.div_s": _bin(_i32_div_s),
    "i32.div_u": _bin(_i32_div_u),
    "i32.rem_s": _bin(_i32_rem_s),
    "i32.rem_u": _bin(_i32_rem_u),
    "i32.shl": _bin(lambda a, b: (a << (b & 31)) & MASK32),
    "i32.shr_u": _bin(lambda a, b: a >> (b & 31)),
    "i32.shr_s": _bin(lambda a, b: (_sgn32(a) >> (b & 31)) & MASK32),
    "i32.rotl": _bin(lambda a, b: ((a << (b & 31)) | (a >> (32 - (b & 31)))) & MASK32
                     if b & 31 else a),
    "i32.rotr": _bin(lambda a, b: ((a >> (b & 31)) | (a << (32 - (b & 31)))) & MASK32
                     if b & 31 else a),
    "i32.gt_u": _cmp(lambda a, b: a > b),
    "i32.le_s": _cmp(lambda a, b: _sgn32(a) <= _sgn32(b)),
    "i32.le_u": _cmp(lambda a, b: a <= b),
    "i32.ge_s": _cmp(lambda a, b: _sgn32(a) >= _sgn32(b)),
    "i32.ge_u": _cmp(lambda a, b: a >= b),

    "i64.clz": _un(lambda a: 64 - a.bit_length()),
    "i64.ctz": _un(lambda a: 64 if a == 0 else (a & -a).bit_length() - 1),
    "i64.popcnt": _un(lambda a: a.bit_count()),
    "i64.add": _bin(lambda a, b: (a + b) & MASK64),
    "i64.sub": _bin(lambda a, b: (a - b) & MASK64),
    "i64.mul": _bin(lambda a, b: (a * b) & MASK64),
    "i64.div_s": _bin(_i64_div_s),
    "i64.div_u": _bin(_i64_div_u),
    "i64.rem_s": _bin(_i64_rem_s),
    "i64.rem_u": _bin(_i64_rem_u),
    "i64.and": _bin(lambda a, b: a & b),
    "i64.or": _bin(lambda a, b: a | b),
    "i64.xor": _bin(lambda a, b: a ^ b),
    "i64.shl": _bin(lambda a, b: (a << (b & 63)) & MASK64),
    "i64.shr_u": _bin(lambda a, b: a >> (b & 63)),
    "i64.shr_s": _bin(lambda a, b: (_sgn64(a) >> (b & 63)) & MASK64),
    "i64.rotl": _bin(lambda a, b: ((a << (b & 63)) | (a >> (64 - (b & 63)))) & MASK64
                     if b & 63 else a),
    "i64.rotr": _bin(lambda a, b: ((a >> (b & 63)) | (a << (64 - (b & 63)))) & MASK64
                     if b & 63 else a),
    "i64.eqz": _un(lambda a: 0 if a else 1),
    "i64.eq": _cmp(lambda a, b: a == b),
    "i64.ne": _cmp(lambda a, b: a != b),
    "i64.lt_s": _cmp(lambda a, b: _sgn64(a) < _sgn64(b)),
    "i64.lt_u": _cmp(lambda a, b: a < b),
    "i64.gt_s": _cmp(lambda a, b: _sgn64(a) > _sgn64(b)),
    "i64.gt_u": _cmp(lambda a, b: a > b),
    "i64.le_s": _cmp(lambda a, b: _sgn64(a) <= _sgn64(b)),
    "i64.le_u": _cmp(lambda a, b: a <= b),
    "i64.ge_s": _cmp(lambda a, b: _sgn64(a) >= _sgn64(b)),
    "i64.ge_u": _cmp(lambda a, b: a >= b),

    "f32.abs": _un(lambda a: abs(a)),
    "f32.neg": _un(lambda a: -a),
    "f32.ceil": _un(_fceil),
    "f32.floor": _un(_ffloor),
    "f32.trunc": _un(_ftrunc),
    "f32.nearest": _un(_fnearest),
    "f32.sqrt": _un(lambda a: _f32r(_fsqrt(a))),
    "f32.add": _bin(lambda a, b: _f32r(a + b)),
    "f32.sub": _bin(lambda a, b: _f32r(a - b)),
    "f32.mul": _bin(lambda a, b: _f32r(a * b)),
    "f32.div": _bin(lambda a, b: _f32r(_fdiv(a, b))),
    "f32.min": _bin(_fmin),
    "f32.max": _bin(_fmax),
    "f32.copysign": _bin(lambda a, b: math.copysign(a, b)),
    "f32.eq": _cmp(lambda a, b: a == b),
    "f32.ne": _cmp(lambda a, b: a != b),
    "f32.lt": _cmp(lambda a, b: a < b),
    "f32.gt": _cmp(lambda a, b: a > b),
    "f32.le": _cmp(lambda a, b: a <= b),
    "f32.ge": _cmp(lambda a, b: a >= b),

    "f64.abs": _un(lambda a: abs(a)),
    "f64.neg": _un(lambda a: -a),
    "f64.ceil": _un(_fceil),
    "f64.floor": _un(_ffloor),
    "f64.trunc": _un(_ftrunc),
    "f64.nearest": _un(_fnearest),
    "f64.sqrt": _un(_fsqrt),
    "f64.add": _bin(lambda a, b: a + b),
    "f64.sub": _bin(lambda a, b: a - b),
    "f64.mul": _bin(lambda a, b: a * b),
    "f64.div": _bin(_fdiv),
    "f64.min": _bin(_fmin),
    "f64.max": _bin(_fmax),
    "f64.copysign": _bin(lambda a, b: math.copysign(a, b)),
    "f64.eq": _cmp(lambda a, b: a == b),
    "f64.ne": _cmp(lambda a, b: a != b),
    "f64.lt": _cmp(lambda a, b: a < b),
    "f64.gt": _cmp(lambda a, b: a > b),
    "f64.le": _cmp(lambda a, b: a <= b),
    "f64.ge": _cmp(lambda a, b: a >= b),

    "i32.wrap_i64": _un(lambda a: a & MASK32),
    "i32.trunc_f32_s": _un(lambda a: _trunc_int(a, -SIGN32, SIGN32 - 1) & MASK32),
    "i32.trunc_f32_u": _un(lambda a: _trunc_int(a, 0, MASK32)),
    "i32.trunc_f64_s": _un(lambda a: _trunc_int(a, -SIGN32, SIGN32 - 1) & MASK32),
    "i32.trunc_f64_u": _un(lambda a: _trunc_int(a, 0, MASK32)),
    "i64.extend_i32_s": _un(lambda a: _sgn32(a) & MASK64),
    "i64.extend_i32_u": _un(lambda a: a),
    "i64.trunc_f32_s": _un(lambda a: _trunc_int(a, -SIGN64, SIGN64 - 1) & MASK64),
    "i64.trunc_f32_u": _un(lambda a: _trunc_int(a, 0, MASK64)),
    "i64.trunc_f64_s": _un(lambda a: _trunc_int(a, -SIGN64, SIGN64 - 1) & MASK64),
    "i64.trunc_f64_u": _un(lambda a: _trunc_int(a, 0, MASK64)),
    "f32.convert_i32_s": _un(lambda a: _f32r(float(_sgn32(a)))),
    "f32.convert_i32_u": _un(lambda a: _f32r(float(a))),
    "f32.convert_i64_s": _un(lambda a: _f32r(float(_sgn64(a)))),
    "f32.convert_i64_u": _un(lambda a: _f32r(float(a))),
    "f32.demote_f64": _un(_f32r),
    "f64.convert_i32_s": _un(lambda a: float(_sgn32(a))),
    "f64.convert_i32_u": _un(lambda a: float(a)),
    "f64.convert_i64_s": _un(lambda a: float(_sgn64(a))),
    "f64.convert_i64_u": _un(lambda a: float(a)),
    "f64.promote_f32": _un(lambda a: a),
    "i32.reinterpret_f32": _un(
        lambda a: struct.unpack("<I", struct.pack("<f", a))[0]),
    "i64.reinterpret_f64": _un(
        lambda a: struct.unpack("<Q", struct.pack("<d", a))[0]),
    "f32.reinterpret_i32": _un(
        lambda a: struct.unpack("<f", struct.pack("<I", a))[0]),
    "f64.reinterpret_i64": _un(
        lambda a: struct.unpack("<d", struct.pack("<Q", a))[0]),
}

for _name, _h in _NUMERIC.items():
    _install(_name, _h)
del _NUMERIC


def _op_illegal(vm, frame):
    raise WasmError(
        f"illegal opcode 0x{frame.body[frame.pc]:02x} at pc {frame.pc}")


for _i in range(256):
    if HANDLERS[_i] is None:
        HANDLERS[_i] = _op_illegal

# sanity: every supported opcode got a real handler
for _opcode in OPCODES:
    assert HANDLERS[_opcode] is not _op_illegal, OPCODES[_opcode].mnemonic

STRIPPED_TABLE = tuple(HANDLERS)

NORMAL_TABLE = list(HANDLERS)
NORMAL_TABLE[PROBE_OPCODE] = probe_opcode_handler
NORMAL_TABLE = tuple(NORMAL_TABLE)

GLOBAL_PROBE_TABLE = tuple([global_probe_stub] * 256)
INTERRUPT_TABLE = tuple([interrupt_stub] * 256)


# ---------------------------------------------------------------------------
# engine

class DispatchMode(enum.Enum):
    NORMAL = "normal"
    GLOBAL_PROBE = "global-probe"


class StepOutcome(enum.Enum):
    CONTINUED = "continued"
    RETURNED = "returned"
    TRAPPED = "trapped"


class HostFunc:
    __slots__ = ("name", "params", "results", "fn")

    def __init__(self, name, params, results, fn):
        self.name = name
        self.params = tuple(params)
        self.results = tuple(results)
        self.fn = fn


def default_imports(stdout=None):
    """The built-in "env" import set: print_i32, print_ln, now_us."""
    import sys

    def out():
        return stdout if stdout is not None else sys.stdout

    return {
        "print_i32": HostFunc(
            "print_i32", ("i32",), (),
            lambda v: out().write(str(_sgn32(v)))),
        "print_ln": HostFunc(
            "print_ln", (), (), lambda: out().write("\n")),
        "now_us": HostFunc(
            "now_us", (), ("i64",),
            lambda: (time.monotonic_ns() // 1000) & MASK64),
    }


class Instance:
    """Instantiated module state: memory, globals, table, host imports."""

    __slots__ = ("module", "memory", "mem_max", "globals", "global_types",
                 "table", "hosts")

    def __init__(self, module):
        self.module = module
        self.memory = bytearray()
        self.mem_max = 0
        self.globals = []
        self.global_types = []
        self.table = []
        self.hosts = []


class Engine:
    """One execution context over one instantiated module.

    All Wasm-state mutation happens on the thread that called invoke(); other
    threads may only enqueue commands (drained at probe firings and pauses)
    or use the probe API while the engine is paused.
    """

    def __init__(self, module, check_frames=False):
        if not module.validated:
            raise WasmError("module must be validated before execution")
        self.module = module
        self.stack = []
        self.frames = []
        self.next_frame_id = 1
        self.check_frames = check_frames

        self.normal_table = NORMAL_TABLE
        self.tables = {DispatchMode.NORMAL: NORMAL_TABLE,
                       DispatchMode.GLOBAL_PROBE: GLOBAL_PROBE_TABLE}
        self.mode = DispatchMode.NORMAL
        self.dispatch = NORMAL_TABLE

        self.global_probes = ProbeList()
        self.probe_ctx = ProbeContext(self)
        self.instrumentation = Instrumenter(self)

        self.commands = queue.Queue()
        self.event_sink = None
        self.pause_hook = None
        self.paused = False
        self.pause_location = None
        self.running = False
        self.exec_thread = None

        self.instance = None
        self.mem = bytearray()
        self.globals = []
        self.table = []
        self.funcs = []

    # -- exec_core surface ----------------------------------------------------

    def set_dispatch_mode(self, mode):
        """Swap the active dispatch table. Takes effect on the very next
        instruction dispatch; idempotent."""
        self.mode = mode
        self.dispatch = self.tables[mode]

    def original_opcode(self, loc):
        """The pristine opcode byte at `loc`, regardless of installed probes."""
        func, pc = self.instrumentation.resolve(loc)
        return func.pristine[pc]

    def location(self):
        """CodeLocation of the current (top) frame."""
        fr = self.frames[-1]
        return CodeLocation(self.module.id, fr.func.func_index, fr.pc)

    # -- instantiation ----------------------------------------------------------

    def instantiate(self, imports=None, stdout=None):
        m = self.module
        inst = Instance(m)

        provided = default_imports(stdout)
        if imports:
            provided.update(imports)
        for im in m.imports:
            if im.module != "env":
                raise LinkError(f"unknown import module {im.module!r}")
            h = provided.get(im.name)
            if h is None:
                raise LinkError(f"missing import env.{im.name}")
            sig = m.types[im.type_index]
            if not isinstance(h, HostFunc):
                h = HostFunc(im.name, sig.params, sig.results, h)
            if (h.params, h.results) != (sig.params, sig.results):
                raise LinkError(
                    f"import env.{im.name} signature mismatch: "
                    f"{h.params}->{h.results} vs {sig.params}->{sig.results}")
            inst.hosts.append(h)

        if m.memory is not None:
            inst.memory = bytearray(m.memory.min * PAGE_SIZE)
            inst.mem_max = m.memory.max if m.memory.max is not None else 65536
        for seg in m.data:
            if seg.offset + len(seg.data) > len(inst.memory):
                raise Trap(TrapKind.OUT_OF_BOUNDS)
            inst.memory[seg.offset:seg.offset + len(seg.data)] = seg.data

        for g in m.globals:
            inst.global_types.append(g.type)
            inst.globals.append(g.init[1])

        if m.table is not None:
            inst.table = [None] * m.table.min
        for seg in m.elements:
            if seg.offset + len(seg.func_indices) > len(inst.table):
                raise Trap(TrapKind.OUT_OF_BOUNDS)
            for i, fi in enumerate(seg.func_indices):
                inst.table[seg.offset + i] = fi

        self.instance = inst
        self.mem = inst.memory
        self.globals = inst.globals
        self.table = inst.table
        self.funcs = list(inst.hosts) + list(m.funcs)

        if m.start is not None:
            self._call(m.start, [])
        return inst

    # -- invocation --------------------------------------------------------------

    def invoke(self, name, args=()):
        """Run an exported function. `args` and results are typed Values."""
        if self.instance is None:
            raise WasmError("instantiate() before invoke()")
        export = self.module.export_map().get(name)
        if export is None or export.kind != "func":
            raise NoSuchExport(f"no exported function {name!r}")
        sig = self.module.func_type(export.index)
        if len(args) != len(sig.params):
            raise ArgumentError(
                f"{name} expects {len(sig.params)} arguments, got {len(args)}")
        raw = []
        for v, t in zip(args, sig.params):
            if not isinstance(v, Value) or v.type != t:
                raise ArgumentError(f"argument type mismatch: want {t}, got {v!r}")
            raw.append(v.payload)
        results = self._call(export.index, raw)
        return [Value(t, p) for t, p in zip(sig.results, results)]

    def _call(self, func_index, raw_args):
        self.stack.clear()
        self.frames.clear()
        self.stack.extend(raw_args)
        target = self.funcs[func_index]
        if target.__class__ is HostFunc:
            res = target.fn(*raw_args)
            if res is None:
                res = ()
            elif not isinstance(res, (tuple, list)):
                res = (res,)
            return list(res)
        _push_frame(self, target)
        self._run()
        return list(self.stack)

    def _run(self):
        self.running = True
        self.exec_thread = threading.get_ident()
        frame = self.frames[-1]
        try:
            while frame is not None:
                frame = self.dispatch[frame.body[frame.pc]](self, frame)
        except Trap as t:
            if t.location is None and self.frames:
                fr = self.frames[-1]
                t.location = CodeLocation(
                    self.module.id, fr.func.func_index, fr.pc)
            raise
        finally:
            self.running = False

    # -- pause / command machinery --------------------------------------------

    def emit(self, event, params):
        sink = self.event_sink
        if sink is not None:
            sink(event, params)

    def post(self, fn, resume=False):
        """Thread-safe: enqueue `fn` to run on the engine thread at the next
        probe firing or pause point."""
        self.commands.put((fn, resume))

    def request_interrupt(self):
        """Thread-safe: make the engine drain its command queue before the
        next dispatched instruction (one reference swap, no polling)."""
        self.dispatch = INTERRUPT_TABLE

    def drain_commands(self):
        while True:
            try:
                fn, _ = self.commands.get_nowait()
            except queue.Empty:
                return
            if fn is not None:
                fn()

    def pause(self, location, reason):
        """Block at an instruction boundary until resumed. Called from probe
        callbacks on the engine thread."""
        self.paused = True
        self.pause_location = location
        self.emit("paused", {"func": location.func_index, "pc": location.pc,
                             "reason": reason})
        try:
            if self.pause_hook is not None:
                self.pause_hook(location, reason)
            else:
                while True:
                    fn, resume = self.commands.get()
                    if fn is not None:
                        fn()
                    if resume:
                        break
        finally:
            self.paused = False
            self.pause_location = None

    def in_probe_context(self):
        if not self.running:
            return True
        if self.paused:
            return True
        return threading.get_ident() == self.exec_thread


class StrippedEngine(Engine):
    """Build-time-stripped baseline: the dispatch table is fixed to the plain
    handlers and there is no probe, pause, or mode-switch support."""

    def __init__(self, module):
        super().__init__(module)
        self.tables = {DispatchMode.NORMAL: STRIPPED_TABLE}
        self.dispatch = STRIPPED_TABLE
        self.normal_table = STRIPPED_TABLE
        self.instrumentation = None

    def set_dispatch_mode(self, mode):
        raise WasmError("stripped engine has no instrumentation support")


class Execution:
    """Threaded wrapper: runs invoke() on a worker thread so a controlling
    thread can pause, inspect, and single-step the execution."""

    def __init__(self, engine):
        self.engine = engine
        engine.event_sink = self._event
        self.events = queue.Queue()
        self.thread = None
        self.result = None
        self.trap = None
        self.error = None

    def _event(self, name, params):
        self.events.put((name, params))

    def start(self, name, args=()):
        def run():
            try:
                self.result = self.engine.invoke(name, args)
                self.events.put(("exited", {"code": 0}))
            except Trap as t:
                self.trap = t
                self.events.put(("trapped", {"kind": t.kind}))
            except Exception as e:  # surfaced to the controller
                self.error = e
                self.events.put(("error", {"message": str(e)}))

        self.thread = threading.Thread(target=run, daemon=True)
        self.thread.start()
        return self

    def wait_event(self, timeout=30.0):
        return self.events.get(timeout=timeout)

    def post(self, fn, resume=False):
        self.engine.post(fn, resume)

    def resume(self):
        self.engine.post(None, True)

    def step(self, timeout=30.0):
        """From a pause: run exactly one instruction (after its probes), then
        pause again. Returns how execution proceeded."""
        eng = self.engine
        instr = eng.instrumentation

        def arm():
            from .probes import CallbackProbe

            def hit(ctx):
                instr.remove_global_probe(shot)
                eng.pause(ctx.location(), "step")

            shot = CallbackProbe(hit)
            instr.insert_global_probe(shot)

        self.post(arm, resume=True)
        name, params = self.wait_event(timeout)
        if name == "paused":
            return StepOutcome.CONTINUED
        if name == "exited":
            return StepOutcome.RETURNED
        if name == "trapped":
            return StepOutcome.TRAPPED
        raise WasmError(f"unexpected event during step: {name} {params}")

    def join(self, timeout=30.0):
        self.thread.join(timeout)
        if self.thread.is_alive():
            raise WasmError("execution did not finish")
        if self.error is not None:
            raise self.error
        return self.result
