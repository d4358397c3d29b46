"""Type-checking and side-table construction.

Validation walks each pristine body once with the classic value/control
stack algorithm. As a byproduct it fills the per-function side table the
in-place interpreter and the frame accessors rely on:

  next_pc[pc]   byte offset of the following instruction
  imm[pc]       decoded immediate (branch targets precomputed as BranchInfo)
  depth_at[pc]  operand-stack depth at the start of the instruction
  types_at[pc]  static operand-stack types at the start of the instruction

Branch targets: a branch to a `loop` label jumps back to the loop opcode
itself; a branch out of a `block`/`if` jumps past the matching `end`; a
branch to the function label jumps to the terminal `end`, which performs
the return.
"""

from dataclasses import dataclass

from .errors import ValidationError
from .module import BranchInfo, CodeLocation, I32
from .opcodes import MEM_ACCESS, OPCODES, IMM_I32, IMM_I64
from .parser import iter_instructions


@dataclass
class ValidationReport:
    ok: bool
    func_count: int
    instruction_count: int


class _Ctrl:
    __slots__ = ("kind", "end_types", "height", "unreachable", "pc",
                 "else_pc", "target")

    def __init__(self, kind, end_types, height, pc):
        self.kind = kind            # "func" | "block" | "loop" | "if" | "else"
        self.end_types = end_types
        self.height = height
        self.unreachable = False
        self.pc = pc
        self.else_pc = None
        self.target = None          # branch target pc, set when resolved


class _FuncValidator:
    def __init__(self, module, func_index, func):
        self.m = module
        self.func_index = func_index
        self.f = func
        self.vals = []              # value types; None = unknown (unreachable)
        self.ctrls = []
        self.pending = []           # (imm-patch closure, ctrl refs) for branches
        self.pc = 0

    def fail(self, reason):
        raise ValidationError(
            CodeLocation(self.m.id, self.func_index, self.pc), reason)

    # -- value stack ---------------------------------------------------------

    def push(self, t):
        self.vals.append(t)

    def pop(self):
        top = self.ctrls[-1]
        if len(self.vals) == top.height:
            if top.unreachable:
                return None
            self.fail("stack underflow")
        return self.vals.pop()

    def pop_expect(self, t):
        got = self.pop()
        if got is not None and got != t:
            self.fail(f"type mismatch: expected {t}, got {got}")
        return got

    # -- control stack -------------------------------------------------------

    def push_ctrl(self, kind, end_types, pc):
        self.ctrls.append(_Ctrl(kind, end_types, len(self.vals), pc))

    def pop_ctrl(self):
        if not self.ctrls:
            self.fail("end with no open block")
        top = self.ctrls[-1]
        for t in reversed(top.end_types):
            self.pop_expect(t)
        if len(self.vals) != top.height:
            self.fail("values left on stack at end of block")
        self.ctrls.pop()
        return top

    def label(self, depth):
        if depth >= len(self.ctrls):
            self.fail(f"branch label {depth} out of range")
        return self.ctrls[-1 - depth]

    @staticmethod
    def label_types(ctrl):
        return () if ctrl.kind == "loop" else ctrl.end_types

    def set_unreachable(self):
        top = self.ctrls[-1]
        del self.vals[top.height:]
        top.unreachable = True

    # -- branch bookkeeping ----------------------------------------------------

    def arm(self, ctrl):
        """Branch arm to `ctrl`; materialized once the target is resolved."""
        return (ctrl, ctrl.height, len(self.label_types(ctrl)))

    @staticmethod
    def finish_arm(arm):
        ctrl, pop_to, keep = arm
        assert ctrl.target is not None
        return BranchInfo(ctrl.target, pop_to, keep)

    # -- main walk -------------------------------------------------------------

    def run(self):
        f = self.f
        m = self.m
        body = f.pristine
        size = len(body)
        nxt = [0] * size
        imm = [None] * size
        depth_at = {}
        types_at = {}
        boundaries = []
        loop_headers = []
        return_pcs = []

        self.push_ctrl("func", f.type.results, -1)

        terminated = False
        for pc, op, mnem, imms, nxt_pc in iter_instructions(body):
            if terminated:
                self.pc = pc
                self.fail("trailing instructions after function end")
            self.pc = pc
            boundaries.append(pc)
            nxt[pc] = nxt_pc
            depth_at[pc] = len(self.vals)
            types_at[pc] = tuple(self.vals)
            info = OPCODES[op]

            if info.params is not None:
                # plain value op: fixed signature
                for t in reversed(info.params):
                    self.pop_expect(t)
                for t in info.results:
                    self.push(t)
                if mnem in MEM_ACCESS:
                    if m.memory is None:
                        self.fail(f"{mnem} without memory")
                    align, offset = imms
                    width = MEM_ACCESS[mnem][1]
                    if (1 << align) > width:
                        self.fail("alignment larger than natural")
                    imm[pc] = offset
                elif mnem in ("memory.size", "memory.grow"):
                    if m.memory is None:
                        self.fail(f"{mnem} without memory")
                elif info.imm == IMM_I32:
                    imm[pc] = imms[0] & 0xFFFFFFFF
                elif info.imm == IMM_I64:
                    imm[pc] = imms[0] & 0xFFFFFFFFFFFFFFFF
                elif mnem in ("f32.const", "f64.const"):
                    imm[pc] = imms[0]
                continue

            if mnem == "unreachable":
                self.set_unreachable()
            elif mnem == "block":
                self.push_ctrl("block", tuple(imms), pc)
            elif mnem == "loop":
                ctrl = _Ctrl("loop", tuple(imms), len(self.vals), pc)
                ctrl.target = pc
                self.ctrls.append(ctrl)
                loop_headers.append((pc, nxt_pc))
            elif mnem == "if":
                self.pop_expect(I32)
                self.push_ctrl("if", tuple(imms), pc)
            elif mnem == "else":
                top = self.ctrls[-1] if self.ctrls else None
                if top is None or top.kind != "if":
                    self.fail("else outside if")
                for t in reversed(top.end_types):
                    self.pop_expect(t)
                if len(self.vals) != top.height:
                    self.fail("values left on stack at else")
                top.kind = "else"
                top.else_pc = pc
                top.unreachable = False
            elif mnem == "end":
                ctrl = self.pop_ctrl()
                if ctrl.kind == "if" and ctrl.end_types:
                    self.fail("if without else cannot produce a value")
                for t in ctrl.end_types:
                    self.push(t)
                if ctrl.kind == "func":
                    ctrl.target = pc
                    terminated = True
                elif ctrl.kind in ("block", "if", "else"):
                    ctrl.target = nxt_pc
                    if ctrl.kind in ("if", "else"):
                        imm[ctrl.pc] = (ctrl.else_pc + 1
                                        if ctrl.else_pc is not None else pc)
                        if ctrl.else_pc is not None:
                            imm[ctrl.else_pc] = pc
                # loop target was resolved at push
            elif mnem == "br":
                ctrl = self.label(imms[0])
                for t in reversed(self.label_types(ctrl)):
                    self.pop_expect(t)
                self.pending.append((pc, "br", self.arm(ctrl)))
                self.set_unreachable()
            elif mnem == "br_if":
                self.pop_expect(I32)
                ctrl = self.label(imms[0])
                lts = self.label_types(ctrl)
                for t in reversed(lts):
                    self.pop_expect(t)
                for t in lts:
                    self.push(t)
                self.pending.append((pc, "br", self.arm(ctrl)))
            elif mnem == "br_table":
                self.pop_expect(I32)
                *targets, default = imms
                dctrl = self.label(default)
                arity = len(self.label_types(dctrl))
                arms = []
                for t in targets:
                    ctrl = self.label(t)
                    if len(self.label_types(ctrl)) != arity:
                        self.fail("br_table arity mismatch")
                    arms.append(self.arm(ctrl))
                for t in reversed(self.label_types(dctrl)):
                    self.pop_expect(t)
                self.pending.append((pc, "br_table", (arms, self.arm(dctrl))))
                self.set_unreachable()
            elif mnem == "return":
                for t in reversed(f.type.results):
                    self.pop_expect(t)
                return_pcs.append(pc)
                self.set_unreachable()
            elif mnem == "call":
                target = imms[0]
                if target >= m.num_imports + len(m.funcs):
                    self.fail(f"call to undefined function {target}")
                sig = m.func_type(target)
                for t in reversed(sig.params):
                    self.pop_expect(t)
                for t in sig.results:
                    self.push(t)
                imm[pc] = target
            elif mnem == "call_indirect":
                if m.table is None:
                    self.fail("call_indirect without table")
                ti = imms[0]
                if ti >= len(m.types):
                    self.fail(f"type index {ti} out of range")
                self.pop_expect(I32)
                sig = m.types[ti]
                for t in reversed(sig.params):
                    self.pop_expect(t)
                for t in sig.results:
                    self.push(t)
                imm[pc] = ti
            elif mnem == "drop":
                self.pop()
            elif mnem == "select":
                self.pop_expect(I32)
                t2 = self.pop()
                t1 = self.pop()
                if t1 is not None and t2 is not None and t1 != t2:
                    self.fail(f"select type mismatch: {t1} vs {t2}")
                self.push(t1 if t1 is not None else t2)
            elif mnem == "local.get":
                i = imms[0]
                if i >= len(f.local_types):
                    self.fail(f"local index {i} out of range")
                self.push(f.local_types[i])
                imm[pc] = i
            elif mnem == "local.set":
                i = imms[0]
                if i >= len(f.local_types):
                    self.fail(f"local index {i} out of range")
                self.pop_expect(f.local_types[i])
                imm[pc] = i
            elif mnem == "local.tee":
                i = imms[0]
                if i >= len(f.local_types):
                    self.fail(f"local index {i} out of range")
                self.pop_expect(f.local_types[i])
                self.push(f.local_types[i])
                imm[pc] = i
            elif mnem == "global.get":
                i = imms[0]
                if i >= len(m.globals):
                    self.fail(f"global index {i} out of range")
                self.push(m.globals[i].type)
                imm[pc] = i
            elif mnem == "global.set":
                i = imms[0]
                if i >= len(m.globals):
                    self.fail(f"global index {i} out of range")
                if not m.globals[i].mutable:
                    self.fail(f"global {i} is immutable")
                self.pop_expect(m.globals[i].type)
                imm[pc] = i
            else:  # pragma: no cover
                self.fail(f"unhandled instruction {mnem}")

        if not terminated:
            self.pc = size
            self.fail("missing terminal end")

        # materialize branch targets
        for pc, kind, data in self.pending:
            if kind == "br":
                imm[pc] = self.finish_arm(data)
            else:
                arms, default = data
                imm[pc] = (tuple(self.finish_arm(a) for a in arms),
                           self.finish_arm(default))

        f.next_pc = nxt
        f.imm = imm
        f.depth_at = depth_at
        f.types_at = types_at
        f.boundaries = boundaries
        f.end_pc = boundaries[-1]
        f.loop_headers = loop_headers
        f.return_pcs = return_pcs
        f.default_locals = [
            0 if t in ("i32", "i64") else 0.0
            for t in f.local_types[f.num_params:]
        ]
        return len(boundaries)


def validate_module(m):
    """Validate `m`, filling every function's side table.

    Raises ValidationError on the first problem found; returns a
    ValidationReport on success.
    """
    total_funcs = m.num_imports + len(m.funcs)
    for im in m.imports:
        if im.type_index >= len(m.types):
            raise ValidationError(
                None, f"import {im.module}.{im.name}: type index out of range")
    limits = {"func": total_funcs, "table": 1 if m.table else 0,
              "memory": 1 if m.memory else 0, "global": len(m.globals)}
    seen = set()
    for e in m.exports:
        if e.name in seen:
            raise ValidationError(None, f"duplicate export name {e.name!r}")
        seen.add(e.name)
        if e.index >= limits[e.kind]:
            raise ValidationError(
                None, f"export {e.name!r}: {e.kind} index {e.index} out of range")
    if m.start is not None:
        if m.start >= total_funcs:
            raise ValidationError(None, "start function index out of range")
        sig = m.func_type(m.start)
        if sig.params or sig.results:
            raise ValidationError(None, "start function must have type [] -> []")
    for seg in m.elements:
        if m.table is None:
            raise ValidationError(None, "element segment without table")
        for fi in seg.func_indices:
            if fi >= total_funcs:
                raise ValidationError(
                    None, f"element segment references function {fi}")
    if m.data and m.memory is None:
        raise ValidationError(None, "data segment without memory")
    if m.memory is not None:
        if m.memory.max is not None and m.memory.min > m.memory.max:
            raise ValidationError(None, "memory min exceeds max")

    instructions = 0
    for func_index, f in m.defined_funcs():
        instructions += _FuncValidator(m, func_index, f).run()
    m.validated = True
    return ValidationReport(True, len(m.funcs), instructions)
