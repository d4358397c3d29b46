"""Fixture corpus: small deterministic programs covering every supported
opcode class, built with the independent test assembler. Each fixture can
run on the engine (from its binary) and on the oracle (from its assembler
description); tests compare the two on event streams and final state."""

import io
import struct

from wasmprobe import Engine, Trap, Value, parse_module, validate_module

from .oracle import Oracle, result_bits
from .wasm_asm import Assembled, Func, Import, assemble

MASK = {"i32": 0xFFFFFFFF, "i64": 0xFFFFFFFFFFFFFFFF}


class Fixture:
    def __init__(self, name, asm, entry="main", args=()):
        self.name = name
        self.asm = asm
        self.entry = entry
        self.args = tuple(args)  # raw signed values

    def engine_args(self):
        out = []
        func = self.asm.by_name[self.entry]
        for t, v in zip(func.params, self.args):
            if t in MASK:
                out.append(Value(t, v & MASK[t]))
            else:
                out.append(Value(t, float(v)))
        return out

    def oracle(self):
        o = Oracle(self.asm)
        o.run(self.entry, self.args)
        return o

    def __repr__(self):
        return f"<fixture {self.name}>"


class EngineRun:
    def __init__(self, engine, module, results, trap, stdout):
        self.engine = engine
        self.module = module
        self.results = results
        self.trap = trap
        self.stdout = stdout

    def fingerprint(self):
        eng = self.engine
        inst = eng.instance
        g_bits = tuple(
            _bits(t, v) for t, v in zip(inst.global_types, eng.globals))
        res = None
        if self.results is not None:
            res = result_bits([v.type for v in self.results],
                              [_unsign_to_signed(v) for v in self.results])
        return (bytes(eng.mem), g_bits, res, self.trap, self.stdout)


def _bits(t, v):
    if t == "i32":
        return v & 0xFFFFFFFF
    if t == "i64":
        return v & 0xFFFFFFFFFFFFFFFF
    if t == "f32":
        return struct.unpack("<I", struct.pack("<f", v))[0]
    return struct.unpack("<Q", struct.pack("<d", v))[0]


def _unsign_to_signed(value):
    return value.signed() if value.type in MASK else value.payload


def build_engine(fix, engine_cls=Engine, check_frames=False):
    m = parse_module(fix.asm.bytes)
    validate_module(m)
    if engine_cls is Engine:
        return engine_cls(m, check_frames=check_frames), m
    return engine_cls(m), m


def run_fixture(fix, engine_cls=Engine, setup=None, check_frames=False):
    """Parse, validate, (optionally) instrument, instantiate, invoke."""
    eng, m = build_engine(fix, engine_cls, check_frames)
    if setup is not None:
        setup(eng, m)
    buf = io.StringIO()
    results = None
    trap = None
    try:
        eng.instantiate(stdout=buf)
        results = eng.invoke(fix.entry, fix.engine_args())
    except Trap as t:
        trap = t.kind
    return EngineRun(eng, m, results, trap, buf.getvalue())


def pc_of(asm_func, mnemonic, occurrence=0):
    """pc of the nth occurrence of `mnemonic` in an assembled function."""
    seen = 0
    for pc, mnem, _args in asm_func.instrs:
        if mnem == mnemonic:
            if seen == occurrence:
                return pc
            seen += 1
    raise LookupError(f"{mnemonic} #{occurrence} not in {asm_func.name}")


# ---------------------------------------------------------------------------
# the corpus


def _loop3():
    return assemble([Func(
        export="main", locals=["i32"],
        body=[
            ("i32.const", 3), ("local.set", 0),
            ("loop",),
            ("local.get", 0), ("i32.const", 1), ("i32.sub",),
            ("local.tee", 0), ("br_if", 0),
            ("end",),
            ("end",),
        ])])


def _empty():
    return assemble([Func(export="main", body=[("end",)])])


def _arith_i32():
    ops2 = ["i32.add", "i32.sub", "i32.mul", "i32.div_s", "i32.div_u",
            "i32.rem_s", "i32.rem_u", "i32.and", "i32.or", "i32.xor",
            "i32.shl", "i32.shr_s", "i32.shr_u", "i32.rotl", "i32.rotr",
            "i32.eq", "i32.ne", "i32.lt_s", "i32.lt_u", "i32.gt_s",
            "i32.gt_u", "i32.le_s", "i32.le_u", "i32.ge_s", "i32.ge_u"]
    body = []
    for i, op in enumerate(ops2):
        body += [("i32.const", -1234567 + i * 7919),
                 ("i32.const", 891 + i * 13), (op,),
                 ("global.get", 0), ("i32.add",), ("global.set", 0)]
    for i, op in enumerate(["i32.clz", "i32.ctz", "i32.popcnt", "i32.eqz"]):
        body += [("i32.const", 0x00F0F00F << i), (op,),
                 ("global.get", 0), ("i32.xor",), ("global.set", 0)]
    body += [("end",)]
    return assemble([Func(export="main", body=body)],
                    globals=[("i32", True, 0)])


def _arith_i64():
    ops2 = ["i64.add", "i64.sub", "i64.mul", "i64.div_s", "i64.div_u",
            "i64.rem_s", "i64.rem_u", "i64.and", "i64.or", "i64.xor",
            "i64.shl", "i64.shr_s", "i64.shr_u", "i64.rotl", "i64.rotr"]
    cmps = ["i64.eq", "i64.ne", "i64.lt_s", "i64.lt_u", "i64.gt_s",
            "i64.gt_u", "i64.le_s", "i64.le_u", "i64.ge_s", "i64.ge_u"]
    body = []
    for i, op in enumerate(ops2):
        body += [("i64.const", -(1 << 40) + i * 104729),
                 ("i64.const", (1 << 33) + i * 17), (op,),
                 ("global.get", 0), ("i64.xor",), ("global.set", 0)]
    for i, op in enumerate(cmps):
        body += [("i64.const", -5 + i), ("i64.const", 3), (op,),
                 ("global.get", 1), ("i32.add",), ("global.set", 1)]
    for op in ["i64.clz", "i64.ctz", "i64.popcnt", "i64.eqz"]:
        body += [("i64.const", 0x0F0F00000F0F), (op,)]
        if op == "i64.eqz":
            body += [("global.get", 1), ("i32.add",), ("global.set", 1)]
        else:
            body += [("global.get", 0), ("i64.add",), ("global.set", 0)]
    body += [("end",)]
    return assemble([Func(export="main", body=body)],
                    globals=[("i64", True, 0), ("i32", True, 0)])


def _float_fixture(ty):
    c = lambda v: (f"{ty}.const", v)
    acc_f = [("global.get", 0), (f"{ty}.add",), ("global.set", 0)]
    acc_i = [("global.get", 1), ("i32.add",), ("global.set", 1)]
    body = []
    pairs = [(1.5, 2.25), (-3.75, 0.5), (100.125, -7.0), (0.0, -0.0)]
    for i, op in enumerate(["add", "sub", "mul", "div", "min", "max",
                            "copysign"]):
        a, b = pairs[i % len(pairs)]
        body += [c(a + i), c(b + i if op != "div" else b + i + 0.5),
                 (f"{ty}.{op}",)] + acc_f
    for op in ["abs", "neg", "ceil", "floor", "trunc", "nearest", "sqrt"]:
        v = 7.625 if op != "sqrt" else 2.25
        body += [c(-v if op in ("abs", "neg") else v), (f"{ty}.{op}",)] + acc_f
    for op in ["eq", "ne", "lt", "gt", "le", "ge"]:
        body += [c(1.5), c(2.5), (f"{ty}.{op}",)] + acc_i
    body += [("end",)]
    return assemble([Func(export="main", body=body)],
                    globals=[(ty, True, 0.0), ("i32", True, 0)])


def _conversions():
    body = [
        # f64 -> i32 -> i64 -> f32 -> f64 -> i64
        ("f64.const", 123456.75), ("i32.trunc_f64_s",),
        ("i64.extend_i32_s",), ("f32.convert_i64_u",), ("f64.promote_f32",),
        ("i64.trunc_f64_u",),
        ("global.get", 0), ("i64.add",), ("global.set", 0),
        ("i32.const", -5), ("f64.convert_i32_s",), ("i64.trunc_f64_s",),
        ("global.get", 0), ("i64.xor",), ("global.set", 0),
        ("i32.const", -1), ("f32.convert_i32_u",), ("i32.trunc_f32_u",),
        ("global.get", 1), ("i32.xor",), ("global.set", 1),
        ("i64.const", 1 << 50), ("f32.convert_i64_s",), ("f64.promote_f32",),
        ("i64.trunc_f64_u",), ("i32.wrap_i64",),
        ("global.get", 1), ("i32.add",), ("global.set", 1),
        ("f32.const", 1.5), ("i32.reinterpret_f32",),
        ("global.get", 1), ("i32.xor",), ("global.set", 1),
        ("f64.const", 2.5), ("i64.reinterpret_f64",),
        ("global.get", 0), ("i64.xor",), ("global.set", 0),
        ("i32.const", 0x3FC00000), ("f32.reinterpret_i32",),
        ("f64.promote_f32",), ("global.get", 2), ("f64.add",),
        ("global.set", 2),
        ("i64.const", 0x4004000000000000), ("f64.reinterpret_i64",),
        ("global.get", 2), ("f64.add",), ("global.set", 2),
        ("f64.const", -2.75), ("f32.demote_f64",), ("f64.promote_f32",),
        ("global.get", 2), ("f64.add",), ("global.set", 2),
        ("i64.const", -123456789), ("i32.wrap_i64",), ("i64.extend_i32_u",),
        ("global.get", 0), ("i64.add",), ("global.set", 0),
        ("f32.const", -7.25), ("i32.trunc_f32_s",), ("i64.extend_i32_s",),
        ("f64.convert_i64_s",), ("i64.trunc_f64_s",),
        ("global.get", 0), ("i64.add",), ("global.set", 0),
        ("end",),
    ]
    return assemble([Func(export="main", body=body)],
                    globals=[("i64", True, 0), ("i32", True, 0),
                             ("f64", True, 0.0)])


def _memory_ops():
    st = lambda op, addr, imm: [("i32.const", addr), imm, (op, 0, 0)]
    body = (
        st("i32.store8", 64, ("i32.const", 0x1F2)) +
        st("i32.store16", 66, ("i32.const", 0x1_F00F)) +
        st("i32.store", 68, ("i32.const", -123456)) +
        st("i64.store8", 72, ("i64.const", 0x3FF)) +
        st("i64.store16", 74, ("i64.const", 0x5_0102)) +
        st("i64.store32", 76, ("i64.const", 1 << 33)) +
        st("i64.store", 80, ("i64.const", -(1 << 40))) +
        st("f32.store", 88, ("f32.const", 3.5)) +
        st("f64.store", 92, ("f64.const", -2.25)) +
        # read everything back through every load width
        [("i32.const", 0), ("i32.load8_u", 0, 0)] +
        [("i32.const", 1), ("i32.load8_s", 0, 0), ("i32.add",)] +
        [("i32.const", 2), ("i32.load16_u", 0, 0), ("i32.add",)] +
        [("i32.const", 4), ("i32.load16_s", 0, 2), ("i32.add",)] +
        [("i32.const", 68), ("i32.load", 2, 0), ("i32.add",)] +
        [("global.set", 0)] +
        [("i32.const", 72), ("i64.load8_u", 0, 0)] +
        [("i32.const", 72), ("i64.load8_s", 0, 0), ("i64.add",)] +
        [("i32.const", 74), ("i64.load16_u", 1, 0), ("i64.add",)] +
        [("i32.const", 74), ("i64.load16_s", 0, 0), ("i64.add",)] +
        [("i32.const", 76), ("i64.load32_u", 2, 0), ("i64.add",)] +
        [("i32.const", 76), ("i64.load32_s", 0, 0), ("i64.add",)] +
        [("i32.const", 80), ("i64.load", 3, 0), ("i64.add",)] +
        [("global.set", 1)] +
        [("i32.const", 88), ("f32.load", 2, 0), ("f64.promote_f32",)] +
        [("i32.const", 92), ("f64.load", 3, 0), ("f64.add",)] +
        [("global.set", 2)] +
        [("memory.size",), ("global.get", 0), ("i32.add",), ("global.set", 0)] +
        [("end",)]
    )
    return assemble(
        [Func(export="main", body=body)],
        memory=(1, 2),
        data=[(0, bytes([1, 0xFE, 3, 4, 0x80, 0x7F, 7, 8]))],
        globals=[("i32", True, 0), ("i64", True, 0), ("f64", True, 0.0)])


def _memgrow():
    body = [
        ("memory.size",), ("global.set", 0),
        ("i32.const", 2), ("memory.grow",), ("drop",),
        ("memory.size",), ("global.get", 0), ("i32.add",), ("global.set", 0),
        ("i32.const", 70000), ("i32.const", 77), ("i32.store", 0, 0),
        ("i32.const", 70000), ("i32.load", 0, 0),
        ("global.get", 0), ("i32.add",), ("global.set", 0),
        # growing past max must fail with -1
        ("i32.const", 99), ("memory.grow",),
        ("global.get", 0), ("i32.add",), ("global.set", 0),
        ("end",),
    ]
    return assemble([Func(export="main", body=body)],
                    memory=(0, 4), globals=[("i32", True, 0)])


def _control_flow():
    g_add = lambda n: [("i32.const", n), ("global.get", 0), ("i32.add",),
                       ("global.set", 0)]
    body = (
        [("nop",)] +
        # if/else both directions
        [("i32.const", 1), ("if",)] + g_add(1) + [("else",)] + g_add(100) +
        [("end",)] +
        [("i32.const", 0), ("if",)] + g_add(100) + [("else",)] + g_add(2) +
        [("end",)] +
        # if without else, not taken
        [("i32.const", 0), ("if",)] + g_add(100) + [("end",)] +
        # block with a result carried by br
        [("block", "i32"),
         ("i32.const", 40), ("br", 0),
         ("unreachable",),   # never executed
         ("end",)] +
        [("global.get", 0), ("i32.add",), ("global.set", 0)] +
        # br_if skipping code inside nested blocks
        [("block",), ("block",),
         ("i32.const", 1), ("br_if", 1)] + g_add(100) + [
         ("end",)] + g_add(100) + [("end",)] +
        # select both ways, plus drop
        [("i32.const", 3), ("i32.const", 7), ("i32.const", 1), ("select",)] +
        [("global.get", 0), ("i32.add",), ("global.set", 0)] +
        [("i32.const", 3), ("i32.const", 7), ("i32.const", 0), ("select",)] +
        [("global.get", 0), ("i32.add",), ("global.set", 0)] +
        [("i32.const", 9), ("drop",)] +
        # early return leaves a marker
        [("global.get", 0), ("i32.eqz",), ("if",)] + g_add(100) + [("end",)] +
        [("return",)] +
        g_add(100) +
        [("end",)]
    )
    return assemble([Func(export="main", body=body)],
                    globals=[("i32", True, 0)])


def _br_table4():
    arm = lambda k: [("global.get", k), ("i32.const", 1), ("i32.add",),
                     ("global.set", k)]
    body = (
        [("loop",),
         ("block",), ("block",), ("block",), ("block",),
         ("local.get", 0), ("i32.load8_u", 0, 0),
         ("br_table", [0, 1, 2], 3),
         ("end",)] + arm(0) + [("br", 3),
         ("end",)] + arm(1) + [("br", 2),
         ("end",)] + arm(2) + [("br", 1),
         ("end",)] + arm(3) + [
         # loop control: i++ while i < 4
         ("local.get", 0), ("i32.const", 1), ("i32.add",),
         ("local.tee", 0), ("i32.const", 4), ("i32.lt_u",), ("br_if", 0),
         ("end",),
         ("end",)]
    )
    return assemble(
        [Func(export="main", locals=["i32"], body=body)],
        memory=(1, 1), data=[(0, bytes([0, 1, 1, 5]))],
        globals=[("i32", True, 0), ("i32", True, 0), ("i32", True, 0),
                 ("i32", True, 0)])


def _calls():
    add = Func(name="add", params=["i32", "i32"], results=["i32"],
               body=[("local.get", 0), ("local.get", 1), ("i32.add",),
                     ("end",)])
    twice = Func(name="twice", params=["i32"], results=["i32"],
                 body=[("local.get", 0), ("local.get", 0), ("call", 0),
                       ("end",)])
    main = Func(
        export="main", locals=["i32"],
        body=[
            ("i32.const", 3), ("local.set", 0),
            ("loop",),
            ("local.get", 0), ("call", 1),
            ("global.get", 0), ("i32.add",), ("global.set", 0),
            ("local.get", 0), ("i32.const", 1), ("i32.sub",),
            ("local.tee", 0), ("br_if", 0),
            ("end",),
            ("i32.const", 3), ("i32.const", 4), ("call", 0),
            ("global.get", 0), ("i32.add",), ("global.set", 0),
            ("end",),
        ])
    return assemble([add, twice, main], globals=[("i32", True, 0)])


def _fact():
    fact = Func(
        name="fact", params=["i32"], results=["i32"],
        body=[
            ("local.get", 0), ("i32.eqz",),
            ("if", "i32"),
            ("i32.const", 1),
            ("else",),
            ("local.get", 0),
            ("local.get", 0), ("i32.const", 1), ("i32.sub",), ("call", 0),
            ("i32.mul",),
            ("end",),
            ("end",),
        ])
    main = Func(export="main",
                body=[("i32.const", 6), ("call", 0), ("global.set", 0),
                      ("end",)])
    return assemble([fact, main], globals=[("i32", True, 0)])


def _indirect():
    sig = (("i32",), ("i32",))
    dbl = Func(name="dbl", params=["i32"], results=["i32"],
               body=[("local.get", 0), ("i32.const", 2), ("i32.mul",),
                     ("end",)])
    tri = Func(name="tri", params=["i32"], results=["i32"],
               body=[("local.get", 0), ("i32.const", 3), ("i32.mul",),
                     ("end",)])
    main = Func(
        export="main", locals=["i32"],
        body=[
            ("loop",),
            ("local.get", 0),                      # argument
            ("local.get", 0), ("i32.const", 2), ("i32.rem_u",),  # slot
            ("call_indirect", sig),
            ("global.get", 0), ("i32.add",), ("global.set", 0),
            ("local.get", 0), ("i32.const", 1), ("i32.add",),
            ("local.tee", 0), ("i32.const", 6), ("i32.lt_u",), ("br_if", 0),
            ("end",),
            ("end",),
        ])
    return assemble([dbl, tri, main], globals=[("i32", True, 0)],
                    table=(2, None), elements=[(0, [0, 1])])


def _globals_fx():
    body = [
        ("loop",),
        ("global.get", 1), ("i64.const", 3), ("i64.add",), ("global.set", 1),
        ("global.get", 2), ("f64.const", 0.5), ("f64.add",), ("global.set", 2),
        ("global.get", 3), ("i32.const", 1), ("i32.add",), ("global.set", 3),
        ("global.get", 3), ("global.get", 0), ("i32.lt_u",), ("br_if", 0),
        ("end",),
        ("end",),
    ]
    return assemble([Func(export="main", body=body)],
                    globals=[("i32", False, 5), ("i64", True, 100),
                             ("f64", True, 1.5), ("i32", True, 0)])


def _select_mix():
    body = [
        ("i32.const", -3), ("i32.const", 9), ("i32.const", 1), ("select",),
        ("global.set", 0),
        ("i64.const", 1 << 40), ("i64.const", -1), ("i32.const", 0),
        ("select",), ("global.set", 1),
        ("f32.const", 1.25), ("f32.const", -1.25), ("i32.const", 1),
        ("select",), ("f64.promote_f32",), ("global.set", 2),
        ("f64.const", 9.5), ("f64.const", 0.5), ("i32.const", 0), ("select",),
        ("global.get", 2), ("f64.add",), ("global.set", 2),
        ("end",),
    ]
    return assemble([Func(export="main", body=body)],
                    globals=[("i32", True, 0), ("i64", True, 0),
                             ("f64", True, 0.0)])


def _trap_unreachable():
    return assemble([Func(export="main",
                          body=[("unreachable",), ("end",)])])


def _trap_div0():
    return assemble([Func(
        export="main",
        body=[("i32.const", 7), ("i32.const", 0), ("i32.div_u",),
              ("global.set", 0), ("end",)])],
        globals=[("i32", True, 0)])


def _trap_oob():
    return assemble([Func(
        export="main",
        body=[("i32.const", 3), ("global.set", 0),
              ("i32.const", 70000), ("i32.const", 1), ("i32.store", 0, 0),
              ("end",)])],
        memory=(1, 1), globals=[("i32", True, 0)])


def _hostcall():
    pi = Import("print_i32", ["i32"], [])
    pl = Import("print_ln", [], [])
    main = Func(
        export="main", locals=["i32"],
        body=[
            ("i32.const", -42), ("call", 0), ("call", 1),
            ("loop",),
            ("local.get", 0), ("i32.const", 10), ("i32.add",),
            ("local.tee", 0), ("call", 0), ("call", 1),
            ("local.get", 0), ("i32.const", 30), ("i32.lt_s",), ("br_if", 0),
            ("end",),
            ("end",),
        ])
    return assemble([main], imports=[pi, pl])


def _start_init():
    init = Func(name="init",
                body=[("i32.const", 7), ("global.set", 0), ("end",)])
    main = Func(export="main",
                body=[("global.get", 0), ("i32.const", 6), ("i32.mul",),
                      ("global.set", 0), ("end",)])
    return assemble([init, main], globals=[("i32", True, 0)], start=0)


def _loop_nested():
    body = [
        ("i32.const", 2), ("local.set", 0),
        ("loop",),                                  # outer
        ("i32.const", 3), ("local.set", 1),
        ("loop",),                                  # inner
        ("global.get", 0), ("i32.const", 1), ("i32.add",), ("global.set", 0),
        ("local.get", 1), ("i32.const", 1), ("i32.sub",),
        ("local.tee", 1), ("br_if", 0),
        ("end",),
        ("local.get", 0), ("i32.const", 1), ("i32.sub",),
        ("local.tee", 0), ("br_if", 0),
        ("end",),
        ("end",),
    ]
    return assemble([Func(export="main", locals=["i32", "i32"], body=body)],
                    globals=[("i32", True, 0)])


def _hot_loop():
    return assemble([Func(
        export="main", params=["i32"],
        body=[
            ("loop",),
            ("local.get", 0), ("i32.const", 1), ("i32.sub",),
            ("local.tee", 0), ("br_if", 0),
            ("end",),
            ("end",),
        ])])


def make_branch_force(cond):
    """`if` fixture whose condition constant is parameterized; the frame
    modification acceptance compares a forced-operand run against the oracle
    on the hard-coded variant."""
    body = [
        ("i32.const", cond),
        ("if",),
        ("i32.const", 111), ("global.set", 0),
        ("else",),
        ("i32.const", 222), ("global.set", 0),
        ("end",),
        ("end",),
    ]
    return Fixture(f"branch_force_{cond}",
                   assemble([Func(export="main", body=body)],
                            globals=[("i32", True, 0)]))


def make_brif_force(cond):
    """5-iteration countdown loop; br_if condition replaceable by a constant
    (the and with `cond` keeps or kills the backedge)."""
    body = [
        ("i32.const", 5), ("local.set", 0),
        ("loop",),
        ("global.get", 0), ("i32.const", 1), ("i32.add",), ("global.set", 0),
        ("local.get", 0), ("i32.const", 1), ("i32.sub",), ("local.tee", 0),
        ("i32.const", cond), ("i32.and",),
        ("br_if", 0),
        ("end",),
        ("end",),
    ]
    return Fixture(f"brif_force_{cond}",
                   assemble([Func(export="main", locals=["i32"], body=body)],
                            globals=[("i32", True, 0)]))


def _call_tree():
    """Three mutually calling functions for randomized call-tree probing."""
    leaf = Func(name="leaf", params=["i32"], results=["i32"],
                body=[("local.get", 0), ("i32.const", 1), ("i32.add",),
                      ("end",)])
    mid = Func(name="mid", params=["i32"], results=["i32"],
               body=[("local.get", 0), ("call", 0),
                     ("local.get", 0), ("call", 0), ("i32.add",),
                     ("end",)])
    main = Func(
        export="main", locals=["i32"],
        body=[
            ("i32.const", 4), ("local.set", 0),
            ("loop",),
            ("local.get", 0), ("call", 1),
            ("local.get", 0), ("call", 0), ("i32.add",),
            ("global.get", 0), ("i32.add",), ("global.set", 0),
            ("local.get", 0), ("i32.const", 1), ("i32.sub",),
            ("local.tee", 0), ("br_if", 0),
            ("end",),
            ("end",),
        ])
    return assemble([leaf, mid, main], globals=[("i32", True, 0)])


def _make_corpus():
    return [
        Fixture("loop3", _loop3()),
        Fixture("empty", _empty()),
        Fixture("arith_i32", _arith_i32()),
        Fixture("arith_i64", _arith_i64()),
        Fixture("float_f32", _float_fixture("f32")),
        Fixture("float_f64", _float_fixture("f64")),
        Fixture("conversions", _conversions()),
        Fixture("memory_ops", _memory_ops()),
        Fixture("memgrow", _memgrow()),
        Fixture("control_flow", _control_flow()),
        Fixture("br_table4", _br_table4()),
        Fixture("calls", _calls()),
        Fixture("fact", _fact()),
        Fixture("indirect", _indirect()),
        Fixture("globals_fx", _globals_fx()),
        Fixture("select_mix", _select_mix()),
        Fixture("trap_unreachable", _trap_unreachable()),
        Fixture("trap_div0", _trap_div0()),
        Fixture("trap_oob", _trap_oob()),
        Fixture("hostcall", _hostcall()),
        Fixture("start_init", _start_init()),
        Fixture("loop_nested", _loop_nested()),
        Fixture("call_tree", _call_tree()),
        Fixture("hot_loop_small", _hot_loop(), args=(500,)),
    ]


CORPUS = _make_corpus()
BY_NAME = {f.name: f for f in CORPUS}


def hot_loop_fixture(n):
    """Fresh hot-loop fixture for benches (n countdown iterations)."""
    return Fixture("hot_loop", _hot_loop(), args=(n,))
