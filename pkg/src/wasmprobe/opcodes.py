"""Opcode metadata for the WebAssembly MVP subset.

One table drives the parser, validator, disassembler, and interpreter:
each opcode maps to its mnemonic, immediate encoding, and (for plain
value ops) its stack signature.
"""

from collections import namedtuple

# immediate encodings
IMM_NONE = "none"
IMM_BLOCKTYPE = "blocktype"      # single byte: 0x40 or a value type
IMM_U32 = "u32"                  # one LEB128 u32 (indices, labels)
IMM_BR_TABLE = "br_table"        # vec(u32) + u32 default
IMM_CALL_INDIRECT = "call_indirect"  # type index u32 + reserved 0x00
IMM_MEMARG = "memarg"            # align u32 + offset u32
IMM_BYTE = "byte"                # reserved 0x00 (memory.size/grow)
IMM_I32 = "i32"                  # signed LEB128, 32-bit
IMM_I64 = "i64"                  # signed LEB128, 64-bit
IMM_F32 = "f32"                  # 4 bytes little-endian
IMM_F64 = "f64"                  # 8 bytes little-endian

I32, I64, F32, F64 = "i32", "i64", "f32", "f64"

# params/results are None for control/parametric/variable ops, which the
# validator handles specially.
OpInfo = namedtuple("OpInfo", ["mnemonic", "imm", "params", "results"])

PROBE_OPCODE = 0xFF  # unassigned in the MVP; installed by the instrumentation

OPCODES = {
    0x00: OpInfo("unreachable", IMM_NONE, None, None),
    0x01: OpInfo("nop", IMM_NONE, (), ()),
    0x02: OpInfo("block", IMM_BLOCKTYPE, None, None),
    0x03: OpInfo("loop", IMM_BLOCKTYPE, None, None),
    0x04: OpInfo("if", IMM_BLOCKTYPE, None, None),
    0x05: OpInfo("else", IMM_NONE, None, None),
    0x0B: OpInfo("end", IMM_NONE, None, None),
    0x0C: OpInfo("br", IMM_U32, None, None),
    0x0D: OpInfo("br_if", IMM_U32, None, None),
    0x0E: OpInfo("br_table", IMM_BR_TABLE, None, None),
    0x0F: OpInfo("return", IMM_NONE, None, None),
    0x10: OpInfo("call", IMM_U32, None, None),
    0x11: OpInfo("call_indirect", IMM_CALL_INDIRECT, None, None),
    0x1A: OpInfo("drop", IMM_NONE, None, None),
    0x1B: OpInfo("select", IMM_NONE, None, None),
    0x20: OpInfo("local.get", IMM_U32, None, None),
    0x21: OpInfo("local.set", IMM_U32, None, None),
    0x22: OpInfo("local.tee", IMM_U32, None, None),
    0x23: OpInfo("global.get", IMM_U32, None, None),
    0x24: OpInfo("global.set", IMM_U32, None, None),
    0x28: OpInfo("i32.load", IMM_MEMARG, (I32,), (I32,)),
    0x29: OpInfo("i64.load", IMM_MEMARG, (I32,), (I64,)),
    0x2A: OpInfo("f32.load", IMM_MEMARG, (I32,), (F32,)),
    0x2B: OpInfo("f64.load", IMM_MEMARG, (I32,), (F64,)),
    0x2C: OpInfo("i32.load8_s", IMM_MEMARG, (I32,), (I32,)),
    0x2D: OpInfo("i32.load8_u", IMM_MEMARG, (I32,), (I32,)),
    0x2E: OpInfo("i32.load16_s", IMM_MEMARG, (I32,), (I32,)),
    0x2F: OpInfo("i32.load16_u", IMM_MEMARG, (I32,), (I32,)),
    0x30: OpInfo("i64.load8_s", IMM_MEMARG, (I32,), (I64,)),
    0x31: OpInfo("i64.load8_u", IMM_MEMARG, (I32,), (I64,)),
    0x32: OpInfo("i64.load16_s", IMM_MEMARG, (I32,), (I64,)),
    0x33: OpInfo("i64.load16_u", IMM_MEMARG, (I32,), (I64,)),
    0x34: OpInfo("i64.load32_s", IMM_MEMARG, (I32,), (I64,)),
    0x35: OpInfo("i64.load32_u", IMM_MEMARG, (I32,), (I64,)),
    0x36: OpInfo("i32.store", IMM_MEMARG, (I32, I32), ()),
    0x37: OpInfo("i64.store", IMM_MEMARG, (I32, I64), ()),
    0x38: OpInfo("f32.store", IMM_MEMARG, (I32, F32), ()),
    0x39: OpInfo("f64.store", IMM_MEMARG, (I32, F64), ()),
    0x3A: OpInfo("i32.store8", IMM_MEMARG, (I32, I32), ()),
    0x3B: OpInfo("i32.store16", IMM_MEMARG, (I32, I32), ()),
    0x3C: OpInfo("i64.store8", IMM_MEMARG, (I32, I64), ()),
    0x3D: OpInfo("i64.store16", IMM_MEMARG, (I32, I64), ()),
    0x3E: OpInfo("i64.store32", IMM_MEMARG, (I32, I64), ()),
    0x3F: OpInfo("memory.size", IMM_BYTE, (), (I32,)),
    0x40: OpInfo("memory.grow", IMM_BYTE, (I32,), (I32,)),
    0x41: OpInfo("i32.const", IMM_I32, (), (I32,)),
    0x42: OpInfo("i64.const", IMM_I64, (), (I64,)),
    0x43: OpInfo("f32.const", IMM_F32, (), (F32,)),
    0x44: OpInfo("f64.const", IMM_F64, (), (F64,)),
    0x45: OpInfo("i32.eqz", IMM_NONE, (I32,), (I32,)),
    0x46: OpInfo("i32.eq", IMM_NONE, (I32, I32), (I32,)),
    0x47: OpInfo("i32.ne", IMM_NONE, (I32, I32), (I32,)),
    0x48: OpInfo("i32.lt_s", IMM_NONE, (I32, I32), (I32,)),
    0x49: OpInfo("i32.lt_u", IMM_NONE, (I32, I32), (I32,)),
    0x4A: OpInfo("i32.gt_s", IMM_NONE, (I32, I32), (I32,)),
    0x4B: OpInfo("i32.gt_u", IMM_NONE, (I32, I32), (I32,)),
    0x4C: OpInfo("i32.le_s", IMM_NONE, (I32, I32), (I32,)),
    0x4D: OpInfo("i32.le_u", IMM_NONE, (I32, I32), (I32,)),
    0x4E: OpInfo("i32.ge_s", IMM_NONE, (I32, I32), (I32,)),
    0x4F: OpInfo("i32.ge_u", IMM_NONE, (I32, I32), (I32,)),
    0x50: OpInfo("i64.eqz", IMM_NONE, (I64,), (I32,)),
    0x51: OpInfo("i64.eq", IMM_NONE, (I64, I64), (I32,)),
    0x52: OpInfo("i64.ne", IMM_NONE, (I64, I64), (I32,)),
    0x53: OpInfo("i64.lt_s", IMM_NONE, (I64, I64), (I32,)),
    0x54: OpInfo("i64.lt_u", IMM_NONE, (I64, I64), (I32,)),
    0x55: OpInfo("i64.gt_s", IMM_NONE, (I64, I64), (I32,)),
    0x56: OpInfo("i64.gt_u", IMM_NONE, (I64, I64), (I32,)),
    0x57: OpInfo("i64.le_s", IMM_NONE, (I64, I64), (I32,)),
    0x58: OpInfo("i64.le_u", IMM_NONE, (I64, I64), (I32,)),
    0x59: OpInfo("i64.ge_s", IMM_NONE, (I64, I64), (I32,)),
    0x5A: OpInfo("i64.ge_u", IMM_NONE, (I64, I64), (I32,)),
    0x5B: OpInfo("f32.eq", IMM_NONE, (F32, F32), (I32,)),
    0x5C: OpInfo("f32.ne", IMM_NONE, (F32, F32), (I32,)),
    0x5D: OpInfo("f32.lt", IMM_NONE, (F32, F32), (I32,)),
    0x5E: OpInfo("f32.gt", IMM_NONE, (F32, F32), (I32,)),
    0x5F: OpInfo("f32.le", IMM_NONE, (F32, F32), (I32,)),
    0x60: OpInfo("f32.ge", IMM_NONE, (F32, F32), (I32,)),
    0x61: OpInfo("f64.eq", IMM_NONE, (F64, F64), (I32,)),
    0x62: OpInfo("f64.ne", IMM_NONE, (F64, F64), (I32,)),
    0x63: OpInfo("f64.lt", IMM_NONE, (F64, F64), (I32,)),
    0x64: OpInfo("f64.gt", IMM_NONE, (F64, F64), (I32,)),
    0x65: OpInfo("f64.le", IMM_NONE, (F64, F64), (I32,)),
    0x66: OpInfo("f64.ge", IMM_NONE, (F64, F64), (I32,)),
    0x67: OpInfo("i32.clz", IMM_NONE, (I32,), (I32,)),
    0x68: OpInfo("i32.ctz", IMM_NONE, (I32,), (I32,)),
    0x69: OpInfo("i32.popcnt", IMM_NONE, (I32,), (I32,)),
    0x6A: OpInfo("i32.add", IMM_NONE, (I32, I32), (I32,)),
    0x6B: OpInfo("i32.sub", IMM_NONE, (I32, I32), (I32,)),
    0x6C: OpInfo("i32.mul", IMM_NONE, (I32, I32), (I32,)),
    0x6D: OpInfo("i32.div_s", IMM_NONE, (I32, I32), (I32,)),
    0x6E: OpInfo("i32.div_u", IMM_NONE, (I32, I32), (I32,)),
    0x6F: OpInfo("i32.rem_s", IMM_NONE, (I32, I32), (I32,)),
    0x70: OpInfo("i32.rem_u", IMM_NONE, (I32, I32), (I32,)),
    0x71: OpInfo("i32.and", IMM_NONE, (I32, I32), (I32,)),
    0x72: OpInfo("i32.or", IMM_NONE, (I32, I32), (I32,)),
    0x73: OpInfo("i32.xor", IMM_NONE, (I32, I32), (I32,)),
    0x74: OpInfo("i32.shl", IMM_NONE, (I32, I32), (I32,)),
    0x75: OpInfo("i32.shr_s", IMM_NONE, (I32, I32), (I32,)),
    0x76: OpInfo("i32.shr_u", IMM_NONE, (I32, I32), (I32,)),
    0x77: OpInfo("i32.rotl", IMM_NONE, (I32, I32), (I32,)),
    0x78: OpInfo("i32.rotr", IMM_NONE, (I32, I32), (I32,)),
    0x79: OpInfo("i64.clz", IMM_NONE, (I64,), (I64,)),
    0x7A: OpInfo("i64.ctz", IMM_NONE, (I64,), (I64,)),
    0x7B: OpInfo("i64.popcnt", IMM_NONE, (I64,), (I64,)),
    0x7C: OpInfo("i64.add", IMM_NONE, (I64, I64), (I64,)),
    0x7D: OpInfo("i64.sub", IMM_NONE, (I64, I64), (I64,)),
    0x7E: OpInfo("i64.mul", IMM_NONE, (I64, I64), (I64,)),
    0x7F: OpInfo("i64.div_s", IMM_NONE, (I64, I64), (I64,)),
    0x80: OpInfo("i64.div_u", IMM_NONE, (I64, I64), (I64,)),
    0x81: OpInfo("i64.rem_s", IMM_NONE, (I64, I64), (I64,)),
    0x82: OpInfo("i64.rem_u", IMM_NONE, (I64, I64), (I64,)),
    0x83: OpInfo("i64.and", IMM_NONE, (I64, I64), (I64,)),
    0x84: OpInfo("i64.or", IMM_NONE, (I64, I64), (I64,)),
    0x85: OpInfo("i64.xor", IMM_NONE, (I64, I64), (I64,)),
    0x86: OpInfo("i64.shl", IMM_NONE, (I64, I64), (I64,)),
    0x87: OpInfo("i64.shr_s", IMM_NONE, (I64, I64), (I64,)),
    0x88: OpInfo("i64.shr_u", IMM_NONE, (I64, I64), (I64,)),
    0x89: OpInfo("i64.rotl", IMM_NONE, (I64, I64), (I64,)),
    0x8A: OpInfo("i64.rotr", IMM_NONE, (I64, I64), (I64,)),
    0x8B: OpInfo("f32.abs", IMM_NONE, (F32,), (F32,)),
    0x8C: OpInfo("f32.neg", IMM_NONE, (F32,), (F32,)),
    0x8D: OpInfo("f32.ceil", IMM_NONE, (F32,), (F32,)),
    0x8E: OpInfo("f32.floor", IMM_NONE, (F32,), (F32,)),
    0x8F: OpInfo("f32.trunc", IMM_NONE, (F32,), (F32,)),
    0x90: OpInfo("f32.nearest", IMM_NONE, (F32,), (F32,)),
    0x91: OpInfo("f32.sqrt", IMM_NONE, (F32,), (F32,)),
    0x92: OpInfo("f32.add", IMM_NONE, (F32, F32), (F32,)),
    0x93: OpInfo("f32.sub", IMM_NONE, (F32, F32), (F32,)),
    0x94: OpInfo("f32.mul", IMM_NONE, (F32, F32), (F32,)),
    0x95: OpInfo("f32.div", IMM_NONE, (F32, F32), (F32,)),
    0x96: OpInfo("f32.min", IMM_NONE, (F32, F32), (F32,)),
    0x97: OpInfo("f32.max", IMM_NONE, (F32, F32), (F32,)),
    0x98: OpInfo("f32.copysign", IMM_NONE, (F32, F32), (F32,)),
    0x99: OpInfo("f64.abs", IMM_NONE, (F64,), (F64,)),
    0x9A: OpInfo("f64.neg", IMM_NONE, (F64,), (F64,)),
    0x9B: OpInfo("f64.ceil", IMM_NONE, (F64,), (F64,)),
    0x9C: OpInfo("f64.floor", IMM_NONE, (F64,), (F64,)),
    0x9D: OpInfo("f64.trunc", IMM_NONE, (F64,), (F64,)),
    0x9E: OpInfo("f64.nearest", IMM_NONE, (F64,), (F64,)),
    0x9F: OpInfo("f64.sqrt", IMM_NONE, (F64,), (F64,)),
    0xA0: OpInfo("f64.add", IMM_NONE, (F64, F64), (F64,)),
    0xA1: OpInfo("f64.sub", IMM_NONE, (F64, F64), (F64,)),
    0xA2: OpInfo("f64.mul", IMM_NONE, (F64, F64), (F64,)),
    0xA3: OpInfo("f64.div", IMM_NONE, (F64, F64), (F64,)),
    0xA4: OpInfo("f64.min", IMM_NONE, (F64, F64), (F64,)),
    0xA5: OpInfo("f64.max", IMM_NONE, (F64, F64), (F64,)),
    0xA6: OpInfo("f64.copysign", IMM_NONE, (F64, F64), (F64,)),
    0xA7: OpInfo("i32.wrap_i64", IMM_NONE, (I64,), (I32,)),
    0xA8: OpInfo("i32.trunc_f32_s", IMM_NONE, (F32,), (I32,)),
    0xA9: OpInfo("i32.trunc_f32_u", IMM_NONE, (F32,), (I32,)),
    0xAA: OpInfo("i32.trunc_f64_s", IMM_NONE, (F64,), (I32,)),
    0xAB: OpInfo("i32.trunc_f64_u", IMM_NONE, (F64,), (I32,)),
    0xAC: OpInfo("i64.extend_i32_s", IMM_NONE, (I32,), (I64,)),
    0xAD: OpInfo("i64.extend_i32_u", IMM_NONE, (I32,), (I64,)),
    0xAE: OpInfo("i64.trunc_f32_s", IMM_NONE, (F32,), (I64,)),
    0xAF: OpInfo("i64.trunc_f32_u", IMM_NONE, (F32,), (I64,)),
    0xB0: OpInfo("i64.trunc_f64_s", IMM_NONE, (F64,), (I64,)),
    0xB1: OpInfo("i64.trunc_f64_u", IMM_NONE, (F64,), (I64,)),
    0xB2: OpInfo("f32.convert_i32_s", IMM_NONE, (I32,), (F32,)),
    0xB3: OpInfo("f32.convert_i32_u", IMM_NONE, (I32,), (F32,)),
    0xB4: OpInfo("f32.convert_i64_s", IMM_NONE, (I64,), (F32,)),
    0xB5: OpInfo("f32.convert_i64_u", IMM_NONE, (I64,), (F32,)),
    0xB6: OpInfo("f32.demote_f64", IMM_NONE, (F64,), (F32,)),
    0xB7: OpInfo("f64.convert_i32_s", IMM_NONE, (I32,), (F64,)),
    0xB8: OpInfo("f64.convert_i32_u", IMM_NONE, (I32,), (F64,)),
    0xB9: OpInfo("f64.convert_i64_s", IMM_NONE, (I64,), (F64,)),
    0xBA: OpInfo("f64.convert_i64_u", IMM_NONE, (I64,), (F64,)),
    0xBB: OpInfo("f64.promote_f32", IMM_NONE, (F32,), (F64,)),
    0xBC: OpInfo("i32.reinterpret_f32", IMM_NONE, (F32,), (I32,)),
    0xBD: OpInfo("i64.reinterpret_f64", IMM_NONE, (F64,), (I64,)),
    0xBE: OpInfo("f32.reinterpret_i32", IMM_NONE, (I32,), (F32,)),
    0xBF: OpInfo("f64.reinterpret_i64", IMM_NONE, (I64,), (F64,)),
}

NAME_TO_OPCODE = {info.mnemonic: op for op, info in OPCODES.items()}

# Known post-MVP opcode bytes, reported as UnsupportedFeature rather than
# MalformedBinary so the message is actionable.
POST_MVP_OPCODES = {
    0x1C: "select with type",
    0x25: "table.get",
    0x26: "table.set",
    0xC0: "sign-extension ops",
    0xC1: "sign-extension ops",
    0xC2: "sign-extension ops",
    0xC3: "sign-extension ops",
    0xC4: "sign-extension ops",
    0xD0: "reference types",
    0xD1: "reference types",
    0xD2: "reference types",
    0xFC: "saturating truncation / bulk memory",
    0xFD: "simd",
    0xFE: "threads",
}

BRANCH_MNEMONICS = {"if", "br_if", "br_table"}
CALL_MNEMONICS = {"call", "call_indirect"}

# mnemonic -> (kind, byte width) for the memory monitor and interpreter
MEM_ACCESS = {
    "i32.load": ("load", 4), "i64.load": ("load", 8),
    "f32.load": ("load", 4), "f64.load": ("load", 8),
    "i32.load8_s": ("load", 1), "i32.load8_u": ("load", 1),
    "i32.load16_s": ("load", 2), "i32.load16_u": ("load", 2),
    "i64.load8_s": ("load", 1), "i64.load8_u": ("load", 1),
    "i64.load16_s": ("load", 2), "i64.load16_u": ("load", 2),
    "i64.load32_s": ("load", 4), "i64.load32_u": ("load", 4),
    "i32.store": ("store", 4), "i64.store": ("store", 8),
    "f32.store": ("store", 4), "f64.store": ("store", 8),
    "i32.store8": ("store", 1), "i32.store16": ("store", 2),
    "i64.store8": ("store", 1), "i64.store16": ("store", 2),
    "i64.store32": ("store", 4),
}
