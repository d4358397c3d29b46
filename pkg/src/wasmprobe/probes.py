"""The probe framework.

Local probes are realized by bytecode overwriting: installing the first
probe at a location writes the (otherwise-illegal) probe opcode over the
instruction's opcode byte; the original is recovered from the function's
pristine copy. Global probes are realized by dispatch-table switching in
the engine, so neither mechanism costs anything while unused.

Firing takes a joint snapshot of the global list and the location's list
before any callback runs, which yields the three consistency guarantees
uniformly:

  * insertion order is firing order (lists are append-ordered),
  * probes inserted during a firing at the same instruction do not fire
    until its next occurrence (they are absent from the snapshot),
  * probes removed during a firing still fire this occurrence (they are
    present in the snapshot) but not afterwards.
"""

from .errors import (
    DuplicateInsert, IndexOutOfRange, InvalidLocation, MonitorError,
    NotInstalled, ProbeError, StaleAccessor, TypeMismatch, WasmError,
    WrongContext,
)
from .module import CodeLocation, Value
from .opcodes import PROBE_OPCODE

GENERIC = "generic"
COUNTER = "counter"
OPERAND_TOS = "operand-tos"

U64_MAX = 2 ** 64 - 1


class Probe:
    """A callback fired just before an instruction executes.

    Generic probes receive a context that lazily yields the code location
    and a FrameAccessor; the context itself must not be retained beyond the
    callback (the FrameAccessor may be).
    """

    kind = GENERIC

    def fire(self, ctx):
        raise NotImplementedError


class CallbackProbe(Probe):
    """Generic probe wrapping a plain function."""

    __slots__ = ("_fn",)

    def __init__(self, fn):
        self._fn = fn

    def fire(self, ctx):
        self._fn(ctx)


class CountProbe(Probe):
    """Saturating u64 counter; the firing path increments it inline without
    any callback or accessor construction."""

    kind = COUNTER
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def fire(self, ctx):  # equivalent slow path, for symmetry
        if self.count < U64_MAX:
            self.count += 1


class OperandProbe(Probe):
    """Receives the location and top-of-stack value directly, skipping
    FrameAccessor construction."""

    kind = OPERAND_TOS

    def fire_tos(self, loc, value):
        raise NotImplementedError

    def fire(self, ctx):
        raise ProbeError("operand probes fire through fire_tos")


class ProbeList:
    __slots__ = ("items", "version")

    def __init__(self):
        self.items = []
        self.version = 0

    def __len__(self):
        return len(self.items)

    def add(self, p):
        if any(q is p for q in self.items):
            raise DuplicateInsert(f"probe {p!r} already installed here")
        self.items.append(p)
        self.version += 1

    def discard(self, p):
        for i, q in enumerate(self.items):
            if q is p:
                del self.items[i]
                self.version += 1
                return
        raise NotInstalled(f"probe {p!r} not installed here")


class FrameAccessor:
    """Validity-checked facade over one live frame.

    At most one accessor exists per frame (materialization goes through the
    frame's accessor slot), so its identity is stable across firings. Every
    method first re-checks that the frame at `stack_index` is still the one
    this object was created for.
    """

    allocated = 0  # class-wide allocation count, observable by tests

    __slots__ = ("engine", "frame_id", "stack_index")

    def __init__(self, engine, frame_id, stack_index):
        self.engine = engine
        self.frame_id = frame_id
        self.stack_index = stack_index
        FrameAccessor.allocated += 1

    def _frame(self):
        frames = self.engine.frames
        i = self.stack_index
        if i < len(frames):
            fr = frames[i]
            if fr.frame_id == self.frame_id and fr.accessor_slot is self:
                return fr
        raise StaleAccessor(f"frame {self.frame_id} is no longer live")

    def is_live(self):
        try:
            self._frame()
            return True
        except StaleAccessor:
            return False

    def func(self):
        return self._frame().func

    def pc(self):
        return self._frame().pc

    def location(self):
        fr = self._frame()
        return CodeLocation(self.engine.module.id, fr.func.func_index, fr.pc)

    def depth(self):
        """1 for the entry frame, growing toward callees."""
        return self._frame().depth

    def frame_identity(self):
        self._frame()
        return self.frame_id

    def caller(self):
        self._frame()
        if self.stack_index == 0:
            return None
        return materialize_accessor(self.engine, self.stack_index - 1)

    def num_locals(self):
        return len(self._frame().locals)

    def get_local(self, i):
        fr = self._frame()
        if not 0 <= i < len(fr.locals):
            raise IndexOutOfRange(f"local {i} of {len(fr.locals)}")
        return Value(fr.func.local_types[i], fr.locals[i])

    def set_local(self, i, value):
        fr = self._frame()
        if not 0 <= i < len(fr.locals):
            raise IndexOutOfRange(f"local {i} of {len(fr.locals)}")
        fr.locals[i] = self._coerce(fr.func.local_types[i], value)

    def _window_end(self, fr):
        frames = self.engine.frames
        i = self.stack_index
        if i + 1 < len(frames):
            return frames[i + 1].base
        return len(fr.stack)

    def num_operands(self):
        fr = self._frame()
        return self._window_end(fr) - fr.base

    def _slot(self, fr, k):
        end = self._window_end(fr)
        n = end - fr.base
        if not 0 <= k < n:
            raise IndexOutOfRange(f"operand {k} of {n}")
        ty = fr.func.types_at[fr.pc][n - 1 - k]
        return end - 1 - k, ty

    def get_operand(self, k):
        """Operand k counted from the top of the stack (k = 0 is the top)."""
        fr = self._frame()
        i, ty = self._slot(fr, k)
        return Value(ty, fr.stack[i])

    def set_operand(self, k, value):
        fr = self._frame()
        i, ty = self._slot(fr, k)
        fr.stack[i] = self._coerce(ty, value)

    @staticmethod
    def _coerce(expected, value):
        if not isinstance(value, Value):
            raise TypeMismatch(f"expected a Value, got {value!r}")
        if value.type != expected:
            raise TypeMismatch(f"slot holds {expected}, got {value.type}")
        return value.payload


def materialize_accessor(engine, stack_index):
    fr = engine.frames[stack_index]
    acc = fr.accessor_slot
    if acc is None:
        acc = FrameAccessor(engine, fr.frame_id, stack_index)
        fr.accessor_slot = acc
    return acc


class ProbeContext:
    """Reusable accessor source handed to generic probes. Bound for the
    duration of one firing sequence; using it afterwards fails fast."""

    __slots__ = ("engine", "_frame", "_pc", "_loc")

    def __init__(self, engine):
        self.engine = engine
        self._frame = None
        self._pc = 0
        self._loc = None

    def _bind(self, frame, pc):
        self._frame = frame
        self._pc = pc
        self._loc = None

    def _unbind(self):
        self._frame = None

    def _live(self):
        fr = self._frame
        if fr is None:
            raise ProbeError("probe context used outside its firing")
        return fr

    def location(self):
        loc = self._loc
        if loc is None:
            fr = self._live()
            loc = CodeLocation(self.engine.module.id,
                               fr.func.func_index, self._pc)
            self._loc = loc
        return loc

    def frame(self):
        """Materialize (or reuse) the FrameAccessor for the current frame."""
        self._live()
        return materialize_accessor(self.engine, len(self.engine.frames) - 1)

    def tos(self):
        """Top-of-stack Value without materializing an accessor."""
        fr = self._live()
        s = fr.stack
        if len(s) <= fr.base:
            raise ProbeError("operand stack is empty at this location")
        return Value(fr.func.types_at[self._pc][-1], s[-1])


def run_probes(vm, frame, pc, gsnap, lsnap, func):
    """Fire a pre-taken snapshot: global probes first, then local."""
    if vm.commands.queue:
        vm.drain_commands()
    if vm.check_frames:
        expect = func.depth_at[pc]
        have = len(frame.stack) - frame.base
        if have != expect:
            raise WasmError(
                f"operand depth {have} != validator depth {expect} at pc {pc}")
    ctx = vm.probe_ctx
    ctx._bind(frame, pc)
    p = None
    try:
        for p in gsnap + lsnap:
            k = p.kind
            if k is COUNTER:
                c = p.count
                if c < U64_MAX:
                    p.count = c + 1
            elif k is OPERAND_TOS:
                p.fire_tos(ctx.location(), ctx.tos())
            else:
                p.fire(ctx)
    except MonitorError:
        raise
    except Exception as e:
        raise MonitorError(p, e) from e
    finally:
        ctx._unbind()


def fire_single(p, ctx):
    """Kind-dispatched firing of one probe outside the snapshot loop."""
    k = p.kind
    if k is COUNTER:
        if p.count < U64_MAX:
            p.count += 1
    elif k is OPERAND_TOS:
        p.fire_tos(ctx.location(), ctx.tos())
    else:
        p.fire(ctx)


def probe_opcode_handler(vm, frame):
    """NORMAL-table handler for the probe opcode: fire, then execute the
    original instruction recovered from the pristine copy."""
    pc = frame.pc
    func = frame.func
    plist = func.probes.get(pc)
    if plist is None:
        raise WasmError(f"probe opcode with no probes at pc {pc}")
    run_probes(vm, frame, pc, (), tuple(plist.items), func)
    return vm.normal_table[func.pristine[pc]](vm, frame)


def global_probe_stub(vm, frame):
    """Every GLOBAL_PROBE-table entry: fire the global list (then any local
    list) and dispatch the original handler through the normal table.

    The opcode byte is read before anything fires, so probes inserted at
    this location during the firing cannot take effect on this occurrence.
    """
    pc = frame.pc
    func = frame.func
    op = frame.body[pc]
    if op == PROBE_OPCODE:
        plist = func.probes.get(pc)
        lsnap = tuple(plist.items) if plist else ()
        op = func.pristine[pc]
    else:
        lsnap = ()
    run_probes(vm, frame, pc, tuple(vm.global_probes.items), lsnap, func)
    return vm.normal_table[op](vm, frame)


def interrupt_stub(vm, frame):
    """One-shot table installed by request_interrupt(): drain the command
    queue at this boundary, restore the mode's table, redispatch."""
    vm.drain_commands()
    vm.dispatch = vm.tables[vm.mode]
    return vm.dispatch[frame.body[frame.pc]](vm, frame)


class Instrumenter:
    """Public probe API bound to one engine."""

    def __init__(self, engine):
        self.engine = engine

    def _check_context(self):
        if not self.engine.in_probe_context():
            raise WrongContext(
                "probe API used off the engine thread while running")

    def resolve(self, loc):
        """Validate a CodeLocation; returns (FuncDecl, pc)."""
        eng = self.engine
        if loc.module_id != eng.module.id:
            raise InvalidLocation(f"{loc}: wrong module")
        func = eng.module.func_at(loc.func_index)
        if func is None:
            raise InvalidLocation(f"{loc}: not a defined function")
        if loc.pc not in func.depth_at:
            raise InvalidLocation(f"{loc}: not an instruction boundary")
        return func, loc.pc

    # -- local probes ---------------------------------------------------------

    def insert_probe(self, loc, probe):
        self._check_context()
        func, pc = self.resolve(loc)
        plist = func.probes.get(pc)
        if plist is None:
            plist = func.probes[pc] = ProbeList()
        plist.add(probe)
        if len(plist) == 1:
            func.body[pc] = PROBE_OPCODE

    def remove_probe(self, loc, probe):
        self._check_context()
        func, pc = self.resolve(loc)
        plist = func.probes.get(pc)
        if plist is None:
            raise NotInstalled(f"no probes at {loc}")
        plist.discard(probe)
        if not plist.items:
            del func.probes[pc]
            func.body[pc] = func.pristine[pc]

    def probes_at(self, loc):
        func, pc = self.resolve(loc)
        plist = func.probes.get(pc)
        return tuple(plist.items) if plist else ()

    # -- global probes -----------------------------------------------------------

    def insert_global_probe(self, probe):
        from .interp import DispatchMode  # local import; no cycle at load

        self._check_context()
        glist = self.engine.global_probes
        glist.add(probe)
        if len(glist) == 1:
            self.engine.set_dispatch_mode(DispatchMode.GLOBAL_PROBE)

    def remove_global_probe(self, probe):
        from .interp import DispatchMode

        self._check_context()
        glist = self.engine.global_probes
        glist.discard(probe)
        if not glist.items:
            self.engine.set_dispatch_mode(DispatchMode.NORMAL)

    # -- higher-level hooks, built only from the public API above -----------------

    def after_instruction(self, loc, probe):
        """Fire `probe` once at the dynamically next instruction after each
        execution of `loc` (a branch target or a callee's first instruction,
        wherever control actually goes).

        Returns the trigger probe; removing it from `loc` uninstalls the hook.
        If the program ends before another instruction dispatches, the pending
        shot never fires.
        """
        trigger = _AfterTrigger(self, probe)
        self.insert_probe(loc, trigger)
        return trigger

    def instrument_entry_exit(self, func, on_entry=None, on_exit=None):
        """Call `on_entry` once per frame creation of `func` (backedges over a
        leading loop do not re-trigger) and `on_exit` once per normal return.
        Traps unwind without an exit callback.

        `func` is a FuncDecl or a function-space index. Returns the hook
        object; `remove()` uninstalls it.
        """
        eng = self.engine
        if isinstance(func, int):
            fd = eng.module.func_at(func)
            if fd is None:
                raise InvalidLocation(f"function {func} is not defined")
            func = fd
        return _EntryExitHook(self, func, on_entry, on_exit)


class _AfterTrigger(Probe):
    __slots__ = ("instr", "target")

    def __init__(self, instr, target):
        self.instr = instr
        self.target = target

    def fire(self, ctx):
        self.instr.insert_global_probe(_OneShot(self.instr, self.target))


class _OneShot(Probe):
    __slots__ = ("instr", "target")

    def __init__(self, instr, target):
        self.instr = instr
        self.target = target

    def fire(self, ctx):
        self.instr.remove_global_probe(self)
        fire_single(self.target, ctx)


class _EntryExitHook:
    def __init__(self, instr, func, on_entry, on_exit):
        self.instr = instr
        self.func = func
        self.on_entry = on_entry
        self.on_exit = on_exit
        self.shadow = []  # FrameAccessors of live activations, innermost last
        self._entry = CallbackProbe(self._enter)
        self._exit = CallbackProbe(self._leave)
        mid = instr.engine.module.id
        self._locs = [CodeLocation(mid, func.func_index, 0)]
        instr.insert_probe(self._locs[0], self._entry)
        for pc in sorted(set(func.return_pcs) | {func.end_pc}):
            loc = CodeLocation(mid, func.func_index, pc)
            self._locs.append(loc)
            instr.insert_probe(loc, self._exit)

    def _enter(self, ctx):
        acc = ctx.frame()
        sh = self.shadow
        while sh and not sh[-1].is_live():
            sh.pop()  # frames unwound by a trap never saw an exit
        if sh and sh[-1] is acc:
            return  # backedge of a leading loop, same frame
        sh.append(acc)
        if self.on_entry is not None:
            self.on_entry(acc)

    def _leave(self, ctx):
        acc = ctx.frame()
        sh = self.shadow
        if sh and sh[-1] is acc:
            sh.pop()
            if self.on_exit is not None:
                self.on_exit(acc)

    def remove(self):
        self.instr.remove_probe(self._locs[0], self._entry)
        for loc in self._locs[1:]:
            self.instr.remove_probe(loc, self._exit)
