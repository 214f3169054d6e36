"""
Análisis de vida de registros (flujo de datos hacia atrás, granularidad de instrucción)
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from django.conf import settings

from .cfg import ControlFlowGraph
from .instructions import Instruction, Opcode, Program
from .regions import region_starts, walk_forward

logger = logging.getLogger(__name__)

Live = FrozenSet[str]
EMPTY: Live = frozenset()


@dataclass(frozen=True)
class LivenessResult:
    """
    Conjuntos vivos por bloque y por punto de programa.

    `before[(f, b)][i]` son los registros vivos justo antes de la instrucción i
    del bloque b de la función f.
    """
    live_in: Dict[Tuple[str, str], Live]
    live_out: Dict[Tuple[str, str], Live]
    before: Dict[Tuple[str, str], Tuple[Live, ...]]
    function_live_in: Dict[str, Live]

    def live_before(self, func: str, label: str, idx: int) -> Live:
        return self.before[(func, label)][idx]

    def live_after(self, func: str, label: str, idx: int) -> Live:
        points = self.before[(func, label)]
        return points[idx + 1] if idx + 1 < len(points) else self.live_out[(func, label)]

    def region_live_in(self, func: str, start: Tuple[str, int]) -> Live:
        return self.live_before(func, *start)

    def region_live_out(self, program: Program, func: str, start: Tuple[str, int]) -> Live:
        """Unión de lo vivo en cada salida de la región (rb o ret)"""
        function = program.function(func)
        out = set()

        def visit(label, idx):
            inst = function.block(label).instructions[idx]
            if inst.opcode is Opcode.RB:
                out.update(self.live_before(func, label, idx))
            elif inst.opcode is Opcode.RET:
                out.update(self.live_after(func, label, idx))
            return False

        walk_forward(function, start, visit)
        return frozenset(out)

    def region_sets(self, program: Program) -> Dict[Tuple[str, Tuple[str, int]], Tuple[Live, Live]]:
        """(función, inicio) -> (live-in, live-out) de cada región"""
        sets = {}
        for function in program.functions:
            for start in region_starts(function):
                sets[(function.name, start)] = (
                    self.region_live_in(function.name, start),
                    self.region_live_out(program, function.name, start),
                )
        return sets


def _transfer(inst: Instruction, live_after: Live, uses_extra: Live, kills_extra: Iterable[str]) -> Live:
    live = set(live_after)
    live.difference_update(inst.defs)
    live.difference_update(kills_extra)
    live.update(inst.uses)
    live.update(uses_extra)
    return frozenset(live)


def liveness(program: Program, caller_saved: Optional[Iterable[str]] = None) -> LivenessResult:
    """
    Punto fijo de vida hacia atrás sobre todo el programa.

    Una llamada usa lo vivo a la entrada del llamado y destruye el conjunto
    caller-saved; el `ret` de una función distinta de main usa lo vivo tras
    cada una de sus llamadas. El `ret` de main no usa nada: la salida del
    programa es la memoria.
    """
    if caller_saved is None:
        caller_saved = getattr(settings, 'IR_CALLER_SAVED', ())
    clobbered = frozenset(r for r in caller_saved if r)
    cfgs = {f.name: ControlFlowGraph(f) for f in program.functions}

    function_live_in: Dict[str, Live] = {f.name: EMPTY for f in program.functions}
    after_calls: Dict[str, Live] = {f.name: EMPTY for f in program.functions}
    live_in: Dict[Tuple[str, str], Live] = {}
    live_out: Dict[Tuple[str, str], Live] = {}
    before: Dict[Tuple[str, str], Tuple[Live, ...]] = {}

    def walk_block(fname, block, out):
        points: List[Live] = [EMPTY] * len(block.instructions)
        current = out
        for idx in range(len(block.instructions) - 1, -1, -1):
            inst = block.instructions[idx]
            extra, kills = EMPTY, ()
            if inst.opcode is Opcode.CALL:
                extra, kills = function_live_in[inst.callee], clobbered
            elif inst.opcode is Opcode.RET and fname != 'main':
                extra = after_calls[fname]
            current = _transfer(inst, current, extra, kills)
            points[idx] = current
        return current, tuple(points)

    rounds = 0
    while True:
        rounds += 1
        changed = False
        for function in program.functions:
            cfg = cfgs[function.name]
            order = [b for b in reversed(cfg.reverse_postorder)]
            order += [b.label for b in function.blocks if b.label not in cfg.reachable]
            local_changed = True
            while local_changed:
                local_changed = False
                for label in order:
                    block = function.block(label)
                    key = (function.name, label)
                    out = frozenset().union(*(live_in.get((function.name, s), EMPTY) for s in cfg.successors[label]))
                    new_in, points = walk_block(function.name, block, out)
                    if live_in.get(key) != new_in or live_out.get(key) != out:
                        live_in[key], live_out[key] = new_in, out
                        local_changed = True
                    before[key] = points
            entry_live = live_in[(function.name, function.entry.label)]
            if entry_live != function_live_in[function.name]:
                function_live_in[function.name] = entry_live
                changed = True

        new_after = {f.name: set() for f in program.functions}
        for function in program.functions:
            for label, idx, inst in function.points():
                if inst.opcode is Opcode.CALL:
                    points = before[(function.name, label)]
                    after = points[idx + 1] if idx + 1 < len(points) else live_out[(function.name, label)]
                    new_after[inst.callee].update(after)
        for name, regs in new_after.items():
            if frozenset(regs) != after_calls[name]:
                after_calls[name] = frozenset(regs)
                changed = True
        if not changed:
            break

    logger.debug('liveness: punto fijo en %d rondas', rounds)
    return LivenessResult(live_in, live_out, before, function_live_in)
