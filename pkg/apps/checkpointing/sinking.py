"""
Hundimiento de checkpoints fuera de los bucles y eliminación de duplicados
"""
import logging
from collections import defaultdict
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Instruction, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.loops import find_loops
from apps.ir.reaching import may_define

from .eager import _defined_at
from .paths import CONTINUE, FOUND, STOP
from .plan import CheckpointPlan, PlannedCheckpoint, anchor, freeze_blocks, mutable_blocks, planned_checkpoints, positions

logger = logging.getLogger(__name__)


class _FunctionSinker:
    """
    Trabaja sobre listas mutables de instrucciones. Las salidas de región se
    identifican por su índice sin contar checkpoints, estable mientras sólo
    se muevan o borren `ckpt`.
    """

    def __init__(self, function: Function, live: LivenessResult, depth: Dict[str, int], call_defs):
        self.function = function
        self.cfg = ControlFlowGraph(function)
        self.depth = depth
        self.call_defs = call_defs
        self.blocks = mutable_blocks(function)
        self.exit_live = {}
        for label, insts in self.blocks.items():
            for idx, inst in enumerate(insts):
                if inst.opcode is Opcode.RB:
                    self.exit_live[(label, self._stripped(label, idx))] = live.live_before(function.name, label, idx)
                elif inst.opcode is Opcode.RET:
                    self.exit_live[(label, self._stripped(label, idx))] = live.live_after(function.name, label, idx)

    def _stripped(self, label, idx):
        return sum(1 for inst in self.blocks[label][:idx] if inst.opcode is not Opcode.CKPT)

    def locate(self, ckpt: Instruction) -> Tuple[str, int]:
        for label, insts in self.blocks.items():
            for idx, inst in enumerate(insts):
                if inst is ckpt:
                    return label, idx
        raise KeyError(str(ckpt))

    def _search(self, starts, classify) -> bool:
        seen = set()
        work = list(starts)
        while work:
            label, idx = work.pop()
            if (label, idx) in seen:
                continue
            seen.add((label, idx))
            verdict = classify(label, idx, self.blocks[label][idx])
            if verdict == FOUND:
                return True
            if verdict == STOP:
                continue
            if idx + 1 < len(self.blocks[label]):
                work.append((label, idx + 1))
            else:
                work.extend((s, 0) for s in self.cfg.successors[label])
        return False

    def _exit_verdict(self, label, idx, inst, reg):
        if inst.opcode in (Opcode.RB, Opcode.RET):
            return FOUND if reg in self.exit_live[(label, self._stripped(label, idx))] else STOP
        if reg in _defined_at(inst, self.call_defs):
            return STOP
        return None

    def reaches_needed_exit(self, starts, reg, stop_at=None) -> bool:
        def classify(label, idx, inst):
            verdict = self._exit_verdict(label, idx, inst, reg)
            if verdict is not None:
                return verdict
            if stop_at is not None and stop_at(inst):
                return STOP
            return CONTINUE
        return self._search(starts, classify)

    def _can_pass(self, inst: Instruction, reg: str) -> bool:
        if inst.opcode in (Opcode.RB, Opcode.CALL) or inst.opcode.is_terminator:
            return False
        if inst.opcode is Opcode.CKPT and inst.srcs == (reg,):
            return False
        return reg not in inst.defs

    def _slide(self, ckpt: Instruction, label: str, idx: int) -> Tuple[str, int]:
        """Baja el checkpoint todo lo legal dentro de su región; devuelve dónde queda"""
        reg = ckpt.srcs[0]
        while True:
            insts = self.blocks[label]
            stop = idx + 1
            while stop < len(insts) and self._can_pass(insts[stop], reg):
                stop += 1
            if stop - 1 != idx:
                insts.insert(stop - 1, insts.pop(idx))
                idx = stop - 1
            if not insts[idx + 1].opcode.is_terminator:
                return label, idx
            needed = [s for s in self.cfg.successors[label] if self.reaches_needed_exit([(s, 0)], reg)]
            if len(needed) != 1:
                return label, idx
            target = needed[0]
            if (
                target == label
                or self.cfg.predecessors[target] != [label]
                or self.blocks[target][0].opcode is Opcode.RB
                or self.depth.get(target, 0) > self.depth.get(label, 0)
            ):
                return label, idx
            insts.pop(idx)
            self.blocks[target].insert(0, ckpt)
            label, idx = target, 0

    def sink(self, ckpt: Instruction) -> bool:
        """Sólo se conserva el movimiento que saca el checkpoint de algún bucle"""
        start = self.locate(ckpt)
        label, idx = self._slide(ckpt, *start)
        if self.depth.get(label, 0) < self.depth.get(start[0], 0):
            return True
        if (label, idx) != start:
            self.blocks[label].pop(idx)
            self.blocks[start[0]].insert(start[1], ckpt)
        return False

    def covered(self, ckpt: Instruction) -> bool:
        """¿Todo camino desde este checkpoint a una salida que lo necesita pasa por otro del mismo registro?"""
        reg = ckpt.srcs[0]
        label, idx = self.locate(ckpt)
        if idx + 1 < len(self.blocks[label]):
            starts = [(label, idx + 1)]
        else:
            starts = [(s, 0) for s in self.cfg.successors[label]]
        return not self.reaches_needed_exit(
            starts, reg, stop_at=lambda inst: inst.opcode is Opcode.CKPT and inst.srcs == (reg,),
        )

    def run(self, planned: List[PlannedCheckpoint]) -> Tuple[Function, int, int, List[PlannedCheckpoint]]:
        anchored = anchor(self.blocks, planned)
        sunk = sum(1 for _, _, ckpt in reversed(anchored) if self.sink(ckpt))
        removed = 0
        for _, _, ckpt in anchored:
            if self.covered(ckpt):
                label, idx = self.locate(ckpt)
                del self.blocks[label][idx]
                removed += 1

        where = positions(self.blocks)
        # las regiones de un checkpoint borrado pasan a los que lo cubren
        inherited: Dict[Tuple[str, int], set] = defaultdict(set)
        for entry, definition, ckpt in anchored:
            if id(ckpt) not in where:
                inherited[(entry.register, id(definition))].update(entry.regions)
        survivors = [
            replace(
                entry,
                definition=where.get(id(definition), entry.definition),
                location=where[id(ckpt)],
                regions=tuple(sorted(set(entry.regions) | inherited[(entry.register, id(definition))])),
            )
            for entry, definition, ckpt in anchored
            if id(ckpt) in where
        ]
        return freeze_blocks(self.function, self.blocks), sunk, removed, survivors


def sink_checkpoints(
    program: Program, plan: CheckpointPlan, live: Optional[LivenessResult] = None,
) -> Tuple[Program, CheckpointPlan]:
    """
    Saca de los bucles los checkpoints cuyo valor sólo se necesita a la
    salida, bajándolos hacia la frontera de su región, y borra los que otro
    checkpoint posterior del mismo registro cubre.
    """
    live = live or liveness(program)
    loops = find_loops(program)
    call_defs = may_define(program)
    functions, planned, sunk, removed = [], [], 0, 0
    for function in program.functions:
        sinker = _FunctionSinker(function, live, loops[function.name].depth, call_defs)
        new_function, f_sunk, f_removed, survivors = sinker.run(planned_checkpoints(function, plan))
        logger.debug('sink: %s saca %d y elimina %d checkpoints', function.name, f_sunk, f_removed)
        functions.append(new_function)
        planned.extend(survivors)
        sunk += f_sunk
        removed += f_removed
    plan = plan.with_updates(
        checkpoints=tuple(planned), sunk=plan.sunk + sunk, deduplicated=plan.deduplicated + removed,
    )
    return program.with_functions(functions), plan
