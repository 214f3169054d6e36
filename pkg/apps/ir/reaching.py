"""
Definiciones que alcanzan cada punto (flujo de datos hacia delante, intraprocedural)
"""
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from django.conf import settings

from .cfg import ControlFlowGraph
from .instructions import Function, Opcode, Program

ENTRY_DEF = '<entry>'

# Una definición es (registro, (bloque, índice)); las del inicio usan (ENTRY_DEF, -1)
Definition = Tuple[str, Tuple[str, int]]


def may_define(program: Program, caller_saved: Optional[Iterable[str]] = None) -> Dict[str, FrozenSet[str]]:
    """Registros que cada función puede escribir, incluyendo sus llamadas"""
    if caller_saved is None:
        caller_saved = getattr(settings, 'IR_CALLER_SAVED', ())
    clobbered = frozenset(r for r in caller_saved if r)
    direct = {}
    calls = {}
    for func in program.functions:
        regs, callees = set(), set()
        for _, _, inst in func.points():
            regs.update(inst.defs)
            if inst.opcode is Opcode.CALL:
                callees.add(inst.callee)
                regs.update(clobbered)
        direct[func.name], calls[func.name] = regs, callees
    changed = True
    while changed:
        changed = False
        for name, callees in calls.items():
            for callee in callees:
                missing = direct[callee] - direct[name]
                if missing:
                    direct[name] |= missing
                    changed = True
    return {name: frozenset(regs) for name, regs in direct.items()}


class ReachingDefinitions:
    """Conjuntos de definiciones que alcanzan la entrada de cada bloque e instrucción"""

    def __init__(self, program: Program, function: Function, cfg: Optional[ControlFlowGraph] = None):
        self.function = function
        self.cfg = cfg or ControlFlowGraph(function)
        self.call_defs = may_define(program)
        regs = function.registers() | frozenset().union(*self.call_defs.values())
        entry_defs = frozenset((r, (ENTRY_DEF, -1)) for r in regs)

        self.block_in: Dict[str, FrozenSet[Definition]] = {b.label: frozenset() for b in function.blocks}
        self.block_in[self.cfg.entry] = entry_defs
        block_out: Dict[str, FrozenSet[Definition]] = {}
        changed = True
        while changed:
            changed = False
            for label in self.cfg.reverse_postorder:
                preds = self.cfg.predecessors[label]
                incoming = set(entry_defs) if label == self.cfg.entry else set()
                for pred in preds:
                    incoming |= block_out.get(pred, frozenset())
                incoming = frozenset(incoming)
                out = self._through(label, incoming, len(function.block(label).instructions))
                if incoming != self.block_in[label] or block_out.get(label) != out:
                    self.block_in[label] = incoming
                    block_out[label] = out
                    changed = True

    def defined_by(self, label: str, idx: int) -> FrozenSet[str]:
        inst = self.function.block(label).instructions[idx]
        if inst.opcode is Opcode.CALL:
            return frozenset(inst.defs) | self.call_defs.get(inst.callee, frozenset())
        return frozenset(inst.defs)

    def _through(self, label, incoming, upto):
        current = set(incoming)
        for idx in range(upto):
            killed = self.defined_by(label, idx)
            if killed:
                current = {d for d in current if d[0] not in killed}
                current |= {(r, (label, idx)) for r in killed}
        return frozenset(current)

    def before(self, label: str, idx: int) -> FrozenSet[Definition]:
        return self._through(label, self.block_in[label], idx)

    def reaching(self, reg: str, label: str, idx: int) -> FrozenSet[Tuple[str, int]]:
        """Puntos de definición de `reg` que alcanzan la instrucción (label, idx)"""
        return frozenset(point for r, point in self.before(label, idx) if r == reg)
