"""
Capacidad de las regiones en el programa final.

Cada `st` y cada `ckpt` puede ocupar una entrada del SB hasta que su región
se verifica; ningún camino acíclico de una región debe ejecutar más entradas
que las que caben en el SB.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Instruction, Opcode, Program

Point = Tuple[str, int]


def takes_entry(inst: Instruction) -> bool:
    return inst.is_store or inst.is_checkpoint


@dataclass(frozen=True)
class Overflow:
    function: str
    path: Tuple[Point, ...]
    entries: int

    def split_point(self, function: Function) -> Optional[Point]:
        """
        Origen de la última instrucción del camino con alguna entrada
        delante; una frontera ahí deja el desborde en la región siguiente.
        """
        seen = 0
        chosen = None
        for label, idx in self.path:
            inst = function.block(label).instructions[idx]
            if seen and inst.origin is not None:
                chosen = inst.origin
            seen += takes_entry(inst)
        return chosen


def _path(function: Function, best_pred: Dict[str, Optional[str]], label: str, idx: int) -> Tuple[Point, ...]:
    reversed_path: List[Point] = []
    current: Optional[str] = label
    while current is not None:
        instructions = function.block(current).instructions
        for i in range(idx, -1, -1):
            if instructions[i].opcode is Opcode.RB:
                return tuple(reversed(reversed_path))
            reversed_path.append((current, i))
        current = best_pred[current]
        if current is not None:
            idx = len(function.block(current).instructions) - 1
    return tuple(reversed(reversed_path))


def function_overflow(function: Function, capacity: int) -> Optional[Overflow]:
    """Primer punto (en RPO) donde el camino más cargado de su región supera `capacity`"""
    cfg = ControlFlowGraph(function)
    back = set(cfg.retreating_edges)
    count_out: Dict[str, int] = {}
    best_pred: Dict[str, Optional[str]] = {}
    for label in cfg.reverse_postorder:
        preds = [p for p in cfg.predecessors[label] if (p, label) not in back and p in count_out]
        best_pred[label] = max(preds, key=lambda p: count_out[p], default=None)
        count = count_out[best_pred[label]] if best_pred[label] is not None else 0
        for idx, inst in enumerate(function.block(label).instructions):
            if inst.opcode is Opcode.RB:
                count = 0
            elif takes_entry(inst):
                count += 1
                if count > capacity:
                    return Overflow(function.name, _path(function, best_pred, label, idx), count)
        count_out[label] = count
    return None


def first_overflow(program: Program, capacity: int) -> Optional[Overflow]:
    for function in program.functions:
        overflow = function_overflow(function, capacity)
        if overflow is not None:
            return overflow
    return None


def max_region_entries(program: Program) -> int:
    """Máximo de entradas de SB en un camino de región"""
    worst = 0
    for function in program.functions:
        cfg = ControlFlowGraph(function)
        back = set(cfg.retreating_edges)
        count_out: Dict[str, int] = {}
        for label in cfg.reverse_postorder:
            preds = [p for p in cfg.predecessors[label] if (p, label) not in back and p in count_out]
            count = max((count_out[p] for p in preds), default=0)
            for inst in function.block(label).instructions:
                if inst.opcode is Opcode.RB:
                    count = 0
                elif takes_entry(inst):
                    count += 1
                    worst = max(worst, count)
            count_out[label] = count
    return worst
