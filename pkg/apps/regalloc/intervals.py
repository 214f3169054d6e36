"""
Intervalos de vida sobre la numeración lineal de todo el programa.

Los registros son globales (no hay convenio de llamada), así que un
registro vivo a través de una llamada también está vivo en todo el cuerpo
del llamado y su intervalo lo cubre.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from apps.ir.instructions import Program, is_physical
from apps.ir.liveness import LivenessResult, liveness


@dataclass(frozen=True)
class Interval:
    register: str
    start: int
    end: int

    def overlaps(self, other: 'Interval') -> bool:
        return self.start <= other.end and other.start <= self.end


def program_positions(program: Program) -> Dict[Tuple[str, str, int], int]:
    positions = {}
    for function in program.functions:
        for label, idx, _ in function.points():
            positions[(function.name, label, idx)] = len(positions)
    return positions


def live_intervals(program: Program, live: Optional[LivenessResult] = None) -> Dict[str, Interval]:
    live = live or liveness(program)
    bounds: Dict[str, Tuple[int, int]] = {}

    def touch(reg, pos):
        if is_physical(reg):
            return
        low, high = bounds.get(reg, (pos, pos))
        bounds[reg] = (min(low, pos), max(high, pos))

    pos = 0
    for function in program.functions:
        for label, idx, inst in function.points():
            for reg in live.live_before(function.name, label, idx):
                touch(reg, pos)
            for reg in live.live_after(function.name, label, idx):
                touch(reg, pos)
            for reg in inst.uses + inst.defs:
                touch(reg, pos)
            pos += 1
    return {reg: Interval(reg, low, high) for reg, (low, high) in bounds.items()}
