"""
Comprobador de interferencias de una asignación
"""
from itertools import combinations

from apps.common.exceptions import InvariantViolation
from apps.ir.instructions import Program, is_physical

from .allocator import Allocation
from .intervals import live_intervals


def check_allocation(original: Program, allocated: Program, allocation: Allocation) -> None:
    """
    Lanza InvariantViolation si dos virtuales con intervalos solapados
    comparten registro, si queda algún virtual sin asignar o si el programa
    resultante aún menciona registros virtuales.
    """
    intervals = live_intervals(original)
    missing = sorted(r for r in intervals if r not in allocation.mapping and r not in allocation.spill_slots)
    if missing:
        raise InvariantViolation(f'virtuales sin asignar: {missing}', {'missing': missing})

    conflicts = []
    for a, b in combinations(sorted(allocation.mapping), 2):
        if allocation.mapping[a] == allocation.mapping[b] and intervals[a].overlaps(intervals[b]):
            conflicts.append((a, b, allocation.mapping[a]))
    if conflicts:
        raise InvariantViolation(f'interferencias en la asignación: {conflicts}', {'conflicts': conflicts})

    leftover = sorted(r for r in allocated.registers() if not is_physical(r))
    if leftover:
        raise InvariantViolation(f'registros virtuales tras la asignación: {leftover}', {'virtual': leftover})
