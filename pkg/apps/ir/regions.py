"""
Puntos de inicio de región y recorridos dentro de una región (delimitada por `rb`)
"""
from typing import Callable, Iterator, List, Optional, Tuple

from .cfg import ControlFlowGraph
from .instructions import Function, Opcode, Program

Point = Tuple[str, int]


def region_starts(function: Function) -> List[Point]:
    """
    Primeras instrucciones de cada región, en orden de layout.

    La entrada de la función inicia una región salvo que su primer
    instrucción sea un `rb` (en ese caso la región la abre ese `rb`).
    """
    starts = []
    entry = function.entry
    if entry.instructions[0].opcode is not Opcode.RB:
        starts.append((entry.label, 0))
    for label, idx, inst in function.points():
        if inst.opcode is Opcode.RB:
            starts.append((label, idx + 1))
    return starts


def program_region_ids(program: Program):
    """Mapa (función, punto de inicio) -> id de región estable en orden de layout"""
    ids = {}
    for func in program.functions:
        for start in region_starts(func):
            ids[(func.name, start)] = len(ids)
    return ids


def boundary_region_ids(program: Program):
    """Mapa (función, bloque, índice del rb) -> id de la región que ese rb abre"""
    ids = program_region_ids(program)
    return {
        (fname, (label, idx - 1)): rid
        for (fname, (label, idx)), rid in ids.items()
        if idx > 0
    }


def walk_forward(
    function: Function,
    start: Point,
    visit: Callable[[str, int], Optional[bool]],
    cfg: Optional[ControlFlowGraph] = None,
) -> None:
    """
    Recorre hacia delante desde `start` (inclusive) sin cruzar `rb`.

    `visit(label, idx)` devuelve True para cortar ese camino. Los `rb` y los
    `ret` siempre cortan tras ser visitados. Cada bloque se entra una vez.
    """
    cfg = cfg or ControlFlowGraph(function)
    seen_entries = set()
    work = [start]
    while work:
        label, idx = work.pop()
        block = function.block(label)
        stopped = False
        while idx < len(block.instructions):
            inst = block.instructions[idx]
            if visit(label, idx):
                stopped = True
                break
            if inst.opcode in (Opcode.RB, Opcode.RET):
                stopped = True
                break
            idx += 1
        if stopped:
            continue
        for succ in cfg.successors[label]:
            if succ not in seen_entries:
                seen_entries.add(succ)
                work.append((succ, 0))


def region_members(function: Function, start: Point, cfg=None) -> Iterator[Point]:
    """Puntos alcanzables desde el inicio de la región sin cruzar otro `rb`"""
    members = []

    def visit(label, idx):
        members.append((label, idx))
        return False

    walk_forward(function, start, visit, cfg)
    return iter(dict.fromkeys(members))
