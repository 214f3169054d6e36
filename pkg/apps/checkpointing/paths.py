"""
Búsquedas sobre el grafo de puntos de programa (instrucción a instrucción)
"""
from typing import Callable, Iterable, List, Set, Tuple

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Instruction

Point = Tuple[str, int]

FOUND = 'found'
STOP = 'stop'
CONTINUE = 'continue'


def next_points(function: Function, cfg: ControlFlowGraph, point: Point) -> List[Point]:
    label, idx = point
    if idx + 1 < len(function.block(label).instructions):
        return [(label, idx + 1)]
    return [(succ, 0) for succ in cfg.successors[label]]


def previous_points(function: Function, cfg: ControlFlowGraph, point: Point) -> List[Point]:
    label, idx = point
    if idx > 0:
        return [(label, idx - 1)]
    return [(pred, len(function.block(pred).instructions) - 1) for pred in cfg.predecessors[label]]


def any_path(
    function: Function,
    cfg: ControlFlowGraph,
    starts: Iterable[Point],
    classify: Callable[[Point, Instruction], str],
) -> bool:
    """¿Algún camino desde `starts` llega a un punto clasificado como FOUND?"""
    seen: Set[Point] = set()
    work = list(starts)
    while work:
        point = work.pop()
        if point in seen:
            continue
        seen.add(point)
        verdict = classify(point, function.block(point[0]).instructions[point[1]])
        if verdict == FOUND:
            return True
        if verdict == STOP:
            continue
        work.extend(next_points(function, cfg, point))
    return False


def points_between(
    function: Function,
    cfg: ControlFlowGraph,
    source: Point,
    target: Point,
    blocked: Callable[[Point], bool],
) -> Set[Point]:
    """
    Puntos estrictamente entre `source` y `target` en algún camino que no
    atraviese un punto bloqueado.
    """
    forward: Set[Point] = set()
    work = next_points(function, cfg, source)
    while work:
        point = work.pop()
        if point in forward or blocked(point):
            continue
        forward.add(point)
        work.extend(next_points(function, cfg, point))

    backward: Set[Point] = set()
    work = previous_points(function, cfg, target)
    while work:
        point = work.pop()
        if point in backward or blocked(point):
            continue
        backward.add(point)
        work.extend(previous_points(function, cfg, point))
    return forward & backward
