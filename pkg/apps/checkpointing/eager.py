"""
Checkpointing ansioso: un `ckpt r` tras cada última definición de un registro vivo a la salida de su región
"""
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Set, Tuple

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Instruction, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.reaching import ReachingDefinitions, may_define
from apps.ir.regions import program_region_ids, region_starts

from .paths import CONTINUE, FOUND, STOP, any_path, next_points
from .plan import CheckpointPlan, PlannedCheckpoint, freeze_blocks, mutable_blocks

logger = logging.getLogger(__name__)

Point = Tuple[str, int]


def _defined_at(inst: Instruction, call_defs) -> frozenset:
    if inst.opcode is Opcode.CALL:
        return call_defs.get(inst.callee, frozenset())
    return frozenset(inst.defs)


def needs_checkpoint(function, cfg, live, call_defs, point, reg) -> bool:
    """¿Algún camino intra-región desde la definición en `point` sale con `reg` vivo?"""
    fname = function.name

    def classify(p, inst):
        if inst.opcode is Opcode.RB:
            return FOUND if reg in live.live_before(fname, *p) else STOP
        if inst.opcode is Opcode.RET:
            return FOUND if reg in live.live_after(fname, *p) else STOP
        if reg in _defined_at(inst, call_defs):
            return STOP
        return CONTINUE

    return any_path(function, cfg, next_points(function, cfg, point), classify)


def needing_regions(program, function, cfg, live, region_ids, points: Set[Point]) -> Dict[Point, Set[int]]:
    """Definición -> regiones que la tienen viva y alcanzándolas a su entrada"""
    reaching = ReachingDefinitions(program, function, cfg)
    regions: Dict[Point, Set[int]] = defaultdict(set)
    for start in region_starts(function):
        rid = region_ids[(function.name, start)]
        for reg in live.region_live_in(function.name, start):
            for point in reaching.reaching(reg, *start):
                if point in points:
                    regions[point].add(rid)
    return regions


def _eager_function(program, function: Function, live: LivenessResult, call_defs, region_ids):
    cfg = ControlFlowGraph(function)
    targets = []
    for label, idx, inst in function.points():
        if inst.opcode in (Opcode.CALL, Opcode.RST) or not inst.defs:
            continue
        reg = inst.dst
        if needs_checkpoint(function, cfg, live, call_defs, (label, idx), reg):
            targets.append((label, idx, reg))
    regions = needing_regions(program, function, cfg, live, region_ids, {(l, i) for l, i, _ in targets})

    blocks = mutable_blocks(function)
    inserted = {}
    # de atrás hacia delante para no desplazar índices pendientes
    for label, idx, reg in reversed(targets):
        ckpt = Instruction(Opcode.CKPT, srcs=(reg,))
        inserted[id(ckpt)] = (ckpt, (label, idx))
        blocks[label].insert(idx + 1, ckpt)

    planned: List[PlannedCheckpoint] = []
    for block in function.blocks:
        for idx, inst in enumerate(blocks[block.label]):
            if id(inst) in inserted:
                origin = inserted[id(inst)][1]
                planned.append(PlannedCheckpoint(
                    function.name, inst.srcs[0], (block.label, idx - 1), (block.label, idx),
                    tuple(sorted(regions.get(origin, ()))),
                ))
    return freeze_blocks(function, blocks), planned


def insert_eager_checkpoints(
    program: Program, live: Optional[LivenessResult] = None,
) -> Tuple[Program, CheckpointPlan]:
    """
    Inserta `ckpt r` inmediatamente después de cada definición de r desde la
    que algún camino dentro de su región alcanza una salida (`rb`, o `ret`
    con r vivo después) con r vivo y sin redefinición intermedia.
    """
    live = live or liveness(program)
    call_defs = may_define(program)
    region_ids = program_region_ids(program)
    functions, planned = [], []
    for function in program.functions:
        new_function, entries = _eager_function(program, function, live, call_defs, region_ids)
        logger.debug('eager: %d checkpoints en %s', len(entries), function.name)
        functions.append(new_function)
        planned.extend(entries)
    return program.with_functions(functions), CheckpointPlan(eager=len(planned), checkpoints=tuple(planned))
