"""
Inserción de fronteras de región (`rb`) con el presupuesto de stores del SB
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, Mapping, Optional, Set, Tuple

from apps.common.exceptions import ConfigurationError
from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Block, Function, Instruction, Opcode, Program

from .table import RegionTable, region_table

logger = logging.getLogger(__name__)

BOUNDARY = Instruction(Opcode.RB)


def store_budget(sb_size: int) -> int:
    if sb_size < 2:
        raise ConfigurationError(f'el tamaño del SB debe ser >= 2 (recibido {sb_size})')
    return sb_size // 2


def _structural_marks(function: Function, cfg: ControlFlowGraph, is_main: bool) -> Dict[str, Set[int]]:
    marks: Dict[str, Set[int]] = defaultdict(set)
    for _, head in cfg.retreating_edges:
        marks[head].add(0)
    if not is_main:
        marks[cfg.entry].add(0)
    for label, idx, inst in function.points():
        if inst.opcode is Opcode.CALL:
            marks[label].add(idx)
            marks[label].add(idx + 1)
    return marks


def _budget_marks(function, cfg, marks, budget):
    """
    Recorre en RPO contando stores; el contador de entrada de un bloque es el
    máximo de sus predecesores que no son aristas de retroceso.
    """
    back = set(cfg.retreating_edges)
    count_out: Dict[str, int] = {}
    for label in cfg.reverse_postorder:
        preds = [p for p in cfg.predecessors[label] if (p, label) not in back and p in count_out]
        count = max((count_out[p] for p in preds), default=0)
        for idx, inst in enumerate(function.block(label).instructions):
            if idx in marks[label] or inst.opcode is Opcode.RB:
                count = 0
            if inst.is_store:
                if count + 1 > budget:
                    marks[label].add(idx)
                    count = 0
                count += 1
        count_out[label] = count


def _rebuild(block: Block, positions: Set[int]) -> Tuple[Block, int]:
    out = []
    inserted = 0
    for idx, inst in enumerate(block.instructions):
        previous_is_rb = bool(out) and out[-1].opcode is Opcode.RB
        if idx in positions and not previous_is_rb and inst.opcode is not Opcode.RB:
            out.append(BOUNDARY)
            inserted += 1
            previous_is_rb = True
        if inst.opcode is Opcode.RB and previous_is_rb:
            continue
        out.append(inst)
    return Block(block.label, tuple(out)), inserted


def partition_function(
    function: Function, budget: int, is_main: bool, forced: Iterable[Tuple[str, int]] = (),
) -> Tuple[Function, int]:
    cfg = ControlFlowGraph(function)
    marks = _structural_marks(function, cfg, is_main)
    for label, idx in forced:
        marks[label].add(idx)
    _budget_marks(function, cfg, marks, budget)
    blocks, inserted = [], 0
    for block in function.blocks:
        new_block, count = _rebuild(block, marks.get(block.label, set()))
        blocks.append(new_block)
        inserted += count
    return function.with_blocks(blocks), inserted


def partition(
    program: Program, sb_size: int, forced: Optional[Mapping[str, Set[Tuple[str, int]]]] = None,
) -> Tuple[Program, RegionTable]:
    """
    Parte cada función en regiones verificables.

    Hay frontera en cada cabecera de bucle, en la entrada de toda función
    distinta de main y alrededor de cada `call`; además, ningún camino
    acíclico dentro de una región supera floor(sb_size / 2) stores regulares.
    `forced` añade fronteras antes de puntos concretos de cada función.
    """
    budget = store_budget(sb_size)
    functions = []
    for function in program.functions:
        new_function, inserted = partition_function(
            function, budget, function.name == 'main', (forced or {}).get(function.name, ()),
        )
        logger.debug('partition: %s recibe %d fronteras (presupuesto %d)', function.name, inserted, budget)
        functions.append(new_function)
    partitioned = program.with_functions(functions)
    return partitioned, region_table(partitioned)
