"""
Asignación de registros por linear scan con coste de spill sensible a escrituras.

Se reservan `p{K-2}` y `p{K-1}` para el código de spill; las ranuras viven
en el segmento SPILL_BASE. El guardián de calidad repite la asignación con
W=1 y se queda con ella si el modelo ponderado spillea más variables.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from django.conf import settings
from sortedcontainers import SortedList

from apps.common.exceptions import AllocationError
from apps.ir.instructions import Block, Instruction, Opcode, Program, WORD, is_physical, reg_index
from apps.ir.liveness import liveness

from .cost import SpillCostModel, Usage, register_usage
from .intervals import Interval, live_intervals

logger = logging.getLogger(__name__)

MIN_REGISTERS = 4


@dataclass(frozen=True)
class Allocation:
    registers: int
    write_weight: float
    mapping: Dict[str, str]
    spill_slots: Dict[str, int]
    scratch: Tuple[str, ...]
    costs: Dict[str, float] = field(default_factory=dict)
    usage: Dict[str, Usage] = field(default_factory=dict)
    fallback: bool = False

    @property
    def spilled(self) -> Tuple[str, ...]:
        return tuple(sorted(self.spill_slots, key=reg_index))

    def to_dict(self) -> dict:
        variables = {}
        for reg in sorted(set(self.mapping) | set(self.spill_slots), key=reg_index):
            entry = {'cost': self.costs.get(reg, 0.0)}
            if reg in self.usage:
                entry.update(self.usage[reg].to_dict())
            if reg in self.spill_slots:
                entry['decision'] = 'spill'
                entry['slot'] = self.spill_slots[reg]
            else:
                entry['decision'] = self.mapping[reg]
            variables[reg] = entry
        return {
            'registers': self.registers,
            'write_weight': self.write_weight,
            'scratch': list(self.scratch),
            'spilled': list(self.spilled),
            'fallback_to_classic': self.fallback,
            'variables': variables,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_registers(program: Program, k: int) -> Tuple[set, Tuple[str, str]]:
    if k < MIN_REGISTERS:
        raise AllocationError(f'se necesitan al menos {MIN_REGISTERS} registros físicos (K={k})')
    scratch = (f'p{k - 2}', f'p{k - 1}')
    precolored = {reg_index(r) for r in program.registers() if is_physical(r)}
    clash = sorted(i for i in precolored if i >= k - 2)
    if clash:
        raise AllocationError(f'registros físicos de entrada fuera del banco asignable: {["p%d" % i for i in clash]}')
    return precolored, scratch


def linear_scan(
    intervals: Dict[str, Interval], costs: Dict[str, float], available: List[int],
) -> Tuple[Dict[str, int], List[str]]:
    """
    Recorre los intervalos por inicio; cuando no hay registro libre se
    spillea el de menor coste entre los activos y el actual.
    """
    active = SortedList(key=lambda iv: (iv.end, reg_index(iv.register)))
    free = SortedList(available)
    assigned: Dict[str, int] = {}
    spilled: List[str] = []

    for current in sorted(intervals.values(), key=lambda iv: (iv.start, iv.end, reg_index(iv.register))):
        while active and active[0].end < current.start:
            expired = active.pop(0)
            free.add(assigned[expired.register])
        if free:
            assigned[current.register] = free.pop(0)
            active.add(current)
            continue
        # menor coste; a igual coste, el que vive más
        victim = min(list(active) + [current], key=lambda iv: (costs.get(iv.register, 0.0), -iv.end, reg_index(iv.register)))
        spilled.append(victim.register)
        if victim is not current:
            active.remove(victim)
            assigned[current.register] = assigned.pop(victim.register)
            active.add(current)
    return assigned, spilled


def rewrite(program: Program, mapping: Dict[str, str], spill_slots: Dict[str, int], scratch: Tuple[str, ...]) -> Program:
    """Renombra a registros físicos e inserta recargas y stores de spill"""
    functions = []
    for function in program.functions:
        blocks = []
        for block in function.blocks:
            out: List[Instruction] = []
            for inst in block.instructions:
                if inst.opcode is Opcode.CKPT and inst.srcs[0] in spill_slots:
                    continue
                names = dict(mapping)
                used = [r for r in dict.fromkeys(inst.uses) if r in spill_slots]
                if len(used) > len(scratch):
                    raise AllocationError(f'{inst} lee más registros en spill que scratch disponibles')
                for reg, temp in zip(used, scratch):
                    out.append(Instruction(Opcode.LD, dst=temp, imm=spill_slots[reg]))
                    names[reg] = temp
                renamed = inst.rename_uses(names)
                store = None
                if inst.dst is not None:
                    if inst.dst in spill_slots:
                        renamed = replace(renamed, dst=scratch[0])
                        store = Instruction(Opcode.ST, srcs=(scratch[0],), imm=spill_slots[inst.dst])
                    else:
                        renamed = replace(renamed, dst=mapping.get(inst.dst, inst.dst))
                out.append(renamed)
                if store is not None:
                    out.append(store)
            blocks.append(Block(block.label, tuple(out)))
        functions.append(function.with_blocks(blocks))
    return program.with_functions(functions)


def _allocate_with(program, k, model, intervals, usage, precolored, scratch) -> Allocation:
    costs = {reg: model.cost(usage.get(reg, Usage())) for reg in intervals}
    available = [i for i in range(k - 2) if i not in precolored]
    assigned, spilled = linear_scan(intervals, costs, available)
    ordered = sorted(spilled, key=reg_index)
    spill_slots = {reg: settings.SPILL_BASE + WORD * n for n, reg in enumerate(ordered)}
    mapping = {reg: f'p{index}' for reg, index in assigned.items()}
    return Allocation(k, model.write_weight, mapping, spill_slots, scratch, costs, usage)


def allocate(
    program: Program, k: Optional[int] = None, model: Optional[SpillCostModel] = None,
) -> Tuple[Program, Allocation]:
    """
    Asigna registros físicos a todos los virtuales del programa. Devuelve el
    programa reescrito y el informe de spill.
    """
    k = settings.REGALLOC_REGISTERS if k is None else k
    model = model or SpillCostModel.from_settings()
    precolored, scratch = _check_registers(program, k)
    intervals = live_intervals(program, liveness(program))
    usage = register_usage(program)

    allocation = _allocate_with(program, k, model, intervals, usage, precolored, scratch)
    if model.write_weight != 1:
        classic = _allocate_with(program, k, model.classic(), intervals, usage, precolored, scratch)
        if len(allocation.spill_slots) > len(classic.spill_slots):
            logger.info(
                'regalloc: W=%s spillea %d variables frente a %d con W=1; se usa la asignación clásica',
                model.write_weight, len(allocation.spill_slots), len(classic.spill_slots),
            )
            allocation = Allocation(
                k, model.write_weight, classic.mapping, classic.spill_slots, scratch,
                classic.costs, usage, fallback=True,
            )
    logger.debug('regalloc: K=%d, %d asignados, %d en spill', k, len(allocation.mapping), len(allocation.spill_slots))
    return rewrite(program, allocation.mapping, allocation.spill_slots, scratch), allocation


def spill_everything(program: Program, k: Optional[int] = None) -> Tuple[Program, Allocation]:
    """Asignación trivial de referencia: todos los virtuales viven en memoria"""
    k = settings.REGALLOC_REGISTERS if k is None else k
    _, scratch = _check_registers(program, k)
    virtuals = sorted((r for r in program.registers() if not is_physical(r)), key=reg_index)
    spill_slots = {reg: settings.SPILL_BASE + WORD * n for n, reg in enumerate(virtuals)}
    allocation = Allocation(k, 1.0, {}, spill_slots, scratch)
    return rewrite(program, {}, spill_slots, scratch), allocation
