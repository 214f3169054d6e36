"""
Bloques de recuperación por región.

Cada bloque restaura los live-ins de su región: `rst` para los que tienen
checkpoint, la receta para los podados, y termina con un `jmp` al bloque
donde empieza la región.
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from apps.common.exceptions import HardFault
from apps.ir.instructions import Block, Instruction, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.regions import program_region_ids

from .plan import SELECT, CheckpointPlan, Recipe

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveryBlock:
    region_id: int
    function: str
    resume: Tuple[str, int]
    blocks: Tuple[Block, ...]
    restores: Tuple[str, ...]
    recipes: Tuple[str, ...]
    # (registro, definición, checkpoint) del plan que respalda cada rst
    sources: Tuple[Tuple[str, Tuple[str, int], Tuple[str, int]], ...] = ()

    @property
    def size(self) -> int:
        return sum(len(b.instructions) for b in self.blocks)

    def to_dict(self) -> dict:
        return {
            'region': self.region_id,
            'function': self.function,
            'resume': list(self.resume),
            'restores': list(self.restores),
            'recipes': list(self.recipes),
            'sources': [[reg, list(definition), list(location)] for reg, definition, location in self.sources],
            'size': self.size,
            'blocks': {b.label: [str(i) for i in b.instructions] for b in self.blocks},
        }


def recipe_order(recipes: Dict[str, Recipe]) -> List[Recipe]:
    """Recetas en orden topológico: las anidadas antes que quien las lee"""
    ordered: List[Recipe] = []
    placed = set()

    def place(reg):
        if reg in placed or reg not in recipes:
            return
        placed.add(reg)
        recipe = recipes[reg]
        for dep in recipe.nested:
            place(dep)
        for dep in sorted(recipe.reads):
            place(dep)
        ordered.append(recipe)

    for reg in sorted(recipes):
        place(reg)
    return ordered


class _Emitter:
    """Va formando los bloques locales `rec{id}`, `rec{id}_t{n}`, ..."""

    def __init__(self, region_id: int, mapping, spill_slots, scratch):
        self.prefix = f'rec{region_id}'
        self.mapping = mapping
        self.spill_slots = spill_slots
        self.scratch = scratch
        self.blocks: List[Block] = []
        self.label = self.prefix
        self.current: List[Instruction] = []
        self.selects = 0

    def close(self, terminator: Instruction, next_label: Optional[str] = None):
        self.current.append(terminator)
        self.blocks.append(Block(self.label, tuple(self.current)))
        self.current = []
        self.label = next_label

    def emit(self, inst: Instruction):
        self.current.append(inst)

    def operand(self, reg: str, slot: int) -> str:
        """Registro físico del operando; si está en spill lo carga en un scratch"""
        if reg in self.spill_slots:
            if slot >= len(self.scratch):
                raise HardFault(f'receta de {self.prefix} necesita más registros scratch')
            target = self.scratch[slot]
            self.emit(Instruction(Opcode.LD, dst=target, imm=self.spill_slots[reg]))
            return target
        return self.mapping.get(reg, reg)

    def compute(self, inst: Instruction):
        if inst.opcode is Opcode.LI:
            self.emit(Instruction(Opcode.LI, dst=self.mapping.get(inst.dst, inst.dst), imm=inst.imm))
            return
        renamed = {}
        for slot, reg in enumerate(dict.fromkeys(inst.srcs)):
            renamed[reg] = self.operand(reg, slot)
        renamed[inst.dst] = self.mapping.get(inst.dst, inst.dst)
        self.emit(inst.rename(renamed))

    def recipe(self, recipe: Recipe):
        if recipe.kind != SELECT:
            for inst in recipe.body:
                self.compute(inst)
            return
        n = self.selects
        self.selects += 1
        taken, fallen, join = f'{self.prefix}_t{n}', f'{self.prefix}_f{n}', f'{self.prefix}_j{n}'
        predicate = self.operand(recipe.predicate, 0)
        self.close(Instruction(Opcode.BR, srcs=(predicate,), labels=(taken, fallen)), taken)
        for inst in recipe.body:
            self.compute(inst)
        self.close(Instruction(Opcode.JMP, labels=(join,)), fallen)
        for inst in recipe.other:
            self.compute(inst)
        self.close(Instruction(Opcode.JMP, labels=(join,)), join)


def build_recovery_blocks(
    program: Program,
    plan: CheckpointPlan,
    allocation=None,
    live: Optional[LivenessResult] = None,
) -> Dict[int, RecoveryBlock]:
    """
    Construye el bloque de recuperación de cada región del programa final.

    Con `allocation`, las recetas (en registros virtuales) se traducen con
    `allocation.mapping`; las que reconstruyen un registro en spill se
    omiten y los operandos en spill se cargan de su ranura en
    `allocation.scratch`.
    """
    live = live or liveness(program)
    mapping = dict(allocation.mapping) if allocation is not None else {}
    spill_slots = dict(allocation.spill_slots) if allocation is not None else {}
    scratch = tuple(allocation.scratch) if allocation is not None else ()

    result: Dict[int, RecoveryBlock] = {}
    for (fname, start), rid in program_region_ids(program).items():
        live_in = live.region_live_in(fname, start)
        recipes = {
            mapping.get(reg, reg): recipe
            for reg, recipe in plan.recipes_for(rid).items()
            if reg not in spill_slots and mapping.get(reg, reg) in live_in
        }
        emitter = _Emitter(rid, mapping, spill_slots, scratch)
        restores = tuple(sorted(r for r in live_in if r not in recipes))
        for reg in restores:
            emitter.emit(Instruction(Opcode.RST, dst=reg))
        by_virtual = {recipe.register: recipe for recipe in recipes.values()}
        for recipe in recipe_order(by_virtual):
            emitter.recipe(recipe)
        emitter.close(Instruction(Opcode.JMP, labels=(start[0],)))
        sources = tuple(sorted(
            (mapping.get(reg, reg), definition, location)
            for reg, definition, location in plan.for_region(rid)
            if reg not in spill_slots and mapping.get(reg, reg) in restores
        ))
        result[rid] = RecoveryBlock(
            rid, fname, start, tuple(emitter.blocks), restores, tuple(sorted(recipes)), sources,
        )
    logger.debug('recuperación: %d bloques, %d recetas', len(result), sum(len(b.recipes) for b in result.values()))
    return result


def recovery_to_json(blocks: Dict[int, RecoveryBlock]) -> str:
    return json.dumps({str(rid): b.to_dict() for rid, b in sorted(blocks.items())}, indent=2, sort_keys=True)
