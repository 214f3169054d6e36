"""
Plan de checkpoints: qué registros se salvan, cuáles se podaron y con qué receta
"""
import json
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from apps.ir.instructions import Block, Function, Instruction, Opcode, Program

CONST = 'const'
ALU = 'alu'
SELECT = 'select'

Point = Tuple[str, int]


@dataclass(frozen=True)
class Recipe:
    """
    Reconstrucción de un registro vivo a la entrada de una región.

    `const` y `alu` llevan una sola instrucción en `body`; `select` ramifica
    sobre `predicate` (distinto de cero: `body`, si no: `other`). Los
    operandos son live-ins de la región; `nested` lista los que a su vez se
    reconstruyen con receta y deben calcularse antes.
    """
    register: str
    kind: str
    body: Tuple[Instruction, ...]
    predicate: Optional[str] = None
    other: Tuple[Instruction, ...] = ()
    nested: Tuple[str, ...] = ()

    @property
    def reads(self) -> FrozenSet[str]:
        regs = set()
        for inst in self.body + self.other:
            regs.update(inst.uses)
        if self.predicate:
            regs.add(self.predicate)
        return frozenset(regs)

    @property
    def size(self) -> int:
        if self.kind == SELECT:
            # br + brazos + un jmp por brazo
            return 1 + len(self.body) + len(self.other) + 2
        return len(self.body)

    @property
    def branches(self) -> int:
        return 1 if self.kind == SELECT else 0

    def rename(self, mapping: Dict[str, str]) -> 'Recipe':
        return replace(
            self,
            register=mapping.get(self.register, self.register),
            body=tuple(i.rename(mapping) for i in self.body),
            other=tuple(i.rename(mapping) for i in self.other),
            predicate=mapping.get(self.predicate, self.predicate) if self.predicate else None,
            nested=tuple(mapping.get(r, r) for r in self.nested),
        )

    def to_dict(self) -> dict:
        data = {
            'register': self.register,
            'kind': self.kind,
            'body': [str(i) for i in self.body],
        }
        if self.kind == SELECT:
            data['predicate'] = self.predicate
            data['other'] = [str(i) for i in self.other]
        if self.nested:
            data['nested'] = list(self.nested)
        return data


@dataclass(frozen=True)
class PrunedCheckpoint:
    function: str
    register: str
    definition: Tuple[str, int]
    regions: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            'function': self.function,
            'register': self.register,
            'definition': list(self.definition),
            'regions': list(self.regions),
        }


@dataclass(frozen=True)
class PlannedCheckpoint:
    """
    Un `ckpt register` del plan: lo motiva la definición en `definition`,
    está en `location` y alimenta la entrada de las regiones `regions`.
    """
    function: str
    register: str
    definition: Point
    location: Point
    regions: Tuple[int, ...] = ()

    def triple(self) -> Tuple[str, Point, Point]:
        return self.register, self.definition, self.location

    def to_dict(self) -> dict:
        return {
            'function': self.function,
            'register': self.register,
            'definition': list(self.definition),
            'location': list(self.location),
            'regions': list(self.regions),
        }


@dataclass(frozen=True)
class CheckpointPlan:
    """
    Estado del checkpointing tras cada pase. Los puntos de `checkpoints` se
    refieren al programa que sale del último pase de checkpoints.
    """
    eager: int = 0
    checkpoints: Tuple[PlannedCheckpoint, ...] = ()
    pruned: Tuple[PrunedCheckpoint, ...] = ()
    recipes: Dict[int, Dict[str, Recipe]] = field(default_factory=dict)
    sunk: int = 0
    deduplicated: int = 0

    def with_updates(self, **changes) -> 'CheckpointPlan':
        return replace(self, **changes)

    def recipes_for(self, region_id: int) -> Dict[str, Recipe]:
        return self.recipes.get(region_id, {})

    def for_region(self, region_id: int) -> Tuple[Tuple[str, Point, Point], ...]:
        """(registro, definición, checkpoint) de lo que la región recupera de un checkpoint"""
        return tuple(c.triple() for c in self.checkpoints if region_id in c.regions)

    def in_function(self, name: str) -> Tuple[PlannedCheckpoint, ...]:
        return tuple(c for c in self.checkpoints if c.function == name)

    def to_dict(self, program: Optional[Program] = None) -> dict:
        by_region: Dict[int, list] = {}
        for planned in self.checkpoints:
            for rid in planned.regions:
                by_region.setdefault(rid, []).append([planned.register, list(planned.definition), list(planned.location)])
        data = {
            'eager': self.eager,
            'planned': [c.to_dict() for c in self.checkpoints],
            'regions': {str(rid): triples for rid, triples in sorted(by_region.items())},
            'pruned': [p.to_dict() for p in self.pruned],
            'recipes': {
                str(rid): {r: recipe.to_dict() for r, recipe in sorted(per_region.items())}
                for rid, per_region in sorted(self.recipes.items())
            },
            'sunk': self.sunk,
            'deduplicated': self.deduplicated,
        }
        if program is not None:
            data['static_checkpoints'] = program.count(lambda i: i.is_checkpoint)
            data['checkpoints'] = checkpoint_inventory(program)
        return data

    def to_json(self, program: Optional[Program] = None) -> str:
        return json.dumps(self.to_dict(program), indent=2, sort_keys=True)


def planned_checkpoints(function: Function, plan: CheckpointPlan) -> List[PlannedCheckpoint]:
    """
    Entradas del plan para `function`. Si el plan no trae ninguna (programa
    escrito a mano), cada `ckpt` cuenta con la definición previa más cercana
    de su registro en el mismo bloque.
    """
    planned = list(plan.in_function(function.name))
    if planned:
        return planned
    for block in function.blocks:
        for idx, inst in enumerate(block.instructions):
            if inst.opcode is not Opcode.CKPT:
                continue
            reg = inst.srcs[0]
            definition = next(
                ((block.label, i) for i in range(idx - 1, -1, -1) if reg in block.instructions[i].defs),
                (block.label, idx),
            )
            planned.append(PlannedCheckpoint(function.name, reg, definition, (block.label, idx)))
    return planned


def anchor(blocks, planned: Iterable[PlannedCheckpoint]) -> List[Tuple[PlannedCheckpoint, Instruction, Instruction]]:
    """Fija cada entrada a sus objetos (definición, ckpt) antes de editar los bloques"""
    return [
        (c, blocks[c.definition[0]][c.definition[1]], blocks[c.location[0]][c.location[1]])
        for c in planned
    ]


def positions(blocks) -> Dict[int, Point]:
    """id de cada instrucción -> su punto actual"""
    return {id(inst): (label, idx) for label, insts in blocks.items() for idx, inst in enumerate(insts)}


def relocate(blocks, anchored) -> List[PlannedCheckpoint]:
    """Entradas cuyo ckpt sigue en `blocks`, con sus puntos actualizados"""
    where = positions(blocks)
    return [
        replace(c, definition=where.get(id(definition), c.definition), location=where[id(ckpt)])
        for c, definition, ckpt in anchored
        if id(ckpt) in where
    ]


def checkpoint_inventory(program: Program) -> Dict[str, Dict[str, int]]:
    """Checkpoints estáticos por función y registro"""
    inventory: Dict[str, Dict[str, int]] = {}
    for function in program.functions:
        counts: Dict[str, int] = {}
        for _, _, inst in function.points():
            if inst.opcode is Opcode.CKPT:
                counts[inst.srcs[0]] = counts.get(inst.srcs[0], 0) + 1
        if counts:
            inventory[function.name] = dict(sorted(counts.items()))
    return inventory


def mutable_blocks(function: Function):
    """Copia editable de los bloques: etiqueta -> lista de instrucciones"""
    return {b.label: list(b.instructions) for b in function.blocks}


def freeze_blocks(function: Function, blocks) -> Function:
    return function.with_blocks(Block(b.label, tuple(blocks[b.label])) for b in function.blocks)
