"""
Poda de checkpoints reconstruibles.

Un checkpoint se elimina sólo si, en cada región donde su registro es
live-in y su definición llega, el valor se puede recalcular en el bloque de
recuperación con una receta acotada: una constante, una operación de ALU
sobre live-ins estables, o un diamante elegido por un predicado estable.
"""
import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from django.conf import settings

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.reaching import ReachingDefinitions, may_define
from apps.ir.regions import program_region_ids, region_starts

from .eager import _defined_at
from .paths import CONTINUE, FOUND, STOP, any_path, next_points, points_between
from .plan import (
    ALU, CONST, SELECT, CheckpointPlan, PlannedCheckpoint, PrunedCheckpoint, Recipe, anchor, freeze_blocks,
    mutable_blocks, planned_checkpoints, positions, relocate,
)

logger = logging.getLogger(__name__)

Point = Tuple[str, int]
SLOT = 'slot'
RECIPE = 'recipe'

# (receta, instrucciones totales, ramas totales) incluyendo anidadas
Built = Tuple[Recipe, int, int]


class _FunctionPruner:

    def __init__(self, program: Program, function: Function, live: LivenessResult, region_ids, max_slice, max_branches,
                 planned: List[PlannedCheckpoint]):
        self.function = function
        self.cfg = ControlFlowGraph(function)
        self.live = live
        self.reaching = ReachingDefinitions(program, function, self.cfg)
        self.call_defs = may_define(program)
        self.max_slice = max_slice
        self.max_branches = max_branches
        self.starts = region_starts(function)
        self.region_id = {s: region_ids[(function.name, s)] for s in self.starts}
        self.live_in = {s: live.region_live_in(function.name, s) for s in self.starts}
        self._reach: Dict[Tuple[Point, str], FrozenSet[Point]] = {}
        self._between: Dict[Tuple[Point, Point, str], Set[Point]] = {}
        self._eligible: Dict[Point, bool] = {}

        # definición -> checkpoint del plan que la sigue inmediatamente
        self.planned = planned
        self.checkpointed: Dict[Point, Point] = {}
        for entry in planned:
            label, idx = entry.definition
            if entry.location != (label, idx + 1):
                continue
            definition = self.inst(entry.definition)
            if definition.defs == (entry.register,) and definition.opcode is not Opcode.CALL:
                self.checkpointed[entry.definition] = entry.location

    def inst(self, point: Point):
        return self.function.block(point[0]).instructions[point[1]]

    def reach(self, start: Point, reg: str) -> FrozenSet[Point]:
        key = (start, reg)
        if key not in self._reach:
            self._reach[key] = self.reaching.reaching(reg, *start)
        return self._reach[key]

    def between(self, source: Point, target: Point, reg: str) -> Set[Point]:
        key = (source, target, reg)
        if key not in self._between:
            self._between[key] = points_between(
                self.function, self.cfg, source, target,
                lambda p: reg in self.reaching.defined_by(*p),
            )
        return self._between[key]

    def stable(self, source: Point, operand: str, start: Point, reg: str) -> bool:
        """¿`operand` no se redefine en ningún camino de `source` a `start` que lleve el valor de `reg`?"""
        return not any(operand in self.reaching.defined_by(*p) for p in self.between(source, start, reg))

    def flows_out(self, point: Point) -> bool:
        """El valor sale de la función (por una llamada o un ret con el registro vivo)"""
        reg = self.inst(point).dst
        fname = self.function.name

        def classify(p, inst):
            if reg in _defined_at(inst, self.call_defs):
                return STOP
            if inst.opcode is Opcode.CALL and reg in self.live.live_before(fname, *p):
                return FOUND
            if inst.opcode is Opcode.RET and reg in self.live.live_after(fname, *p):
                return FOUND
            return CONTINUE

        return any_path(self.function, self.cfg, next_points(self.function, self.cfg, point), classify)

    # ------------------------------------------------------------------
    # Recetas
    # ------------------------------------------------------------------

    def restore_kind(self, start: Point, reg: str, pruned: Set[Point]) -> Optional[str]:
        defs = self.reach(start, reg)
        hits = [d for d in defs if d in pruned]
        if not hits:
            return SLOT
        if len(hits) != len(defs):
            return None
        return RECIPE

    def _operands(self, start, reg, source, operands, pruned, stack):
        size, branches, nested = 0, 0, []
        for operand in operands:
            if operand == reg or operand not in self.live_in[start]:
                return None
            if not self.stable(source, operand, start, reg):
                return None
            kind = self.restore_kind(start, operand, pruned)
            if kind is None:
                return None
            if kind == RECIPE:
                if operand in stack:
                    return None
                built = self.build(start, operand, pruned, stack | {reg})
                if built is None:
                    return None
                recipe, sub_size, sub_branches = built
                size += sub_size
                branches += sub_branches
                nested.extend(r for r in recipe.nested if r not in nested)
                if operand not in nested:
                    nested.append(operand)
        return size, branches, nested

    def _single(self, start, reg, point, pruned, stack):
        inst = self.inst(point)
        if inst.opcode is Opcode.LI:
            return (inst,), 1, 0, []
        if not (inst.opcode.is_binop or inst.opcode is Opcode.MOV):
            return None
        found = self._operands(start, reg, point, inst.srcs, pruned, stack)
        if found is None:
            return None
        size, branches, nested = found
        return (inst,), 1 + size, branches, nested

    def _diamond(self, start, reg, defs, pruned, stack):
        first, second = sorted(defs)
        if first[0] == second[0]:
            return None
        preds = [self.cfg.predecessors[first[0]], self.cfg.predecessors[second[0]]]
        if len(preds[0]) != 1 or preds[0] != preds[1]:
            return None
        head = preds[0][0]
        term = self.function.block(head).terminator
        if term.opcode is not Opcode.BR or set(term.labels) != {first[0], second[0]}:
            return None
        predicate = term.srcs[0]
        if predicate == reg or predicate not in self.live_in[start]:
            return None

        arms = {}
        size, branches, nested = 3, 1, []
        for point in (first, second):
            prefix = self.function.block(point[0]).instructions[:point[1]]
            if any(predicate in i.defs for i in prefix):
                return None
            found = self._single(start, reg, point, pruned, stack)
            if found is None:
                return None
            body, arm_size, arm_branches, arm_nested = found
            arms[point[0]] = body
            size += arm_size
            branches += arm_branches
            nested.extend(r for r in arm_nested if r not in nested)
        found = self._operands(start, reg, first, (predicate,), pruned, stack)
        if found is None or not self.stable(second, predicate, start, reg):
            return None
        p_size, p_branches, p_nested = found
        nested.extend(r for r in p_nested if r not in nested)
        recipe = Recipe(
            reg, SELECT, arms[term.labels[0]],
            predicate=predicate, other=arms[term.labels[1]], nested=tuple(nested),
        )
        return recipe, size + p_size, branches + p_branches

    def build(self, start: Point, reg: str, pruned: Set[Point], stack: FrozenSet[str] = frozenset()) -> Optional[Built]:
        defs = self.reach(start, reg)
        if len(defs) == 1:
            (point,) = defs
            found = self._single(start, reg, point, pruned, stack)
            if found is None:
                return None
            body, size, branches, nested = found
            kind = CONST if body[0].opcode is Opcode.LI else ALU
            return Recipe(reg, kind, body, nested=tuple(nested)), size, branches
        if len(defs) == 2:
            return self._diamond(start, reg, defs, pruned, stack)
        return None

    def check(self, pruned: Set[Point]) -> Optional[Dict[Point, Dict[str, Recipe]]]:
        """Recetas de todas las regiones, o None si alguna poda queda sin reconstrucción"""
        recipes: Dict[Point, Dict[str, Recipe]] = {}
        for start in self.starts:
            for reg in sorted(self.live_in[start]):
                kind = self.restore_kind(start, reg, pruned)
                if kind is None:
                    return None
                if kind == SLOT:
                    continue
                built = self.build(start, reg, pruned)
                if built is None:
                    return None
                recipe, size, branches = built
                if size > self.max_slice or branches > self.max_branches:
                    return None
                recipes.setdefault(start, {})[reg] = recipe
        return recipes

    def eligible(self, point: Point) -> bool:
        if point not in self.checkpointed:
            return False
        if point not in self._eligible:
            inst = self.inst(point)
            recomputable = inst.opcode is Opcode.LI or inst.opcode.is_binop or inst.opcode is Opcode.MOV
            self._eligible[point] = recomputable and not self.flows_out(point)
        return self._eligible[point]

    def siblings(self, point: Point) -> Set[Point]:
        """Definiciones del mismo registro que llegan junto a ésta a algún inicio de región"""
        reg = self.inst(point).dst
        group = {point}
        for start in self.starts:
            if reg in self.live_in[start]:
                defs = self.reach(start, reg)
                if point in defs:
                    group |= defs
        return group

    def prune(self) -> Tuple[Function, Dict[int, Dict[str, Recipe]], Tuple[PrunedCheckpoint, ...], List[PlannedCheckpoint]]:
        pruned: Set[Point] = set()
        recipes: Dict[Point, Dict[str, Recipe]] = {}
        layout = {label: i for i, label in enumerate(self.function.labels)}
        for point in sorted(self.checkpointed, key=lambda p: (layout[p[0]], p[1])):
            if point in pruned or not self.eligible(point):
                continue
            group = self.siblings(point)
            # un diamante sólo se reconstruye si se podan sus dos brazos a la vez
            for candidate in ([group, {point}] if len(group) > 1 else [group]):
                if not all(self.eligible(p) for p in candidate):
                    continue
                attempt = self.check(pruned | candidate)
                if attempt is not None:
                    pruned |= candidate
                    recipes = attempt
                    break

        blocks = mutable_blocks(self.function)
        anchored = anchor(blocks, self.planned)
        definitions = {point: blocks[point[0]][point[1]] for point in pruned}
        for label, idx in sorted((self.checkpointed[p] for p in pruned), reverse=True):
            del blocks[label][idx]
        where = positions(blocks)

        records = []
        for point in sorted(pruned, key=lambda p: (layout[p[0]], p[1])):
            reg = self.inst(point).dst
            regions = tuple(sorted(
                self.region_id[s] for s in self.starts
                if reg in self.live_in[s] and point in self.reach(s, reg)
            ))
            records.append(PrunedCheckpoint(self.function.name, reg, where[id(definitions[point])], regions))
        by_id = {self.region_id[s]: per_region for s, per_region in recipes.items()}
        return freeze_blocks(self.function, blocks), by_id, tuple(records), relocate(blocks, anchored)


def prune_checkpoints(
    program: Program,
    plan: CheckpointPlan,
    live: Optional[LivenessResult] = None,
    max_slice: Optional[int] = None,
    max_branches: Optional[int] = None,
) -> Tuple[Program, CheckpointPlan]:
    """
    Elimina los checkpoints cuyo valor se reconstruye en la recuperación;
    el plan resultante lleva una receta por (región, registro) afectado.
    """
    live = live or liveness(program)
    max_slice = settings.PRUNING_MAX_SLICE if max_slice is None else max_slice
    max_branches = settings.PRUNING_MAX_BRANCHES if max_branches is None else max_branches
    region_ids = program_region_ids(program)

    functions, recipes, pruned, planned = [], {}, [], []
    for function in program.functions:
        pruner = _FunctionPruner(
            program, function, live, region_ids, max_slice, max_branches, planned_checkpoints(function, plan),
        )
        new_function, by_id, records, survivors = pruner.prune()
        functions.append(new_function)
        recipes.update(by_id)
        pruned.extend(records)
        planned.extend(survivors)
        logger.debug('prune: %s elimina %d checkpoints', function.name, len(records))
    plan = plan.with_updates(checkpoints=tuple(planned), pruned=plan.pruned + tuple(pruned), recipes=recipes)
    return program.with_functions(functions), plan
