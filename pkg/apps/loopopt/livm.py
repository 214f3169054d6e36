"""
Fusión de variables de inducción.

Una IV básica j con paso múltiplo entero del paso de otra IV i se reescribe
como función afín de i: en el preheader se calcula t = j - a*i y cada uso de
j dentro del bucle pasa a leer a*i + t (más el ajuste de la posición del uso
respecto de las actualizaciones). La actualización de j desaparece y j deja
de estar viva a través de la arista de retorno, así que deja de necesitar un
checkpoint por iteración. Sólo se aplica si lo que se añade al cuerpo no
supera ese ahorro.
"""
import json
import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Tuple

from django.conf import settings

from apps.ir.cfg import ControlFlowGraph
from apps.ir.dominance import DominatorTree
from apps.ir.instructions import Block, Function, Instruction, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.loops import BasicIV, Loop, LoopInfo, find_loops

logger = logging.getLogger(__name__)

Point = Tuple[str, int]


@dataclass(frozen=True)
class Merge:
    function: str
    header: str
    merged: str
    base: str
    ratio: int
    uses: int
    # instrucciones netas que gana el cuerpo del bucle por iteración
    added: int = 0

    def to_dict(self) -> dict:
        return {
            'function': self.function,
            'header': self.header,
            'merged': self.merged,
            'base': self.base,
            'ratio': self.ratio,
            'uses': self.uses,
            'added': self.added,
        }


@dataclass(frozen=True)
class _Candidate:
    loop: Loop
    merged: BasicIV
    base: BasicIV
    ratio: int
    # punto de uso -> ajuste constante respecto de a*i + t
    uses: Dict[Point, int]


@dataclass
class _Rewrite:
    candidate: _Candidate
    setup: List[Instruction]
    blocks: Dict[str, List[Instruction]]
    added: int


class _LoopMerger:

    def __init__(self, program: Program, function: Function, live: LivenessResult):
        self.program = program
        self.function = function
        self.live = live
        self.cfg = ControlFlowGraph(function)
        self.doms = DominatorTree(self.cfg)

    def inst(self, point: Point) -> Instruction:
        return self.function.block(point[0]).instructions[point[1]]

    def dead_outside(self, loop: Loop, reg: str) -> bool:
        name = self.function.name
        if any(reg in self.live.live_in[(name, exit_label)] for exit_label in loop.exits):
            return False
        for label in loop.body:
            block = self.function.block(label)
            term = block.terminator
            if term.opcode is Opcode.RET and reg in self.live.live_after(name, label, len(block.instructions) - 1):
                return False
            for inst in block.instructions:
                if inst.opcode is Opcode.CALL and reg in self.live.function_live_in[inst.callee]:
                    return False
        return True

    def dominates_latches(self, loop: Loop, iv: BasicIV) -> bool:
        return all(self.doms.dominates(iv.update[0], latch) for latch in loop.latches)

    def executed_before(self, update: Point, use: Point) -> Optional[bool]:
        """True si la actualización precede al uso en la iteración, False si lo sigue, None si depende del camino"""
        if self.doms.point_dominates(update, use):
            return True
        if self.doms.point_dominates(use, update):
            return False
        return None

    def uses_of(self, loop: Loop, iv: BasicIV) -> List[Point]:
        points = []
        for label in sorted(loop.body, key=lambda l: self.cfg.layout_index[l]):
            for idx, inst in enumerate(self.function.block(label).instructions):
                if (label, idx) != iv.update and iv.register in inst.uses:
                    points.append((label, idx))
        return points

    def adjustments(self, loop, merged, base, ratio) -> Optional[Dict[Point, int]]:
        uses = {}
        for point in self.uses_of(loop, merged):
            after_merged = self.executed_before(merged.update, point)
            after_base = self.executed_before(base.update, point)
            if after_merged is None or after_base is None:
                return None
            uses[point] = (merged.step if after_merged else 0) - (ratio * base.step if after_base else 0)
        return uses

    def candidates(self, loop: Loop) -> Iterator[_Candidate]:
        if loop.preheader is None or len(loop.basic_ivs) < 2:
            return
        ivs = [iv for iv in loop.basic_ivs if self.dominates_latches(loop, iv)]
        dead = {iv.register for iv in ivs if self.dead_outside(loop, iv.register)}
        layout = self.cfg.layout_index
        by_update = sorted(ivs, key=lambda iv: (layout[iv.update[0]], iv.update[1]))
        bases = sorted(ivs, key=lambda iv: (iv.register in dead, abs(iv.step), layout[iv.update[0]], iv.update[1]))
        for merged in by_update:
            if merged.register not in dead:
                continue
            for base in bases:
                if base is merged or merged.step % base.step != 0:
                    continue
                ratio = merged.step // base.step
                uses = self.adjustments(loop, merged, base, ratio)
                if uses is not None:
                    yield _Candidate(loop, merged, base, ratio, uses)

    def rewrite(self, found: _Candidate) -> _Rewrite:
        """
        Reescribe el bucle sin la actualización de j. Los usos que preceden a
        la actualización de i leen un valor calculado una sola vez en la
        cabecera; los demás lo calculan en su bloque, compartido mientras i no
        cambie. Los usos como base de `ld`/`st` llevan el ajuste en el
        inmediato.
        """
        fresh = self.program.fresh_register_allocator()
        merged, base, ratio = found.merged.register, found.base.register, found.ratio
        header = found.loop.header

        def folded(point: Point) -> bool:
            inst = self.inst(point)
            return inst.base == merged and merged not in inst.srcs

        def source(point: Point) -> str:
            return offset if folded(point) else offsets[found.uses[point]]

        offset = next(fresh)
        offsets = {0: offset}
        setup = _scale(offset, base, ratio)
        setup.append(Instruction(Opcode.SUB, dst=offset, srcs=(merged, offset if setup else base)))
        for delta in sorted({d for p, d in found.uses.items() if not folded(p)} - {0}):
            offsets[delta] = next(fresh)
            setup.append(Instruction(Opcode.ADD, dst=offsets[delta], srcs=(offset,), imm=delta))

        early = {p for p in found.uses if not self.executed_before(found.base.update, p)}
        values: Dict[Point, str] = {}
        scaled_head: List[Instruction] = []
        adds_head: List[Instruction] = []
        if early:
            scaled = base if ratio == 1 else next(fresh)
            scaled_head = _scale(scaled, base, ratio)
            shared: Dict[str, str] = {}
            for point in sorted(early, key=lambda p: (self.cfg.layout_index[p[0]], p[1])):
                if source(point) not in shared:
                    shared[source(point)] = next(fresh)
                    adds_head.append(Instruction(Opcode.ADD, dst=shared[source(point)], srcs=(scaled, source(point))))
                values[point] = shared[source(point)]
        inserted = len(scaled_head) + len(adds_head)

        blocks: Dict[str, List[Instruction]] = {}
        for label in sorted(found.loop.body, key=lambda l: self.cfg.layout_index[l]):
            out: List[Instruction] = []
            scaled: Optional[str] = None
            local: Dict[str, str] = {}
            for idx, inst in enumerate(self.function.block(label).instructions):
                point = (label, idx)
                if point == found.merged.update:
                    continue
                if point in found.uses:
                    if point not in values:
                        if source(point) not in local:
                            if scaled is None:
                                scaled = base if ratio == 1 else next(fresh)
                                extra = _scale(scaled, base, ratio)
                                out.extend(extra)
                                inserted += len(extra)
                            local[source(point)] = next(fresh)
                            out.append(Instruction(Opcode.ADD, dst=local[source(point)], srcs=(scaled, source(point))))
                            inserted += 1
                        values[point] = local[source(point)]
                    inst = inst.rename_uses({merged: values[point]})
                    if folded(point):
                        inst = replace(inst, imm=(inst.imm or 0) + found.uses[point])
                out.append(inst)
                if base in inst.defs:
                    scaled, local = None, {}
            blocks[label] = out

        if scaled_head or adds_head:
            # el escalado abre la cabecera; las sumas van tras su primera
            # instrucción salvo que ésta lea j
            first = blocks[header][0]
            renamed = set(values.values())
            at = 0 if renamed & set(first.uses) or base in first.defs or first.opcode.is_terminator else 1
            blocks[header][at:at] = adds_head
            blocks[header][0:0] = scaled_head
        return _Rewrite(found, setup, blocks, inserted - 1)

    def apply(self, rewritten: _Rewrite) -> Tuple[Function, Merge]:
        found = rewritten.candidate
        blocks = {b.label: list(b.instructions) for b in self.function.blocks}
        blocks.update(rewritten.blocks)
        blocks[found.loop.preheader][-1:-1] = rewritten.setup
        function = self.function.with_blocks(
            Block(b.label, tuple(blocks[b.label])) for b in self.function.blocks
        )
        merge = Merge(
            self.function.name, found.loop.header, found.merged.register, found.base.register,
            found.ratio, len(found.uses), rewritten.added,
        )
        return function, merge


def _scale(dst: str, base: str, ratio: int) -> List[Instruction]:
    """dst = ratio * base; vacío con ratio 1"""
    if ratio == 1:
        return []
    if ratio > 0 and ratio & (ratio - 1) == 0:
        return [Instruction(Opcode.SHL, dst=dst, srcs=(base,), imm=ratio.bit_length() - 1)]
    return [Instruction(Opcode.MUL, dst=dst, srcs=(base,), imm=ratio)]


def _merge_once(program: Program, loops: LoopInfo, max_added: int) -> Optional[Tuple[Program, Merge]]:
    live = liveness(program)
    for function in program.functions:
        info = loops[function.name]
        if info.irreducible:
            continue
        merger = _LoopMerger(program, function, live)
        for loop in info.innermost_first():
            for found in merger.candidates(loop):
                rewritten = merger.rewrite(found)
                if rewritten.added > max_added:
                    logger.debug(
                        'livm: %s en %s/%s no compensa (+%d por iteración)',
                        found.merged.register, function.name, loop.header, rewritten.added,
                    )
                    continue
                new_function, merge = merger.apply(rewritten)
                functions = [new_function if f.name == function.name else f for f in program.functions]
                return program.with_functions(functions), merge
    return None


def merge_induction_variables(
    program: Program, loops: Optional[LoopInfo] = None, max_added: Optional[int] = None,
) -> Tuple[Program, Tuple[Merge, ...]]:
    """
    Fusiona IVs básicas mientras haya alguna legal y rentable: la
    reescritura no puede añadir al cuerpo del bucle más de `max_added`
    instrucciones netas por iteración (por defecto `LIVM_MAX_ADDED_OPS`).
    Devuelve el programa y la lista de fusiones hechas.
    """
    if max_added is None:
        max_added = settings.LIVM_MAX_ADDED_OPS
    merges: List[Merge] = []
    loops = loops or find_loops(program)
    while True:
        step = _merge_once(program, loops, max_added)
        if step is None:
            break
        program, merge = step
        merges.append(merge)
        logger.info(
            'livm: %s en %s/%s pasa a depender de %s (x%d, %d usos, %+d por iteración)',
            merge.merged, merge.function, merge.header, merge.base, merge.ratio, merge.uses, merge.added,
        )
        loops = find_loops(program)
    return program, tuple(merges)


def merges_to_json(merges) -> str:
    return json.dumps([m.to_dict() for m in merges], indent=2, sort_keys=True)
