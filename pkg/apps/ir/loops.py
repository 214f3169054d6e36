"""
Detección de bucles naturales y de variables de inducción
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from apps.common.exceptions import IrreducibleCFG

from .cfg import ControlFlowGraph
from .dominance import DominatorTree
from .instructions import Function, Opcode, Program
from .reaching import ReachingDefinitions, may_define

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BasicIV:
    """r = r ± c, única actualización de r dentro del bucle"""
    register: str
    step: int
    update: Tuple[str, int]
    init_defs: FrozenSet[Tuple[str, int]]
    init_value: Optional[int] = None


@dataclass(frozen=True)
class InducedIV:
    """r = escala * iv + desplazamiento, derivada de una IV básica"""
    register: str
    base: str
    scale: int
    offset: int
    definition: Tuple[str, int]


@dataclass(frozen=True)
class Loop:
    header: str
    body: FrozenSet[str]
    latches: Tuple[str, ...]
    preheader: Optional[str]
    exits: FrozenSet[str]
    depth: int = 1
    parent: Optional[str] = None
    basic_ivs: Tuple[BasicIV, ...] = ()
    induced_ivs: Tuple[InducedIV, ...] = ()

    def iv(self, register: str) -> Optional[BasicIV]:
        for iv in self.basic_ivs:
            if iv.register == register:
                return iv
        return None


@dataclass(frozen=True)
class FunctionLoops:
    function: str
    loops: Tuple[Loop, ...] = ()
    depth: Dict[str, int] = field(default_factory=dict)
    irreducible: bool = False
    diagnostic: str = ''

    def innermost_first(self) -> List[Loop]:
        return sorted(self.loops, key=lambda l: (-l.depth, l.header))

    def loop(self, header: str) -> Loop:
        for lp in self.loops:
            if lp.header == header:
                return lp
        raise KeyError(header)


@dataclass(frozen=True)
class LoopInfo:
    functions: Dict[str, FunctionLoops]

    def __getitem__(self, name: str) -> FunctionLoops:
        return self.functions[name]

    def require_reducible(self, name: str) -> FunctionLoops:
        info = self.functions[name]
        if info.irreducible:
            raise IrreducibleCFG(name)
        return info


def _natural_body(cfg, header, latches):
    body = {header}
    work = [l for l in latches if l != header]
    body.update(work)
    while work:
        node = work.pop()
        for pred in cfg.predecessors[node]:
            if pred not in body and pred in cfg.reachable:
                body.add(pred)
                work.append(pred)
    return frozenset(body)


def _classify_ivs(program, function, loop_body, depth_of, loop_depth, header, call_defs):
    defs: Dict[str, List[Tuple[str, int]]] = {}
    clobbered = set()
    for label in loop_body:
        for idx, inst in enumerate(function.block(label).instructions):
            for reg in inst.defs:
                defs.setdefault(reg, []).append((label, idx))
            if inst.opcode is Opcode.CALL:
                clobbered |= call_defs.get(inst.callee, frozenset())

    reaching = ReachingDefinitions(program, function)
    basics = []
    for reg in sorted(defs):
        points = defs[reg]
        if len(points) != 1 or reg in clobbered:
            continue
        label, idx = points[0]
        inst = function.block(label).instructions[idx]
        if depth_of[label] != loop_depth:
            continue
        if inst.opcode not in (Opcode.ADD, Opcode.SUB) or inst.srcs != (reg,) or not inst.imm:
            continue
        step = inst.imm if inst.opcode is Opcode.ADD else -inst.imm
        init = frozenset(p for p in reaching.reaching(reg, header, 0) if p != (label, idx))
        init_value = None
        if len(init) == 1:
            (ilabel, iidx), = init
            if iidx >= 0:
                init_inst = function.block(ilabel).instructions[iidx]
                if init_inst.opcode is Opcode.LI:
                    init_value = init_inst.imm
        basics.append(BasicIV(reg, step, (label, idx), init, init_value))

    by_reg = {iv.register: iv for iv in basics}
    induced = []
    for reg in sorted(defs):
        points = defs[reg]
        if len(points) != 1 or reg in by_reg:
            continue
        label, idx = points[0]
        inst = function.block(label).instructions[idx]
        if len(inst.srcs) != 1 or inst.srcs[0] not in by_reg or inst.imm is None:
            continue
        if inst.opcode is Opcode.MUL:
            induced.append(InducedIV(reg, inst.srcs[0], inst.imm, 0, (label, idx)))
        elif inst.opcode is Opcode.SHL:
            induced.append(InducedIV(reg, inst.srcs[0], 1 << (inst.imm & 63), 0, (label, idx)))
        elif inst.opcode is Opcode.ADD:
            induced.append(InducedIV(reg, inst.srcs[0], 1, inst.imm, (label, idx)))
    return tuple(basics), tuple(induced)


def _function_loops(program: Program, function: Function, call_defs) -> FunctionLoops:
    cfg = ControlFlowGraph(function)
    doms = DominatorTree(cfg)
    bad = [(t, h) for t, h in cfg.retreating_edges if not doms.dominates(h, t)]
    if bad:
        message = f'CFG irreducible en {function.name}: aristas {bad}; se omiten las optimizaciones de bucle'
        logger.warning(message)
        return FunctionLoops(function.name, (), {b: 0 for b in function.labels}, True, message)

    latches: Dict[str, List[str]] = {}
    for tail, head in cfg.retreating_edges:
        latches.setdefault(head, []).append(tail)
    bodies = {h: _natural_body(cfg, h, ls) for h, ls in latches.items()}

    depth_of = {label: sum(1 for body in bodies.values() if label in body) for label in function.labels}
    loops = []
    for header in sorted(bodies, key=lambda h: cfg.layout_index[h]):
        body = bodies[header]
        enclosing = [h for h, b in bodies.items() if h != header and body < b]
        parent = min(enclosing, key=lambda h: len(bodies[h])) if enclosing else None
        outside_preds = [p for p in cfg.predecessors[header] if p not in body]
        preheader = None
        if len(outside_preds) == 1 and cfg.successors[outside_preds[0]] == (header,):
            preheader = outside_preds[0]
        exits = frozenset(s for b in body for s in cfg.successors[b] if s not in body)
        loop_depth = depth_of[header]
        basics, induced = _classify_ivs(program, function, body, depth_of, loop_depth, header, call_defs)
        loops.append(Loop(
            header=header, body=body, latches=tuple(sorted(latches[header])),
            preheader=preheader, exits=exits, depth=loop_depth, parent=parent,
            basic_ivs=basics, induced_ivs=induced,
        ))
    return FunctionLoops(function.name, tuple(loops), depth_of)


def find_loops(program: Program) -> LoopInfo:
    """Bucles naturales de cada función con sus IVs básicas e inducidas"""
    call_defs = may_define(program)
    return LoopInfo({f.name: _function_loops(program, f, call_defs) for f in program.functions})
