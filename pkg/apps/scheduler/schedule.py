"""
Planificación consciente de checkpoints dentro de bloques básicos.

Entre el productor de un registro y su `ckpt` se adelantan instrucciones
independientes que sólo tocan registros, para que la latencia del productor
quede cubierta. Las operaciones de memoria nunca cambian de orden relativo;
`rb` y `call` actúan como barreras y el terminador no se mueve.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from django.conf import settings

from apps.ir.instructions import Block, Instruction, Opcode, Program

logger = logging.getLogger(__name__)

BARRIERS = (Opcode.RB, Opcode.CALL)


def default_latencies() -> Dict[str, int]:
    return {
        'alu': settings.SIM_LATENCY_ALU,
        'mul': settings.SIM_LATENCY_MUL,
        'load': settings.SIM_LOAD_HIT,
        'store': 1,
        'branch': settings.SIM_LATENCY_BRANCH,
        'pseudo': 0,
    }


@dataclass
class ScheduleReport:
    hoisted: int = 0
    checkpoints: int = 0
    # checkpoint -> distancia (antes, después) en slots
    distances: List[Tuple[str, str, int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'hoisted': self.hoisted,
            'checkpoints': self.checkpoints,
            'distances': [
                {'function': f, 'register': r, 'before': b, 'after': a}
                for f, r, b, a in self.distances
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def is_filler(inst: Instruction) -> bool:
    """Sólo registros: ni memoria, ni control, ni pseudo-instrucciones"""
    return inst.opcode.is_binop or inst.opcode in (Opcode.LI, Opcode.MOV)


def independent(inst: Instruction, others: List[Instruction]) -> bool:
    """True si `inst` no tiene dependencias de registro (RAW, WAR ni WAW) con `others`"""
    uses, defs = set(inst.uses), set(inst.defs)
    for other in others:
        if uses & set(other.defs):
            return False
        if defs & (set(other.uses) | set(other.defs)):
            return False
    return True


def _producer(segment: List[Instruction], idx: int) -> Optional[int]:
    reg = segment[idx].srcs[0]
    for j in range(idx - 1, -1, -1):
        if reg in segment[j].defs:
            return j
    return None


def _schedule_segment(segment, latencies, width, function, report) -> List[Instruction]:
    segment = list(segment)
    idx = 0
    while idx < len(segment):
        inst = segment[idx]
        if not inst.is_checkpoint:
            idx += 1
            continue
        report.checkpoints += 1
        producer = _producer(segment, idx)
        if producer is None:
            idx += 1
            continue
        latency = latencies.get(segment[producer].opcode.latency_class, 1)
        target = latency * width
        before = idx - producer
        produced = set(segment[producer].defs)
        while idx - producer < target:
            moved = False
            for j in range(idx + 1, len(segment)):
                candidate = segment[j]
                # lo que lee el resultado del productor esperaría igual
                if produced & set(candidate.uses):
                    continue
                if is_filler(candidate) and independent(candidate, segment[idx:j]):
                    del segment[j]
                    segment.insert(idx, candidate)
                    idx += 1
                    report.hoisted += 1
                    moved = True
                    break
            if not moved:
                break
        report.distances.append((function, inst.srcs[0], before, idx - producer))
        idx += 1
    return segment


def schedule_block(
    block: Block, latencies: Mapping[str, int], width: int, function: str, report: ScheduleReport,
) -> Block:
    body, terminator = list(block.instructions[:-1]), block.instructions[-1]
    out: List[Instruction] = []
    segment: List[Instruction] = []
    for inst in body:
        if inst.opcode in BARRIERS:
            out.extend(_schedule_segment(segment, latencies, width, function, report))
            out.append(inst)
            segment = []
        else:
            segment.append(inst)
    out.extend(_schedule_segment(segment, latencies, width, function, report))
    out.append(terminator)
    return Block(block.label, tuple(out))


def schedule(
    program: Program, latencies: Optional[Mapping[str, int]] = None, issue_width: Optional[int] = None,
) -> Tuple[Program, ScheduleReport]:
    """
    Planifica cada bloque del programa. `latencies` va indexado por la clase
    de latencia del opcode (`alu`, `mul`, `load`...).
    """
    latencies = dict(default_latencies(), **(latencies or {}))
    width = settings.SIM_ISSUE_WIDTH if issue_width is None else issue_width
    report = ScheduleReport()
    functions = []
    for function in program.functions:
        blocks = [schedule_block(b, latencies, width, function.name, report) for b in function.blocks]
        functions.append(function.with_blocks(blocks))
    logger.debug('sched: %d instrucciones adelantadas sobre %d checkpoints', report.hoisted, report.checkpoints)
    return program.with_functions(functions), report
