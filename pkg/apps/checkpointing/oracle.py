"""
Oráculo de recuperación: en cada entrada a región, el bloque de recuperación
debe reproducir exactamente los live-ins a partir de checkpoints y memoria.
"""
import logging
from typing import Dict, Optional

from apps.common.exceptions import InvariantViolation
from apps.ir.instructions import Program
from apps.ir.interpreter import Interpreter, RegionEntry, run_recovery_block
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.regions import program_region_ids

from .recovery import RecoveryBlock

logger = logging.getLogger(__name__)


def verify_recovery_blocks(
    program: Program,
    blocks: Dict[int, RecoveryBlock],
    live: Optional[LivenessResult] = None,
    max_steps: Optional[int] = None,
) -> int:
    """
    Ejecuta el programa y, en cada entrada a región, evalúa su bloque de
    recuperación con registros basura. Devuelve cuántas entradas se comprobaron.
    """
    live = live or liveness(program)
    ids = program_region_ids(program)
    checked = 0

    def on_entry(entry: RegionEntry):
        nonlocal checked
        rid = ids[(entry.function, entry.start)]
        block = blocks[rid]
        live_in = live.region_live_in(entry.function, entry.start)
        # cualquier valor previo de los registros debe ser irrelevante
        garbage = {reg: -0x5A5A for reg in live_in}
        restored, _ = run_recovery_block(
            block.blocks,
            lambda reg: entry.checkpoints.get(reg, 0),
            garbage,
            read_memory=lambda address: entry.memory.get(address, 0),
        )
        diff = {
            reg: {'expected': entry.registers.get(reg, 0), 'restored': restored.get(reg, 0)}
            for reg in sorted(live_in)
            if restored.get(reg, 0) != entry.registers.get(reg, 0)
        }
        if diff:
            raise InvariantViolation(
                f'la recuperación de la región {rid} ({entry.function} {entry.start}) no reproduce sus live-ins',
                diff,
            )
        checked += 1

    kwargs = {'on_region_entry': on_entry}
    if max_steps is not None:
        kwargs['max_steps'] = max_steps
    Interpreter(program, **kwargs).run()
    logger.debug('oráculo de recuperación: %d entradas a región verificadas', checked)
    return checked
