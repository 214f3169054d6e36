"""
Ejecución de un programa compilado con una lista de fallos
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

from apps.common.exceptions import ConfigurationError
from apps.ir.instructions import Program
from apps.microsim.config import SimConfig
from apps.microsim.core import SimulationResult, simulate

from .events import FaultEvent

logger = logging.getLogger(__name__)

RECOVERED = 'recovered'
MASKED = 'masked'
FAILED = 'failed'


@dataclass(frozen=True)
class TrialOutcome:
    outcome: str
    recoveries: int
    cycles: int
    events: Sequence[FaultEvent] = ()

    def to_dict(self) -> dict:
        return {
            'outcome': self.outcome,
            'recoveries': self.recoveries,
            'cycles': self.cycles,
            'events': [e.to_dict() for e in self.events],
        }


def classify(result: SimulationResult, golden: Dict[int, int]) -> str:
    if result.program_memory() != golden:
        return FAILED
    return RECOVERED if result.report.recoveries else MASKED


def inject(
    program: Program,
    config: SimConfig,
    recovery,
    events: Sequence[FaultEvent],
    golden: Optional[Dict[int, int]] = None,
) -> TrialOutcome:
    """
    Ejecuta con los fallos programados y compara la memoria final con la
    ejecución dorada (sin fallos).
    """
    if not config.resilient:
        raise ConfigurationError('la máquina base no tolera fallos; active el modo resiliente')
    for event in events:
        event.validate(config.wcdl)
    if golden is None:
        golden = simulate(program, config, recovery).program_memory()
    result = simulate(program, config, recovery, faults=events)
    outcome = classify(result, golden)
    if outcome == FAILED:
        logger.warning('fallo no recuperado: %s', [e.to_dict() for e in events])
    return TrialOutcome(outcome, result.report.recoveries, result.report.cycles, tuple(events))
