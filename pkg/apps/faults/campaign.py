"""
Campañas de inyección de fallos.

Cada prueba es independiente y determinista a partir de (semilla, índice),
así que el resultado no depende de cuántos procesos se usen.
"""
import json
import logging
import random
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import django
from django.conf import settings

from apps.common.exceptions import ConfigurationError
from apps.ir.instructions import Program
from apps.microsim.config import SimConfig
from apps.microsim.core import FAULT_TARGETS, simulate

from .events import sample_event
from .injector import FAILED, MASKED, RECOVERED, inject

logger = logging.getLogger(__name__)

MAX_LISTED_FAILURES = 20


@dataclass
class CampaignReport:
    trials: int
    seed: int
    target_class: Optional[str]
    negative_control: bool
    outcomes: Dict[str, int] = field(default_factory=lambda: dict.fromkeys((RECOVERED, MASKED, FAILED), 0))
    by_target: Dict[str, Dict[str, int]] = field(default_factory=dict)
    failures: List[dict] = field(default_factory=list)
    golden_cycles: int = 0

    @property
    def succeeded(self) -> int:
        return self.outcomes[RECOVERED] + self.outcomes[MASKED]

    @property
    def success_rate(self) -> float:
        return self.succeeded / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            'trials': self.trials,
            'seed': self.seed,
            'target_class': self.target_class,
            'negative_control': self.negative_control,
            'outcomes': dict(self.outcomes),
            'recoveries_attempted': self.outcomes[RECOVERED] + self.outcomes[FAILED],
            'success_rate': self.success_rate,
            'by_target': {t: dict(c) for t, c in sorted(self.by_target.items())},
            'failures': self.failures,
            'golden_cycles': self.golden_cycles,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(f'{seed}:{trial}')


def checkpointed_registers(program: Program) -> List[str]:
    return sorted({inst.srcs[0] for f in program.functions for _, _, inst in f.points() if inst.is_checkpoint})


def _run_trial(job):
    program, config, recovery, golden, window, registers, seed, trial, target_class = job
    rng = trial_rng(seed, trial)
    event = sample_event(rng, window, config.wcdl, registers, target_class)
    outcome = inject(program, config, recovery, [event], golden)
    return trial, event.target, outcome


def run_campaign(
    program: Program,
    config: SimConfig,
    recovery,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    target_class: Optional[str] = None,
    negative_control: bool = False,
    jobs: int = 1,
) -> CampaignReport:
    """
    `negative_control` sustituye el coloreado por la liberación directa de
    checkpoints y dirige los fallos a registros con checkpoint.
    """
    trials = settings.FAULTS_DEFAULT_TRIALS if trials is None else trials
    seed = settings.FAULTS_DEFAULT_SEED if seed is None else seed
    if trials < 1:
        raise ConfigurationError('una campaña necesita al menos una prueba')
    if target_class is not None and target_class not in FAULT_TARGETS:
        raise ConfigurationError(f'clase de objetivo desconocida "{target_class}"; opciones: {", ".join(FAULT_TARGETS)}')
    if not config.resilient:
        raise ConfigurationError('la máquina base no tolera fallos; active el modo resiliente')

    registers = sorted(program.registers())
    if negative_control:
        config = config.with_overrides(checkpoint_release='naive')
        target_class = 'register'
        registers = checkpointed_registers(program) or registers

    dry = simulate(program, config, recovery)
    golden = dry.program_memory()
    window = dry.report.cycles - dry.report.drain_cycles
    report = CampaignReport(trials, seed, target_class, negative_control, golden_cycles=dry.report.cycles)
    logger.info('campaña: %d pruebas, semilla %d, ventana de %d ciclos', trials, seed, window)

    work = [
        (program, config, recovery, golden, window, registers, seed, trial, target_class)
        for trial in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=django.setup) as pool:
            results = list(pool.map(_run_trial, work, chunksize=max(1, trials // (jobs * 4))))
    else:
        results = [_run_trial(job) for job in work]

    by_target = defaultdict(lambda: dict.fromkeys((RECOVERED, MASKED, FAILED), 0))
    for trial, target, outcome in results:
        report.outcomes[outcome.outcome] += 1
        by_target[target][outcome.outcome] += 1
        if outcome.outcome == FAILED and len(report.failures) < MAX_LISTED_FAILURES:
            report.failures.append({'trial': trial, **outcome.to_dict()})
    report.by_target = dict(by_target)
    logger.info(
        'campaña terminada: %d recuperadas, %d enmascaradas, %d fallidas',
        report.outcomes[RECOVERED], report.outcomes[MASKED], report.outcomes[FAILED],
    )
    return report
