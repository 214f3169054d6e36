"""
Desglose de los stores dinámicos de un kernel por categoría.

Los stores que cada optimización elimina salen de la diferencia de stores
dinámicos (regulares + checkpoints) entre compilaciones consecutivas de la
cadena; los que se liberan sin cuarentena salen del simulador sobre el
binario completo. Lo demás es `others`.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

from django.conf import settings

from apps.common.exceptions import InvariantViolation
from apps.ir.interpreter import interpret
from apps.microsim.config import SimConfig

from .pipeline import TURNSTILE_PASSES, CompileOptions, compile_kernel, run_kernel

CATEGORIES = (
    'pruned', 'licm_eliminated', 'colored', 'war_free',
    'ra_eliminated', 'indvar_merging_eliminated', 'others',
)


def elimination_steps():
    """categoría -> interruptores que la activan sobre el paso anterior"""
    return (
        ('pruned', {'prune': True}),
        ('licm_eliminated', {'licm_sink': True}),
        ('ra_eliminated', {'sched': True, 'write_weight': settings.REGALLOC_WRITE_WEIGHT}),
        ('indvar_merging_eliminated', {'livm': True}),
    )


@dataclass
class StoreBreakdown:
    kernel: str
    counts: Dict[str, int] = field(default_factory=dict)
    # stores que algún pase añadió (código de spill) y que cuentan en el total
    added: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def percentages(self) -> Dict[str, float]:
        total = self.total
        return {c: (100.0 * self.counts.get(c, 0) / total if total else 0.0) for c in CATEGORIES}

    @property
    def fast_releasable(self) -> int:
        return self.counts.get('colored', 0) + self.counts.get('war_free', 0)

    def to_dict(self) -> dict:
        return {
            'kernel': self.kernel,
            'total': self.total,
            'added': self.added,
            'counts': {c: self.counts.get(c, 0) for c in CATEGORIES},
            'percentages': self.percentages,
        }


def dynamic_stores(name: str, options: CompileOptions) -> int:
    result = interpret(compile_kernel(name, options).program)
    return result.stores + result.checkpoint_stores


def store_breakdown(name: str, base: Optional[SimConfig] = None) -> StoreBreakdown:
    options = CompileOptions.from_settings(**TURNSTILE_PASSES)
    previous = dynamic_stores(name, options)
    breakdown = StoreBreakdown(name)
    would_be = previous
    for category, switches in elimination_steps():
        options = options.with_overrides(**switches)
        current = dynamic_stores(name, options)
        delta = previous - current
        if delta < 0:
            breakdown.added -= delta
            would_be -= delta
        breakdown.counts[category] = max(delta, 0)
        previous = current

    outcome = run_kernel(name, 'turnpike', compile_overrides=options.to_dict(), base=base)
    report = outcome.result.report
    if report.stores + report.checkpoints != previous:
        raise InvariantViolation(
            f'{name}: el simulador ejecuta {report.stores + report.checkpoints} stores y el intérprete {previous}',
        )
    breakdown.counts['colored'] = report.colored
    breakdown.counts['war_free'] = report.war_free
    breakdown.counts['others'] = previous - report.colored - report.war_free
    if breakdown.counts['others'] < 0 or breakdown.total != would_be:
        raise InvariantViolation(
            f'{name}: las categorías no particionan los stores', {'counts': breakdown.counts, 'total': would_be},
        )
    return breakdown
