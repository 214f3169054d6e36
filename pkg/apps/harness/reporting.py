"""
Tablas y comprobaciones de tendencia a partir del CSV de un barrido
"""
import csv
import json
import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from apps.common.exceptions import InvariantViolation

from .breakdown import CATEGORIES
from .pipeline import ABLATION_CHAIN

logger = logging.getLogger(__name__)

# tolerancias sobre la sobrecarga, en fracción de los ciclos del baseline
STEP_TOLERANCE = 0.005
CLQ_SIZE_TOLERANCE = 0.01
EPSILON = 1e-9

PASSED, FAILED, SKIPPED = 'pass', 'fail', 'skipped'


@dataclass
class TrendCheck:
    name: str
    status: str
    detail: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASSED


def normalize(rows: Sequence[dict]) -> List[dict]:
    """Filas como las devuelve el CSV: todos los valores en texto"""
    return [{k: (f'{v:.6f}' if isinstance(v, float) else str(v)) for k, v in row.items()} for row in rows]


def _select(rows: Sequence[dict], experiment: str, mode: str = None) -> List[dict]:
    return [r for r in normalize(rows) if r['experiment'] == experiment and (mode is None or r['mode'] == mode)]


def _by(rows: Sequence[dict], *keys) -> Dict[tuple, List[dict]]:
    grouped = defaultdict(list)
    for row in rows:
        grouped[tuple(row[k] for k in keys)].append(row)
    return grouped


def _mean_overhead(rows: Sequence[dict]) -> float:
    return float(np.mean([float(r['overhead']) for r in rows])) if rows else 0.0


def _status(ok: bool) -> str:
    return PASSED if ok else FAILED


# ============================================================================
# TABLAS
# ============================================================================

def breakdown_table(rows: Sequence[dict]) -> List[dict]:
    """Porcentaje de stores por categoría y kernel; las categorías suman 100"""
    table = []
    for row in _select(rows, 'breakdown'):
        shares = {c: float(row.get(f'store_{c}') or 0) for c in CATEGORIES}
        total = sum(shares.values())
        if total and abs(total - 100.0) > 1e-3:
            raise InvariantViolation(
                f'{row["kernel"]}: las categorías de stores suman {total:.4f}%', shares,
            )
        table.append({
            'kernel': row['kernel'],
            **shares,
            'fast_releasable': shares['colored'] + shares['war_free'],
        })
    return table


def clq_table(rows: Sequence[dict]) -> List[dict]:
    """Ocupación dinámica del CLQ (media y máximo) por kernel y tamaño"""
    selected = _select(rows, 'clq', 'turnpike') or [r for r in normalize(rows) if r['mode'] == 'turnpike']
    return [
        {
            'kernel': kernel,
            'clq': clq,
            'mean': float(np.mean([float(r['clq_mean']) for r in group])),
            'max': int(max(int(r['clq_max']) for r in group)),
            'overflows': int(sum(int(r['clq_overflows']) for r in group)),
            'overhead': _mean_overhead(group),
        }
        for (kernel, clq), group in sorted(_by(selected, 'kernel', 'clq').items())
    ]


# ============================================================================
# TENDENCIAS
# ============================================================================

def check_wcdl(rows: Sequence[dict]) -> TrendCheck:
    """Turnstile no mejora al crecer el WCDL y Turnpike no supera a Turnstile"""
    selected = _select(rows, 'wcdl')
    if not selected:
        return TrendCheck('wcdl', SKIPPED)
    overhead = {
        (r['kernel'], r['mode'], int(r['wcdl'])): float(r['overhead']) for r in selected
    }
    kernels = sorted({r['kernel'] for r in selected})
    wcdls = sorted({int(r['wcdl']) for r in selected})
    non_monotonic, above = [], []
    for kernel in kernels:
        series = np.array([overhead[(kernel, 'turnstile', w)] for w in wcdls])
        if np.any(np.diff(series) < -EPSILON):
            non_monotonic.append(kernel)
        for w in wcdls:
            if overhead[(kernel, 'turnpike', w)] > overhead[(kernel, 'turnstile', w)] + STEP_TOLERANCE:
                above.append(f'{kernel}@{w}')
    means = {
        w: {
            mode: float(np.mean([overhead[(k, mode, w)] for k in kernels]))
            for mode in ('turnstile', 'turnpike')
        }
        for w in wcdls
    }
    mean_ok = all(m['turnpike'] <= m['turnstile'] + EPSILON for m in means.values())
    return TrendCheck('wcdl', _status(not non_monotonic and not above and mean_ok), {
        'non_monotonic': non_monotonic, 'turnpike_above_turnstile': above,
        'means': {str(w): m for w, m in means.items()},
    })


def check_ablation(rows: Sequence[dict]) -> TrendCheck:
    """La sobrecarga media no crece al añadir cada optimización de la cadena"""
    selected = _select(rows, 'ablation')
    if not selected:
        return TrendCheck('ablation', SKIPPED)
    grouped = _by(selected, 'mode')
    chain = [m for m in ABLATION_CHAIN if (m,) in grouped]
    means = np.array([_mean_overhead(grouped[(m,)]) for m in chain])
    steps = np.diff(means)
    regressions = [
        f'{chain[i]}->{chain[i + 1]}' for i, step in enumerate(steps) if step > STEP_TOLERANCE
    ]
    return TrendCheck('ablation', _status(not regressions), {
        'means': dict(zip(chain, means.tolist())), 'regressions': regressions,
    })


def check_sb(rows: Sequence[dict]) -> TrendCheck:
    """Turnstile mejora en cada paso de SB y Turnpike con el SB menor no supera a Turnstile con el mayor"""
    selected = _select(rows, 'sb')
    if not selected:
        return TrendCheck('sb', SKIPPED)
    grouped = _by(selected, 'mode', 'sb_size')
    sizes = sorted({int(r['sb_size']) for r in selected})
    small, large = str(sizes[0]), str(sizes[-1])
    turnstile = {s: _mean_overhead(grouped[('turnstile', str(s))]) for s in sizes}
    turnpike_small = _mean_overhead(grouped[('turnpike', small)])
    series = np.array([turnstile[s] for s in sizes])
    flat = [f'{a}->{b}' for a, b, step in zip(sizes, sizes[1:], np.diff(series)) if not step < 0]
    ok = not flat and turnpike_small <= turnstile[sizes[-1]] + EPSILON
    return TrendCheck('sb', _status(ok), {
        'turnstile': {str(s): v for s, v in turnstile.items()},
        'turnstile_flat_steps': flat,
        f'turnpike_sb{small}': turnpike_small,
        f'turnstile_sb{large}': turnstile[sizes[-1]],
    })


def check_clq(rows: Sequence[dict]) -> TrendCheck:
    """CLQ compacto: ocupación media <= 2 y máxima <= 4; 2 y 4 entradas rinden casi igual"""
    table = [t for t in clq_table(rows) if t['clq'] != 'ideal']
    if not table:
        return TrendCheck('clq', SKIPPED)
    mean = float(np.mean([t['mean'] for t in table]))
    peak = max(t['max'] for t in table)
    by_size = _by(_select(rows, 'clq', 'turnpike'), 'clq')
    detail = {'occupancy_mean': mean, 'occupancy_max': peak}
    ok = mean <= 2 and peak <= 4
    if ('2',) in by_size and ('4',) in by_size:
        gap = abs(_mean_overhead(by_size[('2',)]) - _mean_overhead(by_size[('4',)]))
        detail['overhead_gap_2_vs_4'] = gap
        ok = ok and gap <= CLQ_SIZE_TOLERANCE
    return TrendCheck('clq', _status(ok), detail)


def check_checkpoint_fraction(rows: Sequence[dict]) -> TrendCheck:
    """Con SB pequeño hay más checkpoints dinámicos que con SB grande, en todo kernel"""
    selected = _select(rows, 'sb', 'turnstile')
    if not selected:
        return TrendCheck('checkpoint_fraction', SKIPPED)
    sizes = sorted({int(r['sb_size']) for r in selected})
    fraction = {(r['kernel'], int(r['sb_size'])): float(r['checkpoint_fraction']) for r in selected}
    kernels = sorted({r['kernel'] for r in selected})
    flat = [k for k in kernels if not fraction[(k, sizes[0])] > fraction[(k, sizes[-1])]]
    return TrendCheck('checkpoint_fraction', _status(not flat), {
        'kernels_without_decrease': flat,
        'fractions': {k: [fraction[(k, sizes[0])], fraction[(k, sizes[-1])]] for k in kernels},
    })


def check_breakdown(rows: Sequence[dict]) -> TrendCheck:
    """Todo kernel con stores libera alguno sin cuarentena"""
    table = breakdown_table(rows)
    if not table:
        return TrendCheck('breakdown', SKIPPED)
    missing = [t['kernel'] for t in table if t['fast_releasable'] <= 0]
    return TrendCheck('breakdown', _status(not missing), {'without_fast_release': missing})


CHECKS = (check_wcdl, check_ablation, check_sb, check_clq, check_checkpoint_fraction, check_breakdown)


def trend_checks(rows: Sequence[dict]) -> List[TrendCheck]:
    checks = [check(rows) for check in CHECKS]
    for check in checks:
        logger.info('report: %s -> %s', check.name, check.status)
    return checks


# ============================================================================
# SALIDA
# ============================================================================

def summarize(rows: Sequence[dict]) -> dict:
    checks = trend_checks(rows)
    return {
        'breakdown': breakdown_table(rows),
        'clq': clq_table(rows),
        'checks': [asdict(c) for c in checks],
        'passed': all(c.status != FAILED for c in checks),
    }


def write_table(table: Sequence[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        if table:
            writer = csv.DictWriter(handle, fieldnames=list(table[0]), lineterminator='\n')
            writer.writeheader()
            for row in table:
                writer.writerow({k: f'{v:.6f}' if isinstance(v, float) else v for k, v in row.items()})
    return path


def write_report(rows: Sequence[dict], out_dir, summary: dict = None) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summary or summarize(rows)
    checks_path = out_dir / 'trend_checks.json'
    checks_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + '\n')
    return {
        'breakdown': write_table(summary['breakdown'], out_dir / 'store_breakdown.csv'),
        'clq': write_table(summary['clq'], out_dir / 'clq_occupancy.csv'),
        'checks': checks_path,
    }
