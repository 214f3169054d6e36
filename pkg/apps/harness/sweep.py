"""
Barridos de configuración sobre los kernels incluidos.

Cada celda (kernel, modo, WCDL, SB, CLQ) compila y simula de forma
aislada; las celdas se reparten en un pool de procesos y el resultado se
agrega en el orden de las celdas, así que el CSV es idéntico con uno o
con varios procesos.
"""
import csv
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import django
from django.conf import settings

from apps.common.exceptions import ConfigurationError

from .breakdown import CATEGORIES, store_breakdown
from .pipeline import ABLATION_CHAIN, get_mode, kernel_names, run_kernel

logger = logging.getLogger(__name__)

CLQ_CHOICES = ('1', '2', '4', 'ideal')
SWEEP_FILE = 'sweep.csv'

EXPERIMENTS: Dict[str, Dict[str, Sequence]] = {
    'wcdl': {'modes': ('turnstile', 'turnpike'), 'wcdl': (10, 20, 30, 40, 50)},
    'ablation': {'modes': ABLATION_CHAIN},
    'sb': {'modes': ('turnstile', 'turnpike'), 'sb': (4, 8, 10, 20, 30, 40)},
    'clq': {'modes': ('turnpike',), 'clq': CLQ_CHOICES},
    'breakdown': {'modes': ('turnpike',)},
}

SWEEP_FIELDS = (
    'experiment', 'kernel', 'mode', 'wcdl', 'sb_size', 'clq',
    'cycles', 'baseline_cycles', 'overhead',
    'instructions', 'stores', 'checkpoints', 'checkpoint_fraction', 'sb_full_fraction',
    'sb_full', 'checkpoint_data_hazard', 'other_data_hazard', 'fetch',
    'colored', 'war_free', 'quarantined', 'clq_mean', 'clq_max', 'clq_overflows',
    'regions', 'mean_region_size', 'static_size', 'code_size_increase',
) + tuple(f'store_{c}' for c in CATEGORIES)


@dataclass(frozen=True)
class Cell:
    experiment: str
    kernel: str
    mode: str
    wcdl: int = 10
    sb_size: int = 4
    clq: str = '2'

    def sim_overrides(self) -> dict:
        overrides = {'wcdl': self.wcdl, 'sb_size': self.sb_size}
        if self.clq == 'ideal':
            overrides['clq_mode'] = 'ideal'
        else:
            overrides.update(clq_mode='compact', clq_entries=int(self.clq))
        return overrides


def clq_label(mode: str, entries: int) -> str:
    return 'ideal' if mode == 'ideal' else str(entries)


def experiment_cells(experiment: str, kernels: Iterable[str], defaults: Optional[dict] = None) -> List[Cell]:
    try:
        axes = EXPERIMENTS[experiment]
    except KeyError:
        raise ConfigurationError(f'experimento desconocido "{experiment}"; opciones: {", ".join(EXPERIMENTS)}')
    defaults = defaults or {}
    for mode in axes['modes']:
        get_mode(mode)
    return [
        Cell(experiment, kernel, mode, wcdl, sb, clq)
        for kernel, mode, wcdl, sb, clq in itertools.product(
            kernels,
            axes['modes'],
            axes.get('wcdl', (defaults.get('wcdl', settings.SIM_WCDL),)),
            axes.get('sb', (defaults.get('sb_size', settings.SIM_SB_SIZE),)),
            axes.get('clq', (defaults.get('clq', clq_label(settings.SIM_CLQ_MODE, settings.SIM_CLQ_ENTRIES)),)),
        )
    ]


@lru_cache(maxsize=None)
def _baseline_cycles(kernel: str) -> int:
    return run_kernel(kernel, 'baseline').result.report.cycles


def run_cell(cell: Cell) -> dict:
    """Una celda: compila y simula sin fallos, comprobando la memoria final"""
    outcome = run_kernel(
        cell.kernel, cell.mode,
        compile_overrides={'sb_size': cell.sb_size},
        sim_overrides=cell.sim_overrides(),
    )
    report = outcome.result.report
    baseline = _baseline_cycles(cell.kernel)
    artifact = outcome.artifact
    row = {
        **asdict(cell),
        'cycles': report.cycles,
        'baseline_cycles': baseline,
        'overhead': report.cycles / baseline - 1 if baseline else 0.0,
        'instructions': report.instructions,
        'stores': report.stores,
        'checkpoints': report.checkpoints,
        'checkpoint_fraction': report.checkpoint_fraction,
        'sb_full_fraction': report.sb_full_fraction,
        **report.stalls,
        'colored': report.colored,
        'war_free': report.war_free,
        'quarantined': report.quarantined,
        'clq_mean': report.clq_mean,
        'clq_max': report.clq_max,
        'clq_overflows': report.clq_overflows,
        'regions': report.regions,
        'mean_region_size': report.mean_region_size,
        'static_size': artifact.program.static_size(),
        'code_size_increase': artifact.program.static_size() / artifact.source.static_size() - 1,
    }
    if cell.experiment == 'breakdown':
        breakdown = store_breakdown(cell.kernel, outcome.config)
        row.update({f'store_{c}': v for c, v in breakdown.percentages.items()})
    return row


def run_cells(cells: Sequence[Cell], jobs: Optional[int] = None) -> List[dict]:
    jobs = settings.HARNESS_JOBS if jobs is None else jobs
    if jobs <= 1 or len(cells) <= 1:
        rows = []
        for n, cell in enumerate(cells, start=1):
            rows.append(run_cell(cell))
            logger.debug('sweep: %d/%d %s', n, len(cells), cell)
        return rows
    with ProcessPoolExecutor(max_workers=jobs, initializer=django.setup) as pool:
        return list(pool.map(run_cell, cells))


def sweep(
    experiments: Sequence[str],
    kernels: Optional[Sequence[str]] = None,
    jobs: Optional[int] = None,
    defaults: Optional[dict] = None,
) -> List[dict]:
    kernels = list(kernels or kernel_names())
    cells = [c for name in experiments for c in experiment_cells(name, kernels, defaults)]
    logger.info('sweep: %d celdas (%s) sobre %d kernels', len(cells), ', '.join(experiments), len(kernels))
    return run_cells(cells, jobs)


def write_csv(rows: Sequence[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_FIELDS, restval='', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format(row.get(k, '')) for k in SWEEP_FIELDS})
    return path


def read_csv(path) -> List[dict]:
    with Path(path).open(newline='') as handle:
        return list(csv.DictReader(handle))


def _format(value):
    return f'{value:.6f}' if isinstance(value, float) else value
