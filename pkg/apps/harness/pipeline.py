"""
Pipeline de compilación, presets de modo y ejecución de kernels.

Orden fijo: parse → LIVM → partición → checkpoints ansiosos → poda →
hundimiento → asignación de registros → planificación → bloques de
recuperación. Cada etapa opcional depende de su interruptor en
`CompileOptions`; el modo elige los interruptores y la configuración del
simulador.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from django.conf import settings

from apps.checkpointing.eager import insert_eager_checkpoints
from apps.checkpointing.plan import CheckpointPlan
from apps.checkpointing.pruning import prune_checkpoints
from apps.checkpointing.recovery import RecoveryBlock, build_recovery_blocks
from apps.checkpointing.sinking import sink_checkpoints
from apps.common.exceptions import ConfigurationError, InvariantViolation
from apps.ir.instructions import Program, mark_origins
from apps.ir.interpreter import ExecutionResult, interpret
from apps.ir.parser import parse_ir
from apps.ir.printer import print_ir
from apps.loopopt.livm import Merge, merge_induction_variables
from apps.microsim.config import SimConfig
from apps.microsim.core import SimulationResult, simulate
from apps.regalloc.allocator import Allocation, allocate
from apps.regalloc.cost import SpillCostModel
from apps.regionizer.capacity import first_overflow
from apps.regionizer.partition import partition, store_budget
from apps.regionizer.table import RegionTable, region_stats, region_table
from apps.scheduler.schedule import ScheduleReport, schedule

logger = logging.getLogger(__name__)


# ============================================================================
# OPCIONES Y MODOS
# ============================================================================

@dataclass(frozen=True)
class CompileOptions:
    resilient: bool = True
    sb_size: int = 4
    livm: bool = True
    prune: bool = True
    licm_sink: bool = True
    sched: bool = True
    regs: int = 16
    write_weight: float = 3.0

    def __post_init__(self):
        store_budget(self.sb_size)
        if self.regs < 4:
            raise ConfigurationError(f'se necesitan al menos 4 registros físicos (recibido {self.regs})')
        if self.write_weight < 1:
            raise ConfigurationError(f'el peso de escritura debe ser >= 1 (recibido {self.write_weight})')

    @classmethod
    def from_settings(cls, **overrides) -> 'CompileOptions':
        values = {
            'sb_size': settings.REGION_SB_SIZE,
            'regs': settings.REGALLOC_REGISTERS,
            'write_weight': settings.REGALLOC_WRITE_WEIGHT,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_overrides(self, **overrides) -> 'CompileOptions':
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


TURNSTILE_PASSES = {'livm': False, 'prune': False, 'licm_sink': False, 'sched': False, 'write_weight': 1.0}


@dataclass(frozen=True)
class Mode:
    name: str
    description: str
    compile: Dict = field(default_factory=dict)
    sim: Dict = field(default_factory=dict)

    def compile_options(self, **overrides) -> CompileOptions:
        return CompileOptions.from_settings(**self.compile).with_overrides(**overrides)

    def sim_config(self, base: Optional[SimConfig] = None, **overrides) -> SimConfig:
        base = base or SimConfig.from_settings()
        return base.with_overrides(**self.sim).with_overrides(**overrides)


MODES: Dict[str, Mode] = {
    'baseline': Mode(
        'baseline', 'Sin soporte de resiliencia',
        {**TURNSTILE_PASSES, 'resilient': False}, {'resilient': False},
    ),
    'turnstile': Mode(
        'turnstile', 'Cuarentena de todos los stores y checkpoints',
        TURNSTILE_PASSES, {'resilient': True, 'fast_release': False, 'checkpoint_release': 'quarantine'},
    ),
    'war-free': Mode(
        'war-free', '+ liberación rápida de stores WAR-free',
        TURNSTILE_PASSES, {'resilient': True, 'fast_release': True, 'checkpoint_release': 'quarantine'},
    ),
    'coloring': Mode(
        'coloring', '+ coloreado hardware de checkpoints',
        TURNSTILE_PASSES, {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'pruning': Mode(
        'pruning', '+ poda de checkpoints',
        {**TURNSTILE_PASSES, 'prune': True},
        {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'licm': Mode(
        'licm', '+ hundimiento de checkpoints fuera de bucles',
        {**TURNSTILE_PASSES, 'prune': True, 'licm_sink': True},
        {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'sched': Mode(
        'sched', '+ planificación alrededor de checkpoints',
        {**TURNSTILE_PASSES, 'prune': True, 'licm_sink': True, 'sched': True},
        {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'ra': Mode(
        'ra', '+ asignación de registros consciente de stores',
        {'livm': False},
        {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'turnpike': Mode(
        'turnpike', '+ fusión de variables de inducción (todo activado)',
        {}, {'resilient': True, 'fast_release': True, 'checkpoint_release': 'color'},
    ),
    'naive': Mode(
        'naive', 'Turnpike con checkpoints escritos directamente (control negativo)',
        {}, {'resilient': True, 'fast_release': True, 'checkpoint_release': 'naive'},
    ),
}

ABLATION_CHAIN = ('turnstile', 'war-free', 'coloring', 'pruning', 'licm', 'sched', 'ra', 'turnpike')


def get_mode(name: str) -> Mode:
    try:
        return MODES[name]
    except KeyError:
        raise ConfigurationError(f'modo desconocido "{name}"; opciones: {", ".join(MODES)}')


# ============================================================================
# KERNELS
# ============================================================================

def kernel_dir() -> Path:
    return Path(settings.HARNESS_KERNEL_DIR)


def kernel_names() -> List[str]:
    return sorted(path.stem for path in kernel_dir().glob('*.ir'))


def kernel_source(name: str) -> str:
    path = kernel_dir() / f'{name}.ir'
    if not path.is_file():
        raise ConfigurationError(f'kernel desconocido "{name}"; opciones: {", ".join(kernel_names())}')
    return path.read_text()


@lru_cache(maxsize=None)
def load_kernel(name: str) -> Program:
    return parse_ir(kernel_source(name))


def read_program(source: str) -> Program:
    """Acepta el nombre de un kernel incluido o la ruta de un fichero .ir"""
    path = Path(source)
    if path.suffix == '.ir' and path.is_file():
        return parse_ir(path.read_text())
    return load_kernel(source)


# ============================================================================
# COMPILACIÓN
# ============================================================================

@dataclass
class CompiledArtifact:
    source: Program
    program: Program
    options: CompileOptions
    plan: CheckpointPlan
    regions: RegionTable
    allocation: Allocation
    schedule: ScheduleReport
    merges: Tuple[Merge, ...]
    recovery: Dict[int, RecoveryBlock]
    # programa que sale del checkpointing; los puntos del plan se refieren a él
    checkpointed: Optional[Program] = None

    def counts(self) -> dict:
        """Conteos estáticos por categoría de store que deja cada pase"""
        return {
            'eager_checkpoints': self.plan.eager,
            'pruned_checkpoints': len(self.plan.pruned),
            'sunk_checkpoints': self.plan.sunk,
            'deduplicated_checkpoints': self.plan.deduplicated,
            'merged_ivs': len(self.merges),
            'spilled_variables': len(self.allocation.spilled),
            'checkpoints': self.program.count(lambda i: i.is_checkpoint),
            'stores': self.program.count(lambda i: i.is_store),
            'hoisted': self.schedule.hoisted,
        }

    def to_dict(self) -> dict:
        return {
            'options': self.options.to_dict(),
            'program': print_ir(self.program),
            'plan': self.plan.to_dict(self.program),
            'regions': self.regions.to_dict(),
            'region_stats': region_stats(self.program, baseline=self.source).to_dict(),
            'allocation': self.allocation.to_dict(),
            'schedule': self.schedule.to_dict(),
            'merges': [m.to_dict() for m in self.merges],
            'recovery': {str(rid): block.to_dict() for rid, block in sorted(self.recovery.items())},
            'counts': self.counts(),
            'checkpointed': print_ir(self.checkpointed) if self.checkpointed is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _resilient_stages(program: Program, options: CompileOptions, forced) -> Tuple[Program, CheckpointPlan]:
    program, _ = partition(program, options.sb_size, forced)
    program, plan = insert_eager_checkpoints(program)
    if options.prune:
        program, plan = prune_checkpoints(program, plan)
    if options.licm_sink:
        program, plan = sink_checkpoints(program, plan)
    return program, plan


def _back_end(program: Program, options: CompileOptions) -> Tuple[Program, Allocation, ScheduleReport]:
    model = SpillCostModel.from_settings(write_weight=options.write_weight)
    program, allocation = allocate(program, k=options.regs, model=model)
    report = ScheduleReport()
    if options.sched:
        program, report = schedule(program)
    return program, allocation, report


def compile_program(program: Program, options: Optional[CompileOptions] = None) -> CompiledArtifact:
    """
    Compila `program`. En modo resiliente, si algún camino de región del
    programa final necesita más entradas que el SB, se fuerza una frontera
    en ese camino y se repite desde la partición.
    """
    options = options or CompileOptions.from_settings()
    source = program
    merges: Tuple[Merge, ...] = ()
    plan = CheckpointPlan()
    staged = None

    if not options.resilient:
        program, allocation, report = _back_end(program, options)
    else:
        if options.livm:
            program, merges = merge_induction_variables(program)
        marked = mark_origins(program)
        forced: Dict[str, Set[Tuple[str, int]]] = {}
        staging = options
        while True:
            staged, plan = _resilient_stages(marked, staging, forced)
            program, allocation, report = _back_end(staged, staging)
            overflow = first_overflow(program, options.sb_size)
            if overflow is None:
                break
            point = overflow.split_point(program.function(overflow.function))
            if point is None and staging.licm_sink:
                # checkpoints hundidos seguidos: sin hundimiento vuelven tras su definición
                staging = replace(staging, licm_sink=False)
                logger.debug('compile: %s sin hundimiento por capacidad del SB', overflow.function)
                continue
            if point is None or point in forced.get(overflow.function, set()):
                raise ConfigurationError(
                    f'{overflow.function}: una región necesita {overflow.entries} entradas '
                    f'y el SB tiene {options.sb_size}'
                )
            forced.setdefault(overflow.function, set()).add(point)
            logger.debug('compile: frontera forzada en %s %s por capacidad del SB', overflow.function, point)

    recovery = build_recovery_blocks(program, plan, allocation) if options.resilient else {}
    logger.debug(
        'compile: %d instrucciones estáticas, %d checkpoints, %d bloques de recuperación',
        program.static_size(), program.count(lambda i: i.is_checkpoint), len(recovery),
    )
    return CompiledArtifact(
        source, program, options, plan, region_table(program), allocation, report, merges, recovery, staged,
    )


@lru_cache(maxsize=256)
def compile_kernel(name: str, options: CompileOptions) -> CompiledArtifact:
    return compile_program(load_kernel(name), options)


# ============================================================================
# EJECUCIÓN
# ============================================================================

@lru_cache(maxsize=None)
def golden_run(name: str) -> ExecutionResult:
    return interpret(load_kernel(name))


def memory_diff(expected: Dict[int, int], actual: Dict[int, int]) -> Dict[str, Tuple]:
    return {
        hex(address): (expected.get(address), actual.get(address))
        for address in sorted(set(expected) | set(actual))
        if expected.get(address) != actual.get(address)
    }


def check_equivalence(expected: Dict[int, int], actual: Dict[int, int], label: str) -> None:
    diff = memory_diff(expected, actual)
    if diff:
        raise InvariantViolation(f'{label}: la memoria final difiere del intérprete en {len(diff)} palabras', diff)


@dataclass
class RunOutcome:
    artifact: CompiledArtifact
    config: SimConfig
    result: SimulationResult

    def to_dict(self) -> dict:
        return {
            'options': self.artifact.options.to_dict(),
            'config': self.config.to_dict(),
            'report': self.result.report.to_dict(),
            'memory': {hex(a): v for a, v in sorted(self.result.program_memory().items())},
        }


def run_program(
    program: Program,
    mode: str = 'turnpike',
    compile_overrides: Optional[Dict] = None,
    base: Optional[SimConfig] = None,
    sim_overrides: Optional[Dict] = None,
    faults=(),
    label: str = 'program',
) -> RunOutcome:
    """
    Compila y simula `program` en `mode`. Las opciones explícitas mandan
    sobre las del modo. Sin fallos, la memoria final debe coincidir con la
    del intérprete sobre el programa fuente.
    """
    preset = get_mode(mode)
    artifact = compile_program(program, preset.compile_options(**(compile_overrides or {})))
    return _simulate(artifact, preset.sim_config(base, **(sim_overrides or {})), faults,
                     lambda: interpret(program).program_memory(), f'{label}/{mode}')


def run_kernel(
    name: str,
    mode: str = 'turnpike',
    compile_overrides: Optional[Dict] = None,
    base: Optional[SimConfig] = None,
    sim_overrides: Optional[Dict] = None,
    faults=(),
) -> RunOutcome:
    preset = get_mode(mode)
    artifact = compile_kernel(name, preset.compile_options(**(compile_overrides or {})))
    return _simulate(artifact, preset.sim_config(base, **(sim_overrides or {})), faults,
                     lambda: golden_run(name).program_memory(), f'{name}/{mode}')


def _simulate(artifact: CompiledArtifact, config: SimConfig, faults, golden, label) -> RunOutcome:
    if artifact.options.resilient and config.resilient and config.sb_size < artifact.options.sb_size:
        raise ConfigurationError(
            f'{label}: compilado para un SB de {artifact.options.sb_size} entradas, simulado con {config.sb_size}'
        )
    result = simulate(artifact.program, config, artifact.recovery, faults=faults)
    if not faults:
        check_equivalence(golden(), result.program_memory(), label)
    return RunOutcome(artifact, config, result)
