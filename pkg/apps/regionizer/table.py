"""
Tabla de regiones y estadísticas estáticas/dinámicas de tamaño
"""
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from apps.ir.cfg import ControlFlowGraph
from apps.ir.instructions import Function, Instruction, Opcode, Program
from apps.ir.liveness import LivenessResult, liveness
from apps.ir.regions import program_region_ids, region_members


@dataclass(frozen=True)
class Region:
    id: int
    function: str
    start: Tuple[str, int]
    size: int
    max_stores: int
    live_in: Tuple[str, ...]
    loop_header: bool = False

    @property
    def empty(self) -> bool:
        return self.size == 0


@dataclass(frozen=True)
class RegionTable:
    regions: Tuple[Region, ...]

    def __iter__(self):
        return iter(self.regions)

    def __len__(self):
        return len(self.regions)

    def by_start(self, function: str, start: Tuple[str, int]) -> Region:
        for region in self.regions:
            if region.function == function and region.start == start:
                return region
        raise KeyError((function, start))

    def to_dict(self) -> dict:
        return {'regions': [dict(asdict(r), start=list(r.start), live_in=list(r.live_in)) for r in self.regions]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def max_path_count(
    function: Function,
    start: Tuple[str, int],
    predicate: Callable[[Instruction], bool],
    cfg: Optional[ControlFlowGraph] = None,
) -> int:
    """Máximo, sobre los caminos acíclicos de la región, de instrucciones que cumplen `predicate`"""
    cfg = cfg or ControlFlowGraph(function)
    memo: Dict[str, int] = {}
    on_stack = set()

    def from_point(label, idx):
        count = 0
        instructions = function.block(label).instructions
        for inst in instructions[idx:]:
            if predicate(inst):
                count += 1
            if inst.opcode in (Opcode.RB, Opcode.RET):
                return count
        best = 0
        for succ in cfg.successors[label]:
            best = max(best, from_block(succ))
        return count + best

    def from_block(label):
        if label in memo:
            return memo[label]
        if label in on_stack:
            return 0
        on_stack.add(label)
        memo[label] = from_point(label, 0)
        on_stack.discard(label)
        return memo[label]

    return from_point(*start)


def _loop_headers(function: Function, cfg: ControlFlowGraph):
    return {head for _, head in cfg.retreating_edges}


def region_table(program: Program, live: Optional[LivenessResult] = None) -> RegionTable:
    live = live or liveness(program)
    ids = program_region_ids(program)
    regions = []
    cfgs = {f.name: ControlFlowGraph(f) for f in program.functions}
    for (fname, start), rid in ids.items():
        function = program.function(fname)
        cfg = cfgs[fname]
        members = list(region_members(function, start, cfg))
        size = sum(1 for label, idx in members if function.block(label).instructions[idx].opcode is not Opcode.RB)
        regions.append(Region(
            id=rid,
            function=fname,
            start=start,
            size=size,
            max_stores=max_path_count(function, start, lambda i: i.is_store, cfg),
            live_in=tuple(sorted(live.region_live_in(fname, start))),
            loop_header=start == (start[0], 1) and start[0] in _loop_headers(function, cfg),
        ))
    return RegionTable(tuple(sorted(regions, key=lambda r: r.id)))


@dataclass
class RegionStats:
    regions: List[dict]
    empty_regions: List[int]
    static_size: int
    baseline_size: Optional[int] = None
    code_size_increase: Optional[float] = None
    dynamic_histogram: Dict[int, int] = field(default_factory=dict)
    dynamic_mean: Optional[float] = None

    def to_dict(self) -> dict:
        data = asdict(self)
        data['dynamic_histogram'] = {str(k): v for k, v in sorted(self.dynamic_histogram.items())}
        return data


def region_stats(
    program: Program,
    baseline: Optional[Program] = None,
    dynamic_histogram: Optional[Mapping[int, int]] = None,
) -> RegionStats:
    """
    Conteos estáticos por región; si se pasa el histograma del simulador
    (instrucciones por región ejecutada -> veces) se añade su media.
    """
    table = region_table(program)
    static_size = program.static_size()
    stats = RegionStats(
        regions=[
            {
                'id': r.id,
                'function': r.function,
                'size': r.size,
                'max_stores': r.max_stores,
                'checkpoints': max_path_count(
                    program.function(r.function), r.start, lambda i: i.is_checkpoint,
                ),
            }
            for r in table
        ],
        empty_regions=[r.id for r in table if r.empty],
        static_size=static_size,
    )
    if baseline is not None:
        stats.baseline_size = baseline.static_size()
        stats.code_size_increase = static_size / stats.baseline_size - 1 if stats.baseline_size else 0.0
    if dynamic_histogram:
        histogram = {int(k): int(v) for k, v in dynamic_histogram.items()}
        executed = sum(histogram.values())
        stats.dynamic_histogram = histogram
        stats.dynamic_mean = sum(k * v for k, v in histogram.items()) / executed if executed else 0.0
    return stats
