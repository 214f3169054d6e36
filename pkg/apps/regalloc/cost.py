"""
Modelo de coste de spill con escrituras ponderadas
"""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict

from django.conf import settings

from apps.common.exceptions import ConfigurationError
from apps.ir.instructions import Program, is_physical
from apps.ir.loops import find_loops


@dataclass(frozen=True)
class SpillCostModel:
    read_weight: float = 1.0
    write_weight: float = 3.0

    def __post_init__(self):
        if self.write_weight < 1:
            raise ConfigurationError(f'el peso de escritura debe ser >= 1 (recibido {self.write_weight})')
        if self.read_weight <= 0:
            raise ConfigurationError(f'el peso de lectura debe ser positivo (recibido {self.read_weight})')

    @classmethod
    def from_settings(cls, write_weight=None) -> 'SpillCostModel':
        return cls(
            read_weight=settings.REGALLOC_READ_WEIGHT,
            write_weight=settings.REGALLOC_WRITE_WEIGHT if write_weight is None else write_weight,
        )

    @staticmethod
    def frequency(depth: int) -> int:
        return 10 ** depth

    def cost(self, usage: 'Usage') -> float:
        return self.read_weight * usage.weighted_reads + self.write_weight * usage.weighted_writes

    def classic(self) -> 'SpillCostModel':
        return SpillCostModel(self.read_weight, 1.0)


@dataclass
class Usage:
    reads: int = 0
    writes: int = 0
    weighted_reads: int = 0
    weighted_writes: int = 0

    def to_dict(self) -> dict:
        return {'reads': self.reads, 'writes': self.writes,
                'weighted_reads': self.weighted_reads, 'weighted_writes': self.weighted_writes}


def register_usage(program: Program) -> Dict[str, Usage]:
    """Lecturas y escrituras estáticas de cada registro virtual, pesadas por 10^profundidad"""
    loops = find_loops(program)
    usage: Dict[str, Usage] = defaultdict(Usage)
    for function in program.functions:
        depth = loops[function.name].depth
        for label, _, inst in function.points():
            freq = SpillCostModel.frequency(depth.get(label, 0))
            # un ckpt cuenta como lectura de su registro
            for reg in inst.uses:
                if not is_physical(reg):
                    usage[reg].reads += 1
                    usage[reg].weighted_reads += freq
            for reg in inst.defs:
                if not is_physical(reg):
                    usage[reg].writes += 1
                    usage[reg].weighted_writes += freq
    return dict(usage)
