"""
Informe de una simulación
"""
import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional

STALL_CAUSES = ('sb_full', 'checkpoint_data_hazard', 'other_data_hazard', 'fetch')

CSV_FIELDS = (
    'cycles', 'busy_cycles', 'sb_full', 'checkpoint_data_hazard', 'other_data_hazard', 'fetch',
    'recovery_cycles', 'drain_cycles', 'instructions', 'regions', 'stores', 'checkpoints',
    'colored', 'war_free', 'quarantined', 'clq_mean', 'clq_max', 'clq_overflows',
    'recoveries',
)


@dataclass
class SimReport:
    cycles: int = 0
    busy_cycles: int = 0
    stalls: Dict[str, int] = field(default_factory=lambda: dict.fromkeys(STALL_CAUSES, 0))
    recovery_cycles: int = 0
    drain_cycles: int = 0
    instructions: int = 0
    regions: int = 0
    region_sizes: Counter = field(default_factory=Counter)
    # stores dinámicos que llegan a ejecutarse
    stores: int = 0
    checkpoints: int = 0
    # cómo salió cada store: fast release por color, WAR-free, o cuarentena
    colored: int = 0
    war_free: int = 0
    quarantined: int = 0
    naive_checkpoints: int = 0
    clq_samples: List[int] = field(default_factory=list)
    clq_overflows: int = 0
    recoveries: int = 0
    fast_released: List[int] = field(default_factory=list)
    shadow_ideal: List[int] = field(default_factory=list)
    hardware: Dict[str, Optional[int]] = field(default_factory=dict)
    trace: List[str] = field(default_factory=list)

    @property
    def stall_cycles(self) -> int:
        return sum(self.stalls.values())

    @property
    def checkpoint_fraction(self) -> float:
        return self.checkpoints / self.instructions if self.instructions else 0.0

    @property
    def sb_full_fraction(self) -> float:
        return self.stalls['sb_full'] / self.cycles if self.cycles else 0.0

    @property
    def clq_mean(self) -> float:
        return sum(self.clq_samples) / len(self.clq_samples) if self.clq_samples else 0.0

    @property
    def clq_max(self) -> int:
        return max(self.clq_samples, default=0)

    @property
    def mean_region_size(self) -> float:
        total = sum(self.region_sizes.values())
        return sum(size * n for size, n in self.region_sizes.items()) / total if total else 0.0

    @property
    def accounted(self) -> bool:
        """Todo ciclo es de trabajo, de parada, de recuperación o de drenaje"""
        return self.cycles == self.busy_cycles + self.stall_cycles + self.recovery_cycles + self.drain_cycles

    def compact_is_sound(self) -> bool:
        return set(self.fast_released) <= set(self.shadow_ideal)

    def to_dict(self) -> dict:
        return {
            'cycles': self.cycles,
            'busy_cycles': self.busy_cycles,
            'stalls': dict(self.stalls),
            'recovery_cycles': self.recovery_cycles,
            'drain_cycles': self.drain_cycles,
            'instructions': self.instructions,
            'regions': self.regions,
            'mean_region_size': self.mean_region_size,
            'region_sizes': {str(k): v for k, v in sorted(self.region_sizes.items())},
            'stores': self.stores,
            'checkpoints': self.checkpoints,
            'checkpoint_fraction': self.checkpoint_fraction,
            'sb_full_fraction': self.sb_full_fraction,
            'release': {
                'colored': self.colored,
                'war_free': self.war_free,
                'quarantined': self.quarantined,
                'naive_checkpoints': self.naive_checkpoints,
            },
            'clq': {
                'mean': self.clq_mean,
                'max': self.clq_max,
                'overflows': self.clq_overflows,
                'compact_sound': self.compact_is_sound(),
            },
            'recoveries': self.recoveries,
            'hardware': dict(self.hardware),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self) -> dict:
        row = {
            'cycles': self.cycles,
            'busy_cycles': self.busy_cycles,
            'recovery_cycles': self.recovery_cycles,
            'drain_cycles': self.drain_cycles,
            'instructions': self.instructions,
            'regions': self.regions,
            'stores': self.stores,
            'checkpoints': self.checkpoints,
            'colored': self.colored,
            'war_free': self.war_free,
            'quarantined': self.quarantined,
            'clq_mean': round(self.clq_mean, 4),
            'clq_max': self.clq_max,
            'clq_overflows': self.clq_overflows,
            'recoveries': self.recoveries,
        }
        row.update(self.stalls)
        return row

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerow(self.csv_row())
        return out.getvalue()
