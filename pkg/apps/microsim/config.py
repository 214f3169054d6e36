"""
Configuración del simulador
"""
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from decouple import Config, RepositoryEnv
from django.conf import settings

from apps.common.exceptions import ConfigurationError

CLQ_MODES = ('off', 'ideal', 'compact')
CHECKPOINT_RELEASES = ('quarantine', 'color', 'naive')


@dataclass(frozen=True)
class SimConfig:
    issue_width: int = 2
    memory_ports: int = 1
    latency_alu: int = 1
    latency_mul: int = 3
    latency_branch: int = 1
    load_hit: int = 2
    load_miss: int = 20
    redirect_penalty: int = 2
    l1_sets: int = 64
    l1_line: int = 64
    sb_size: int = 4
    wcdl: int = 10
    clq_mode: str = 'compact'
    clq_entries: int = 2
    colors: int = 4
    # False = máquina base sin soporte de resiliencia: los stores van directos a memoria
    resilient: bool = True
    fast_release: bool = True
    checkpoint_release: str = 'color'
    max_cycles: int = 5_000_000
    trace: bool = False

    def __post_init__(self):
        if self.sb_size < 2:
            raise ConfigurationError(f'sb_size debe ser >= 2 (recibido {self.sb_size})')
        if self.wcdl < 1:
            raise ConfigurationError(f'wcdl debe ser >= 1 (recibido {self.wcdl})')
        if self.issue_width < 1 or self.memory_ports < 1:
            raise ConfigurationError('issue_width y memory_ports deben ser >= 1')
        if self.clq_mode not in CLQ_MODES:
            raise ConfigurationError(f'clq_mode desconocido "{self.clq_mode}"; opciones: {", ".join(CLQ_MODES)}')
        if self.clq_mode == 'compact' and self.clq_entries < 1:
            raise ConfigurationError('el CLQ compacto necesita al menos una entrada')
        if self.checkpoint_release not in CHECKPOINT_RELEASES:
            raise ConfigurationError(f'checkpoint_release desconocido "{self.checkpoint_release}"')
        if self.colors < 2 and self.checkpoint_release == 'color':
            raise ConfigurationError('el coloreado necesita al menos 2 colores por registro')

    @classmethod
    def from_settings(cls, **overrides) -> 'SimConfig':
        values = dict(
            issue_width=settings.SIM_ISSUE_WIDTH,
            memory_ports=settings.SIM_MEMORY_PORTS,
            latency_alu=settings.SIM_LATENCY_ALU,
            latency_mul=settings.SIM_LATENCY_MUL,
            latency_branch=settings.SIM_LATENCY_BRANCH,
            load_hit=settings.SIM_LOAD_HIT,
            load_miss=settings.SIM_LOAD_MISS,
            redirect_penalty=settings.SIM_REDIRECT_PENALTY,
            l1_sets=settings.SIM_L1_SETS,
            l1_line=settings.SIM_L1_LINE,
            sb_size=settings.SIM_SB_SIZE,
            wcdl=settings.SIM_WCDL,
            clq_mode=settings.SIM_CLQ_MODE,
            clq_entries=settings.SIM_CLQ_ENTRIES,
            colors=settings.SIM_COLORS,
            max_cycles=settings.SIM_MAX_CYCLES,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path, base: Optional['SimConfig'] = None) -> 'SimConfig':
        """Lee un fichero plano `clave=valor`; las claves ausentes conservan el valor de `base`"""
        base = base or cls.from_settings()
        source = Config(RepositoryEnv(str(path)))
        values = {}
        for f in fields(cls):
            default = getattr(base, f.name)
            cast = bool if isinstance(default, bool) else type(default)
            values[f.name] = source(f.name, default=default, cast=cast)
        return cls(**values)

    def with_overrides(self, **overrides) -> 'SimConfig':
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def war_free(self) -> bool:
        return self.resilient and self.fast_release and self.clq_mode != 'off'

    @property
    def coloring(self) -> bool:
        return self.resilient and self.checkpoint_release == 'color'

    def hardware_cost(self, registers: int) -> dict:
        """Estimación del almacenamiento añadido: mapas de color y CLQ compacto"""
        bits = max(1, math.ceil(math.log2(self.colors)))
        return {
            'color_map_bits': 3 * bits * registers if self.coloring else 0,
            'clq_bytes': 2 * 8 * self.clq_entries if self.clq_mode == 'compact' else None,
        }

    def to_dict(self) -> dict:
        return asdict(self)
