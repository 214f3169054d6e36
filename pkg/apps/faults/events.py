"""
Eventos de fallo y su muestreo
"""
import random
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from apps.common.exceptions import ConfigurationError, HardenedTargetError
from apps.microsim.core import FAULT_TARGETS, HARDENED_TARGETS

WORD_BITS = 64


@dataclass(frozen=True)
class FaultEvent:
    """
    Un error transitorio: en `cycle` se corrompe el bit `bit` del objetivo y
    el sensor lo detecta `latency` ciclos después. Sin `register`, los
    objetivos de store se aplican al siguiente store que se ejecute.
    """
    cycle: int
    target: str
    latency: int
    bit: int = 0
    register: Optional[str] = None

    def validate(self, wcdl: int) -> None:
        if self.target in HARDENED_TARGETS:
            raise HardenedTargetError(self.target)
        if self.target not in FAULT_TARGETS:
            raise ConfigurationError(f'objetivo de fallo desconocido "{self.target}"')
        if not 1 <= self.latency <= wcdl:
            raise ConfigurationError(f'latencia de detección {self.latency} fuera de [1, {wcdl}]')
        if not 0 <= self.bit < WORD_BITS:
            raise ConfigurationError(f'bit {self.bit} fuera de rango')
        if self.target == 'register' and self.register is None:
            raise ConfigurationError('un fallo de registro necesita el registro')

    def to_dict(self) -> dict:
        return asdict(self)


def sample_event(
    rng: random.Random, window: int, wcdl: int, registers: Sequence[str], target: Optional[str] = None,
) -> FaultEvent:
    """Ciclo, objetivo, bit y latencia uniformes; la latencia nunca supera el WCDL"""
    target = target or rng.choice(FAULT_TARGETS)
    cycle = rng.randrange(1, max(2, window))
    bit = rng.randrange(WORD_BITS)
    latency = rng.randint(1, wcdl)
    register = rng.choice(list(registers)) if target == 'register' else None
    return FaultEvent(cycle, target, latency, bit, register)
