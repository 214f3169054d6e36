"""
Estructuras del lado de memoria: store buffer, RBB, CLQ y mapas de color
"""
import logging
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Optional, Tuple

from apps.common.exceptions import InvariantViolation

logger = logging.getLogger(__name__)


@dataclass
class StoreBufferEntry:
    region: int
    value: int
    # los checkpoints en cuarentena resuelven su ranura al liberarse
    address: Optional[int] = None
    checkpoint: Optional[str] = None
    store_id: Optional[int] = None


class StoreBuffer:
    """FIFO de stores en cuarentena; se liberan a memoria en orden de llegada"""

    def __init__(self, size: int):
        self.size = size
        self.entries: Deque[StoreBufferEntry] = deque()

    def __len__(self):
        return len(self.entries)

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.size

    def push(self, entry: StoreBufferEntry) -> None:
        self.entries.append(entry)

    def holds(self, address: int) -> bool:
        return any(e.address == address for e in self.entries)

    def forward(self, address: int) -> Optional[int]:
        for entry in reversed(self.entries):
            if entry.address == address:
                return entry.value
        return None

    def only_region(self, region: int) -> bool:
        return all(e.region == region for e in self.entries)

    def release_through(self, region: int) -> List[StoreBufferEntry]:
        released = []
        while self.entries and self.entries[0].region <= region:
            released.append(self.entries.popleft())
        return released

    def discard(self) -> int:
        count = len(self.entries)
        self.entries.clear()
        return count


@dataclass(frozen=True)
class Resume:
    """PC de recuperación: inicio de región más la pila de llamadas en ese punto"""
    function: str
    point: Tuple[str, int]
    stack: Tuple[Tuple[str, str, int], ...] = ()


@dataclass
class RbbEntry:
    region: int
    resume: Optional[Resume]
    end_cycle: int
    used_colors: Dict[str, int] = field(default_factory=dict)


class RegionBoundaryBuffer:

    def __init__(self):
        self.entries: Deque[RbbEntry] = deque()

    def __len__(self):
        return len(self.entries)

    def push(self, entry: RbbEntry) -> None:
        self.entries.append(entry)

    def due(self, now: int, wcdl: int) -> Optional[RbbEntry]:
        if self.entries and self.entries[0].end_cycle + wcdl <= now:
            return self.entries[0]
        return None

    def retire(self) -> RbbEntry:
        return self.entries.popleft()

    def clear(self) -> List[RbbEntry]:
        dropped = list(self.entries)
        self.entries.clear()
        return dropped


class CommittedLoadQueue:
    """
    Direcciones de las cargas confirmadas por región.

    En modo `compact` cada región ocupa una entrada [mín, máx]; en `ideal`
    guarda el conjunto exacto sin límite de entradas. Si no queda entrada
    libre, el fast release se desactiva y la cola se vacía hasta el
    siguiente inicio de región.
    """

    def __init__(self, mode: str, capacity: int):
        self.mode = mode
        self.capacity = capacity
        self.entries: 'OrderedDict[int, object]' = OrderedDict()
        self.enabled = mode != 'off'
        self.overflows = 0

    @property
    def occupancy(self) -> int:
        return len(self.entries)

    def commit_load(self, region: int, address: int) -> bool:
        """Devuelve True si la carga desbordó la cola"""
        if not self.enabled:
            return False
        if region in self.entries:
            if self.mode == 'compact':
                low, high = self.entries[region]
                self.entries[region] = (min(low, address), max(high, address))
            else:
                self.entries[region].add(address)
            return False
        if self.mode == 'compact' and len(self.entries) >= self.capacity:
            self.overflows += 1
            self.enabled = False
            self.entries.clear()
            logger.info('clq: desbordamiento en la región %d; fast release desactivado', region)
            return True
        self.entries[region] = (address, address) if self.mode == 'compact' else {address}
        return False

    def hits(self, region: int, address: int) -> bool:
        entry = self.entries.get(region)
        if entry is None:
            return False
        if self.mode == 'compact':
            return entry[0] <= address <= entry[1]
        return address in entry

    def region_started(self) -> None:
        if self.mode != 'off' and not self.enabled:
            self.enabled = True
            logger.debug('clq: fast release reactivado')

    def retire(self, region: int) -> None:
        self.entries.pop(region, None)

    def wipe(self) -> None:
        self.entries.clear()
        self.enabled = self.mode != 'off'


class ColorMaps:
    """
    AC, UC y VC por registro. Cada registro arranca con el color 0 como
    verificado (ranura a cero, el estado inicial) y el resto disponibles.
    """

    def __init__(self, colors: int):
        self.colors = colors
        self.available: Dict[str, Deque[int]] = {}
        self.verified: Dict[str, int] = {}

    def _pool(self, reg: str) -> Deque[int]:
        if reg not in self.available:
            self.available[reg] = deque(range(1, self.colors))
        return self.available[reg]

    def verified_color(self, reg: str) -> int:
        return self.verified.get(reg, 0)

    def acquire(self, reg: str) -> Optional[int]:
        pool = self._pool(reg)
        return pool.popleft() if pool else None

    def reclaim(self, used: Dict[str, int]) -> None:
        for reg, color in used.items():
            self._pool(reg).append(color)

    def verify(self, used: Dict[str, int]) -> None:
        for reg, color in used.items():
            self._pool(reg).append(self.verified_color(reg))
            self.verified[reg] = color

    def check_exclusive(self, unverified: Iterable[Dict[str, int]]) -> None:
        holders: Dict[str, List[int]] = {reg: list(pool) for reg, pool in self.available.items()}
        for used in unverified:
            for reg, color in used.items():
                holders.setdefault(reg, list(self._pool(reg))).append(color)
        for reg, colors in holders.items():
            colors = colors + [self.verified_color(reg)]
            if len(set(colors)) != len(colors) or len(colors) > self.colors:
                raise InvariantViolation(f'colores repetidos para {reg}: {sorted(colors)}', {reg: sorted(colors)})
