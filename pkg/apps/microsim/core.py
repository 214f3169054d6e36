"""
Núcleo en orden con scoreboard y el lado de memoria resiliente.

Cada ciclo: se aplican los fallos programados, se atiende una alarma
pendiente (recuperación), se verifica como mucho una región de cabeza del
RBB y se emiten hasta `issue_width` instrucciones en orden. Los valores se
calculan al emitir; la latencia sólo retrasa a los consumidores.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

from django.conf import settings
from sortedcontainers import SortedList

from apps.common.exceptions import HardFault, HardenedTargetError, RegionCapacityExceeded, WatchdogExpired
from apps.ir.instructions import Instruction, Opcode, Program, WORD, reg_index, wrap
from apps.ir.interpreter import effective_address, execute_simple, program_memory, run_recovery_block

from .cache import DirectMappedCache
from .config import SimConfig
from .report import SimReport
from .structures import (
    ColorMaps, CommittedLoadQueue, RbbEntry, RegionBoundaryBuffer, Resume, StoreBuffer, StoreBufferEntry,
)

logger = logging.getLogger(__name__)

FAULT_TARGETS = ('register', 'store-value', 'store-address')
HARDENED_TARGETS = ('sb', 'rbb', 'clq', 'color-maps')


@dataclass
class SimulationResult:
    report: SimReport
    memory: Dict[int, int]
    registers: Dict[str, int]

    def program_memory(self) -> Dict[int, int]:
        return program_memory(self.memory)


def index_recovery_blocks(blocks) -> Dict[Tuple[str, Tuple[str, int]], object]:
    """(función, inicio de región) -> bloque de recuperación"""
    if blocks is None:
        return {}
    values = blocks.values() if isinstance(blocks, Mapping) else blocks
    return {(b.function, tuple(b.resume)): b for b in values}


class Simulator:
    """Una ejecución; el estado no se comparte entre simulaciones"""

    def __init__(self, program: Program, config: Optional[SimConfig] = None, recovery=None,
                 check_invariants: bool = False):
        self.program = program
        self.config = config or SimConfig.from_settings()
        self.recovery = index_recovery_blocks(recovery)
        self.check_invariants = check_invariants
        self.functions = {f.name: f for f in program.functions}
        self.fall_through = {}
        for function in program.functions:
            labels = function.labels
            for here, after in zip(labels, labels[1:]):
                self.fall_through[(function.name, here)] = after

        cfg = self.config
        self.report = SimReport(hardware=cfg.hardware_cost(settings.REGALLOC_REGISTERS))
        self.memory: Dict[int, int] = dict(program.data)
        self.regs: Dict[str, int] = {}
        self.ready: Dict[str, int] = {}
        self.cache = DirectMappedCache(cfg.l1_sets, cfg.l1_line)
        self.sb = StoreBuffer(cfg.sb_size)
        self.rbb = RegionBoundaryBuffer()
        self.clq = CommittedLoadQueue(cfg.clq_mode if cfg.war_free else 'off', cfg.clq_entries)
        self.colors = ColorMaps(cfg.colors)

        self.func = program.main
        self.block = self.func.entry
        self.idx = 0
        self.stack = []
        self.cycle = 0
        self.fetch_ready = 0
        self.halted = False

        self.region = 0
        self.region_instructions = 0
        self.region_loads = set()
        self.used_colors: Dict[str, int] = {}
        self.program_start = Resume(self.func.name, (self.block.label, 0), ())
        self.recovery_pc = self.program_start

        self.alarms = SortedList()
        self.armed_value = None
        self.armed_address = None
        self.poisoned = set()
        self.next_store_id = 0

    # ------------------------------------------------------------------
    # utilidades
    # ------------------------------------------------------------------

    def slot(self, reg: str, color: int = 0) -> int:
        return settings.CKPT_BASE + (reg_index(reg) * self.config.colors + color) * WORD

    def checkpoint_color(self, reg: str) -> int:
        return self.colors.verified_color(reg) if self.config.coloring else 0

    def read_slot(self, reg: str) -> int:
        return self.memory.get(self.slot(reg, self.checkpoint_color(reg)), 0)

    def event(self, kind: str, detail: str = '') -> None:
        if self.config.trace:
            self.report.trace.append(f'{self.cycle} {kind} {detail}'.rstrip())

    def snapshot(self) -> dict:
        return {
            'cycle': self.cycle,
            'function': self.func.name,
            'block': self.block.label,
            'index': self.idx,
            'stack': [list(frame) for frame in self.stack],
            'sb': len(self.sb),
            'rbb': len(self.rbb),
            'region': self.region,
        }

    def raise_alarm(self, at: int) -> None:
        self.alarms.add(at)
        self.event('alarm-scheduled', str(at))

    # ------------------------------------------------------------------
    # bucle principal
    # ------------------------------------------------------------------

    def run(self, faults: Iterable = ()) -> SimulationResult:
        cfg = self.config
        pending = deque(sorted(faults, key=lambda f: f.cycle))
        while True:
            if self.cycle > cfg.max_cycles:
                raise WatchdogExpired(cfg.max_cycles, self.snapshot())
            while pending and pending[0].cycle <= self.cycle:
                self.inject(pending.popleft())
            if self.alarms and self.alarms[0] <= self.cycle:
                self.recover()
                continue
            self.verify_head_region()
            if self.check_invariants and cfg.coloring:
                self.colors.check_exclusive([e.used_colors for e in self.rbb.entries] + [self.used_colors])
            if self.halted:
                if not len(self.rbb):
                    break
                self.report.drain_cycles += 1
                self.cycle += 1
                continue
            self.issue()
            self.cycle += 1

        self.report.cycles = self.cycle
        self.report.clq_overflows = self.clq.overflows
        logger.debug(
            'microsim: %d ciclos, %d instrucciones, %d recuperaciones',
            self.report.cycles, self.report.instructions, self.report.recoveries,
        )
        return SimulationResult(self.report, self.memory, self.regs)

    def issue(self) -> None:
        cfg = self.config
        if self.cycle < self.fetch_ready:
            self.report.stalls['fetch'] += 1
            return
        issued = memory_ops = 0
        cause = 'other_data_hazard'
        while issued < cfg.issue_width and not self.halted:
            inst = self.block.instructions[self.idx]
            if inst.opcode is Opcode.RB:
                self.region_boundary()
                continue
            if any(self.ready.get(reg, 0) > self.cycle for reg in inst.uses):
                cause = 'checkpoint_data_hazard' if inst.is_checkpoint else 'other_data_hazard'
                break
            if inst.opcode.is_memory:
                if memory_ops >= cfg.memory_ports:
                    break
                if self.needs_store_buffer(inst) and self.sb.full:
                    if self.sb.only_region(self.region):
                        raise RegionCapacityExceeded(self.region, cfg.sb_size, self.snapshot())
                    cause = 'sb_full'
                    break
            if self.parity_error(inst):
                break
            redirect = self.execute(inst)
            issued += 1
            memory_ops += inst.opcode.is_memory
            if redirect:
                break
        if issued:
            self.report.busy_cycles += 1
        elif self.alarms and self.alarms[0] <= self.cycle:
            self.report.recovery_cycles += 1
        else:
            self.report.stalls[cause] += 1

    # ------------------------------------------------------------------
    # ejecución
    # ------------------------------------------------------------------

    def execute(self, inst: Instruction) -> bool:
        """Ejecuta `inst`; True si el grupo de emisión termina por un salto"""
        cfg = self.config
        op = inst.opcode
        self.report.instructions += 1
        self.region_instructions += 1
        tainted = any(reg in self.poisoned for reg in inst.uses)
        if execute_simple(inst, self.regs):
            latency = cfg.latency_mul if op is Opcode.MUL else cfg.latency_alu
            self.write_register(inst.dst, latency, tainted)
            self.idx += 1
            return False
        if op is Opcode.LD:
            self.load(inst, tainted)
        elif op is Opcode.ST:
            self.store(inst)
        elif op is Opcode.CKPT:
            self.checkpoint(inst)
        elif op is Opcode.BR:
            taken = self.regs.get(inst.srcs[0], 0) != 0
            return self.jump(inst.labels[0] if taken else inst.labels[1])
        elif op is Opcode.JMP:
            return self.jump(inst.labels[0])
        elif op is Opcode.CALL:
            self.stack.append((self.func.name, self.block.label, self.idx + 1))
            self.func = self.functions[inst.callee]
            self.block, self.idx = self.func.entry, 0
            return self.redirect()
        elif op is Opcode.RET:
            if not self.stack:
                self.finish()
                return True
            name, label, idx = self.stack.pop()
            self.func = self.functions[name]
            self.block, self.idx = self.func.block(label), idx
            return self.redirect()
        else:
            raise HardFault(f'{op.value} no es ejecutable en el programa')
        self.idx += 1
        return False

    def write_register(self, reg: str, latency: int, tainted: bool = False) -> None:
        self.ready[reg] = self.cycle + latency
        # la paridad predicha del resultado arrastra el error de sus operandos
        if tainted:
            self.poisoned.add(reg)
        else:
            self.poisoned.discard(reg)

    def jump(self, label: str) -> bool:
        fall_through = self.fall_through.get((self.func.name, self.block.label)) == label
        self.block, self.idx = self.func.block(label), 0
        return False if fall_through else self.redirect()

    def redirect(self) -> bool:
        self.fetch_ready = self.cycle + self.config.latency_branch + self.config.redirect_penalty
        return True

    def load(self, inst: Instruction, tainted: bool = False) -> None:
        cfg = self.config
        address = effective_address(inst, self.regs)
        forwarded = self.sb.forward(address)
        self.regs[inst.dst] = forwarded if forwarded is not None else self.memory.get(address, 0)
        hit = self.cache.access(address)
        self.write_register(inst.dst, cfg.load_hit if hit else cfg.load_miss, tainted)
        if cfg.resilient:
            self.region_loads.add(address)
            self.clq.commit_load(self.region, address)

    # ------------------------------------------------------------------
    # stores y checkpoints
    # ------------------------------------------------------------------

    def is_spill(self, address: int) -> bool:
        return settings.SPILL_BASE <= address < settings.CKPT_BASE

    def prior_verified(self) -> bool:
        return not len(self.rbb)

    def fast_releasable(self, address: int) -> bool:
        """Un store WAR-free sale sin verificar si la región previa ya está verificada"""
        return (
            self.config.war_free
            and self.clq.enabled
            and self.prior_verified()
            and not self.is_spill(address)
            and not self.clq.hits(self.region, address)
            and not self.sb.holds(address)
        )

    def needs_store_buffer(self, inst: Instruction) -> bool:
        cfg = self.config
        if not cfg.resilient:
            return False
        if inst.opcode is Opcode.ST:
            return not self.fast_releasable(effective_address(inst, self.regs))
        if inst.opcode is Opcode.CKPT:
            if cfg.checkpoint_release == 'naive':
                return False
            if cfg.checkpoint_release == 'color':
                reg = inst.srcs[0]
                return reg not in self.used_colors and not self.colors.available.get(reg, True)
            return True
        return False

    def commit_store(self, address: int, value: int, store_id: int) -> str:
        """Coloca un store confirmado: `fast-released` o `quarantined`"""
        cfg = self.config
        shadow = (
            cfg.war_free and self.prior_verified() and not self.is_spill(address)
            and address not in self.region_loads and not self.sb.holds(address)
        )
        if shadow:
            self.report.shadow_ideal.append(store_id)
        if self.fast_releasable(address):
            self.memory[address] = value
            self.report.war_free += 1
            self.report.fast_released.append(store_id)
            self.event('fast-release', f'{address:#x}')
            return 'fast-released'
        self.sb.push(StoreBufferEntry(self.region, value, address=address, store_id=store_id))
        self.report.quarantined += 1
        return 'quarantined'

    def store(self, inst: Instruction) -> None:
        address = effective_address(inst, self.regs)
        value = self.regs.get(inst.srcs[0], 0)
        if self.armed_value is not None:
            fault, self.armed_value = self.armed_value, None
            value = wrap(value ^ (1 << fault.bit))
            self.raise_alarm(self.cycle + fault.latency)
            self.event('fault', f'store-value {address:#x}')
        store_id = self.next_store_id
        self.next_store_id += 1
        self.report.stores += 1
        if not self.config.resilient:
            self.memory[address] = value
            return
        self.commit_store(address, value, store_id)

    def commit_checkpoint(self, reg: str, value: int) -> str:
        """Coloca un checkpoint: `colored-fast-release`, `naive` o `quarantined`"""
        cfg = self.config
        if cfg.checkpoint_release == 'naive':
            self.memory[self.slot(reg)] = value
            self.report.naive_checkpoints += 1
            return 'naive'
        if cfg.checkpoint_release == 'color':
            color = self.used_colors.get(reg)
            if color is None:
                color = self.colors.acquire(reg)
            if color is not None:
                self.used_colors[reg] = color
                self.memory[self.slot(reg, color)] = value
                self.report.colored += 1
                return 'colored-fast-release'
        self.sb.push(StoreBufferEntry(self.region, value, checkpoint=reg))
        self.report.quarantined += 1
        return 'quarantined'

    def checkpoint(self, inst: Instruction) -> None:
        reg = inst.srcs[0]
        value = self.regs.get(reg, 0)
        self.report.checkpoints += 1
        if not self.config.resilient:
            self.memory[self.slot(reg)] = value
            return
        self.commit_checkpoint(reg, value)

    # ------------------------------------------------------------------
    # regiones, verificación y recuperación
    # ------------------------------------------------------------------

    def close_region(self, resume: Optional[Resume]) -> None:
        self.report.regions += 1
        self.report.region_sizes[self.region_instructions] += 1
        if self.config.resilient:
            self.rbb.push(RbbEntry(self.region, resume, self.cycle, self.used_colors))
            self.report.clq_samples.append(self.clq.occupancy)
        self.event('region-end', str(self.region))
        self.region += 1
        self.region_instructions = 0
        self.region_loads = set()
        self.used_colors = {}

    def region_boundary(self) -> None:
        self.idx += 1
        self.close_region(Resume(self.func.name, (self.block.label, self.idx), tuple(self.stack)))
        self.clq.region_started()

    def finish(self) -> None:
        self.halted = True
        self.close_region(None)

    def verify_head_region(self) -> None:
        head = self.rbb.due(self.cycle, self.config.wcdl)
        if head is None:
            return
        self.rbb.retire()
        for entry in self.sb.release_through(head.region):
            if entry.checkpoint is not None:
                self.memory[self.slot(entry.checkpoint, self.checkpoint_color(entry.checkpoint))] = entry.value
            else:
                self.memory[entry.address] = entry.value
        if self.config.coloring:
            self.colors.verify(head.used_colors)
        self.clq.retire(head.region)
        if head.resume is not None:
            self.recovery_pc = head.resume
        self.event('verify', str(head.region))

    def recover(self) -> None:
        """Descarta el trabajo no verificado y reanuda en el PC de recuperación"""
        cfg = self.config
        # la recuperación deshace todo fallo ya inyectado
        self.alarms.clear()
        discarded = self.sb.discard()
        dropped = self.rbb.clear()
        if cfg.coloring:
            for entry in dropped:
                self.colors.reclaim(entry.used_colors)
            self.colors.reclaim(self.used_colors)
        self.clq.wipe()
        self.poisoned.clear()

        resume = self.recovery_pc
        block = self.recovery.get((resume.function, resume.point))
        if block is not None:
            _, executed = run_recovery_block(
                block.blocks, self.read_slot, self.regs, lambda address: self.memory.get(address, 0),
            )
        elif resume == self.program_start:
            self.regs.clear()
            executed = 0
        else:
            raise HardFault(f'no hay bloque de recuperación para {resume.function}/{resume.point}')

        self.func = self.functions[resume.function]
        self.block, self.idx = self.func.block(resume.point[0]), resume.point[1]
        self.stack = list(resume.stack)
        self.ready.clear()
        self.halted = False
        self.region += 1
        self.region_instructions = 0
        self.region_loads = set()
        self.used_colors = {}

        cost = cfg.redirect_penalty + executed
        self.report.recoveries += 1
        self.report.recovery_cycles += cost
        logger.info(
            'microsim: recuperación en el ciclo %d hacia %s/%s (%d stores descartados, %d regiones)',
            self.cycle, resume.function, resume.point, discarded, len(dropped),
        )
        self.event('recover', f'{resume.function}/{resume.point[0]}:{resume.point[1]}')
        self.cycle += cost
        self.fetch_ready = self.cycle

    # ------------------------------------------------------------------
    # fallos
    # ------------------------------------------------------------------

    def inject(self, fault) -> None:
        target = fault.target
        if target in HARDENED_TARGETS:
            raise HardenedTargetError(target)
        if target not in FAULT_TARGETS:
            raise HardenedTargetError(target)
        if target == 'store-value':
            self.armed_value = fault
            return
        if target == 'store-address' and fault.register is None:
            self.armed_address = fault
            return
        self.flip(fault.register, fault.bit)
        self.poisoned.add(fault.register)
        self.raise_alarm(self.cycle + fault.latency)

    def flip(self, reg: str, bit: int) -> None:
        self.regs[reg] = wrap(self.regs.get(reg, 0) ^ (1 << bit))
        self.event('fault', f'{reg} bit {bit}')

    def parity_error(self, inst: Instruction) -> bool:
        """
        La paridad se comprueba al leer la dirección de un store y la
        condición de un salto; un error dispara la recuperación en el acto,
        antes de que una escritura o un camino equivocado lleguen a memoria.
        """
        if inst.opcode is Opcode.ST:
            checked = inst.base
            if self.armed_address is not None and checked is not None:
                fault, self.armed_address = self.armed_address, None
                self.flip(checked, fault.bit)
                self.poisoned.add(checked)
                self.raise_alarm(self.cycle + fault.latency)
        elif inst.opcode is Opcode.BR:
            checked = inst.srcs[0]
        else:
            return False
        if checked is not None and checked in self.poisoned:
            self.raise_alarm(self.cycle)
            self.event('parity', checked)
            return True
        return False


def simulate(program: Program, config: Optional[SimConfig] = None, recovery=None, faults=(),
             check_invariants: bool = False) -> SimulationResult:
    return Simulator(program, config, recovery, check_invariants).run(faults)
