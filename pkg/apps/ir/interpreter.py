"""
Intérprete de referencia del IR.

Es el oráculo de semántica de todos los pases: ejecuta el programa con su
memoria inicial (`.word`) y devuelve memoria, registros y contadores
dinámicos. Los `ckpt` escriben un almacenamiento de checkpoints de una sola
ranura por registro.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from django.conf import settings

from apps.common.exceptions import HardFault, WatchdogExpired

from .instructions import Block, Instruction, Opcode, Program, evaluate_binop, wrap

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 2_000_000


@dataclass(frozen=True)
class RegionEntry:
    """Estado observado al comenzar una región (tras un `rb` o al arrancar main)"""
    function: str
    start: Tuple[str, int]
    registers: Dict[str, int]
    checkpoints: Dict[str, int]
    memory: Dict[int, int]


@dataclass
class ExecutionResult:
    memory: Dict[int, int]
    registers: Dict[str, int]
    checkpoints: Dict[str, int] = field(default_factory=dict)
    instructions: int = 0
    stores: int = 0
    checkpoint_stores: int = 0
    loads: int = 0
    regions: int = 0
    memory_trace: List[Tuple[str, int, int]] = field(default_factory=list)

    def program_memory(self) -> Dict[int, int]:
        """Memoria visible del programa: sin segmentos reservados y sin ceros"""
        return program_memory(self.memory)

    @property
    def checkpoint_fraction(self) -> float:
        return self.checkpoint_stores / self.instructions if self.instructions else 0.0


def program_memory(memory: Dict[int, int]) -> Dict[int, int]:
    limit = settings.SPILL_BASE
    return {a: v for a, v in sorted(memory.items()) if a < limit and v != 0}


def effective_address(inst: Instruction, registers: Dict[str, int]) -> int:
    base = registers.get(inst.base, 0) if inst.base is not None else 0
    return wrap(base + (inst.imm or 0))


def execute_simple(inst: Instruction, registers: Dict[str, int]) -> bool:
    """Ejecuta una instrucción de registro (binop, mov, li); False si no lo es"""
    op = inst.opcode
    if op.is_binop:
        a = registers.get(inst.srcs[0], 0)
        b = registers.get(inst.srcs[1], 0) if len(inst.srcs) == 2 else inst.imm
        registers[inst.dst] = evaluate_binop(op, a, b)
        return True
    if op is Opcode.MOV:
        registers[inst.dst] = registers.get(inst.srcs[0], 0)
        return True
    if op is Opcode.LI:
        registers[inst.dst] = inst.imm
        return True
    return False


def run_recovery_block(
    blocks: Sequence[Block],
    read_slot: Callable[[str], int],
    registers: Dict[str, int],
    read_memory: Optional[Callable[[int], int]] = None,
) -> Tuple[Dict[str, int], int]:
    """
    Evalúa un bloque de recuperación sobre `registers` (se modifica en sitio).

    `rst r` lee el checkpoint de r mediante `read_slot`; los `ld` (sólo de
    ranuras de spill) leen con `read_memory`. La ejecución termina
    en el primer `jmp` a una etiqueta fuera del bloque. Devuelve los registros
    y el número de instrucciones ejecutadas.
    """
    if not blocks:
        return registers, 0
    local = {b.label: b for b in blocks}
    block = blocks[0]
    executed = 0
    while True:
        for inst in block.instructions:
            executed += 1
            if execute_simple(inst, registers):
                continue
            if inst.opcode is Opcode.RST:
                registers[inst.dst] = read_slot(inst.dst)
                continue
            if inst.opcode is Opcode.LD and read_memory is not None:
                registers[inst.dst] = read_memory(effective_address(inst, registers))
                continue
            if inst.opcode is Opcode.JMP:
                target = inst.labels[0]
                if target not in local:
                    return registers, executed
                block = local[target]
                break
            if inst.opcode is Opcode.BR:
                taken = registers.get(inst.srcs[0], 0) != 0
                block = local[inst.labels[0] if taken else inst.labels[1]]
                break
            raise HardFault(f'instrucción no válida en bloque de recuperación: {inst}')
        else:
            raise HardFault(f'bloque de recuperación {block.label} sin salto final')


class Interpreter:
    """Ejecución funcional instrucción a instrucción"""

    def __init__(
        self,
        program: Program,
        on_region_entry: Optional[Callable[[RegionEntry], None]] = None,
        max_steps: int = DEFAULT_MAX_STEPS,
        trace_memory: bool = False,
    ):
        self.program = program
        self.on_region_entry = on_region_entry
        self.max_steps = max_steps
        self.trace_memory = trace_memory

    def _notify(self, result, function, start, registers):
        result.regions += 1
        if self.on_region_entry is not None:
            self.on_region_entry(RegionEntry(
                function, start, dict(registers), dict(result.checkpoints), dict(result.memory),
            ))

    def run(self, registers: Optional[Dict[str, int]] = None) -> ExecutionResult:
        memory = dict(self.program.data)
        regs: Dict[str, int] = dict(registers or {})
        result = ExecutionResult(memory=memory, registers=regs)
        functions = {f.name: f for f in self.program.functions}

        func = self.program.main
        block = func.entry
        idx = 0
        stack: List[Tuple[str, str, int]] = []
        if block.instructions[0].opcode is not Opcode.RB:
            self._notify(result, func.name, (block.label, 0), regs)

        steps = 0
        while True:
            steps += 1
            if steps > self.max_steps:
                raise WatchdogExpired(self.max_steps, {'function': func.name, 'block': block.label, 'index': idx})
            inst = block.instructions[idx]
            op = inst.opcode
            if op is not Opcode.RB:
                result.instructions += 1

            if execute_simple(inst, regs):
                idx += 1
            elif op is Opcode.LD:
                address = effective_address(inst, regs)
                regs[inst.dst] = memory.get(address, 0)
                result.loads += 1
                if self.trace_memory:
                    result.memory_trace.append(('ld', address, regs[inst.dst]))
                idx += 1
            elif op is Opcode.ST:
                address = effective_address(inst, regs)
                memory[address] = regs.get(inst.srcs[0], 0)
                result.stores += 1
                if self.trace_memory:
                    result.memory_trace.append(('st', address, memory[address]))
                idx += 1
            elif op is Opcode.CKPT:
                result.checkpoints[inst.srcs[0]] = regs.get(inst.srcs[0], 0)
                result.checkpoint_stores += 1
                idx += 1
            elif op is Opcode.RB:
                idx += 1
                self._notify(result, func.name, (block.label, idx), regs)
            elif op is Opcode.BR:
                target = inst.labels[0] if regs.get(inst.srcs[0], 0) != 0 else inst.labels[1]
                block, idx = func.block(target), 0
            elif op is Opcode.JMP:
                block, idx = func.block(inst.labels[0]), 0
            elif op is Opcode.CALL:
                stack.append((func.name, block.label, idx + 1))
                func = functions[inst.callee]
                block, idx = func.entry, 0
                if block.instructions[0].opcode is not Opcode.RB:
                    self._notify(result, func.name, (block.label, 0), regs)
            elif op is Opcode.RET:
                if not stack:
                    break
                fname, label, idx = stack.pop()
                func = functions[fname]
                block = func.block(label)
            else:
                raise HardFault(f'{op.value} no es ejecutable fuera de un bloque de recuperación')

        logger.debug(
            'intérprete: %d instrucciones, %d stores, %d checkpoints',
            result.instructions, result.stores, result.checkpoint_stores,
        )
        return result


def interpret(program: Program, **kwargs) -> ExecutionResult:
    return Interpreter(program, **kwargs).run()
