"""
Tipos del IR: instrucciones, bloques, funciones y programa
"""
import enum
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, Optional, Tuple

WORD = 8
MASK64 = (1 << 64) - 1

VIRTUAL_RE = re.compile(r'^r\d+$')
PHYSICAL_RE = re.compile(r'^p\d+$')


def wrap(value: int) -> int:
    """Reduce a 64 bits con signo (complemento a dos)"""
    value &= MASK64
    return value - (1 << 64) if value >> 63 else value


def is_physical(reg: str) -> bool:
    return bool(PHYSICAL_RE.match(reg))


def reg_index(reg: str) -> int:
    return int(reg[1:])


class Opcode(enum.Enum):
    ADD = 'add'
    SUB = 'sub'
    MUL = 'mul'
    AND = 'and'
    OR = 'or'
    XOR = 'xor'
    SHL = 'shl'
    SHR = 'shr'
    SLT = 'slt'
    SLE = 'sle'
    SEQ = 'seq'
    SNE = 'sne'
    MOV = 'mov'
    LI = 'li'
    LD = 'ld'
    ST = 'st'
    BR = 'br'
    JMP = 'jmp'
    CALL = 'call'
    RET = 'ret'
    CKPT = 'ckpt'
    RB = 'rb'
    RST = 'rst'

    @property
    def is_binop(self) -> bool:
        return self in BINOPS

    @property
    def is_terminator(self) -> bool:
        return self in (Opcode.BR, Opcode.JMP, Opcode.RET)

    @property
    def is_memory(self) -> bool:
        return self in (Opcode.LD, Opcode.ST, Opcode.CKPT, Opcode.RST)

    @property
    def latency_class(self) -> str:
        if self is Opcode.MUL:
            return 'mul'
        if self is Opcode.LD:
            return 'load'
        if self in (Opcode.ST, Opcode.CKPT):
            return 'store'
        if self in (Opcode.BR, Opcode.JMP, Opcode.CALL, Opcode.RET):
            return 'branch'
        if self in (Opcode.RB, Opcode.RST):
            return 'pseudo'
        return 'alu'


BINOPS = frozenset({
    Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.AND, Opcode.OR, Opcode.XOR,
    Opcode.SHL, Opcode.SHR, Opcode.SLT, Opcode.SLE, Opcode.SEQ, Opcode.SNE,
})


def evaluate_binop(op: Opcode, a: int, b: int) -> int:
    """Semántica de las operaciones binarias sobre enteros de 64 bits"""
    if op is Opcode.ADD:
        return wrap(a + b)
    if op is Opcode.SUB:
        return wrap(a - b)
    if op is Opcode.MUL:
        return wrap(a * b)
    if op is Opcode.AND:
        return wrap(a & b)
    if op is Opcode.OR:
        return wrap(a | b)
    if op is Opcode.XOR:
        return wrap(a ^ b)
    if op is Opcode.SHL:
        return wrap(a << (b & 63))
    if op is Opcode.SHR:
        return wrap((a & MASK64) >> (b & 63))
    if op is Opcode.SLT:
        return int(a < b)
    if op is Opcode.SLE:
        return int(a <= b)
    if op is Opcode.SEQ:
        return int(a == b)
    if op is Opcode.SNE:
        return int(a != b)
    raise ValueError(f'{op} no es binaria')


@dataclass(frozen=True)
class Instruction:
    """
    Una instrucción del IR.

    `srcs` contiene los registros de valor (para `st`, el registro almacenado);
    el registro base de `ld`/`st` va aparte en `base`. `imm` es el inmediato
    (desplazamiento en accesos a memoria).
    """
    opcode: Opcode
    dst: Optional[str] = None
    srcs: Tuple[str, ...] = ()
    imm: Optional[int] = None
    base: Optional[str] = None
    labels: Tuple[str, ...] = ()
    callee: Optional[str] = None
    # (bloque, índice) en el programa que recibió la partición; no cuenta para la igualdad
    origin: Optional[Tuple[str, int]] = field(default=None, compare=False, repr=False)

    @property
    def uses(self) -> Tuple[str, ...]:
        if self.base is not None:
            return (self.base,) + self.srcs
        return self.srcs

    @property
    def defs(self) -> Tuple[str, ...]:
        return (self.dst,) if self.dst is not None else ()

    @property
    def is_store(self) -> bool:
        return self.opcode is Opcode.ST

    @property
    def is_checkpoint(self) -> bool:
        return self.opcode is Opcode.CKPT

    @property
    def is_boundary(self) -> bool:
        return self.opcode is Opcode.RB

    def rename(self, mapping: Dict[str, str]) -> 'Instruction':
        """Devuelve la instrucción con los registros renombrados"""
        def sub(reg):
            return mapping.get(reg, reg) if reg is not None else None
        return replace(
            self,
            dst=sub(self.dst),
            srcs=tuple(sub(r) for r in self.srcs),
            base=sub(self.base),
        )

    def rename_uses(self, mapping: Dict[str, str]) -> 'Instruction':
        def sub(reg):
            return mapping.get(reg, reg) if reg is not None else None
        return replace(self, srcs=tuple(sub(r) for r in self.srcs), base=sub(self.base))

    def __str__(self):
        from .printer import format_instruction
        return format_instruction(self)


@dataclass(frozen=True)
class Block:
    label: str
    instructions: Tuple[Instruction, ...]

    @property
    def terminator(self) -> Instruction:
        return self.instructions[-1]

    @property
    def body(self) -> Tuple[Instruction, ...]:
        return self.instructions[:-1]

    @property
    def successors(self) -> Tuple[str, ...]:
        term = self.terminator
        if term.opcode is Opcode.RET:
            return ()
        return term.labels


@dataclass(frozen=True)
class Function:
    name: str
    blocks: Tuple[Block, ...]

    @property
    def entry(self) -> Block:
        return self.blocks[0]

    def block(self, label: str) -> Block:
        for blk in self.blocks:
            if blk.label == label:
                return blk
        raise KeyError(label)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(b.label for b in self.blocks)

    def with_blocks(self, blocks) -> 'Function':
        return replace(self, blocks=tuple(blocks))

    def points(self) -> Iterator[Tuple[str, int, Instruction]]:
        for blk in self.blocks:
            for idx, inst in enumerate(blk.instructions):
                yield blk.label, idx, inst

    def registers(self) -> frozenset:
        regs = set()
        for _, _, inst in self.points():
            regs.update(inst.uses)
            regs.update(inst.defs)
        return frozenset(regs)


@dataclass(frozen=True)
class Program:
    functions: Tuple[Function, ...]
    data: Tuple[Tuple[int, int], ...] = field(default=())

    @property
    def main(self) -> Function:
        return self.function('main')

    def function(self, name: str) -> Function:
        for func in self.functions:
            if func.name == name:
                return func
        raise KeyError(name)

    def with_functions(self, functions) -> 'Program':
        return replace(self, functions=tuple(functions))

    def map_functions(self, transform) -> 'Program':
        return self.with_functions(transform(f) for f in self.functions)

    def registers(self) -> frozenset:
        regs = set()
        for func in self.functions:
            regs |= func.registers()
        return frozenset(regs)

    def static_size(self) -> int:
        return sum(len(b.instructions) for f in self.functions for b in f.blocks)

    def count(self, predicate) -> int:
        return sum(
            1 for f in self.functions for _, _, inst in f.points() if predicate(inst)
        )

    def fresh_register_allocator(self):
        """Generador de registros virtuales nuevos, por encima del máximo usado"""
        used = [reg_index(r) for r in self.registers() if VIRTUAL_RE.match(r)]
        counter = (max(used) + 1) if used else 1
        while True:
            yield f'r{counter}'
            counter += 1


def mark_origins(program: Program) -> Program:
    """Anota en cada instrucción su posición actual"""
    def mark(function: Function) -> Function:
        return function.with_blocks(
            Block(blk.label, tuple(replace(inst, origin=(blk.label, idx)) for idx, inst in enumerate(blk.instructions)))
            for blk in function.blocks
        )
    return program.map_functions(mark)
