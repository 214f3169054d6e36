"""
Impresión canónica del IR (inversa de parse_ir)
"""
from .instructions import BINOPS, Instruction, Opcode, Program, WORD


def _address(inst: Instruction) -> str:
    if inst.base is None:
        return f'[{inst.imm}]'
    offset = inst.imm or 0
    sign = '-' if offset < 0 else '+'
    return f'[{inst.base}{sign}{abs(offset)}]'


def format_instruction(inst: Instruction) -> str:
    op = inst.opcode
    if op in BINOPS:
        second = inst.srcs[1] if len(inst.srcs) == 2 else str(inst.imm)
        return f'{inst.dst} = {op.value} {inst.srcs[0]}, {second}'
    if op is Opcode.MOV:
        return f'{inst.dst} = mov {inst.srcs[0]}'
    if op is Opcode.LI:
        return f'{inst.dst} = li {inst.imm}'
    if op is Opcode.LD:
        return f'{inst.dst} = ld {_address(inst)}'
    if op is Opcode.ST:
        return f'st {_address(inst)}, {inst.srcs[0]}'
    if op is Opcode.BR:
        return f'br {inst.srcs[0]}, {inst.labels[0]}, {inst.labels[1]}'
    if op is Opcode.JMP:
        return f'jmp {inst.labels[0]}'
    if op is Opcode.CALL:
        return f'call {inst.callee}'
    if op is Opcode.CKPT:
        return f'ckpt {inst.srcs[0]}'
    if op is Opcode.RST:
        return f'rst {inst.dst}'
    return op.value


def _data_lines(data):
    runs = []
    for address, value in data:
        if runs and runs[-1][0] + WORD * len(runs[-1][1]) == address:
            runs[-1][1].append(value)
        else:
            runs.append((address, [value]))
    for address, values in runs:
        yield '.word ' + ' '.join([str(address)] + [str(v) for v in values])


def print_ir(program: Program) -> str:
    lines = list(_data_lines(program.data))
    for func in program.functions:
        lines.append(f'.func {func.name}')
        for block in func.blocks:
            lines.append(f'{block.label}:')
            for inst in block.instructions:
                lines.append(f'  {format_instruction(inst)}')
    return '\n'.join(lines) + '\n'
