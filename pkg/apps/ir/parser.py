"""
Parser del formato textual del IR
"""
import re
from typing import Dict, List, Optional, Tuple

from apps.common.exceptions import IRSyntaxError, RegisterArityError, UndefinedLabel

from .instructions import BINOPS, Block, Function, Instruction, Opcode, Program, WORD, wrap

REG_RE = re.compile(r'^[rp]\d+$')
LABEL_RE = re.compile(r'^[A-Za-z_][\w.]*$')
ADDR_RE = re.compile(r'^\[\s*(?:(?P<base>[rp]\d+)\s*(?:(?P<sign>[+-])\s*(?P<off>\w+))?|(?P<abs>-?\w+))\s*\]$')

ENTRY_LABEL = 'Lentry'


class _Line:
    """Una línea ya sin comentario, con su número y el texto original"""

    def __init__(self, number, text, raw):
        self.number = number
        self.text = text
        self.raw = raw

    def column_of(self, token):
        pos = self.raw.find(token)
        return pos + 1 if pos >= 0 else 1

    def error(self, message, token=None, cls=IRSyntaxError):
        column = self.column_of(token) if token else 1
        return cls(message, self.number, column)


def _parse_int(line, token):
    try:
        return int(token, 0)
    except ValueError:
        raise line.error(f'inmediato inválido "{token}"', token)


def _parse_reg(line, token):
    if not REG_RE.match(token):
        raise line.error(f'se esperaba un registro y se encontró "{token}"', token)
    return token


def _split_operands(text):
    return [t.strip() for t in text.split(',')] if text.strip() else []


def _parse_address(line, token) -> Tuple[Optional[str], int]:
    match = ADDR_RE.match(token)
    if not match:
        raise line.error(f'dirección inválida "{token}"', token)
    if match.group('base'):
        offset = _parse_int(line, match.group('off')) if match.group('off') else 0
        if match.group('sign') == '-':
            offset = -offset
        return match.group('base'), offset
    return None, _parse_int(line, match.group('abs'))


def _expect_arity(line, opcode, operands, count):
    if len(operands) != count:
        raise line.error(
            f'{opcode.value} espera {count} operandos y recibió {len(operands)}',
            opcode.value, cls=RegisterArityError,
        )


def _parse_assignment(line, dst_token, rhs) -> Instruction:
    dst = _parse_reg(line, dst_token)
    parts = rhs.split(None, 1)
    if not parts:
        raise line.error('falta el opcode tras "="')
    try:
        opcode = Opcode(parts[0])
    except ValueError:
        raise line.error(f'opcode desconocido "{parts[0]}"', parts[0])
    rest = parts[1] if len(parts) > 1 else ''

    if opcode in BINOPS:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 2)
        src = _parse_reg(line, operands[0])
        if REG_RE.match(operands[1]):
            return Instruction(opcode, dst=dst, srcs=(src, operands[1]))
        return Instruction(opcode, dst=dst, srcs=(src,), imm=wrap(_parse_int(line, operands[1])))
    if opcode is Opcode.MOV:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, dst=dst, srcs=(_parse_reg(line, operands[0]),))
    if opcode is Opcode.LI:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, dst=dst, imm=wrap(_parse_int(line, operands[0])))
    if opcode is Opcode.LD:
        base, offset = _parse_address(line, rest.strip())
        return Instruction(opcode, dst=dst, base=base, imm=offset)
    raise line.error(f'{opcode.value} no produce un registro', opcode.value, cls=RegisterArityError)


def _parse_statement(line) -> Instruction:
    text = line.text
    if '=' in text:
        dst_token, rhs = text.split('=', 1)
        return _parse_assignment(line, dst_token.strip(), rhs.strip())

    parts = text.split(None, 1)
    try:
        opcode = Opcode(parts[0])
    except ValueError:
        raise line.error(f'opcode desconocido "{parts[0]}"', parts[0])
    rest = parts[1].strip() if len(parts) > 1 else ''

    if opcode is Opcode.ST:
        close = rest.find(']')
        if close < 0:
            raise line.error('st espera "[dir], registro"', 'st')
        base, offset = _parse_address(line, rest[:close + 1])
        operands = _split_operands(rest[close + 1:].lstrip(','))
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, srcs=(_parse_reg(line, operands[0]),), base=base, imm=offset)
    if opcode is Opcode.BR:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 3)
        for label in operands[1:]:
            if not LABEL_RE.match(label):
                raise line.error(f'etiqueta inválida "{label}"', label)
        return Instruction(opcode, srcs=(_parse_reg(line, operands[0]),), labels=tuple(operands[1:]))
    if opcode is Opcode.JMP:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, labels=(operands[0],))
    if opcode is Opcode.CALL:
        if not LABEL_RE.match(rest):
            raise line.error(f'nombre de función inválido "{rest}"', rest or 'call')
        return Instruction(opcode, callee=rest)
    if opcode in (Opcode.RET, Opcode.RB):
        _expect_arity(line, opcode, _split_operands(rest), 0)
        return Instruction(opcode)
    if opcode is Opcode.CKPT:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, srcs=(_parse_reg(line, operands[0]),))
    if opcode is Opcode.RST:
        operands = _split_operands(rest)
        _expect_arity(line, opcode, operands, 1)
        return Instruction(opcode, dst=_parse_reg(line, operands[0]))
    raise line.error(f'{opcode.value} necesita un registro destino', opcode.value, cls=RegisterArityError)


class _FunctionBuilder:
    def __init__(self, name, line):
        self.name = name
        self.line = line
        self.blocks: List[Tuple[str, List[Instruction], _Line]] = []
        self.targets: List[Tuple[str, _Line]] = []
        self.calls: List[Tuple[str, _Line]] = []

    def open_block(self, label, line):
        if any(label == b[0] for b in self.blocks):
            raise line.error(f'etiqueta duplicada "{label}"', label)
        if self.blocks and not self._terminated(self.blocks[-1][1]):
            self.blocks[-1][1].append(Instruction(Opcode.JMP, labels=(label,)))
        self.blocks.append((label, [], line))

    @staticmethod
    def _terminated(instructions):
        return bool(instructions) and instructions[-1].opcode.is_terminator

    def add(self, inst, line):
        if not self.blocks:
            self.blocks.append((ENTRY_LABEL, [], line))
        current = self.blocks[-1][1]
        if self._terminated(current):
            raise line.error('instrucción inalcanzable tras un terminador')
        current.append(inst)
        for label in inst.labels:
            self.targets.append((label, line))
        if inst.callee:
            self.calls.append((inst.callee, line))

    def build(self) -> Function:
        if not self.blocks:
            raise self.line.error(f'la función {self.name} está vacía')
        label, instructions, line = self.blocks[-1]
        if not self._terminated(instructions):
            raise line.error(f'el bloque {label} no termina en br/jmp/ret')
        defined = {b[0] for b in self.blocks}
        for target, tline in self.targets:
            if target not in defined:
                raise UndefinedLabel(target, tline.number)
        return Function(self.name, tuple(Block(l, tuple(i)) for l, i, _ in self.blocks))


def parse_ir(text: str) -> Program:
    """Convierte texto IR en un Program estructuralmente válido"""
    functions: List[_FunctionBuilder] = []
    data: Dict[int, int] = {}
    current: Optional[_FunctionBuilder] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split('#', 1)[0].strip()
        if not stripped:
            continue
        line = _Line(number, stripped, raw)

        if stripped.startswith('.func'):
            parts = stripped.split()
            if len(parts) != 2 or not LABEL_RE.match(parts[1]):
                raise line.error('se esperaba ".func NOMBRE"')
            if any(f.name == parts[1] for f in functions):
                raise line.error(f'función duplicada "{parts[1]}"', parts[1])
            current = _FunctionBuilder(parts[1], line)
            functions.append(current)
            continue
        if stripped.startswith('.word'):
            tokens = stripped[len('.word'):].replace(',', ' ').split()
            if len(tokens) < 2:
                raise line.error('se esperaba ".word DIRECCIÓN V1 V2 ..."')
            address = _parse_int(line, tokens[0])
            for offset, token in enumerate(tokens[1:]):
                data[address + offset * WORD] = wrap(_parse_int(line, token))
            continue

        if current is None:
            current = _FunctionBuilder('main', line)
            functions.append(current)

        if ':' in stripped:
            label, rest = stripped.split(':', 1)
            label = label.strip()
            if not LABEL_RE.match(label):
                raise line.error(f'etiqueta inválida "{label}"', label)
            current.open_block(label, line)
            rest = rest.strip()
            if not rest:
                continue
            line = _Line(number, rest, raw)
        current.add(_parse_statement(line), line)

    if not functions:
        raise IRSyntaxError('programa vacío', 1, 1)
    built = [f.build() for f in functions]
    names = {f.name for f in built}
    if 'main' not in names:
        raise IRSyntaxError('falta la función main', 1, 1)
    for builder in functions:
        for callee, cline in builder.calls:
            if callee not in names:
                raise UndefinedLabel(callee, cline.number)
    return Program(tuple(built), tuple(sorted(data.items())))
