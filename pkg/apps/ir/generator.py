"""
Generador de programas aleatorios estructurados (semilla fija) para las pruebas de propiedades
"""
import random
from typing import List

from .instructions import Program
from .parser import parse_ir

DATA_BASE = 4096
DATA_WORDS = 8
VALUE_REGS = ('r1', 'r2', 'r3', 'r4', 'r5', 'r6')
BASE_REG = 'r10'
ALU_OPS = ('add', 'sub', 'mul', 'and', 'or', 'xor', 'shl', 'shr', 'slt', 'sle', 'seq', 'sne')


class _Emitter:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.lines: List[str] = []
        self.labels = 0

    def label(self, stem):
        self.labels += 1
        return f'L{stem}{self.labels}'

    def emit(self, line):
        self.lines.append(line)

    def reg(self):
        return self.rng.choice(VALUE_REGS)

    def slot(self):
        return 8 * self.rng.randrange(DATA_WORDS)

    def straight(self, count):
        for _ in range(count):
            kind = self.rng.random()
            if kind < 0.45:
                op = self.rng.choice(ALU_OPS)
                second = self.reg() if self.rng.random() < 0.5 else str(self.rng.randint(-16, 16))
                self.emit(f'{self.reg()} = {op} {self.reg()}, {second}')
            elif kind < 0.55:
                self.emit(f'{self.reg()} = li {self.rng.randint(-100, 100)}')
            elif kind < 0.65:
                self.emit(f'{self.reg()} = mov {self.reg()}')
            elif kind < 0.8:
                self.emit(f'{self.reg()} = ld [{BASE_REG}+{self.slot()}]')
            else:
                self.emit(f'st [{BASE_REG}+{self.slot()}], {self.reg()}')

    def diamond(self, depth):
        then, other, join = self.label('then'), self.label('else'), self.label('join')
        cond = self.reg()
        self.emit(f'{cond} = slt {self.reg()}, {self.reg()}')
        self.emit(f'br {cond}, {then}, {other}')
        self.emit(f'{then}:')
        self.body(depth + 1, self.rng.randint(1, 3))
        self.emit(f'jmp {join}')
        self.emit(f'{other}:')
        self.body(depth + 1, self.rng.randint(1, 3))
        self.emit(f'jmp {join}')
        self.emit(f'{join}:')

    def loop(self, depth):
        counter = f'r{20 + depth}'
        limit = f'r{30 + depth}'
        cond = f'r{40 + depth}'
        head, body, done = self.label('head'), self.label('body'), self.label('exit')
        self.emit(f'{counter} = li 0')
        self.emit(f'{limit} = li {self.rng.randint(1, 5)}')
        self.emit(f'jmp {head}')
        self.emit(f'{head}:')
        self.emit(f'{cond} = slt {counter}, {limit}')
        self.emit(f'br {cond}, {body}, {done}')
        self.emit(f'{body}:')
        self.body(depth + 1, self.rng.randint(1, 3))
        self.emit(f'{counter} = add {counter}, 1')
        self.emit(f'jmp {head}')
        self.emit(f'{done}:')

    def body(self, depth, pieces):
        for _ in range(pieces):
            choice = self.rng.random()
            if depth < 2 and choice < 0.25:
                self.diamond(depth)
            elif depth < 2 and choice < 0.45:
                self.loop(depth)
            else:
                self.straight(self.rng.randint(1, 4))


def _prologue(emitter: _Emitter):
    rng = emitter.rng
    values = ' '.join(str(rng.randint(-50, 50)) for _ in range(DATA_WORDS))
    emitter.emit(f'.word {DATA_BASE} {values}')
    emitter.emit('.func main')
    emitter.emit(f'{BASE_REG} = li {DATA_BASE}')
    for reg in VALUE_REGS:
        emitter.emit(f'{reg} = li {rng.randint(-20, 20)}')


def _epilogue(emitter: _Emitter):
    # los valores finales de los registros quedan visibles en memoria
    for offset, reg in enumerate(VALUE_REGS):
        emitter.emit(f'st [{BASE_REG}+{8 * (DATA_WORDS + offset)}], {reg}')
    emitter.emit('ret')


def random_program_text(seed: int) -> str:
    emitter = _Emitter(random.Random(seed))
    _prologue(emitter)
    emitter.body(0, emitter.rng.randint(2, 5))
    _epilogue(emitter)
    return '\n'.join(emitter.lines) + '\n'


def random_program(seed: int) -> Program:
    """Programa con secuencias, diamantes y bucles contados, anidados hasta dos niveles"""
    return parse_ir(random_program_text(seed))


def random_counted_loop_text(seed: int) -> str:
    """
    Bucle contado con varias variables de inducción (índice y punteros)
    cuyos pasos son a veces múltiplos del paso del índice y a veces no.
    """
    rng = random.Random(seed)
    emitter = _Emitter(rng)
    _prologue(emitter)
    step = rng.choice((1, 2))
    trips = rng.randint(1, 6)
    emitter.emit('r20 = li 0')
    emitter.emit(f'r30 = li {trips * step}')
    pointers = []
    for n in range(rng.randint(1, 3)):
        reg = f'r{50 + n}'
        pstep = rng.choice((step * 8, step * 16, step * 3, 8 * rng.randint(1, 2)))
        emitter.emit(f'{reg} = li {DATA_BASE + 8 * DATA_WORDS * (2 + 8 * n)}')
        pointers.append((reg, pstep))
    emitter.emit('jmp Lhead')
    emitter.emit('Lhead:')
    emitter.emit('r40 = slt r20, r30')
    emitter.emit('br r40, Lbody, Lexit')
    emitter.emit('Lbody:')
    for reg, pstep in pointers:
        if rng.random() < 0.5:
            emitter.emit(f'st [{reg}+0], {emitter.reg()}')
            emitter.straight(rng.randint(0, 2))
            emitter.emit(f'{reg} = add {reg}, {pstep}')
        else:
            emitter.emit(f'{reg} = add {reg}, {pstep}')
            emitter.emit(f'{emitter.reg()} = add {emitter.reg()}, r20')
            emitter.emit(f'st [{reg}+0], {emitter.reg()}')
    emitter.emit(f'r20 = add r20, {step}')
    emitter.emit('jmp Lhead')
    emitter.emit('Lexit:')
    _epilogue(emitter)
    return '\n'.join(emitter.lines) + '\n'


def random_counted_loop_program(seed: int) -> Program:
    return parse_ir(random_counted_loop_text(seed))
