from django.test import SimpleTestCase

from apps.common.exceptions import HardFault, WatchdogExpired
from apps.ir.interpreter import Interpreter, interpret, run_recovery_block
from apps.ir.parser import parse_ir

VECTOR_ADD = """
.word 4096 1 2 3
.word 4160 10 20 30
  r1 = li 0
  r2 = li 3
  r3 = li 4096
  r4 = li 4160
  r5 = li 8192
  jmp Lhead
Lhead:
  r6 = slt r1, r2
  br r6, Lbody, Lexit
Lbody:
  r7 = ld [r3+0]
  r8 = ld [r4+0]
  r9 = add r7, r8
  st [r5+0], r9
  r3 = add r3, 8
  r4 = add r4, 8
  r5 = add r5, 8
  r1 = add r1, 1
  jmp Lhead
Lexit:
  ret
"""


class InterpreterTests(SimpleTestCase):

    def test_vector_add(self):
        result = interpret(parse_ir(VECTOR_ADD))
        self.assertEqual(result.memory[8192], 11)
        self.assertEqual(result.memory[8200], 22)
        self.assertEqual(result.memory[8208], 33)
        self.assertEqual(result.stores, 3)
        self.assertEqual(result.loads, 6)

    def test_wraparound_arithmetic(self):
        result = interpret(parse_ir(
            'r1 = li 0x7fffffffffffffff\nr1 = add r1, 1\nr2 = li 64\nst [r2+0], r1\nret\n'
        ))
        self.assertEqual(result.memory[64], -(1 << 63))

    def test_call_and_return(self):
        result = interpret(parse_ir(
            '.func main\nr1 = li 5\ncall twice\nr9 = li 64\nst [r9+0], r1\nret\n'
            '.func twice\nr1 = add r1, r1\nret\n'
        ))
        self.assertEqual(result.memory[64], 10)

    def test_checkpoints_and_region_hook(self):
        entries = []
        program = parse_ir('r1 = li 3\nckpt r1\nrb\nr1 = add r1, 1\nckpt r1\nrb\nret\n')
        result = Interpreter(program, on_region_entry=entries.append).run()
        self.assertEqual(result.checkpoint_stores, 2)
        self.assertEqual(result.checkpoints, {'r1': 4})
        self.assertEqual(result.regions, 3)
        self.assertEqual([e.start for e in entries], [('Lentry', 0), ('Lentry', 3), ('Lentry', 6)])
        self.assertEqual(entries[1].checkpoints, {'r1': 3})
        self.assertEqual(entries[1].registers['r1'], 3)

    def test_program_memory_hides_reserved_segments_and_zeros(self):
        result = interpret(parse_ir(
            'r1 = li 1099511627776\nr2 = li 9\nst [r1+0], r2\nr3 = li 0\nst [64], r3\nst [72], r2\nret\n'
        ))
        self.assertEqual(result.program_memory(), {72: 9})

    def test_watchdog(self):
        with self.assertRaises(WatchdogExpired):
            Interpreter(parse_ir('Lentry:\njmp Lentry\n'), max_steps=100).run()


class RecoveryBlockEvaluationTests(SimpleTestCase):

    def test_restores_and_rebuilds_through_branch(self):
        blocks = parse_ir(
            'rst r3\n'
            'br r3, La, Lb\n'
            'La:\n'
            'r1 = mov r3\n'
            'jmp Ldone\n'
            'Lb:\n'
            'r1 = li 42\n'
            'jmp Lregion\n'
            'Ldone:\n'
            'jmp Lregion\n'
            'Lregion:\n'
            'ret\n'
        ).main.blocks[:-1]
        slots = {'r3': 0}
        registers, executed = run_recovery_block(blocks, slots.__getitem__, {})
        self.assertEqual(registers, {'r3': 0, 'r1': 42})
        self.assertEqual(executed, 4)
        slots['r3'] = 7
        registers, _ = run_recovery_block(blocks, slots.__getitem__, {})
        self.assertEqual(registers['r1'], 7)

    def test_rejects_memory_operations(self):
        blocks = parse_ir('r1 = ld [r2+0]\njmp Lout\nLout:\nret\n').main.blocks[:1]
        with self.assertRaises(HardFault):
            run_recovery_block(blocks, lambda reg: 0, {})
