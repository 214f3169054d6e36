from django.conf import settings
from django.test import SimpleTestCase

from apps.ir.generator import random_program
from apps.ir.interpreter import interpret
from apps.ir.parser import parse_ir
from apps.checkpointing.tests.test_recovery import compile_checkpoints
from apps.regalloc.allocator import allocate
from apps.scheduler.schedule import independent, is_filler, schedule

LOAD_THEN_CKPT = """
r1 = li 4096
r6 = ld [r1+0]
ckpt r6
r2 = li 5
r3 = add r2, 1
st [r1+8], r3
ret
"""


def listing(program, label='Lentry'):
    return [str(i) for i in program.main.block(label).instructions]


class ScheduleTests(SimpleTestCase):

    def test_independent_work_is_hoisted_over_checkpoint(self):
        scheduled, report = schedule(parse_ir(LOAD_THEN_CKPT), issue_width=2)
        self.assertEqual(listing(scheduled), [
            'r1 = li 4096',
            'r6 = ld [r1+0]',
            'r2 = li 5',
            'r3 = add r2, 1',
            'ckpt r6',
            'st [r1+8], r3',
            'ret',
        ])
        self.assertEqual(report.hoisted, 2)
        self.assertEqual(report.distances, [('main', 'r6', 1, 3)])

    def test_hoisting_stops_at_latency(self):
        program = parse_ir(LOAD_THEN_CKPT)
        scheduled, report = schedule(program, latencies={'load': 1}, issue_width=1)
        self.assertEqual(report.hoisted, 0)
        self.assertEqual(listing(scheduled), listing(program))

    def test_dependent_instruction_stays(self):
        program = parse_ir(
            'r1 = li 4096\nr6 = ld [r1+0]\nckpt r6\nr6 = add r6, 1\nst [r1+8], r6\nret\n'
        )
        scheduled, report = schedule(program)
        self.assertEqual(report.hoisted, 0)
        self.assertEqual(listing(scheduled), listing(program))

    def test_reader_of_the_producer_is_not_hoisted(self):
        program = parse_ir(
            'r1 = li 3\n'
            'r2 = mul r1, 3\n'
            'ckpt r2\n'
            'r7 = add r2, 1\n'
            'r5 = shl r1, 1\n'
            'st [4096], r7\n'
            'st [4104], r5\n'
            'ret\n'
        )
        scheduled, report = schedule(program, issue_width=2)
        self.assertEqual(listing(scheduled), [
            'r1 = li 3',
            'r2 = mul r1, 3',
            'r5 = shl r1, 1',
            'ckpt r2',
            'r7 = add r2, 1',
            'st [4096], r7',
            'st [4104], r5',
            'ret',
        ])
        self.assertEqual(report.hoisted, 1)
        self.assertEqual(interpret(scheduled).program_memory(), interpret(program).program_memory())

    def test_region_boundary_is_a_barrier(self):
        program = parse_ir('r1 = li 4096\nr6 = ld [r1+0]\nckpt r6\nrb\nr2 = li 5\nst [r1+8], r2\nret\n')
        scheduled, report = schedule(program)
        self.assertEqual(report.hoisted, 0)
        self.assertEqual(listing(scheduled), listing(program))

    def test_memory_operations_never_move(self):
        program = parse_ir(
            'r1 = li 4096\n'
            'r6 = ld [r1+0]\n'
            'ckpt r6\n'
            'r7 = ld [r1+8]\n'
            'ckpt r7\n'
            'r2 = li 5\n'
            'r3 = li 6\n'
            'st [r1+16], r2\n'
            'st [r1+24], r3\n'
            'ret\n'
        )
        scheduled, _ = schedule(program)
        self.assertEqual(listing(scheduled), [
            'r1 = li 4096',
            'r6 = ld [r1+0]',
            'r2 = li 5',
            'r3 = li 6',
            'ckpt r6',
            'r7 = ld [r1+8]',
            'ckpt r7',
            'st [r1+16], r2',
            'st [r1+24], r3',
            'ret',
        ])

    def test_filler_classification(self):
        add, load, ckpt = parse_ir('r2 = add r1, 1\nr3 = ld [r2+0]\nckpt r4\nret\n').main.entry.instructions[:3]
        self.assertTrue(is_filler(add))
        self.assertFalse(is_filler(load))
        self.assertFalse(independent(load, [add]))
        self.assertTrue(independent(add, [ckpt]))


class SchedulePropertyTests(SimpleTestCase):

    def test_compiled_programs_keep_semantics_and_memory_order(self):
        for seed in range(settings.TEST_RANDOM_PROGRAMS):
            with self.subTest(seed=seed):
                compiled, _ = compile_checkpoints(random_program(seed))
                allocated, _ = allocate(compiled, k=8)
                scheduled, _ = schedule(allocated)
                before = interpret(allocated, trace_memory=True)
                after = interpret(scheduled, trace_memory=True)
                self.assertEqual(after.memory_trace, before.memory_trace)
                self.assertEqual(after.program_memory(), before.program_memory())
                self.assertEqual(after.checkpoint_stores, before.checkpoint_stores)
