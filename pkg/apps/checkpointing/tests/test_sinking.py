from django.test import SimpleTestCase

from apps.ir.interpreter import interpret
from apps.ir.parser import parse_ir
from apps.checkpointing.eager import insert_eager_checkpoints
from apps.checkpointing.plan import CheckpointPlan, PlannedCheckpoint
from apps.checkpointing.sinking import sink_checkpoints

LOOP_INVARIANT = """
  r2 = li 4
  r3 = li 0
  jmp Lhead
Lhead:
  r1 = add r2, 5
  r3 = add r3, 1
  r4 = slt r3, r2
  br r4, Lhead, Lexit
Lexit:
  r6 = li 1
  rb
  st [r8+64], r1
  ret
"""


def kinds(block):
    return [inst.opcode.value for inst in block.instructions]


class SinkingTests(SimpleTestCase):

    def test_checkpoint_leaves_loop_towards_boundary(self):
        program, plan = insert_eager_checkpoints(parse_ir(LOOP_INVARIANT))
        self.assertEqual(kinds(program.main.block('Lhead')), ['add', 'ckpt', 'add', 'slt', 'br'])

        sunk, plan = sink_checkpoints(program, plan)
        self.assertEqual(kinds(sunk.main.block('Lhead')), ['add', 'add', 'slt', 'br'])
        self.assertEqual(kinds(sunk.main.block('Lexit')), ['li', 'ckpt', 'rb', 'st', 'ret'])
        self.assertEqual(plan.sunk, 1)
        self.assertEqual([c.triple() for c in plan.checkpoints], [('r1', ('Lhead', 0), ('Lexit', 1))])
        self.assertEqual(interpret(program).checkpoint_stores, 4)
        self.assertEqual(interpret(sunk).checkpoint_stores, 1)
        self.assertEqual(interpret(sunk).program_memory(), interpret(program).program_memory())

    def test_diamond_arm_does_not_cross_join(self):
        program, plan = insert_eager_checkpoints(parse_ir(
            '  r2 = ld [r8+0]\n'
            '  br r2, La, Lb\n'
            'La:\n'
            '  r1 = li 1\n'
            '  jmp Lj\n'
            'Lb:\n'
            '  r1 = li 2\n'
            '  jmp Lj\n'
            'Lj:\n'
            '  rb\n'
            '  st [r8+8], r1\n'
            '  ret\n'
        ))
        sunk, plan = sink_checkpoints(program, plan)
        self.assertEqual(kinds(sunk.main.block('La')), ['li', 'ckpt', 'jmp'])
        self.assertEqual(kinds(sunk.main.block('Lb')), ['li', 'ckpt', 'jmp'])
        self.assertEqual(kinds(sunk.main.block('Lj')), ['rb', 'st', 'ret'])
        self.assertEqual(plan.sunk, 0)

    def test_checkpoint_stops_at_call(self):
        program = parse_ir(
            '.func main\n'
            'r1 = li 5\n'
            'ckpt r1\n'
            'call f\n'
            'rb\n'
            'st [r8+0], r1\n'
            'ret\n'
            '.func f\n'
            'ret\n'
        )
        sunk, plan = sink_checkpoints(program, CheckpointPlan())
        self.assertEqual(kinds(sunk.main.entry), ['li', 'ckpt', 'call', 'rb', 'st', 'ret'])
        self.assertEqual(plan.sunk, 0)

    def test_redundant_checkpoint_is_removed(self):
        program = parse_ir(
            'r1 = li 5\n'
            'ckpt r1\n'
            'r2 = li 6\n'
            'ckpt r1\n'
            'rb\n'
            'st [r8+0], r1\n'
            'ret\n'
        )
        sunk, plan = sink_checkpoints(program, CheckpointPlan())
        self.assertEqual(kinds(sunk.main.entry), ['li', 'li', 'ckpt', 'rb', 'st', 'ret'])
        self.assertEqual(plan.deduplicated, 1)
        self.assertEqual(plan.sunk, 0)

    def test_move_within_the_same_loop_depth_is_undone(self):
        program = parse_ir(
            'r1 = li 5\n'
            'ckpt r1\n'
            'r2 = li 6\n'
            'r3 = add r2, 1\n'
            'rb\n'
            'st [r8+0], r1\n'
            'st [r8+8], r3\n'
            'ret\n'
        )
        sunk, plan = sink_checkpoints(program, CheckpointPlan())
        self.assertEqual(sunk, program)
        self.assertEqual(plan.sunk, 0)
        self.assertEqual([c.triple() for c in plan.checkpoints], [('r1', ('Lentry', 0), ('Lentry', 1))])

    def test_removed_checkpoint_hands_its_regions_over(self):
        program = parse_ir(
            'r1 = li 5\n'
            'ckpt r1\n'
            'r2 = li 6\n'
            'ckpt r1\n'
            'rb\n'
            'st [r8+0], r1\n'
            'ret\n'
        )
        plan = CheckpointPlan(eager=2, checkpoints=(
            PlannedCheckpoint('main', 'r1', ('Lentry', 0), ('Lentry', 1), (1,)),
            PlannedCheckpoint('main', 'r1', ('Lentry', 0), ('Lentry', 3), (2,)),
        ))
        _, plan = sink_checkpoints(program, plan)
        self.assertEqual(plan.checkpoints, (PlannedCheckpoint('main', 'r1', ('Lentry', 0), ('Lentry', 2), (1, 2)),))
        self.assertEqual(plan.for_region(2), (('r1', ('Lentry', 0), ('Lentry', 2)),))
