from django.test import SimpleTestCase

from apps.ir.instructions import mark_origins
from apps.ir.parser import parse_ir
from apps.regionizer.capacity import first_overflow, function_overflow, max_region_entries
from apps.regionizer.partition import partition

CROWDED = (
    'r1 = li 4096\n'
    'ckpt r1\n'
    'r2 = li 1\n'
    'st [r1+0], r2\n'
    'st [r1+8], r2\n'
    'rb\n'
    'st [r1+16], r2\n'
    'ret\n'
)

BRANCHY = (
    'Lentry:\n'
    '  r1 = li 4096\n'
    '  r2 = slt r1, 5\n'
    '  br r2, La, Lb\n'
    'La:\n'
    '  st [r1+0], r1\n'
    '  st [r1+8], r1\n'
    '  jmp Lj\n'
    'Lb:\n'
    '  st [r1+16], r1\n'
    '  jmp Lj\n'
    'Lj:\n'
    '  st [r1+24], r1\n'
    '  ret\n'
)


class RegionCapacityTests(SimpleTestCase):

    def test_overflow_path_starts_at_the_region_start(self):
        overflow = function_overflow(parse_ir(CROWDED).main, 2)
        self.assertEqual(overflow.entries, 3)
        self.assertEqual(overflow.path, tuple(('Lentry', i) for i in range(5)))

    def test_capacity_that_fits_has_no_overflow(self):
        program = parse_ir(CROWDED)
        self.assertIsNone(first_overflow(program, 3))
        self.assertEqual(max_region_entries(program), 3)

    def test_heaviest_branch_is_followed(self):
        overflow = function_overflow(parse_ir(BRANCHY).main, 2)
        self.assertEqual(overflow.entries, 3)
        self.assertEqual([label for label, _ in overflow.path], ['Lentry'] * 3 + ['La'] * 3 + ['Lj'])
        self.assertEqual(max_region_entries(parse_ir(BRANCHY)), 3)

    def test_split_point_is_the_last_origin_after_an_entry(self):
        program = mark_origins(parse_ir(CROWDED))
        overflow = function_overflow(program.main, 2)
        self.assertEqual(overflow.split_point(program.main), ('Lentry', 4))

    def test_untagged_program_has_no_split_point(self):
        program = parse_ir(CROWDED)
        self.assertIsNone(function_overflow(program.main, 2).split_point(program.main))

    def test_forced_boundary_lands_before_the_origin(self):
        program = parse_ir('r1 = li 4096\nst [r1+0], r1\nr2 = add r1, 8\nst [r2+0], r1\nret\n')
        partitioned, _ = partition(program, 8, {'main': {('Lentry', 2)}})
        opcodes = [inst.opcode.value for inst in partitioned.main.entry.instructions]
        self.assertEqual(opcodes, ['li', 'st', 'rb', 'add', 'st', 'ret'])

    def test_origins_do_not_change_equality(self):
        program = parse_ir(CROWDED)
        marked = mark_origins(program)
        self.assertEqual(marked, program)
        self.assertEqual(marked.main.entry.instructions[3].origin, ('Lentry', 3))
