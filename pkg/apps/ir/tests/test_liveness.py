from django.test import SimpleTestCase

from apps.ir.cfg import ControlFlowGraph
from apps.ir.generator import random_program
from apps.ir.liveness import liveness
from apps.ir.parser import parse_ir
from apps.ir.reaching import ENTRY_DEF, ReachingDefinitions


def live_by_paths(function, label, idx, reg):
    """Oráculo: ¿existe un camino acíclico desde (label, idx) hasta un uso de reg sin redefinición?"""
    cfg = ControlFlowGraph(function)

    def search(current, start, seen):
        for inst in function.block(current).instructions[start:]:
            if reg in inst.uses:
                return True
            if reg in inst.defs:
                return False
        for succ in cfg.successors[current]:
            if succ not in seen and search(succ, 0, seen | {succ}):
                return True
        return False

    return search(label, idx, frozenset())


class LivenessTests(SimpleTestCase):

    def test_single_block(self):
        program = parse_ir('r1 = li 5\nst [r2+0], r1\nret\n')
        result = liveness(program)
        self.assertEqual(result.function_live_in['main'], frozenset({'r2'}))

    def test_boundary_between_definitions_keeps_both_live_out(self):
        program = parse_ir(
            'r2 = li 1\n'
            'rb\n'
            'r2 = add r2, 1\n'
            'rb\n'
            'st [r3+0], r2\n'
            'ret\n'
        )
        result = liveness(program)
        sets = result.region_sets(program)
        self.assertIn('r2', sets[('main', ('Lentry', 0))][1])
        self.assertIn('r2', sets[('main', ('Lentry', 2))][1])
        self.assertEqual(sets[('main', ('Lentry', 4))][0], frozenset({'r2', 'r3'}))

    def test_overwritten_definition_is_not_live(self):
        program = parse_ir(
            'r2 = li 1\n'
            'r5 = add r2, 0\n'
            'r2 = li 2\n'
            'rb\n'
            'st [r3+0], r2\n'
            'st [r3+8], r5\n'
            'ret\n'
        )
        result = liveness(program)
        self.assertIn('r2', result.live_after('main', 'Lentry', 0))
        self.assertNotIn('r2', result.live_after('main', 'Lentry', 1))
        self.assertIn('r2', result.region_live_out(program, 'main', ('Lentry', 0)))

    def test_loop_carries_liveness_around_back_edge(self):
        program = parse_ir(
            'r1 = li 0\n'
            'r3 = li 4\n'
            'jmp Lhead\n'
            'Lhead:\n'
            'r4 = slt r1, r3\n'
            'br r4, Lbody, Lexit\n'
            'Lbody:\n'
            'r1 = add r1, 1\n'
            'jmp Lhead\n'
            'Lexit:\n'
            'ret\n'
        )
        result = liveness(program)
        self.assertEqual(result.live_in[('main', 'Lbody')], frozenset({'r1', 'r3'}))
        self.assertEqual(result.live_in[('main', 'Lexit')], frozenset())

    def test_call_uses_callee_live_in_and_return_uses_caller_continuation(self):
        program = parse_ir(
            '.func main\n'
            'r1 = li 7\n'
            'r9 = li 64\n'
            'call f\n'
            'st [r9+0], r2\n'
            'ret\n'
            '.func f\n'
            'r2 = add r1, 1\n'
            'ret\n'
        )
        result = liveness(program)
        self.assertEqual(result.function_live_in['f'], frozenset({'r1', 'r9'}))
        self.assertIn('r1', result.live_before('main', 'Lentry', 2))
        self.assertIn('r2', result.live_after('f', 'Lentry', 0))

    def test_agrees_with_path_enumeration_oracle(self):
        checked = 0
        for seed in range(120):
            program = random_program(seed)
            function = program.main
            if len(function.blocks) > 8:
                continue
            checked += 1
            result = liveness(program)
            registers = function.registers()
            for label, idx, _ in function.points():
                expected = frozenset(
                    r for r in registers if live_by_paths(function, label, idx, r)
                )
                self.assertEqual(
                    result.live_before('main', label, idx), expected,
                    f'semilla {seed}, punto {label}:{idx}',
                )
        self.assertGreater(checked, 10)


class ReachingDefinitionsTests(SimpleTestCase):

    def test_both_arms_reach_join(self):
        program = parse_ir(
            'r3 = li 1\n'
            'br r3, La, Lb\n'
            'La:\n'
            'r1 = li 2\n'
            'jmp Lj\n'
            'Lb:\n'
            'r1 = li 3\n'
            'jmp Lj\n'
            'Lj:\n'
            'st [r1+0], r3\n'
            'ret\n'
        )
        reaching = ReachingDefinitions(program, program.main)
        self.assertEqual(reaching.reaching('r1', 'Lj', 0), frozenset({('La', 0), ('Lb', 0)}))
        self.assertEqual(reaching.reaching('r3', 'Lj', 0), frozenset({('Lentry', 0)}))

    def test_undefined_register_reaches_from_entry(self):
        program = parse_ir('st [r2+0], r2\nret\n')
        reaching = ReachingDefinitions(program, program.main)
        self.assertEqual(reaching.reaching('r2', 'Lentry', 0), frozenset({(ENTRY_DEF, -1)}))
