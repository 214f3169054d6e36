from django.test import SimpleTestCase

from apps.common.exceptions import IrreducibleCFG
from apps.ir.loops import find_loops
from apps.ir.parser import parse_ir

POINTER_LOOP = """
  r1 = li 0
  r2 = li 4096
  r3 = li 10
  jmp Lhead
Lhead:
  r4 = slt r1, r3
  br r4, Lbody, Lexit
Lbody:
  r5 = ld [r2+0]
  r5 = add r5, 1
  st [r2+0], r5
  r1 = add r1, 1
  r2 = {update}
  jmp Lhead
Lexit:
  ret
"""

NESTED = """
  r1 = li 0
  r9 = li 3
  jmp Louter
Louter:
  r4 = slt r1, r9
  br r4, Lpre, Lexit
Lpre:
  r2 = li 0
  jmp Linner
Linner:
  r5 = slt r2, r9
  br r5, Libody, Llatch
Libody:
  r6 = mul r2, 8
  r2 = add r2, 1
  jmp Linner
Llatch:
  r1 = add r1, 1
  jmp Louter
Lexit:
  ret
"""


class FindLoopsTests(SimpleTestCase):

    def test_pointer_and_index_are_basic_ivs(self):
        info = find_loops(parse_ir(POINTER_LOOP.format(update='add r2, 4')))['main']
        self.assertEqual(len(info.loops), 1)
        loop = info.loops[0]
        self.assertEqual(loop.header, 'Lhead')
        self.assertEqual(loop.body, frozenset({'Lhead', 'Lbody'}))
        self.assertEqual(loop.preheader, 'Lentry')
        self.assertEqual(loop.exits, frozenset({'Lexit'}))
        self.assertEqual({(iv.register, iv.step) for iv in loop.basic_ivs}, {('r1', 1), ('r2', 4)})
        self.assertEqual(loop.iv('r2').init_value, 4096)
        self.assertEqual(loop.iv('r1').init_value, 0)

    def test_register_updated_twice_is_not_an_iv(self):
        loop = find_loops(parse_ir(POINTER_LOOP.format(update='add r2, 4')))['main'].loops[0]
        self.assertIsNone(loop.iv('r5'))

    def test_non_affine_update_is_not_an_iv(self):
        loop = find_loops(parse_ir(POINTER_LOOP.format(update='mul r2, 2')))['main'].loops[0]
        self.assertEqual({iv.register for iv in loop.basic_ivs}, {'r1'})

    def test_nested_loops(self):
        info = find_loops(parse_ir(NESTED))['main']
        outer, inner = info.loop('Louter'), info.loop('Linner')
        self.assertEqual(inner.parent, 'Louter')
        self.assertIsNone(outer.parent)
        self.assertTrue(inner.body < outer.body)
        self.assertEqual((outer.depth, inner.depth), (1, 2))
        self.assertEqual({iv.register for iv in outer.basic_ivs}, {'r1'})
        self.assertEqual({iv.register for iv in inner.basic_ivs}, {'r2'})
        self.assertEqual([(iv.register, iv.base, iv.scale) for iv in inner.induced_ivs], [('r6', 'r2', 8)])
        self.assertEqual([lp.header for lp in info.innermost_first()], ['Linner', 'Louter'])
        self.assertEqual(info.depth['Libody'], 2)

    def test_irreducible_cfg_is_skipped_with_diagnostic(self):
        program = parse_ir(
            'r1 = li 1\n'
            'br r1, La, Lb\n'
            'La:\n'
            'jmp Lb\n'
            'Lb:\n'
            'br r1, La, Lexit\n'
            'Lexit:\n'
            'ret\n'
        )
        with self.assertLogs('apps.ir.loops', level='WARNING'):
            info = find_loops(program)
        self.assertTrue(info['main'].irreducible)
        self.assertEqual(info['main'].loops, ())
        with self.assertRaises(IrreducibleCFG):
            info.require_reducible('main')
