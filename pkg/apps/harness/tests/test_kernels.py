from django.test import SimpleTestCase

from apps.common.exceptions import ConfigurationError, InvariantViolation
from apps.harness.breakdown import CATEGORIES, store_breakdown
from apps.harness.pipeline import (
    ABLATION_CHAIN, MODES, CompileOptions, check_equivalence, compile_kernel, compile_program, get_mode,
    golden_run, kernel_names, load_kernel, read_program, run_kernel,
)
from apps.harness.reporting import check_ablation
from apps.harness.sweep import sweep
from apps.regionizer.capacity import max_region_entries

KERNELS = (
    'deltas', 'fib-iter', 'hash-mix', 'histogram', 'horner', 'matmul-16', 'pointer-chase',
    'powers', 'prefix-sum', 'saxpy', 'sort-small', 'stencil-1d', 'vadd', 'vecsum',
)


class KernelGoldenTests(SimpleTestCase):
    """Resultados del intérprete sobre los kernels sin compilar"""

    def memory(self, name):
        return golden_run(name).program_memory()

    def test_every_kernel_is_bundled(self):
        self.assertEqual(tuple(kernel_names()), KERNELS)

    def test_vecsum(self):
        self.assertEqual(self.memory('vecsum')[8192], 80)

    def test_saxpy_updates_y_in_place(self):
        memory = self.memory('saxpy')
        self.assertEqual([memory[4608 + 8 * i] for i in range(8)], [13 * (i + 1) for i in range(8)])

    def test_matmul_first_row(self):
        memory = self.memory('matmul-16')
        self.assertEqual([memory[4352 + 8 * j] for j in range(4)], [7, 14, 5, 5])

    def test_stencil(self):
        memory = self.memory('stencil-1d')
        self.assertEqual(
            [memory[4616 + 8 * i] for i in range(10)],
            [10, 7, 14, 15, 20, 15, 16, 11, 17, 15],
        )

    def test_fibonacci(self):
        memory = self.memory('fib-iter')
        self.assertEqual(memory[8192 + 8 * 19], 4181)
        self.assertEqual(memory[8352], 6765)

    def test_pointer_chase_accumulates_in_place(self):
        memory = self.memory('pointer-chase')
        self.assertEqual((memory[8192], memory[8200]), (41, 6))
        self.assertEqual(
            [memory[a] for a in (4104, 4168, 4184, 4152, 4120, 4136)],
            [7, 9, 22, 27, 30, 41],
        )

    def test_histogram(self):
        memory = self.memory('histogram')
        self.assertEqual([memory[8192 + 8 * b] for b in range(4)], [3, 6, 4, 3])

    def test_sort(self):
        memory = self.memory('sort-small')
        self.assertEqual([memory[4096 + 8 * i] for i in range(6)], [1, 2, 4, 7, 8, 9])
        self.assertEqual([memory[a] for a in (4144, 4152, 4160)], [5, 5, 10])

    def test_summary_stores(self):
        expected = {
            'vecsum': {8200: 16, 8208: 160},
            'fib-iter': {8360: 10946, 8368: 17711},
            'histogram': {8224: 16, 8232: 4224, 8240: 128},
            'matmul-16': {4480: 4, 4488: 4, 4496: 16},
            'pointer-chase': {8208: 48},
            'saxpy': {4672: 8, 4680: 3, 4688: 24},
            'stencil-1d': {4704: 11, 4712: 11, 4720: 10},
        }
        for name, values in expected.items():
            with self.subTest(kernel=name):
                memory = self.memory(name)
                self.assertEqual({a: memory.get(a, 0) for a in values}, values)

    def test_deltas(self):
        values = [3, 8, 4, 9, 15, 16, 20, 18, 25, 30, 31]
        memory = self.memory('deltas')
        self.assertEqual([memory.get(8192 + 8 * i, 0) for i in range(10)], [b - a for a, b in zip(values, values[1:])])
        self.assertEqual((memory[8272], memory[8280]), (4176, 1))

    def test_hash_mix(self):
        values = [5, 12, 7, 3, 9, 14, 2, 11]
        memory = self.memory('hash-mix')
        self.assertEqual(
            [memory[8192 + 8 * i] for i in range(8)],
            [(((x * 31 + 7) * 17) ^ x) * 13 for x in values],
        )
        self.assertEqual(memory[8256], 4160)

    def test_horner(self):
        points = [1, 2, 0, 3, 1, 2, 1, 0]
        coefficients = [1, 0, 2, 1, 0, 3, 1, 1, 0, 2, 1]
        memory = self.memory('horner')
        self.assertEqual(
            [memory[8192 + 8 * i] for i in range(8)],
            [sum(c * x ** k for k, c in enumerate(coefficients)) for x in points],
        )
        self.assertEqual([memory.get(a, 0) for a in (8256, 8264, 8272)], [0, 4160, 1])

    def test_powers(self):
        memory = self.memory('powers')
        self.assertEqual([memory[8192 + 8 * i] for i in range(10)], [3 ** (i + 1) + 2 * i + 1 for i in range(10)])
        self.assertEqual(memory[8272], 3 ** 10)

    def test_prefix_sum(self):
        values = [(i * 5 + 3) % 11 for i in range(40)]
        memory = self.memory('prefix-sum')
        self.assertEqual([memory[8192 + 8 * i] for i in range(40)], [sum(values[:i + 1]) for i in range(40)])

    def test_vadd(self):
        memory = self.memory('vadd')
        self.assertEqual([memory[8224 + 8 * i] for i in range(8)], [11 * (i + 1) for i in range(8)])
        self.assertEqual([memory[a] for a in (8288, 8296, 8304)], [8288, 64, 8])

    def test_unknown_kernel(self):
        with self.assertRaises(ConfigurationError):
            read_program('no-such-kernel')


class CompileOptionsTests(SimpleTestCase):

    def test_store_budget_below_two_is_rejected(self):
        with self.assertRaises(ConfigurationError):
            CompileOptions(sb_size=1)

    def test_register_file_floor(self):
        with self.assertRaises(ConfigurationError):
            CompileOptions(regs=3)

    def test_unknown_mode(self):
        with self.assertRaises(ConfigurationError):
            get_mode('turbo')

    def test_explicit_overrides_win_over_mode(self):
        options = get_mode('turnstile').compile_options(prune=True, sb_size=8)
        self.assertTrue(options.prune)
        self.assertFalse(options.licm_sink)
        self.assertEqual(options.sb_size, 8)

    def test_mode_sim_config_is_layered(self):
        config = get_mode('turnstile').sim_config(wcdl=30)
        self.assertEqual(config.wcdl, 30)
        self.assertFalse(config.fast_release)
        self.assertEqual(config.checkpoint_release, 'quarantine')


class PipelineTests(SimpleTestCase):

    def test_compilation_is_deterministic(self):
        for name in ('vecsum', 'matmul-16', 'sort-small'):
            with self.subTest(kernel=name):
                options = CompileOptions.from_settings()
                first = compile_program(load_kernel(name), options).to_json()
                second = compile_program(load_kernel(name), options).to_json()
                self.assertEqual(first, second)

    def test_baseline_has_no_resilience_code(self):
        artifact = compile_program(load_kernel('vecsum'), get_mode('baseline').compile_options())
        self.assertEqual(artifact.counts()['checkpoints'], 0)
        self.assertEqual(artifact.recovery, {})
        self.assertFalse(artifact.program.count(lambda i: i.is_boundary))

    def test_artifact_reports_every_stage(self):
        data = compile_program(load_kernel('saxpy'), CompileOptions.from_settings()).to_dict()
        for key in ('program', 'plan', 'regions', 'region_stats', 'allocation', 'schedule', 'merges', 'recovery'):
            self.assertIn(key, data)

    def test_equivalence_check_reports_the_diff(self):
        with self.assertRaises(InvariantViolation) as ctx:
            check_equivalence({8192: 80}, {8192: 81}, 'vecsum')
        self.assertEqual(ctx.exception.diff, {hex(8192): (80, 81)})

    def test_every_kernel_matches_the_interpreter_in_every_mode(self):
        for name in KERNELS:
            for mode in MODES:
                with self.subTest(kernel=name, mode=mode):
                    outcome = run_kernel(name, mode)
                    self.assertEqual(outcome.result.program_memory(), golden_run(name).program_memory())
                    self.assertTrue(outcome.result.report.accounted)

    def test_small_and_large_store_buffers(self):
        for name in ('vecsum', 'histogram'):
            for sb in (2, 40):
                with self.subTest(kernel=name, sb=sb):
                    outcome = run_kernel(name, 'turnpike', compile_overrides={'sb_size': sb}, sim_overrides={'sb_size': sb})
                    self.assertLessEqual(max_region_entries(outcome.artifact.program), sb)

    def test_regions_fit_in_the_store_buffer(self):
        for name in KERNELS:
            for mode in MODES:
                if mode == 'baseline':
                    continue
                for sb in (4, 8):
                    with self.subTest(kernel=name, mode=mode, sb=sb):
                        artifact = compile_kernel(name, get_mode(mode).compile_options(sb_size=sb))
                        self.assertLessEqual(max_region_entries(artifact.program), sb)

    def test_small_store_buffer_needs_more_checkpoints(self):
        for name in KERNELS:
            with self.subTest(kernel=name):
                fraction = {
                    sb: run_kernel(
                        name, 'turnstile', compile_overrides={'sb_size': sb}, sim_overrides={'sb_size': sb},
                    ).result.report.checkpoint_fraction
                    for sb in (4, 40)
                }
                self.assertGreater(fraction[4], fraction[40])

    def test_ablation_chain_never_regresses(self):
        check = check_ablation(sweep(['ablation'], KERNELS, jobs=1))
        self.assertTrue(check.passed, check.detail)

    def test_turnpike_never_quarantines_more_than_turnstile(self):
        turnstile = run_kernel('saxpy', 'turnstile').result.report
        turnpike = run_kernel('saxpy', 'turnpike').result.report
        self.assertEqual(turnstile.quarantined, turnstile.stores + turnstile.checkpoints)
        self.assertLessEqual(turnpike.quarantined, turnstile.quarantined)


class StoreBreakdownTests(SimpleTestCase):

    def test_categories_partition_the_stores(self):
        for name in ('vecsum', 'saxpy', 'histogram'):
            with self.subTest(kernel=name):
                breakdown = store_breakdown(name)
                self.assertEqual(set(breakdown.counts), set(CATEGORIES))
                self.assertAlmostEqual(sum(breakdown.percentages.values()), 100.0, places=6)
                self.assertTrue(all(v >= 0 for v in breakdown.counts.values()))

    def test_ablation_chain_ends_in_turnpike(self):
        self.assertEqual(ABLATION_CHAIN[0], 'turnstile')
        self.assertEqual(ABLATION_CHAIN[-1], 'turnpike')

    def test_each_optimization_removes_stores_somewhere(self):
        expected = {
            'hash-mix': 'war_free',
            'deltas': 'licm_eliminated',
            'horner': 'ra_eliminated',
            'vadd': 'indvar_merging_eliminated',
        }
        for name, category in expected.items():
            with self.subTest(kernel=name, category=category):
                self.assertGreater(store_breakdown(name).counts[category], 0)

    def test_colored_checkpoints_are_released_early(self):
        self.assertGreater(store_breakdown('vecsum').counts['colored'], 0)
