import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from apps.common.exceptions import ConfigurationError, InvariantViolation
from apps.harness.breakdown import CATEGORIES
from apps.harness.pipeline import ABLATION_CHAIN
from apps.harness.reporting import (
    FAILED, PASSED, SKIPPED, breakdown_table, check_ablation, check_clq, check_sb, check_wcdl,
    clq_table, trend_checks, write_report,
)
from apps.harness.sweep import SWEEP_FIELDS, Cell, experiment_cells, read_csv, run_cell, write_csv


def row(experiment, mode, kernel='k', **values):
    return {'experiment': experiment, 'kernel': kernel, 'mode': mode, **values}


def breakdown_row(kernel, **shares):
    return row('breakdown', 'turnpike', kernel, **{f'store_{c}': shares.get(c, 0.0) for c in CATEGORIES})


class TrendCheckTests(SimpleTestCase):

    def test_empty_sweep_skips_everything(self):
        self.assertTrue(all(c.status == SKIPPED for c in trend_checks([])))

    def test_wcdl_trend(self):
        rows = [
            row('wcdl', 'turnstile', wcdl=10, overhead=0.10),
            row('wcdl', 'turnstile', wcdl=20, overhead=0.20),
            row('wcdl', 'turnpike', wcdl=10, overhead=0.05),
            row('wcdl', 'turnpike', wcdl=20, overhead=0.06),
        ]
        self.assertEqual(check_wcdl(rows).status, PASSED)

    def test_wcdl_trend_flags_a_decreasing_turnstile(self):
        rows = [
            row('wcdl', 'turnstile', wcdl=10, overhead=0.30),
            row('wcdl', 'turnstile', wcdl=20, overhead=0.20),
            row('wcdl', 'turnpike', wcdl=10, overhead=0.05),
            row('wcdl', 'turnpike', wcdl=20, overhead=0.06),
        ]
        check = check_wcdl(rows)
        self.assertEqual(check.status, FAILED)
        self.assertEqual(check.detail['non_monotonic'], ['k'])

    def test_ablation_regression_is_named(self):
        overheads = dict(zip(ABLATION_CHAIN, (0.40, 0.30, 0.25, 0.20, 0.15, 0.25, 0.10, 0.05)))
        check = check_ablation([row('ablation', m, overhead=o) for m, o in overheads.items()])
        self.assertEqual(check.status, FAILED)
        self.assertEqual(check.detail['regressions'], ['licm->sched'])

    def test_ablation_within_tolerance_passes(self):
        overheads = dict(zip(ABLATION_CHAIN, (0.40, 0.30, 0.25, 0.20, 0.15, 0.152, 0.10, 0.05)))
        self.assertEqual(check_ablation([row('ablation', m, overhead=o) for m, o in overheads.items()]).status, PASSED)

    def test_sb_trend(self):
        rows = [
            row('sb', 'turnstile', sb_size=4, overhead=0.50),
            row('sb', 'turnstile', sb_size=40, overhead=0.20),
            row('sb', 'turnpike', sb_size=4, overhead=0.15),
            row('sb', 'turnpike', sb_size=40, overhead=0.05),
        ]
        self.assertEqual(check_sb(rows).status, PASSED)

    def test_sb_trend_flags_a_flat_step(self):
        rows = [
            row('sb', 'turnstile', sb_size=4, overhead=0.50),
            row('sb', 'turnstile', sb_size=10, overhead=0.20),
            row('sb', 'turnstile', sb_size=40, overhead=0.20),
            row('sb', 'turnpike', sb_size=4, overhead=0.15),
        ]
        check = check_sb(rows)
        self.assertEqual(check.status, FAILED)
        self.assertEqual(check.detail['turnstile_flat_steps'], ['10->40'])

    def test_sb_trend_flags_turnpike_above_the_largest_turnstile(self):
        rows = [
            row('sb', 'turnstile', sb_size=4, overhead=0.50),
            row('sb', 'turnstile', sb_size=40, overhead=0.203),
            row('sb', 'turnpike', sb_size=4, overhead=0.485),
        ]
        check = check_sb(rows)
        self.assertEqual(check.status, FAILED)
        self.assertEqual(check.detail['turnstile_flat_steps'], [])

    def test_clq_ignores_the_ideal_design(self):
        rows = [
            row('clq', 'turnpike', clq='2', clq_mean=1.5, clq_max=2, clq_overflows=0, overhead=0.100),
            row('clq', 'turnpike', clq='4', clq_mean=1.6, clq_max=3, clq_overflows=0, overhead=0.105),
            row('clq', 'turnpike', clq='ideal', clq_mean=5.0, clq_max=9, clq_overflows=0, overhead=0.090),
        ]
        check = check_clq(rows)
        self.assertEqual(check.status, PASSED)
        self.assertEqual(check.detail['occupancy_max'], 3)
        self.assertEqual(len(clq_table(rows)), 3)


class BreakdownTableTests(SimpleTestCase):

    def test_fast_releasable_share(self):
        table = breakdown_table([breakdown_row('k', colored=30.0, war_free=20.0, others=50.0)])
        self.assertAlmostEqual(table[0]['fast_releasable'], 50.0)

    def test_categories_must_sum_to_100(self):
        with self.assertRaises(InvariantViolation):
            breakdown_table([breakdown_row('k', colored=30.0, others=50.0)])

    def test_report_files(self):
        rows = [
            breakdown_row('k', pruned=10.0, colored=40.0, others=50.0),
            row('clq', 'turnpike', clq='2', clq_mean=1.0, clq_max=2, clq_overflows=0, overhead=0.1),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            paths = write_report(rows, tmp)
            summary = json.loads(paths['checks'].read_text())
            self.assertTrue(summary['passed'])
            self.assertIn('k,', paths['breakdown'].read_text())
            self.assertTrue(paths['clq'].is_file())


class SweepTests(SimpleTestCase):

    def test_cells_cover_the_axes(self):
        cells = experiment_cells('sb', ['vecsum', 'saxpy'])
        self.assertEqual(len(cells), 2 * 2 * 6)
        self.assertEqual({c.sb_size for c in cells}, {4, 8, 10, 20, 30, 40})

    def test_defaults_fill_the_fixed_axes(self):
        cells = experiment_cells('ablation', ['vecsum'], {'wcdl': 30, 'clq': 'ideal'})
        self.assertTrue(all(c.wcdl == 30 and c.clq == 'ideal' for c in cells))
        self.assertEqual(cells[0].sim_overrides()['clq_mode'], 'ideal')

    def test_unknown_experiment(self):
        with self.assertRaises(ConfigurationError):
            experiment_cells('latency', ['vecsum'])

    def test_breakdown_cell_and_csv(self):
        result = run_cell(Cell('breakdown', 'vecsum', 'turnpike'))
        self.assertGreater(result['overhead'], -1)
        self.assertAlmostEqual(sum(result[f'store_{c}'] for c in CATEGORIES), 100.0, places=6)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv([result], Path(tmp) / 'sweep.csv')
            rows = read_csv(path)
            self.assertEqual(list(rows[0]), list(SWEEP_FIELDS))
            self.assertEqual(rows[0]['kernel'], 'vecsum')
            self.assertEqual(breakdown_table(rows)[0]['kernel'], 'vecsum')
