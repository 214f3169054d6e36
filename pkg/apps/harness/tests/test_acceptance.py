"""
Campañas completas y barridos sobre todos los kernels. Tardan minutos;
sólo corren con HARNESS_SLOW_TESTS=True.
"""
from unittest import skipUnless

from django.conf import settings
from django.test import SimpleTestCase

from apps.faults.campaign import run_campaign
from apps.faults.injector import FAILED
from apps.harness.pipeline import run_kernel
from apps.harness.reporting import (
    check_ablation, check_checkpoint_fraction, check_clq, check_sb, check_wcdl,
)
from apps.harness.sweep import sweep

from .test_kernels import KERNELS


@skipUnless(settings.HARNESS_SLOW_TESTS, 'HARNESS_SLOW_TESTS desactivado')
class FaultCampaignAcceptanceTests(SimpleTestCase):

    def test_every_kernel_recovers_every_fault(self):
        self.assertGreaterEqual(len(KERNELS), 8)
        for name in KERNELS:
            with self.subTest(kernel=name):
                outcome = run_kernel(name, 'turnpike')
                report = run_campaign(
                    outcome.artifact.program, outcome.config, outcome.artifact.recovery,
                    trials=settings.FAULTS_DEFAULT_TRIALS, jobs=settings.HARNESS_JOBS,
                )
                self.assertEqual(report.trials, settings.FAULTS_DEFAULT_TRIALS)
                self.assertEqual(report.outcomes[FAILED], 0, report.failures)

    def test_naive_release_loses_faults(self):
        failed = 0
        for name in KERNELS:
            outcome = run_kernel(name, 'turnpike')
            report = run_campaign(
                outcome.artifact.program, outcome.config, outcome.artifact.recovery,
                trials=settings.FAULTS_DEFAULT_TRIALS, negative_control=True, jobs=settings.HARNESS_JOBS,
            )
            failed += report.outcomes[FAILED]
        self.assertGreater(failed, 0)


@skipUnless(settings.HARNESS_SLOW_TESTS, 'HARNESS_SLOW_TESTS desactivado')
class SweepTrendAcceptanceTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rows = sweep(['wcdl', 'ablation', 'sb', 'clq'], KERNELS)

    def assertPassed(self, check):
        self.assertTrue(check.passed, check.detail)

    def test_wcdl(self):
        self.assertPassed(check_wcdl(self.rows))

    def test_ablation(self):
        self.assertPassed(check_ablation(self.rows))

    def test_store_buffer(self):
        self.assertPassed(check_sb(self.rows))

    def test_clq(self):
        self.assertPassed(check_clq(self.rows))

    def test_checkpoint_fraction(self):
        self.assertPassed(check_checkpoint_fraction(self.rows))
