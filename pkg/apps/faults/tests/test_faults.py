import random

from django.test import SimpleTestCase

from apps.common.exceptions import ConfigurationError, HardenedTargetError
from apps.ir.interpreter import interpret
from apps.ir.parser import parse_ir
from apps.checkpointing.plan import CheckpointPlan
from apps.checkpointing.recovery import build_recovery_blocks
from apps.checkpointing.tests.test_recovery import compile_checkpoints
from apps.faults.campaign import checkpointed_registers, run_campaign
from apps.faults.events import FaultEvent, sample_event
from apps.faults.injector import FAILED, MASKED, RECOVERED, inject
from apps.microsim.config import SimConfig
from apps.microsim.tests.test_simulator import CHECKPOINT_HAZARD
from apps.regalloc.allocator import allocate
from apps.scheduler.schedule import schedule

VECSUM = """
.word 4096 1 2 3 4 5 6 7 8
  r1 = li 0
  r2 = li 0
  r3 = li 4096
  jmp Lloop
Lloop:
  r4 = shl r1, 3
  r5 = add r3, r4
  r6 = ld [r5+0]
  r2 = add r2, r6
  r1 = add r1, 1
  r7 = slt r1, 8
  br r7, Lloop, Ldone
Ldone:
  st [8192], r2
  ret
"""

TURNPIKE = SimConfig()


def compile_vecsum():
    compiled, plan = compile_checkpoints(parse_ir(VECSUM))
    allocated, allocation = allocate(compiled)
    scheduled, _ = schedule(allocated)
    return scheduled, build_recovery_blocks(scheduled, plan, allocation)


def hazard_program():
    program = parse_ir(CHECKPOINT_HAZARD)
    return program, build_recovery_blocks(program, CheckpointPlan())


class FaultEventTests(SimpleTestCase):

    def test_latency_is_bounded_by_wcdl(self):
        with self.assertRaises(ConfigurationError):
            FaultEvent(10, 'register', latency=11, register='r1').validate(wcdl=10)
        FaultEvent(10, 'register', latency=10, register='r1').validate(wcdl=10)

    def test_hardened_structures_are_rejected(self):
        for target in ('sb', 'rbb', 'clq', 'color-maps'):
            with self.subTest(target=target), self.assertRaises(HardenedTargetError):
                FaultEvent(1, target, latency=1).validate(wcdl=10)

    def test_sampled_events_respect_wcdl(self):
        rng = random.Random(7)
        for _ in range(500):
            event = sample_event(rng, window=100, wcdl=10, registers=['p1', 'p2'])
            event.validate(10)
            self.assertTrue(1 <= event.cycle < 100)


class InjectTests(SimpleTestCase):

    def test_empty_schedule_matches_fault_free_run(self):
        program, blocks = compile_vecsum()
        outcome = inject(program, TURNPIKE, blocks, [])
        self.assertEqual(outcome.outcome, MASKED)
        self.assertEqual(outcome.recoveries, 0)

    def test_register_flip_is_recovered(self):
        program, blocks = hazard_program()
        event = FaultEvent(15, 'register', latency=10, bit=3, register='r2')
        outcome = inject(program, TURNPIKE, blocks, [event])
        self.assertEqual(outcome.outcome, RECOVERED)

    def test_naive_release_fails_to_recover(self):
        program, blocks = hazard_program()
        event = FaultEvent(15, 'register', latency=10, bit=3, register='r2')
        golden = interpret(program).program_memory()
        outcome = inject(program, TURNPIKE.with_overrides(checkpoint_release='naive'), blocks, [event], golden)
        self.assertEqual(outcome.outcome, FAILED)

    def test_baseline_machine_is_rejected(self):
        program, blocks = hazard_program()
        with self.assertRaises(ConfigurationError):
            inject(program, SimConfig(resilient=False), blocks, [])


class CampaignTests(SimpleTestCase):

    def test_full_features_recover_every_fault(self):
        program, blocks = compile_vecsum()
        report = run_campaign(program, TURNPIKE, blocks, trials=60, seed=11)
        self.assertEqual(report.outcomes[FAILED], 0)
        self.assertEqual(report.success_rate, 1.0)
        self.assertEqual(sum(report.outcomes.values()), 60)

    def test_same_seed_gives_identical_reports(self):
        program, blocks = compile_vecsum()
        first = run_campaign(program, TURNPIKE, blocks, trials=20, seed=3)
        second = run_campaign(program, TURNPIKE, blocks, trials=20, seed=3)
        self.assertEqual(first.to_json(), second.to_json())

    def test_worker_pool_matches_sequential_order(self):
        program, blocks = compile_vecsum()
        sequential = run_campaign(program, TURNPIKE, blocks, trials=8, seed=5)
        parallel = run_campaign(program, TURNPIKE, blocks, trials=8, seed=5, jobs=2)
        self.assertEqual(parallel.to_dict(), sequential.to_dict())

    def test_negative_control_exposes_overwritten_checkpoints(self):
        program, blocks = hazard_program()
        self.assertEqual(checkpointed_registers(program), ['r2'])
        report = run_campaign(program, TURNPIKE, blocks, trials=50, seed=1, negative_control=True)
        self.assertGreaterEqual(report.outcomes[FAILED], 1)
        self.assertEqual(report.target_class, 'register')

    def test_unknown_target_class(self):
        program, blocks = hazard_program()
        with self.assertRaises(ConfigurationError):
            run_campaign(program, TURNPIKE, blocks, trials=1, target_class='sb')
