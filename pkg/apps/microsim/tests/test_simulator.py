import random
from types import SimpleNamespace

from django.test import SimpleTestCase

from apps.common.exceptions import HardenedTargetError, RegionCapacityExceeded, WatchdogExpired
from apps.ir.generator import random_program
from apps.ir.interpreter import interpret
from apps.ir.parser import parse_ir
from apps.checkpointing.plan import CheckpointPlan
from apps.checkpointing.recovery import build_recovery_blocks
from apps.harness.pipeline import CompileOptions, compile_program
from apps.microsim.config import SimConfig
from apps.microsim.core import Simulator, simulate
from apps.scheduler.schedule import schedule
from apps.scheduler.tests.test_schedule import LOAD_THEN_CKPT

TURNSTILE = SimConfig(fast_release=False, checkpoint_release='quarantine', trace=True)
TURNPIKE = SimConfig(trace=True)
BASELINE = SimConfig(resilient=False)

STORE_BURST = """
r1 = li 4096
r2 = li 1
st [r1+0], r2
st [r1+8], r2
rb
st [r1+16], r2
st [r1+24], r2
rb
st [r1+32], r2
ret
"""

# r2 se corrompe en la segunda región antes de su checkpoint
CHECKPOINT_HAZARD = """
r2 = li 5
ckpt r2
rb
r4 = ld [8192]
r5 = add r4, 1
r2 = add r2, r5
ckpt r2
st [4096], r2
ret
"""


def fault(cycle, target='register', register=None, bit=3, latency=10):
    return SimpleNamespace(cycle=cycle, target=target, register=register, bit=bit, latency=latency)


def compile_for_sim(seed, k=8, sb_size=4):
    artifact = compile_program(random_program(seed), CompileOptions(sb_size=sb_size, regs=k, livm=False))
    return artifact.program, artifact.recovery


class TimingTests(SimpleTestCase):

    def test_alu_only_program_issues_two_per_cycle(self):
        program = parse_ir(''.join(f'r{n} = li {n}\n' for n in range(1, 11)) + 'ret\n')
        report = simulate(program, BASELINE).report
        self.assertEqual(report.cycles, 6)
        self.assertEqual(report.busy_cycles, 6)
        self.assertEqual(report.stall_cycles, 0)
        self.assertEqual(report.stalls['sb_full'], 0)

    def test_last_region_drains_for_wcdl(self):
        program = parse_ir(''.join(f'r{n} = li {n}\n' for n in range(1, 11)) + 'ret\n')
        report = simulate(program, TURNPIKE).report
        self.assertEqual(report.cycles, 15)
        self.assertEqual(report.drain_cycles, 9)
        self.assertTrue(report.accounted)

    def test_stores_release_wcdl_after_region_end(self):
        program = parse_ir('r1 = li 4096\nr2 = li 7\nst [r1+0], r2\nrb\nr3 = li 1\nret\n')
        result = simulate(program, TURNSTILE)
        trace = result.report.trace
        self.assertIn('1 region-end 0', trace)
        self.assertIn('11 verify 0', trace)
        self.assertIn('12 verify 1', trace)
        self.assertEqual(result.program_memory(), {4096: 7})
        self.assertEqual(result.report.quarantined, 1)

    def test_store_burst_stalls_on_full_store_buffer(self):
        result = simulate(parse_ir(STORE_BURST), TURNSTILE)
        report = result.report
        self.assertEqual(report.stalls['sb_full'], 7)
        self.assertLessEqual(report.stalls['sb_full'], TURNSTILE.wcdl)
        self.assertEqual(report.cycles, 22)
        self.assertTrue(report.accounted)
        self.assertEqual(result.program_memory(), {4096 + 8 * n: 1 for n in range(5)})

    def test_older_entries_stall_instead_of_overflowing(self):
        config = TURNSTILE.with_overrides(sb_size=2)
        simulator = Simulator(parse_ir(STORE_BURST), config)
        peak = 0
        issue = simulator.issue

        def tracked_issue():
            nonlocal peak
            issue()
            peak = max(peak, len(simulator.sb))

        simulator.issue = tracked_issue
        result = simulator.run()
        self.assertEqual(peak, 2)
        self.assertGreater(result.report.stalls['sb_full'], 2 * config.wcdl - 4)
        self.assertEqual(result.program_memory(), {4096 + 8 * n: 1 for n in range(5)})

    def test_region_larger_than_store_buffer_is_rejected(self):
        program = parse_ir('r1 = li 4096\nst [r1+0], r1\nst [r1+8], r1\nst [r1+16], r1\nret\n')
        with self.assertRaises(RegionCapacityExceeded) as ctx:
            simulate(program, TURNSTILE.with_overrides(sb_size=2))
        self.assertEqual(ctx.exception.region, 0)
        self.assertEqual(ctx.exception.snapshot['sb'], 2)

    def test_fast_release_avoids_store_buffer_stalls(self):
        result = simulate(parse_ir(STORE_BURST), TURNPIKE)
        self.assertEqual(result.report.stalls['sb_full'], 0)
        self.assertEqual(result.report.war_free, 2)
        self.assertEqual(result.program_memory(), {4096 + 8 * n: 1 for n in range(5)})

    def test_scheduling_reduces_checkpoint_hazards(self):
        program = parse_ir(LOAD_THEN_CKPT)
        scheduled, _ = schedule(program)
        before = simulate(program, TURNPIKE).report
        after = simulate(scheduled, TURNPIKE).report
        self.assertEqual(before.stalls['checkpoint_data_hazard'], 19)
        self.assertLess(after.stalls['checkpoint_data_hazard'], before.stalls['checkpoint_data_hazard'])

    def test_watchdog(self):
        program = parse_ir('Lentry:\n  jmp Lentry\n')
        with self.assertRaises(WatchdogExpired) as ctx:
            simulate(program, SimConfig(resilient=False, max_cycles=50))
        self.assertEqual(ctx.exception.snapshot['block'], 'Lentry')


class FastReleaseTests(SimpleTestCase):

    PROGRAM = (
        'r1 = li 512\n'
        'r2 = ld [r1+0]\n'
        'r3 = ld [r1+248]\n'
        'st [r1+80], r2\n'
        'st [256], r3\n'
        'ret\n'
    )

    def test_compact_range_is_conservative(self):
        report = simulate(parse_ir(self.PROGRAM), TURNPIKE).report
        self.assertEqual(report.war_free, 1)
        self.assertEqual(report.quarantined, 1)
        self.assertEqual(report.fast_released, [1])
        self.assertEqual(report.shadow_ideal, [0, 1])
        self.assertTrue(report.compact_is_sound())

    def test_ideal_queue_releases_both(self):
        report = simulate(parse_ir(self.PROGRAM), TURNPIKE.with_overrides(clq_mode='ideal')).report
        self.assertEqual(report.war_free, 2)

    def test_war_store_is_quarantined(self):
        program = parse_ir('r1 = li 4096\nr2 = ld [r1+0]\nr2 = add r2, 1\nst [r1+0], r2\nret\n')
        result = simulate(program, TURNPIKE.with_overrides(clq_mode='ideal'))
        self.assertEqual(result.report.war_free, 0)
        self.assertEqual(result.program_memory(), {4096: 1})

    def test_clq_overflow_is_counted(self):
        program = parse_ir(
            'r1 = li 4096\nr2 = ld [r1+0]\nrb\nr3 = ld [r1+8]\nrb\nr4 = ld [r1+16]\nst [r1+24], r4\nret\n'
        )
        report = simulate(program, TURNPIKE).report
        self.assertEqual(report.clq_overflows, 1)
        self.assertLessEqual(report.clq_max, 2)


class RecoveryTests(SimpleTestCase):

    def hazard_run(self, config):
        program = parse_ir(CHECKPOINT_HAZARD)
        blocks = build_recovery_blocks(program, CheckpointPlan())
        return simulate(program, config, blocks, faults=[fault(15, register='r2', bit=3, latency=10)])

    def test_naive_checkpoint_release_restores_corrupted_value(self):
        result = self.hazard_run(TURNPIKE.with_overrides(checkpoint_release='naive'))
        self.assertEqual(result.report.recoveries, 1)
        self.assertEqual(result.program_memory(), {4096: 15})

    def test_coloring_restores_verified_value(self):
        golden = interpret(parse_ir(CHECKPOINT_HAZARD)).program_memory()
        result = self.hazard_run(TURNPIKE)
        self.assertEqual(golden, {4096: 6})
        self.assertEqual(result.report.recoveries, 1)
        self.assertEqual(result.program_memory(), golden)

    def test_quarantined_checkpoint_is_discarded(self):
        result = self.hazard_run(TURNSTILE)
        self.assertEqual(result.program_memory(), {4096: 6})

    def test_address_parity_fires_before_the_store(self):
        program = parse_ir('r1 = li 4096\nr2 = li 9\nst [r1+0], r2\nret\n')
        result = simulate(program, TURNPIKE, faults=[fault(1, 'store-address', register='r1', bit=20, latency=3)])
        self.assertEqual(result.report.recoveries, 1)
        self.assertEqual(result.program_memory(), {4096: 9})
        self.assertNotIn(4096 ^ (1 << 20), result.memory)

    def test_parity_follows_a_corrupted_register_into_an_address(self):
        program = parse_ir('r1 = li 4096\nr2 = li 9\nr3 = add r1, 8\nst [r3+0], r2\nret\n')
        result = simulate(program, TURNPIKE, faults=[fault(1, register='r1', bit=20, latency=10)])
        self.assertEqual(result.report.recoveries, 1)
        self.assertEqual(result.program_memory(), {4104: 9})
        self.assertNotIn(4104 ^ (1 << 20), result.memory)

    def test_hardened_targets_are_rejected(self):
        program = parse_ir('r1 = li 1\nret\n')
        with self.assertRaises(HardenedTargetError):
            simulate(program, TURNPIKE, faults=[fault(0, 'sb')])

    def test_random_register_faults_are_recovered(self):
        config = SimConfig(fast_release=False)
        for seed in range(8):
            with self.subTest(seed=seed):
                program, blocks = compile_for_sim(seed)
                golden = interpret(program).program_memory()
                length = simulate(program, config, blocks).report.cycles
                rng = random.Random(seed)
                registers = sorted(program.registers())
                event = fault(
                    rng.randrange(1, length), register=rng.choice(registers),
                    bit=rng.randrange(64), latency=rng.randint(1, config.wcdl),
                )
                result = simulate(program, config, blocks, faults=[event], check_invariants=True)
                self.assertEqual(result.program_memory(), golden)


class EquivalenceTests(SimpleTestCase):

    CONFIGS = {
        'baseline': BASELINE,
        'turnstile': TURNSTILE,
        'turnpike': TURNPIKE,
        'ideal': SimConfig(clq_mode='ideal'),
        'small-sb': SimConfig(sb_size=2, clq_entries=1),
    }

    def test_fault_free_runs_match_interpreter(self):
        for seed in range(8):
            compiled = {size: compile_for_sim(seed, sb_size=size) for size in (2, 4)}
            for name, config in self.CONFIGS.items():
                program, blocks = compiled[min(config.sb_size, 4)]
                expected = interpret(program)
                with self.subTest(seed=seed, config=name):
                    result = Simulator(program, config, blocks, check_invariants=True).run()
                    self.assertEqual(result.program_memory(), expected.program_memory())
                    self.assertEqual(result.registers, expected.registers)
                    self.assertEqual(result.report.instructions, expected.instructions)
                    self.assertTrue(result.report.accounted)
                    self.assertTrue(result.report.compact_is_sound())
