import os
import tempfile

from django.test import SimpleTestCase, override_settings

from apps.common.exceptions import ConfigurationError, InvariantViolation
from apps.microsim.cache import DirectMappedCache
from apps.microsim.config import SimConfig
from apps.microsim.structures import ColorMaps, CommittedLoadQueue, StoreBuffer, StoreBufferEntry


class SimConfigTests(SimpleTestCase):

    def test_store_buffer_must_hold_two_entries(self):
        with self.assertRaises(ConfigurationError):
            SimConfig(sb_size=1)

    def test_wcdl_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            SimConfig(wcdl=0)

    def test_unknown_clq_mode(self):
        with self.assertRaises(ConfigurationError):
            SimConfig(clq_mode='huge')

    @override_settings(SIM_WCDL=30, SIM_SB_SIZE=8)
    def test_from_settings_with_overrides(self):
        config = SimConfig.from_settings(clq_mode='ideal', colors=None)
        self.assertEqual((config.wcdl, config.sb_size, config.clq_mode, config.colors), (30, 8, 'ideal', 4))

    def test_from_file(self):
        handle, path = tempfile.mkstemp(suffix='.cfg')
        with os.fdopen(handle, 'w') as out:
            out.write('sb_size=8\nclq_mode=ideal\nfast_release=false\nwcdl=20\n')
        self.addCleanup(os.remove, path)
        config = SimConfig.from_file(path, base=SimConfig())
        self.assertEqual(config.sb_size, 8)
        self.assertEqual(config.clq_mode, 'ideal')
        self.assertFalse(config.fast_release)
        self.assertEqual(config.wcdl, 20)
        self.assertEqual(config.issue_width, 2)

    def test_feature_flags(self):
        self.assertTrue(SimConfig().war_free)
        self.assertFalse(SimConfig(clq_mode='off').war_free)
        self.assertFalse(SimConfig(resilient=False).coloring)
        self.assertEqual(SimConfig().hardware_cost(16), {'color_map_bits': 96, 'clq_bytes': 32})


class StoreBufferTests(SimpleTestCase):

    def test_fifo_release_by_region(self):
        sb = StoreBuffer(4)
        for region, address in ((0, 8), (0, 16), (1, 24)):
            sb.push(StoreBufferEntry(region, address * 10, address=address))
        self.assertEqual([e.address for e in sb.release_through(0)], [8, 16])
        self.assertEqual(len(sb), 1)
        self.assertTrue(sb.only_region(1))

    def test_forwarding_returns_youngest_value(self):
        sb = StoreBuffer(4)
        sb.push(StoreBufferEntry(0, 1, address=8))
        sb.push(StoreBufferEntry(0, 2, address=8))
        sb.push(StoreBufferEntry(0, 3, checkpoint='p1'))
        self.assertEqual(sb.forward(8), 2)
        self.assertIsNone(sb.forward(16))
        self.assertEqual(sb.discard(), 3)


class CommittedLoadQueueTests(SimpleTestCase):

    def test_compact_entry_is_a_range(self):
        clq = CommittedLoadQueue('compact', 2)
        clq.commit_load(0, 0x200)
        clq.commit_load(0, 0x2F8)
        self.assertTrue(clq.hits(0, 0x250))
        self.assertFalse(clq.hits(0, 0x100))
        self.assertFalse(clq.hits(1, 0x200))

    def test_ideal_entry_is_exact(self):
        clq = CommittedLoadQueue('ideal', 0)
        clq.commit_load(0, 0x200)
        clq.commit_load(0, 0x2F8)
        self.assertFalse(clq.hits(0, 0x250))
        self.assertTrue(clq.hits(0, 0x2F8))

    def test_overflow_disables_until_next_region(self):
        clq = CommittedLoadQueue('compact', 2)
        self.assertFalse(clq.commit_load(0, 0x200))
        self.assertFalse(clq.commit_load(1, 0x300))
        self.assertTrue(clq.commit_load(2, 0x400))
        self.assertFalse(clq.enabled)
        self.assertEqual(clq.occupancy, 0)
        self.assertFalse(clq.commit_load(2, 0x408))
        self.assertEqual(clq.occupancy, 0)
        clq.region_started()
        clq.commit_load(3, 0x500)
        self.assertTrue(clq.enabled)
        self.assertEqual(clq.occupancy, 1)
        self.assertEqual(clq.overflows, 1)

    def test_retire_frees_the_entry(self):
        clq = CommittedLoadQueue('compact', 1)
        clq.commit_load(0, 8)
        clq.retire(0)
        self.assertFalse(clq.commit_load(1, 16))


class ColorMapsTests(SimpleTestCase):

    def test_colors_rotate_through_regions(self):
        colors = ColorMaps(4)
        first = colors.acquire('p2')
        second = colors.acquire('p2')
        self.assertEqual((first, second), (1, 2))
        colors.check_exclusive([{'p2': first}, {'p2': second}])
        colors.verify({'p2': first})
        self.assertEqual(colors.verified_color('p2'), 1)
        self.assertEqual(list(colors.available['p2']), [3, 0])
        colors.check_exclusive([{'p2': second}])

    def test_pool_exhaustion(self):
        colors = ColorMaps(4)
        held = [colors.acquire('p2') for _ in range(3)]
        self.assertEqual(held, [1, 2, 3])
        self.assertIsNone(colors.acquire('p2'))
        colors.reclaim({'p2': 3})
        self.assertEqual(colors.acquire('p2'), 3)

    def test_duplicate_color_is_detected(self):
        colors = ColorMaps(4)
        colors.acquire('p2')
        with self.assertRaises(InvariantViolation):
            colors.check_exclusive([{'p2': 2}])


class CacheTests(SimpleTestCase):

    def test_direct_mapped_conflicts(self):
        cache = DirectMappedCache(sets=4, line=64)
        self.assertFalse(cache.access(0))
        self.assertTrue(cache.access(56))
        self.assertFalse(cache.access(256))
        self.assertFalse(cache.access(0))
        self.assertEqual((cache.hits, cache.misses), (1, 3))
