import csv
import dataclasses
import io
import json
import math
import unittest

from qpredec.dem import NoiseConfig, build_phenomenological_dem
from qpredec.pipeline import truncate_pipeline
from qpredec.simulation import (
    CSV_COLUMNS,
    DecoderConfig,
    SweepPoint,
    reports_to_csv,
    reports_to_json,
    run_experiment,
    sub_seed,
    sweep,
    sweep_points,
)
from qpredec.simulation.experiment import wilson_interval
from tests.testing_utilities import TestCase
from tests.dem.common import REPETITION, REPETITION_NOISE, STEANE, STEANE_NOISE
from tests.simulation.common import (
    AMBIGUOUS_DEM,
    AMBIGUOUS_PIPELINE,
    REPETITION_MERGED,
    REPETITION_PIPELINE,
    STEANE_MERGED,
    STEANE_PIPELINE,
)

# noisier than the fixture so that a few hundred shots exercise every path
NOISY_STEANE = build_phenomenological_dem(STEANE, "Z", STEANE_NOISE.scaled(0.02))


def _overlap(a, b):
    return a[0] <= b[1] and b[0] <= a[1]


class TestRunExperiment(TestCase):
    def test_counts_consistent(self):
        report = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=400, seed=1)
        self.assertEqual(report.shots, 400)
        self.assertEqual(report.trivial_shots + report.nonzero_syndrome_shots, 400)
        self.assertLessEqual(report.resolved_shots, report.nonzero_syndrome_shots)
        self.assertGreater(report.nonzero_syndrome_shots, 0)
        self.assertAllClose(report.coverage,
                            report.resolved_shots / report.nonzero_syndrome_shots)
        self.assertLessEqual(report.osd_calls_hierarchy, report.osd_calls_l2_only)
        self.assertEqual(len(report.stage_fire_counts), STEANE_PIPELINE.depth)
        self.assertEqual(sum(report.fired_histogram.values()), 400)
        low, high = report.ler_hierarchy_ci95
        self.assertLessEqual(low, report.ler_hierarchy)
        self.assertLessEqual(report.ler_hierarchy, high)

    def test_deterministic(self):
        a = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=300, seed=9)
        b = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=300, seed=9)
        self.assertEqual(a.to_dict(), b.to_dict())

    def test_workers_and_chunks_irrelevant(self):
        reference = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=300, seed=2)
        for workers, chunk_size in ((1, 7), (4, 50), (3, 1000)):
            report = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=300, seed=2,
                                    workers=workers, chunk_size=chunk_size)
            self.assertEqual(report.to_dict(), reference.to_dict())

    def test_empty_pipeline_matches_l2(self):
        empty = dataclasses.replace(STEANE_PIPELINE, stages=(), class_of_stage=())
        report = run_experiment(NOISY_STEANE, empty, shots=300, seed=3)
        self.assertEqual(report.coverage, 0.)
        self.assertEqual(report.utilization_reduction, 1.)
        self.assertEqual(report.ler_hierarchy, report.ler_l2_only)
        self.assertEqual(report.osd_calls_hierarchy, report.osd_calls_l2_only)

    def test_truncation_lowers_coverage(self):
        full = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=300, seed=4)
        truncated = run_experiment(NOISY_STEANE, truncate_pipeline(STEANE_PIPELINE, 3),
                                   shots=300, seed=4, stages_removed=3)
        self.assertLessEqual(truncated.coverage, full.coverage)
        self.assertEqual(truncated.depth, STEANE_PIPELINE.depth - 3)
        self.assertEqual(truncated.stages_removed, 3)
        self.assertEqual(truncated.ler_l2_only, full.ler_l2_only)

    def test_osd_reduction(self):
        report = run_experiment(AMBIGUOUS_DEM, AMBIGUOUS_PIPELINE, shots=2000, seed=0)
        self.assertGreater(report.nonzero_syndrome_shots, 0)
        self.assertEqual(report.coverage, 1.)
        self.assertTrue(math.isinf(report.utilization_reduction))
        self.assertEqual(report.bp_nonconverged, report.nonzero_syndrome_shots)
        self.assertEqual(report.osd_reduction, 1.)
        self.assertEqual(report.osd_calls_hierarchy, 0)
        self.assertEqual(report.osd_calls_l2_only, report.nonzero_syndrome_shots)

    def test_generous_budget(self):
        config = DecoderConfig(max_iters=5, osd_budget_x10=True)
        report = run_experiment(AMBIGUOUS_DEM, AMBIGUOUS_PIPELINE, config, shots=500, seed=0)
        self.assertEqual(report.bp_nonconverged, report.nonzero_syndrome_shots)
        self.assertEqual(report.config, {"max_iters": 5, "osd_budget_x10": True})

    def test_no_nonzero_syndromes(self):
        quiet = build_phenomenological_dem(REPETITION, "Z",
                                           NoiseConfig(p_data=1e-12, p_meas=1e-12, rounds=3))
        report = run_experiment(quiet, REPETITION_PIPELINE, shots=50, seed=0)
        self.assertEqual(report.nonzero_syndrome_shots, 0)
        self.assertEqual(report.coverage, 1.)
        self.assertIsNone(report.osd_reduction)
        self.assertEqual(len(report.notes), 2)

    def test_structure_mismatch(self):
        with self.assertRaises(ValueError):
            run_experiment(STEANE_MERGED, REPETITION_PIPELINE, shots=10)
        mismatched = dataclasses.replace(REPETITION_PIPELINE, dem_digest="0" * 64)
        with self.assertRaises(ValueError):
            run_experiment(REPETITION_MERGED, mismatched, shots=10)
        report = run_experiment(REPETITION_MERGED, mismatched, shots=10, force=True)
        self.assertEqual(report.shots, 10)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            run_experiment(REPETITION_MERGED, REPETITION_PIPELINE, shots=0)
        with self.assertRaises(ValueError):
            run_experiment(REPETITION_MERGED, REPETITION_PIPELINE, shots=1, workers=0)
        with self.assertRaises(ValueError):
            DecoderConfig(max_iters=0)


class TestStatistics(TestCase):
    def test_ler_parity(self):
        fixtures = (
            ("repetition", REPETITION, REPETITION_NOISE, REPETITION_PIPELINE),
            ("steane", STEANE, STEANE_NOISE, STEANE_PIPELINE),
        )
        for name, code, noise, pipeline in fixtures:
            for p in (1e-3, 3e-3):
                dem = build_phenomenological_dem(code, "Z", noise.scaled(p))
                report = run_experiment(dem, pipeline, shots=100_000, seed=11, p=p, workers=4)
                with self.subTest(code=name, p=p):
                    self.assertTrue(_overlap(report.ler_hierarchy_ci95,
                                             report.ler_l2_only_ci95))
                    # one shot of slack where the L2-only arm sees no logical error
                    self.assertLessEqual(report.ler_hierarchy,
                                         1.2 * report.ler_l2_only + 1. / report.shots)

    def test_low_noise_coverage(self):
        coverages = []
        for p in (1e-4, 1e-3, 3e-3, 1e-2):
            dem = build_phenomenological_dem(STEANE, "Z", STEANE_NOISE.scaled(p))
            coverages.append(run_experiment(dem, STEANE_PIPELINE, shots=20_000, seed=3,
                                            workers=4).coverage)
        self.assertGreaterEqual(coverages[0], 0.95)
        self.assertEqual(coverages, sorted(coverages, reverse=True))

    def test_short_budget_osd_reduction(self):
        dem = build_phenomenological_dem(STEANE, "Z", STEANE_NOISE.scaled(3e-3))
        report = run_experiment(dem, STEANE_PIPELINE, DecoderConfig(max_iters=4),
                                shots=20_000, seed=5, workers=4)
        self.assertGreater(report.bp_nonconverged, 0)
        self.assertIsNotNone(report.osd_reduction)
        self.assertGreater(report.osd_reduction, 0.)

    def test_truncation_keeps_ler(self):
        full = run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=5000, seed=8)
        coverages = [full.coverage]
        for removed in range(1, math.ceil(STEANE_PIPELINE.depth / 2) + 1):
            report = run_experiment(NOISY_STEANE, truncate_pipeline(STEANE_PIPELINE, removed),
                                    shots=5000, seed=8, stages_removed=removed)
            with self.subTest(removed=removed):
                self.assertTrue(_overlap(report.ler_hierarchy_ci95, full.ler_hierarchy_ci95))
                self.assertEqual(report.ler_l2_only, full.ler_l2_only)
            coverages.append(report.coverage)
        self.assertEqual(coverages, sorted(coverages, reverse=True))

class TestSweep(TestCase):
    def model_for(self, p):
        return build_phenomenological_dem(STEANE, "Z", STEANE_NOISE.scaled(p))

    def test_points(self):
        points = sweep_points([0.01, 0.02], [0, 2])
        self.assertEqual(points, [SweepPoint(0.01, 0), SweepPoint(0.01, 2),
                                  SweepPoint(0.02, 0), SweepPoint(0.02, 2)])
        self.assertEqual(sweep_points(), [SweepPoint(None, 0)])

    def test_sub_seed(self):
        self.assertEqual(sub_seed(0, 0.01), sub_seed(0, 0.01))
        self.assertNotEqual(sub_seed(0, 0.01), sub_seed(0, 0.02))
        self.assertNotEqual(sub_seed(0, 0.01), sub_seed(1, 0.01))
        self.assertEqual(sub_seed(0, 0.01), sub_seed(0, 1e-2))
        self.assertLess(sub_seed(7, None), 2 ** 64)

    def test_single_point_matches_experiment(self):
        [report] = sweep([SweepPoint(0.02)], self.model_for, STEANE_PIPELINE, shots=200, seed=5)
        direct = run_experiment(self.model_for(0.02), STEANE_PIPELINE, shots=200,
                                seed=sub_seed(5, 0.02), p=0.02)
        self.assertEqual(report.to_dict(), direct.to_dict())

    def test_truncation_grid(self):
        reports = sweep(sweep_points([0.02], [0, 1, 3]), self.model_for, STEANE_PIPELINE,
                        shots=200, seed=0)
        self.assertEqual([r.depth for r in reports], [6, 5, 3])
        # one p: identical shots, so the L2-only arm agrees
        self.assertEqual(len({r.ler_l2_only for r in reports}), 1)
        coverages = [r.coverage for r in reports]
        self.assertEqual(coverages, sorted(coverages, reverse=True))

    def test_invalid_grid(self):
        with self.assertRaises(ValueError):
            sweep([], self.model_for, STEANE_PIPELINE, shots=10)
        with self.assertRaises(ValueError):
            sweep([SweepPoint(0.02, 6)], self.model_for, STEANE_PIPELINE, shots=10)
        with self.assertRaises(ValueError):
            sweep([SweepPoint(1.5)], self.model_for, STEANE_PIPELINE, shots=10)


class TestReports(TestCase):
    def test_wilson(self):
        low, high = wilson_interval(0, 100)
        self.assertEqual(low, 0.)
        self.assertGreater(high, 0.)
        low, high = wilson_interval(50, 100)
        self.assertAllClose([low, high], [0.4038, 0.5962], atol=1e-3)

    def test_csv(self):
        reports = [
            run_experiment(AMBIGUOUS_DEM, AMBIGUOUS_PIPELINE, shots=100, seed=0, p=0.01),
            run_experiment(NOISY_STEANE, STEANE_PIPELINE, shots=100, seed=0),
        ]
        rows = list(csv.reader(io.StringIO(reports_to_csv(reports))))
        self.assertEqual(tuple(rows[0]), CSV_COLUMNS)
        self.assertEqual(len(rows), 3)
        first = dict(zip(CSV_COLUMNS, rows[1]))
        self.assertEqual(first["p"], "0.01")
        self.assertEqual(first["util_reduction"], "inf")
        self.assertEqual(first["osd_reduction"], "1.0")
        self.assertEqual(len(first["ler_hier_ci95"].split(";")), 2)
        self.assertEqual(dict(zip(CSV_COLUMNS, rows[2]))["p"], "nan")

    def test_json(self):
        report = run_experiment(AMBIGUOUS_DEM, AMBIGUOUS_PIPELINE, shots=100, seed=0)
        [data] = json.loads(reports_to_json([report]))
        self.assertEqual(data["utilization_reduction"], "inf")
        self.assertEqual(data["shots"], 100)
        self.assertIn("notes", data)


if __name__ == "__main__":
    unittest.main()
