import json
import os
import tempfile
import unittest

from qpredec.dem import (
    CssCodeSpec,
    NoiseConfig,
    UndetectableMechanismError,
    build_phenomenological_dem,
    build_phenomenological_sidecar,
    load_sidecar,
    repetition_code,
)
from qpredec.fixtures import load_surface_d3_code
from tests.testing_utilities import TestCase
from tests.dem.common import REPETITION, STEANE, STEANE_DEM


class TestCssCodeSpec(TestCase):
    def test_repetition_fixture(self):
        self.assertEqual(REPETITION.n, 3)
        self.assertEqual(REPETITION.hx.shape, (0, 3))
        self.assertBitsEqual(REPETITION.hz, repetition_code(3).hz)
        self.assertEqual(REPETITION.k, 1)

    def test_non_commuting_checks(self):
        with self.assertRaises(ValueError):
            CssCodeSpec("bad", 2, hx=[[1, 0]], hz=[[1, 1]], lx=[], lz=[])

    def test_dict_round_trip(self):
        spec = CssCodeSpec.from_dict(STEANE.to_dict())
        self.assertBitsEqual(spec.hz, STEANE.hz)
        self.assertEqual(spec.d, 3)

    def test_sector(self):
        with self.assertRaises(ValueError):
            STEANE.sector_matrices("Y")


class TestPhenomenologicalBuilder(TestCase):
    def test_repetition_two_rounds(self):
        dem = build_phenomenological_dem(
            REPETITION, "Z", NoiseConfig(p_data=0.01, p_meas=0.002, rounds=2))
        kinds = build_phenomenological_sidecar(
            REPETITION, "Z", NoiseConfig(p_data=0.01, p_meas=0.002, rounds=2))
        self.assertEqual(dem.num_mechanisms, 8)
        self.assertEqual(sorted(kinds.values()).count("data"), 6)
        self.assertEqual(sorted(kinds.values()).count("measurement"), 2)
        self.assertEqual(dem.num_detectors, 4)
        self.assertEqual(dem.rounds, 2)
        # data error on q1 at round 0
        self.assertEqual(dem.mechanisms[1].detectors, (0, 1))
        self.assertEqual(dem.mechanisms[0].observables, (0,))

    def test_steane_hyperedges(self):
        data = [m for i, m in enumerate(STEANE_DEM.mechanisms) if i < 3 * STEANE.n]
        self.assertEqual({len(m.detectors) for m in data}, {1, 2, 3})
        self.assertEqual(STEANE_DEM.num_mechanisms, 3 * 7 + 2 * 3)

    def test_hook_channel(self):
        noise = NoiseConfig(p_data=0.01, p_hook=0.001, rounds=2)
        dem = build_phenomenological_dem(REPETITION, "Z", noise)
        kinds = build_phenomenological_sidecar(REPETITION, "Z", noise)
        hooks = [m for i, m in enumerate(dem.mechanisms) if kinds[i] == "hook"]
        self.assertEqual(hooks[0].detectors, (0, 2, 3))
        self.assertEqual(hooks[0].observables, (0,))

    def test_hook_needs_two_rounds(self):
        with self.assertRaises(ValueError):
            build_phenomenological_dem(REPETITION, "Z", NoiseConfig(p_data=0.01, p_hook=0.001))

    def test_undetectable_logical(self):
        # X sector of the repetition code has no checks but a logical operator
        with self.assertRaises(UndetectableMechanismError):
            build_phenomenological_dem(REPETITION, "X", NoiseConfig(p_data=0.01))

    def test_surface_code_duplicates(self):
        dem = build_phenomenological_dem(load_surface_d3_code(), "Z", NoiseConfig(p_data=0.01))
        self.assertEqual(dem.num_mechanisms, 9)
        self.assertEqual(len({m.key for m in dem.mechanisms}), 7)

    def test_scaled_keeps_ratio(self):
        noise = NoiseConfig(p_data=1e-3, p_meas=2e-4, rounds=3).scaled(3e-3)
        self.assertAllClose([noise.p_data, noise.p_meas], [3e-3, 6e-4])

    def test_invalid_noise(self):
        with self.assertRaises(ValueError):
            NoiseConfig(p_data=1.)
        with self.assertRaises(ValueError):
            NoiseConfig(p_data=0.1, rounds=0)


class TestSidecar(TestCase):
    def test_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "kinds.json")
            with open(path, "w") as f:
                json.dump({"0": "data", "3": "hook"}, f)
            self.assertEqual(load_sidecar(path), {0: "data", 3: "hook"})
            with open(path, "w") as f:
                json.dump({"0": "leakage"}, f)
            with self.assertRaises(ValueError):
                load_sidecar(path)


if __name__ == "__main__":
    unittest.main()
