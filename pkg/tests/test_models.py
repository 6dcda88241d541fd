"""
Test cases for the RunConfig Model

"""
import json
import logging
import os
import tempfile
import unittest

import numpy as np

from shearlab import app
from shearlab.exceptions import ConfigParseError, DataValidationError
from shearlab.models import RunConfig, apply_overrides, load_config, parse_override
from shearlab.profiles import GeometryKind
from tests.factories import ScenarioFactory


######################################################################
#  R U N C O N F I G   M O D E L   T E S T   C A S E S
######################################################################
class TestRunConfig(unittest.TestCase):
    """Test Cases for RunConfig Model"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.config["TESTING"] = True
        app.config["DEBUG"] = False
        app.logger.setLevel(logging.CRITICAL)

    def setUp(self):
        """This runs before each test"""
        self.tempdir = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with

    def tearDown(self):
        """This runs after each test"""
        self.tempdir.cleanup()

    def _write(self, text: str) -> str:
        path = os.path.join(self.tempdir.name, "scenario.json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        return path

    ######################################################################
    #  T E S T   C A S E S
    ######################################################################

    def test_create_a_run_config(self):
        """It should Create a RunConfig with defaults"""
        config = RunConfig()
        self.assertIsNotNone(config)
        self.assertEqual(config.profile.kind, "couette")
        self.assertEqual(config.dt, 0.01)
        self.assertEqual(config.weight.C, 1.0)
        self.assertEqual(config.weight.beta, 0.3)
        self.assertEqual(config.weight.gamma, 0.3)
        self.assertIn("couette", repr(config))

    def test_minimal_config_is_defaulted(self):
        """It should fill defaults for a minimal Couette scenario"""
        config = RunConfig().deserialize({"profile": {"kind": "couette"}, "T": 10.0})
        self.assertEqual(config.dt, 0.01)
        self.assertEqual(config.weight.C, 1.0)
        self.assertEqual(config.weight.beta, 0.3)
        self.assertEqual(config.weight.gamma, 0.3)
        self.assertEqual(config.grid, 512)
        self.assertEqual(config.build_geometry().kind, GeometryKind.FINITE)

    def test_serialize_a_run_config(self):
        """It should serialize a RunConfig"""
        data = ScenarioFactory()
        config = RunConfig().deserialize(data)
        serial = config.serialize()
        self.assertEqual(serial["name"], data["name"])
        self.assertEqual(serial["profile"]["amplitude"], data["profile"]["amplitude"])
        self.assertEqual(serial["grid"], {"n_points": 64})
        self.assertEqual(serial["T"], 1.0)
        self.assertEqual(serial["initial"]["modes"], [1])

    def test_round_trip_is_idempotent(self):
        """It should give the same dictionary after serialize(deserialize(serialize(x)))"""
        first = RunConfig().deserialize(ScenarioFactory()).serialize()
        second = RunConfig().deserialize(json.loads(json.dumps(first))).serialize()
        self.assertEqual(first, second)

    def test_deserialize_missing_data(self):
        """It should not deserialize a RunConfig with missing data"""
        data = ScenarioFactory()
        del data["T"]
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_deserialize_bad_data(self):
        """It should not deserialize bad data"""
        data = ScenarioFactory()
        data["T"] = "forever"
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_deserialize_unknown_key(self):
        """It should reject unknown keys"""
        data = ScenarioFactory()
        data["profile"]["amplitud"] = 0.1
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_beta_out_of_range(self):
        """It should reject beta outside (0, 1/2)"""
        data = ScenarioFactory()
        data["weight"] = {"beta": 0.6}
        with self.assertRaises(DataValidationError) as context:
            RunConfig().deserialize(data)
        self.assertIn("beta out of (0,1/2)", str(context.exception))

    def test_weight_sum_gate(self):
        """It should reject 2 beta + 2 gamma <= 1"""
        data = ScenarioFactory()
        data["weight"] = {"beta": 0.2, "gamma": 0.2}
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_dt_must_divide_T(self):
        """It should reject a time step that does not divide T"""
        data = ScenarioFactory()
        data["dt"] = 0.3
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_zero_dirichlet_with_wall_values(self):
        """It should reject zero_dirichlet with a family that does not vanish at the walls"""
        data = ScenarioFactory()
        data["initial"] = {"family": "cosine", "modes": [1], "zero_dirichlet": True}
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_zero_dirichlet_with_projection(self):
        """It should accept zero_dirichlet when the data is projected"""
        data = ScenarioFactory()
        data["initial"] = {"family": "cosine", "modes": [1], "zero_dirichlet": True, "project": True}
        config = RunConfig().deserialize(data)
        profile = config.build_profile()
        states = config.build_initial_states(profile)
        for state in states:
            self.assertAlmostEqual(abs(state.w.values[0]), 0.0, places=12)
            self.assertAlmostEqual(abs(state.w.values[-1]), 0.0, places=12)

    def test_unknown_profile_kind(self):
        """It should reject an unknown profile kind"""
        data = ScenarioFactory()
        data["profile"] = {"kind": "poiseuille"}
        self.assertRaises(DataValidationError, RunConfig().deserialize, data)

    def test_initial_states_are_conjugate_pairs(self):
        """It should give mode -k the conjugate data of mode +k"""
        data = ScenarioFactory(max_mode_K=2, initial={"family": "sine", "modes": [1], "random_phase": True})
        config = RunConfig().deserialize(data)
        states = config.build_initial_states(config.build_profile())
        self.assertEqual([state.k for state in states], sorted(state.k for state in states))
        self.assertEqual(len(states), 4)
        by_k = {state.k: state for state in states}
        for k in (4.0 * np.pi, 8.0 * np.pi):
            positive = min(by_k, key=lambda key, target=k: abs(key - target))
            negative = min(by_k, key=lambda key, target=k: abs(key + target))
            np.testing.assert_allclose(by_k[negative].w.values, np.conj(by_k[positive].w.values))

    def test_random_phase_is_seeded(self):
        """It should draw the same phases for the same seed"""
        data = ScenarioFactory(initial={"family": "sine", "modes": [1], "random_phase": True}, seed=7)
        first = RunConfig().deserialize(data)
        second = RunConfig().deserialize(data)
        a = first.build_initial_states(first.build_profile())
        b = second.build_initial_states(second.build_profile())
        for left, right in zip(a, b):
            np.testing.assert_array_equal(left.w.values, right.w.values)

    def test_infinite_channel_needs_inner_support(self):
        """It should reject data that reaches the ends of [-Y, Y]"""
        data = ScenarioFactory(
            profile={"kind": "couette"},
            geometry={"kind": "infinite_truncated", "half_width": 4.0},
            initial={"family": "gaussian", "center": 0.0, "width": 2.0},
        )
        config = RunConfig().deserialize(data)
        self.assertRaises(DataValidationError, config.build_initial_states, config.build_profile())

    def test_infinite_channel_physical_domain(self):
        """It should widen the physical interval of a sine-perturbed flow on an infinite channel"""
        data = ScenarioFactory(
            profile={"kind": "sine_perturbed", "amplitude": 0.01, "wavenumber": 0.25},
            geometry={"kind": "infinite_truncated", "half_width": 4.0},
            initial={"family": "gaussian", "center": 0.0, "width": 0.25},
        )
        config = RunConfig().deserialize(data)
        low, high = config.physical_domain()
        self.assertLess(low, -4.0)
        self.assertGreater(high, 4.0)
        profile = config.build_profile()
        self.assertEqual(profile.grid.n_points, 64)

    def test_constant_coefficient_profile(self):
        """It should build the constant-coefficient surrogate"""
        data = ScenarioFactory(
            profile={"kind": "constant_coefficient", "amplitude": 0.1},
            geometry={"kind": "infinite_periodic", "half_width": 20.0},
            initial={"family": "gaussian", "width": 1.0},
        )
        config = RunConfig().deserialize(data)
        profile = config.build_profile()
        np.testing.assert_array_equal(profile.f_values, 0.1)
        self.assertTrue(profile.is_constant_g)
        self.assertTrue(profile.grid.periodic)

    def test_parse_override(self):
        """It should parse dotted overrides as JSON or strings"""
        self.assertEqual(parse_override("grid.n_points=256"), (["grid", "n_points"], 256))
        self.assertEqual(parse_override("name=run-a"), (["name"], "run-a"))
        self.assertRaises(ConfigParseError, parse_override, "grid.n_points")

    def test_apply_overrides(self):
        """It should write overrides into nested dictionaries"""
        data = apply_overrides({"grid": {"n_points": 64}}, ["grid.n_points=128", "weight.C=2.5"])
        self.assertEqual(data, {"grid": {"n_points": 128}, "weight": {"C": 2.5}})
        self.assertRaises(ConfigParseError, apply_overrides, {"T": 1.0}, ["T.value=2"])

    def test_load_config(self):
        """It should load a scenario file with overrides"""
        path = self._write(json.dumps(ScenarioFactory()))
        config = load_config(path, ["T=2.0"])
        self.assertEqual(config.T, 2.0)

    def test_load_config_syntax_error(self):
        """It should report the line of a JSON syntax error"""
        path = self._write('{\n  "T": 1.0,\n  "dt": ,\n}\n')
        with self.assertRaises(ConfigParseError) as context:
            load_config(path)
        self.assertEqual(context.exception.line, 3)

    def test_load_config_missing_file(self):
        """It should raise ConfigParseError for a missing file"""
        self.assertRaises(ConfigParseError, load_config, os.path.join(self.tempdir.name, "nope.json"))

    def test_load_config_not_an_object(self):
        """It should reject a top level that is not an object"""
        path = self._write("[1, 2, 3]")
        self.assertRaises(ConfigParseError, load_config, path)

    def test_shipped_scenarios_load(self):
        """It should load every shipped scenario"""
        root = os.path.join(os.path.dirname(os.path.dirname(__file__)), "scenarios")
        for name in sorted(os.listdir(root)):
            config = load_config(os.path.join(root, name))
            self.assertEqual(config.name + ".json", name)
