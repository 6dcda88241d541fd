"""
CLI Command Extensions for Flask
"""
import json
import logging
import tempfile
from pathlib import Path
from unittest import TestCase

from shearlab import app
from shearlab.common import status
from tests.factories import ScenarioFactory


class TestFlaskCLI(TestCase):
    """Test Flask CLI Commands"""

    @classmethod
    def setUpClass(cls):
        app.logger.setLevel(logging.CRITICAL)

    def setUp(self):
        self.runner = app.test_cli_runner()
        self.tempdir = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.root = Path(self.tempdir.name)
        self.scenario = ScenarioFactory()
        self.config_path = self._write_config(self.scenario)

    def tearDown(self):
        self.tempdir.cleanup()

    def _write_config(self, data, name="scenario.json") -> str:
        path = self.root / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def _simulate(self, out: Path):
        return self.runner.invoke(args=["simulate", "--config", self.config_path, "--out", str(out), "--threads", "1"])

    def test_show_config(self):
        """It should print the scenario with defaults and overrides applied"""
        result = self.runner.invoke(args=["show-config", "--config", self.config_path, "--override", "T=2.0"])
        self.assertEqual(result.exit_code, status.EXIT_OK)
        shown = json.loads(result.output)
        self.assertEqual(shown["T"], 2.0)
        self.assertEqual(shown["weight"]["beta"], 0.3)

    def test_bad_config(self):
        """It should exit with EXIT_BAD_CONFIG for unreadable or invalid scenarios"""
        broken = self.root / "broken.json"
        broken.write_text("{ not json", encoding="utf-8")
        result = self.runner.invoke(args=["show-config", "--config", str(broken)])
        self.assertEqual(result.exit_code, status.EXIT_BAD_CONFIG)
        result = self.runner.invoke(args=["show-config", "--config", self.config_path, "--override", "dt=0.3"])
        self.assertEqual(result.exit_code, status.EXIT_BAD_CONFIG)
        missing = str(self.root / "nowhere.json")
        result = self.runner.invoke(args=["simulate", "--config", missing])
        self.assertEqual(result.exit_code, status.EXIT_BAD_CONFIG)

    def test_simulate(self):
        """It should write mode tables, a summary and a manifest"""
        out = self.root / "run"
        result = self._simulate(out)
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertIn("OVERALL", result.output)
        tables = sorted(out.glob("mode_k*.csv"))
        self.assertEqual(len(tables), 2)
        self.assertTrue((out / "summary.txt").exists())
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        self.assertEqual(manifest["config"]["name"], self.scenario["name"])
        self.assertIn(tables[0].name, manifest["artifacts"])
        header = tables[0].read_text(encoding="utf-8").splitlines()[0]
        self.assertTrue(header.startswith("t,l2_norm,h1_norm,h2_norm,I0,I1,I2"))

    def test_simulate_is_reproducible(self):
        """It should write byte-identical tables for identical inputs"""
        first, second = self.root / "first", self.root / "second"
        self.assertEqual(self._simulate(first).exit_code, status.EXIT_OK)
        self.assertEqual(self._simulate(second).exit_code, status.EXIT_OK)
        for table in sorted(first.glob("mode_k*.csv")):
            self.assertEqual(table.read_bytes(), (second / table.name).read_bytes())
        self.assertEqual((first / "manifest.json").read_bytes(), (second / "manifest.json").read_bytes())

    def test_reports(self):
        """It should fit decay rates and count energy violations of a finished run"""
        out = self.root / "run"
        self.assertEqual(self._simulate(out).exit_code, status.EXIT_OK)
        result = self.runner.invoke(args=["decay-report", "--run", str(out)])
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertTrue((out / "decay_report.csv").exists())
        self.assertIn("v2_norm", result.output)

        table = sorted(out.glob("mode_k*.csv"))[0]
        report = self.root / "energy.csv"
        result = self.runner.invoke(args=["energy-report", "--csv", str(table), "--out", str(report)])
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertIn("I0:", result.output)
        self.assertTrue(report.exists())

    def test_blowup_command(self):
        """It should write the log-growth table for each horizon"""
        scenario = ScenarioFactory(
            profile={"kind": "sine_perturbed", "amplitude": 0.05, "phase": 1.5707963267948966},
            initial={"family": "cosine", "modes": [1]},
        )
        path = self._write_config(scenario, "blowup.json")
        out = self.root / "blowup"
        result = self.runner.invoke(args=["blowup-probe", "--config", path, "--horizons", "1,2", "--out", str(out)])
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertTrue((out / "blowup.csv").exists())
        self.assertIn("log_growth T=2", result.output)

    def test_oracle(self):
        """It should write the Couette and constant-coefficient oracle tables"""
        out = self.root / "oracle"
        result = self.runner.invoke(args=["oracle", "--samples", "20", "--t-max", "50", "--out", str(out)])
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertTrue((out / "oracle_decay.csv").exists())
        self.assertTrue((out / "oracle_propagator.csv").exists())
        self.assertIn("v2_norm: exponent", result.output)
        result = self.runner.invoke(args=["oracle", "--k", "0", "--out", str(out)])
        self.assertEqual(result.exit_code, status.EXIT_BAD_CONFIG)

    def test_verify_basis(self):
        """It should tabulate analytic, printed and numeric coefficients"""
        out = self.root / "basis"
        args = [
            "verify-basis", "--basis", "exp", "--index-max", "1", "--ks", "1", "--times", "0",
            "--n-points", "129", "--threads", "1", "--out", str(out),
        ]
        result = self.runner.invoke(args=args)
        self.assertEqual(result.exit_code, status.EXIT_OK, result.output)
        self.assertIn("9 coefficients", result.output)
        lines = (out / "verify_basis_exp.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 10)
        self.assertTrue(lines[0].startswith("n,m,k,t,analytic_re"))
