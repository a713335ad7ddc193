"""Tests for the wassquant CLI functionality."""
import csv
import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path
from unittest import TestCase, mock

from wassquant.cli import CLI
from wassquant.core.measures import empirical_measure
from wassquant.core.parsers import read_measure, read_sample
from wassquant.core.rates import kmeans_k
from wassquant.core.transport import wasserstein

FIXTURES = Path(__file__).parent / "fixtures"


class CLITestCase(TestCase):
    """Shared helpers: run the CLI with captured output in a scratch directory."""

    def setUp(self):
        self.cli = CLI()
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def run_cli(self, *argv):
        with mock.patch("sys.stdout", new_callable=StringIO) as out, mock.patch(
            "sys.stderr", new_callable=StringIO
        ) as err:
            code = self.cli.run([str(a) for a in argv])
        return code, out.getvalue(), err.getvalue()


class TestGlobalOptions(CLITestCase):
    def test_version(self):
        from wassquant import __version__

        code, out, _ = self.run_cli("--version")
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), f"wassquant v{__version__}")

    def test_commands_registered(self):
        self.assertEqual(
            set(self.cli.commands), {"ot", "quantize", "rates", "decompose", "examples"}
        )

    def test_unknown_command(self):
        code, _, _ = self.run_cli("transport")
        self.assertEqual(code, 2)

    def test_no_command_prints_help(self):
        code, out, _ = self.run_cli()
        self.assertEqual(code, 0)
        self.assertIn("quantize", out)


class TestOtCommand(CLITestCase):
    """Golden outputs and exit codes of `wassquant ot`"""

    def test_golden_two_point_measures(self):
        code, out, _ = self.run_cli("ot", FIXTURES / "mu.json", FIXTURES / "nu.json")
        self.assertEqual(code, 0)
        self.assertEqual(out, (FIXTURES / "mu_ot_p2.txt").read_text())

    def test_golden_shifted_square(self):
        code, out, _ = self.run_cli(
            "ot", FIXTURES / "square.json", FIXTURES / "shifted_square.json"
        )
        self.assertEqual(code, 0)
        self.assertEqual(out, (FIXTURES / "square_shift_ot_p2.txt").read_text())

    def test_unit_distance(self):
        code, out, _ = self.run_cli(
            "ot", FIXTURES / "atom_origin.json", FIXTURES / "atom_unit.json"
        )
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "1.00000000000")

    def test_identical_files(self):
        code, out, _ = self.run_cli(
            "ot", FIXTURES / "square.json", FIXTURES / "square.json"
        )
        self.assertEqual(code, 0)
        self.assertEqual(float(out), 0.0)

    def test_matches_library_call(self):
        mu = read_measure(FIXTURES / "square.json")
        nu = read_measure(FIXTURES / "shifted_square.json")
        code, out, _ = self.run_cli(
            "ot", FIXTURES / "square.json", FIXTURES / "shifted_square.json", "--p", "1"
        )
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), f"{wasserstein(mu, nu, 1).cost:#.12g}")

    def test_plan_file(self):
        plan_path = self.tmp / "plan.json"
        code, _, err = self.run_cli(
            "ot", FIXTURES / "mu.json", FIXTURES / "nu.json", "--plan", plan_path
        )
        self.assertEqual(code, 0)
        self.assertIn("✅", err)
        plan = json.loads(plan_path.read_text())
        self.assertEqual(plan["shape"], [2, 2])
        self.assertAlmostEqual(
            sum(entry[2] for entry in plan["entries"]), 1.0, places=12
        )

    def test_malformed_file(self):
        for name in ("bad_json.json", "bad_weights.json", "ragged.json"):
            code, out, err = self.run_cli("ot", FIXTURES / name, FIXTURES / "mu.json")
            self.assertEqual(code, 2, name)
            self.assertEqual(out, "")
            self.assertIn("❌", err)

    def test_missing_file(self):
        code, _, _ = self.run_cli("ot", self.tmp / "missing.json", FIXTURES / "mu.json")
        self.assertEqual(code, 2)

    def test_dimension_mismatch(self):
        code, _, err = self.run_cli(
            "ot", FIXTURES / "mu.json", FIXTURES / "square.json"
        )
        self.assertEqual(code, 3)
        self.assertIn("Dimension mismatch", err)

    def test_invalid_order(self):
        code, _, _ = self.run_cli(
            "ot", FIXTURES / "mu.json", FIXTURES / "nu.json", "--p", "0.5"
        )
        self.assertEqual(code, 4)


class TestQuantizeCommand(CLITestCase):
    """`wassquant quantize` output files and cost"""

    def quantize(self, k, out_dir, seed=3):
        return self.run_cli(
            "quantize",
            FIXTURES / "clusters.json",
            k,
            "--seed",
            seed,
            "--out-dir",
            out_dir,
        )

    def test_writes_all_files(self):
        code, out, _ = self.quantize(3, self.tmp)
        self.assertEqual(code, 0)
        for name in ("codebook.json", "measure.json", "labels.json"):
            self.assertTrue((self.tmp / name).exists(), name)
        labels = json.loads((self.tmp / "labels.json").read_text())
        self.assertEqual(labels["k"], 3)
        self.assertEqual(len(labels["labels"]), 12)
        measure = read_measure(self.tmp / "measure.json")
        for w in measure.weights:
            self.assertAlmostEqual(w * 12, round(w * 12), places=9)
        self.assertGreater(float(out), 0.0)

    def test_printed_cost_matches_ot(self):
        code, out, _ = self.quantize(3, self.tmp)
        self.assertEqual(code, 0)
        ot_code, ot_out, _ = self.run_cli(
            "ot", FIXTURES / "clusters.json", self.tmp / "measure.json"
        )
        self.assertEqual(ot_code, 0)
        self.assertAlmostEqual(float(out), float(ot_out) ** 2, delta=1e-9)

    def test_k_equals_n_reproduces_the_sample(self):
        code, out, _ = self.quantize(12, self.tmp)
        self.assertEqual(code, 0)
        self.assertEqual(float(out), 0.0)
        sample = read_sample(FIXTURES / "clusters.json")
        self.assertTrue(
            read_measure(self.tmp / "measure.json").equals(empirical_measure(sample))
        )

    def test_fixed_seed_gives_identical_files(self):
        first, second = self.tmp / "a", self.tmp / "b"
        self.quantize(4, first)
        self.quantize(4, second)
        for name in ("codebook.json", "measure.json", "labels.json"):
            self.assertEqual(
                (first / name).read_bytes(), (second / name).read_bytes(), name
            )

    def test_k_too_large(self):
        code, _, err = self.quantize(13, self.tmp)
        self.assertEqual(code, 4)
        self.assertIn("distinct", err)

    def test_dimension_flag_mismatch(self):
        code, _, _ = self.run_cli(
            "quantize", FIXTURES / "clusters.json", 2, "--dim", 3, "--out-dir", self.tmp
        )
        self.assertEqual(code, 3)


class TestRatesCommand(CLITestCase):
    """`wassquant rates` artifacts"""

    def test_artifacts(self):
        svg = self.tmp / "plot.svg"
        code, out, _ = self.run_cli(
            "rates", FIXTURES / "rates_small.json", "--out-dir", self.tmp, "--svg", svg
        )
        self.assertEqual(code, 0)
        headline = json.loads(out)
        self.assertEqual(set(headline), {"slope", "stderr", "band", "passed"})

        with open(self.tmp / "rates.csv", newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        columns = ["mode", "sampler", "d", "D", "n", "k", "trial", "distance", "seed"]
        self.assertEqual(list(rows[0]), columns)
        self.assertEqual(len(rows), 9)
        for row in rows:
            self.assertEqual(row["mode"], "kmeans")
            self.assertEqual(int(row["k"]), kmeans_k(int(row["n"]), 1))

        summary = json.loads((self.tmp / "summary.json").read_text())
        self.assertEqual(summary["slope"], headline["slope"])
        self.assertIn("passed", summary)
        self.assertIn("<svg", svg.read_text())

    def test_rerun_gives_identical_csv(self):
        first, second = self.tmp / "a", self.tmp / "b"
        self.run_cli("rates", FIXTURES / "rates_small.json", "--out-dir", first)
        self.run_cli("rates", FIXTURES / "rates_small.json", "--out-dir", second)
        self.assertEqual(
            (first / "rates.csv").read_bytes(), (second / "rates.csv").read_bytes()
        )

    def test_seed_override_changes_the_trials(self):
        first, second = self.tmp / "a", self.tmp / "b"
        self.run_cli("rates", FIXTURES / "rates_small.json", "--out-dir", first)
        self.run_cli(
            "rates", FIXTURES / "rates_small.json", "--out-dir", second, "--seed", 99
        )
        self.assertNotEqual(
            (first / "rates.csv").read_bytes(), (second / "rates.csv").read_bytes()
        )

    def test_schema_violations(self):
        names = (
            "bad_schema.json",
            "unknown_key.json",
            "bad_json.json",
            "bad_dim_type.json",
            "bad_seed_type.json",
            "bad_grid_type.json",
            "fractional_grid.json",
            "kmeans_point_mass.json",
        )
        for name in names:
            code, _, err = self.run_cli("rates", FIXTURES / name, "--out-dir", self.tmp)
            self.assertEqual(code, 2, name)
            self.assertIn("❌", err)

    def test_threads_env_is_validated(self):
        with mock.patch.dict("os.environ", {"WASSQUANT_THREADS": "many"}):
            code, _, _ = self.run_cli(
                "rates", FIXTURES / "rates_small.json", "--out-dir", self.tmp
            )
        self.assertEqual(code, 2)


class TestDecomposeCommand(CLITestCase):
    def test_prints_terms(self):
        code, out, _ = self.run_cli(
            "decompose", FIXTURES / "decompose_small.json", "--out-dir", self.tmp
        )
        self.assertEqual(code, 0)
        record = json.loads(out)
        keys = ("a", "b", "c", "d", "e", "f", "empirical_distance", "kmeans_distance")
        for key in keys:
            self.assertGreaterEqual(record[key], 0.0)
        self.assertTrue(record["approximate_quantizer"])
        self.assertEqual(
            json.loads((self.tmp / "decomposition.json").read_text()), record
        )

    def test_overrides(self):
        code, out, _ = self.run_cli(
            "decompose", FIXTURES / "decompose_small.json", "--k", 2
        )
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["k"], 2)

    def test_k_above_n(self):
        code, _, _ = self.run_cli(
            "decompose", FIXTURES / "decompose_small.json", "--k", 49
        )
        self.assertEqual(code, 4)

    def test_requires_section(self):
        code, _, _ = self.run_cli("decompose", FIXTURES / "rates_small.json")
        self.assertEqual(code, 2)


class TestExamplesCommand(CLITestCase):
    def test_creates_runnable_examples(self):
        code, _, err = self.run_cli("examples", self.tmp)
        self.assertEqual(code, 0)
        self.assertIn("Created example file", err)
        code, out, _ = self.run_cli("ot", self.tmp / "mu.json", self.tmp / "nu.json")
        self.assertEqual(code, 0)
        self.assertEqual(out, (FIXTURES / "mu_ot_p2.txt").read_text())
        code, _, _ = self.run_cli(
            "quantize", self.tmp / "sample.json", 5, "--out-dir", self.tmp / "q"
        )
        self.assertEqual(code, 0)
