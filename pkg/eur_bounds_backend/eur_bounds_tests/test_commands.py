import csv
import json
import math
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from eur_bounds_algo.serialization import load_spec

FIXTURES = Path(__file__).resolve().parent / "fixtures"
QUBIT_XZ = str(FIXTURES / "qubit_xz.json")
LN2 = math.log(2)


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.tmp = Path(directory.name)

    def run_json(self, *args):
        out = StringIO()
        call_command(*args, stdout=out)
        return json.loads(out.getvalue())


class TestBoundEntropy(CommandTestCase):
    def test_qubit_mutually_unbiased_bases(self):
        """Test the X/Z result printed to stdout"""
        result = self.run_json("bound_entropy", QUBIT_XZ)
        self.assertTrue(result["bounds"]["converged"])
        self.assertLessEqual(result["bounds"]["h_minus"], 1.5 * LN2 + 1e-9)
        self.assertGreaterEqual(result["bounds"]["h_plus"], 1.5 * LN2 - 1e-9)
        self.assertAlmostEqual(result["q"]["q_shannon_sum"], LN2, delta=2e-6)
        self.assertEqual(result["n_measurements"], 2)
        self.assertTrue(result["input_digest"].startswith("sha256:"))

    def test_tsallis_entropy(self):
        """Test the Tsallis-2 sum bound of X and Z"""
        result = self.run_json(
            "bound_entropy", QUBIT_XZ, "--entropy", "tsallis", "--alpha", "2"
        )
        self.assertAlmostEqual(result["q"]["q_tsallis"], 0.5, delta=2e-6)
        self.assertIsNone(result["q"]["q_shannon_sum"])

    def test_missing_alpha(self):
        """Test that Tsallis without an order is rejected"""
        with self.assertRaises(CommandError):
            call_command("bound_entropy", QUBIT_XZ, "--entropy", "tsallis")

    def test_malformed_input(self):
        """Test that a broken file fails with a parse error"""
        broken = self.tmp / "broken.json"
        broken.write_text('{"dim": 2,')
        with self.assertRaises(CommandError) as caught:
            call_command("bound_entropy", str(broken), stdout=StringIO())
        self.assertTrue(str(caught.exception).startswith("ParseError"))
        self.assertEqual(caught.exception.returncode, 1)

    def test_unconverged_run_still_writes_its_result(self):
        """Test the iteration cap: exit status 2 and a valid result file"""
        output = self.tmp / "result.json"
        with self.assertRaises(CommandError) as caught:
            call_command(
                "bound_entropy",
                QUBIT_XZ,
                "--max-iter",
                "1",
                "--output",
                str(output),
                stdout=StringIO(),
            )
        self.assertEqual(caught.exception.returncode, 2)
        result = json.loads(output.read_text())
        self.assertFalse(result["bounds"]["converged"])
        self.assertEqual(result["bounds"]["stop_reason"], "max_iterations")

    def test_deterministic_output(self):
        """Test that equal runs write byte-identical files"""
        first, second = self.tmp / "first.json", self.tmp / "second.json"
        for path in (first, second):
            call_command(
                "bound_entropy", QUBIT_XZ, "--output", str(path), stdout=StringIO()
            )
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_trace_and_polytope_dump(self):
        """Test the diagnostic side files"""
        trace, dump = self.tmp / "trace.json", self.tmp / "poly.txt"
        call_command(
            "bound_entropy",
            QUBIT_XZ,
            "--output",
            str(self.tmp / "result.json"),
            "--trace",
            str(trace),
            "--dump-polytope",
            str(dump),
            stdout=StringIO(),
        )
        records = json.loads(trace.read_text())
        self.assertEqual(records[0]["index"], 1)
        lines = dump.read_text().splitlines()
        self.assertTrue(any(line.startswith("H ") for line in lines))
        self.assertTrue(any(line.startswith("V ") for line in lines))

    def test_polytope_dump_of_a_state_independent_measurement(self):
        """Test the empty dump and warning for a state-independent measurement"""
        dump, out, err = self.tmp / "poly.txt", StringIO(), StringIO()
        call_command(
            "bound_entropy",
            str(FIXTURES / "qubit_trivial_povm.json"),
            "--dump-polytope",
            str(dump),
            stdout=out,
            stderr=err,
        )
        result = json.loads(out.getvalue())
        self.assertEqual(result["bounds"]["stop_reason"], "degenerate")
        self.assertAlmostEqual(result["bounds"]["h_minus"], LN2, places=12)
        self.assertEqual(dump.read_text(), "")
        self.assertIn("No polytope to dump", err.getvalue())

    def test_bits_and_timing(self):
        """Test unit conversion and the opt-in timing section"""
        result = self.run_json("bound_entropy", QUBIT_XZ, "--bits", "--timing")
        self.assertEqual(result["units"], "bits")
        self.assertAlmostEqual(result["q"]["q_shannon_sum"], 1.0, delta=1e-5)
        self.assertIn("seconds", result["timing"])


class TestCompareBounds(CommandTestCase):
    def test_qubit_mutually_unbiased_bases(self):
        """Test that all four bounds agree on ln 2 for X and Z"""
        result = self.run_json("compare_bounds", QUBIT_XZ)
        for name in ("q_mu", "q_cp", "q_rpz"):
            self.assertAlmostEqual(result["analytic"][name], LN2, places=12)
        self.assertAlmostEqual(result["q_optimal"], LN2, delta=1e-5)
        self.assertTrue(result["dominance"]["holds"])

    def test_identical_bases(self):
        """Test that a basis measured twice gives zero everywhere"""
        result = self.run_json("compare_bounds", str(FIXTURES / "qubit_zz.json"))
        for name in ("q_mu", "q_cp", "q_rpz"):
            self.assertAlmostEqual(result["analytic"][name], 0.0, places=9)
        self.assertAlmostEqual(result["q_optimal"], 0.0, places=9)
        self.assertFalse(result["analytic"]["degenerate_overlap"])

    def test_povm_input_is_rejected(self):
        """Test that closed-form bounds need two bases"""
        with self.assertRaises(CommandError) as caught:
            call_command("compare_bounds", str(FIXTURES / "qubit_z_povm.json"))
        self.assertTrue(str(caught.exception).startswith("NotBases"))


class TestRandomPovm(CommandTestCase):
    def test_generated_file_is_valid_and_reproducible(self):
        """Test seeded generation of a specification file"""
        first, second = self.tmp / "a.json", self.tmp / "b.json"
        for path in (first, second):
            call_command(
                "random_povm", "3", "4", "7", "--output", str(path), stdout=StringIO()
            )
        self.assertEqual(first.read_bytes(), second.read_bytes())
        spec, _ = load_spec(first)
        self.assertEqual(spec.dim, 3)
        self.assertEqual(spec.measurements[0].values.shape, (4, 3, 3))

    def test_invalid_sizes(self):
        """Test that d = 1 is rejected"""
        with self.assertRaises(CommandError):
            call_command("random_povm", "1", "4", "7")


class TestSweepBounds(CommandTestCase):
    def test_m2_sweep_writes_csv_and_json(self):
        """Test a short M2 sweep"""
        prefix = self.tmp / "m2"
        call_command(
            "sweep_bounds",
            "--family",
            "M2",
            "--points",
            "2",
            "--jobs",
            "1",
            "--output",
            str(prefix),
            stdout=StringIO(),
        )
        with open(self.tmp / "m2.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(len(rows), 2)
        self.assertEqual(
            set(rows[0]),
            {
                "theta",
                "q_optimal",
                "gap",
                "q_mu",
                "q_cp",
                "q_rpz",
                "iterations",
                "vertex_count_max",
            },
        )
        for row in rows:
            self.assertGreaterEqual(
                float(row["q_optimal"]),
                max(float(row[name]) for name in ("q_mu", "q_cp", "q_rpz")) - 2e-6,
            )
        result = json.loads((self.tmp / "m2.json").read_text())
        self.assertEqual(result["family"], "M2")
        self.assertEqual(len(result["points"]), 2)

    def test_custom_family_needs_input(self):
        """Test that --family custom requires --input"""
        with self.assertRaises(CommandError):
            call_command(
                "sweep_bounds", "--family", "custom", "--output", str(self.tmp / "x")
            )

    def test_input_only_with_custom_family(self):
        """Test that --input is refused for built-in families"""
        with self.assertRaises(CommandError):
            call_command(
                "sweep_bounds",
                "--family",
                "M2",
                "--input",
                QUBIT_XZ,
                "--output",
                str(self.tmp / "x"),
            )


class TestSteeringThresholds(CommandTestCase):
    def test_qubit_mutually_unbiased_bases(self):
        """Test the X/Z steering threshold 1/sqrt(2)"""
        comparison = self.tmp / "maj.csv"
        comparison.write_text("q\n0.25\n")
        call_command(
            "steering_thresholds",
            "--family",
            "custom",
            "--input",
            QUBIT_XZ,
            "--jobs",
            "1",
            "--comparison",
            str(comparison),
            "--output",
            str(self.tmp / "steering"),
            stdout=StringIO(),
        )
        with open(self.tmp / "steering.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(len(rows), 1)
        eta = float(rows[0]["eta_threshold"])
        self.assertAlmostEqual(eta, 1 / math.sqrt(2), places=4)
        self.assertEqual(rows[0]["clamped"], "false")
        self.assertAlmostEqual(float(rows[0]["comparison_eta"]), math.sqrt(0.75))


class TestOracleMinEntropy(CommandTestCase):
    def test_single_basis(self):
        """Test the brute-force estimate for one basis"""
        result = self.run_json(
            "oracle_min_entropy",
            str(FIXTURES / "qubit_z_povm.json"),
            "--samples",
            "1000",
        )
        self.assertLessEqual(result["h_estimate"], 1e-9)
        self.assertEqual(result["samples"], 1000)
