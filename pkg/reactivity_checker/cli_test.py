from __future__ import annotations

import json
import pathlib
import unittest

from click.testing import CliRunner

from reactivity_checker.__main__ import cli

ONE_STATE = {
    "version": 1,
    "chain": {"states": ["s0"], "initial": {"s0": 1}, "transitions": {"s0": {"s0": 1}}},
}


class TestCli(unittest.TestCase):
    def setUp(self) -> None:
        self.runner = CliRunner()

    def test_solve_bundled_model(self) -> None:
        result = self.runner.invoke(cli, ["solve", "threeway"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(result.output, "2/3\n")

    def test_solve_per_state(self) -> None:
        result = self.runner.invoke(cli, ["solve", "leaky", "--per-state"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("s0\t2/3", result.output.splitlines())
        self.assertIn("s5\t0", result.output.splitlines())

    def test_empty_condition_holds_surely(self) -> None:
        with self.runner.isolated_filesystem():
            pathlib.Path("model.json").write_text(json.dumps(ONE_STATE), encoding="utf-8")
            result = self.runner.invoke(cli, ["solve", "model.json"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(result.output, "1\n")

    def test_malformed_model_exits_with_two(self) -> None:
        bad = json.loads(json.dumps(ONE_STATE))
        bad["chain"]["transitions"]["s0"]["s0"] = "9/10"
        with self.runner.isolated_filesystem():
            pathlib.Path("bad.json").write_text(json.dumps(bad), encoding="utf-8")
            result = self.runner.invoke(cli, ["solve", "bad.json"])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("error: chain/transitions/s0", result.output)

    def test_unknown_fixture_exits_with_two(self) -> None:
        result = self.runner.invoke(cli, ["solve", "nosuch"])
        self.assertEqual(result.exit_code, 2)

    def test_failing_certificate(self) -> None:
        result = self.runner.invoke(cli, ["check", "threeway", "threeway-decomposition-bad"])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("decomposition: fail", result.output)
        self.assertIn("s5", result.output)

    def test_passing_certificate_as_json(self) -> None:
        result = self.runner.invoke(
            cli, ["check", "leaky", "leaky-decomposition", "--format", "json"]
        )
        self.assertEqual(result.exit_code, 0, result.output)
        report = json.loads(result.output)
        self.assertEqual(report["verdict"], "pass")
        self.assertEqual(report["bound"], "2/3")

    def test_window_override(self) -> None:
        result = self.runner.invoke(
            cli, ["check", "lending-casino", "casino-rule2", "--window=-20..20"]
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("window: -20..20", result.output)

    def test_synthesized_certificate_checks(self) -> None:
        for rule in ("decomposition", "rule1", "rule2"):
            with self.subTest(rule=rule), self.runner.isolated_filesystem():
                result = self.runner.invoke(
                    cli, ["synthesize", "leaky", "--rule", rule, "--out", "cert.json"]
                )
                self.assertEqual(result.exit_code, 0, result.output)
                checked = self.runner.invoke(cli, ["check", "leaky", "cert.json"])
                self.assertEqual(checked.exit_code, 0, checked.output)

    def test_product(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ["product", "threeway", "threeway-product.json"])
            self.assertEqual(result.exit_code, 0, result.output)
            solved = self.runner.invoke(cli, ["solve", "threeway-product.json"])
        self.assertEqual(solved.output, "2/3\n")

    def test_product_needs_an_automaton(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ["product", "lending-casino", "out.json"])
        self.assertEqual(result.exit_code, 2)

    def test_orey(self) -> None:
        result = self.runner.invoke(cli, ["orey", "twoway"])
        self.assertEqual(result.output, "false 0\n")
        result = self.runner.invoke(cli, ["orey", "twoway", "--pair", "2"])
        self.assertEqual(result.exit_code, 2)

    def test_simulate_writes_csv(self) -> None:
        result = self.runner.invoke(
            cli,
            [
                "simulate",
                "lending-casino(1/5)",
                "--steps", "20",
                "--trajectories", "2",
                "--seed", "3",
                "--stride", "5",
            ],
        )
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.output.splitlines()
        self.assertEqual(lines[0], "trajectory,n,state,statistic")
        self.assertEqual(len(lines), 1 + 2 * 5)
        self.assertEqual(lines[1], "0,0,1,1.0")

    def test_simulate_needs_a_statistic_for_other_families(self) -> None:
        result = self.runner.invoke(
            cli,
            ["simulate", "biased-walk(1/3)", "--steps", "5", "--trajectories", "1", "--seed", "0"],
        )
        self.assertEqual(result.exit_code, 2)

    def test_bound(self) -> None:
        result = self.runner.invoke(
            cli,
            [
                "bound",
                "lending-casino(1/5)",
                "--target", "Solvency",
                "--window=-2..1",
                "--from=-1",
            ],
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(
            json.loads(result.output), {"lower": "10/19", "upper": "1", "width": "9/19"}
        )

    def test_fixtures(self) -> None:
        result = self.runner.invoke(cli, ["fixtures"])
        lines = result.output.splitlines()
        self.assertIn("threeway\tthreeway.json", lines)
        self.assertTrue(any(line.startswith("family lending-casino(epsilon)") for line in lines))

    def test_to_document(self) -> None:
        with self.runner.isolated_filesystem():
            checked = self.runner.invoke(
                cli, ["check", "threeway", "threeway-decomposition-bad", "--format", "jsonl"]
            )
            pathlib.Path("entries.jsonl").write_text(checked.output, encoding="utf-8")
            result = self.runner.invoke(cli, ["to-document", "entries.jsonl", "report.json"])
            self.assertEqual(result.exit_code, 0, result.output)
            document = json.loads(pathlib.Path("report.json").read_text(encoding="utf-8"))
        self.assertEqual(document["verdict"], "fail")
        self.assertIn("decomposition.termination[1]", document["failures"])

    def test_to_document_rejects_malformed_lines(self) -> None:
        with self.runner.isolated_filesystem():
            pathlib.Path("entries.jsonl").write_text('{"tag": "rule1.positivity"\n', encoding="utf-8")
            result = self.runner.invoke(cli, ["to-document", "entries.jsonl", "report.json"])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("error: line 1", result.output)
