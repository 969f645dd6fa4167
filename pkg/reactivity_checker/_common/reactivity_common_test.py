from __future__ import annotations

import json
import unittest
from fractions import Fraction

from reactivity_checker._common import reactivity_common
from reactivity_checker._common.reactivity_common import (
    BadParameter,
    CheckEntry,
    CheckReport,
    Mode,
    Verdict,
)


class TestNumbers(unittest.TestCase):
    def test_parse_fraction_rejects_floats_and_garbage(self) -> None:
        for value in (0.5, "one half", "1/0", True):
            with self.subTest(value=value):
                with self.assertRaises(BadParameter):
                    reactivity_common.parse_fraction(value)  # type: ignore[arg-type]

    def test_mode_of_is_approximate_when_any_value_is_a_float(self) -> None:
        self.assertEqual(reactivity_common.mode_of(Fraction(1, 2), 3), Mode.EXACT)
        self.assertEqual(reactivity_common.mode_of(Fraction(1, 2), 0.5), Mode.APPROXIMATE)

    def test_leq_is_exact_for_rationals(self) -> None:
        self.assertFalse(reactivity_common.leq(Fraction(1, 3) + Fraction(1, 10**12), Fraction(1, 3)))
        self.assertTrue(reactivity_common.leq(1 / 3 + 1e-12, 1 / 3))
        self.assertFalse(reactivity_common.leq(1 / 3 + 1e-6, 1 / 3))

    def test_is_tight(self) -> None:
        self.assertTrue(reactivity_common.is_tight(Fraction(2, 3), Fraction(4, 6)))
        self.assertTrue(reactivity_common.is_tight(2 / 3, Fraction(2, 3)))
        self.assertFalse(reactivity_common.is_tight(Fraction(2, 3), Fraction(3, 4)))

    def test_min_margin_depends_on_mode(self) -> None:
        config = reactivity_common.DEFAULT_CONFIG
        self.assertEqual(config.min_margin(Mode.EXACT), 0)
        self.assertEqual(config.min_margin(Mode.APPROXIMATE), 1e-9)


class TestCheckReport(unittest.TestCase):
    def setUp(self) -> None:
        self.passing = CheckEntry("decomposition.absorbing-inclusion", Verdict.PASS, pair=1)
        self.failing = CheckEntry(
            "decomposition.termination",
            Verdict.FAIL,
            witnesses=("s0", "s5"),
            slack=Fraction(-1),
            pair=1,
        )

    def test_any_failing_entry_fails_the_report_and_drops_the_bound(self) -> None:
        report = CheckReport.from_entries(
            "decomposition", [self.passing, self.failing], bound=Fraction(1)
        )
        self.assertEqual(report.verdict, Verdict.FAIL)
        self.assertIsNone(report.bound)
        self.assertEqual(report.exit_code, 1)
        self.assertEqual(report.failures(), [self.failing])

    def test_window_checks_pass_on_window(self) -> None:
        report = CheckReport.from_entries("rule1", [self.passing], on_window=True, window="-50..50")
        self.assertEqual(report.verdict, Verdict.PASS_ON_WINDOW)
        self.assertTrue(report.passed)
        self.assertEqual(report.exit_code, 0)

    def test_entry_lookup_by_tag_and_pair(self) -> None:
        report = CheckReport.from_entries("decomposition", [self.passing, self.failing])
        self.assertIs(report.entry("decomposition.termination", 1), self.failing)
        with self.assertRaises(KeyError):
            report.entry("rule1.positivity")

    def test_asdict_is_json_serializable(self) -> None:
        report = CheckReport.from_entries(
            "quant-safety",
            [self.passing],
            bound=Fraction(2, 3),
            metrics={"init_expectation": Fraction(1, 3)},
        )
        data = json.loads(json.dumps(report.asdict()))
        self.assertEqual(data["bound"], "2/3")
        self.assertEqual(data["metrics"], {"init_expectation": "1/3"})
        self.assertEqual(data["entries"][0]["verdict"], "pass")

    def test_render_names_failing_witnesses(self) -> None:
        report = CheckReport.from_entries("decomposition", [self.failing])
        text = report.render()
        self.assertIn("decomposition: fail", text)
        self.assertIn("decomposition.termination[pair 1]: fail at s0, s5", text)
