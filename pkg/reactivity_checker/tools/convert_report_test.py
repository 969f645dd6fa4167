from __future__ import annotations

import unittest

from reactivity_checker._common.reactivity_common import BadParameter
from reactivity_checker.tools import convert_report


class TestConvertReport(unittest.TestCase):
    def test_produce_document_returns_correct_document(self) -> None:
        entries = [
            {
                "tag": "decomposition.absorbing-inclusion",
                "verdict": "pass",
                "witnesses": [],
                "slack": None,
                "pair": 1,
                "note": None,
            },
            {
                "tag": "decomposition.termination",
                "verdict": "fail",
                "witnesses": ["s5"],
                "slack": "-1",
                "pair": 1,
                "note": None,
            },
            {
                "tag": "quant-safety.supermartingale",
                "verdict": "pass",
                "witnesses": [],
                "slack": "0",
                "pair": None,
                "note": "tight",
            },
        ]
        actual = convert_report.produce_document(entries)
        expected = {
            "version": 1,
            "verdict": "fail",
            "failures": ["decomposition.termination[1]"],
            "conditions": {
                "decomposition.absorbing-inclusion[1]": {
                    "tag": "decomposition.absorbing-inclusion",
                    "pair": 1,
                    "verdict": "pass",
                    "witnesses": [],
                    "slack": None,
                },
                "decomposition.termination[1]": {
                    "tag": "decomposition.termination",
                    "pair": 1,
                    "verdict": "fail",
                    "witnesses": ["s5"],
                    "slack": "-1",
                },
                "quant-safety.supermartingale": {
                    "tag": "quant-safety.supermartingale",
                    "pair": None,
                    "verdict": "pass",
                    "witnesses": [],
                    "slack": "0",
                    "note": "tight",
                },
            },
        }
        self.assertEqual(actual, expected)

    def test_repeated_conditions_keep_the_worst_verdict(self) -> None:
        entries = [
            {"tag": "rule1.positivity", "verdict": "pass-on-window", "witnesses": [], "pair": 2},
            {"tag": "rule1.positivity", "verdict": "fail", "witnesses": [0], "pair": 2},
            {"tag": "rule1.positivity", "verdict": "pass", "witnesses": [], "pair": 2},
        ]
        document = convert_report.produce_document(entries)
        condition = document["conditions"]["rule1.positivity[2]"]
        self.assertEqual(condition["verdict"], "fail")
        self.assertEqual(condition["witnesses"], [0])
        self.assertEqual(document["verdict"], "fail")

    def test_empty_input_passes(self) -> None:
        document = convert_report.produce_document([])
        self.assertEqual(document["verdict"], "pass")
        self.assertEqual(document["failures"], [])

    def test_malformed_lines_are_rejected_with_their_number(self) -> None:
        lines = ['{"tag": "rule1.positivity", "verdict": "pass"}\n', "\n", "{not json\n"]
        with self.assertRaisesRegex(BadParameter, "line 3"):
            convert_report.load_entries(lines)

    def test_entries_need_a_tag_and_a_known_verdict(self) -> None:
        for entry in ({"verdict": "pass"}, {"tag": "rule1.positivity", "verdict": "maybe"}, ["pass"]):
            with self.subTest(entry=entry):
                with self.assertRaises(BadParameter):
                    convert_report.produce_document([entry])  # type: ignore[list-item]
