from __future__ import annotations

import json
import unittest
from fractions import Fraction

import reactivity_checker
from reactivity_checker._common.reactivity_common import (
    ModelSyntaxError,
    ModelValidationError,
    Verdict,
)
from reactivity_checker.chain.markov import Region
from reactivity_checker.io import model_format
from reactivity_checker.oracle import exact
from reactivity_checker.synthesis import regions


def _text(name: str) -> str:
    return reactivity_checker.model_path(name).read_text(encoding="utf-8")


def _explicit(rows: dict, **extra: object) -> str:
    data = {
        "version": 1,
        "chain": {"states": sorted(rows), "initial": {"s0": 1}, "transitions": rows},
        **extra,
    }
    return json.dumps(data)


ROWS = {"s0": {"s0": "1/2", "s1": "1/2"}, "s1": {"s1": 1}}


class TestParseModel(unittest.TestCase):
    def test_row_that_does_not_sum_to_one(self) -> None:
        rows = {"s0": {"s0": "1/2", "s1": "2/5"}, "s1": {"s1": 1}}
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_model(_explicit(rows))
        self.assertEqual(ctx.exception.path, "chain/transitions/s0")
        self.assertIn("9/10", ctx.exception.message)

    def test_float_probabilities_are_rejected(self) -> None:
        rows = {"s0": {"s0": 0.5, "s1": "1/2"}, "s1": {"s1": 1}}
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_model(_explicit(rows))
        self.assertTrue(ctx.exception.path.startswith("chain"))

    def test_syntax_errors_carry_a_position(self) -> None:
        with self.assertRaises(ModelSyntaxError) as ctx:
            model_format.parse_model('{"version": 1,\n  "chain": }')
        self.assertEqual((ctx.exception.line, ctx.exception.column), (2, 12))

    def test_streett_pairs_must_name_regions(self) -> None:
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_model(
                _explicit(ROWS, regions={"A": ["s1"]}, streett=[["A", "Z"]])
            )
        self.assertEqual(ctx.exception.path, "streett/0")

    def test_regions_must_list_known_states(self) -> None:
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_model(_explicit(ROWS, regions={"A": ["s7"]}))
        self.assertEqual(ctx.exception.path, "regions/A")

    def test_builtin_families_reject_labels(self) -> None:
        text = json.dumps(
            {
                "version": 1,
                "chain": {"family": "lending-casino", "parameters": {"epsilon": "1/5"}},
                "labels": {"0": ["solvency"]},
            }
        )
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_model(text)
        self.assertEqual(ctx.exception.path, "labels")

    def test_serialized_documents_parse_back(self) -> None:
        for name in ("twoway", "threeway", "leaky", "lending-casino", "casino-truncated-debt"):
            with self.subTest(name=name):
                document = model_format.parse_model(_text(name))
                again = model_format.parse_model(model_format.serialize_model(document))
                self.assertEqual(again.data, document.data)

    def test_document_from_chain_keeps_the_oracle_value(self) -> None:
        model = model_format.load_model(_text("leaky"))
        document = model_format.document_from_chain(
            model.chain, {"A": model.region("A"), "B": model.region("B")}, [("A", "B")]
        )
        rebuilt = document.build()
        self.assertEqual(rebuilt.region("A").members, frozenset({"s1", "s3", "s5"}))
        self.assertEqual(
            exact.streett_probability(rebuilt.chain, rebuilt.condition), Fraction(2, 3)
        )


class TestBundledFixtures(unittest.TestCase):
    def check(self, model_name: str, certificate_name: str):  # type: ignore[no-untyped-def]
        model = model_format.load_model(_text(model_name))
        certificate = model_format.parse_certificate(_text(certificate_name))
        return model_format.check_certificate(model, certificate)

    def test_oracle_values(self) -> None:
        for name, expected in (("twoway", 1), ("threeway", Fraction(2, 3)), ("leaky", Fraction(2, 3))):
            with self.subTest(name=name):
                model = model_format.load_model(_text(name))
                self.assertEqual(exact.streett_probability(model.chain, model.condition), expected)

    def test_fixture_list_is_complete(self) -> None:
        self.assertEqual(
            sorted(reactivity_checker.available_models()),
            [
                "casino-rule1",
                "casino-rule2",
                "casino-truncated-debt",
                "leaky",
                "leaky-decomposition",
                "leaky-qual-safety",
                "lending-casino",
                "threeway",
                "threeway-decomposition-bad",
                "threeway-quant-safety",
                "twoway",
                "twoway-decomposition",
            ],
        )

    def test_threeway_decomposition_fails_at_s5(self) -> None:
        report = self.check("threeway", "threeway-decomposition-bad")
        self.assertEqual(report.verdict, Verdict.FAIL)
        self.assertEqual(report.exit_code, 1)
        self.assertIn("s5", report.entry("decomposition.termination", 1).witnesses)

    def test_leaky_decomposition(self) -> None:
        report = self.check("leaky", "leaky-decomposition")
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(report.bound, Fraction(2, 3))

    def test_twoway_decomposition(self) -> None:
        report = self.check("twoway", "twoway-decomposition")
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(report.bound, 1)

    def test_threeway_quant_safety(self) -> None:
        report = self.check("threeway", "threeway-quant-safety")
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(report.bound, Fraction(2, 3))

    def test_leaky_qual_safety(self) -> None:
        report = self.check("leaky", "leaky-qual-safety")
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(report.metrics["gamma"], Fraction(1, 2))

    def test_casino_rules_pass_on_their_window(self) -> None:
        for name in ("casino-rule1", "casino-rule2"):
            with self.subTest(name=name):
                report = self.check("lending-casino", name)
                self.assertEqual(report.verdict, Verdict.PASS_ON_WINDOW)
                self.assertEqual(report.window, "-50..50")
                self.assertEqual(report.bound, 1)
                self.assertEqual(report.exit_code, 0)

    def test_certificate_field_requirements(self) -> None:
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.parse_certificate(json.dumps({"version": 1, "rule": "decomposition"}))
        self.assertEqual(ctx.exception.path, "invariant")

    def test_unknown_region_in_a_certificate(self) -> None:
        model = model_format.load_model(_text("threeway"))
        certificate = model_format.parse_certificate(
            json.dumps({"version": 1, "rule": "decomposition", "invariant": "Q", "absorbing": []})
        )
        with self.assertRaises(ModelValidationError) as ctx:
            model_format.check_certificate(model, certificate)
        self.assertEqual(ctx.exception.path, "invariant")

    def test_integer_states_must_lie_in_a_truncated_universe(self) -> None:
        model = model_format.load_model(_text("casino-truncated-debt"))
        for field, value, path in (
            ("region", [0, 1, 99], "region"),
            ("v", {"table": {"0": "1/2", "99": 1}}, "v/table/99"),
        ):
            data = {"version": 1, "rule": "quant-safety", "region": "Solvency", "v": {"table": {"0": 0}}}
            data[field] = value
            certificate = model_format.parse_certificate(json.dumps(data))
            with self.subTest(field=field):
                with self.assertRaises(ModelValidationError) as ctx:
                    model_format.check_certificate(model, certificate)
                self.assertEqual(ctx.exception.path, path)


class TestSynthesizedCertificates(unittest.TestCase):
    def setUp(self) -> None:
        self.model = model_format.load_model(_text("leaky"))
        self.invariant = self.model.region("I")

    def test_decomposition_document_names_known_regions(self) -> None:
        absorbing = regions.synthesize_absorbing(
            self.model.chain, self.invariant, self.model.region("A")
        )
        document = model_format.certificate_document(
            "decomposition", self.model, invariant=self.invariant, absorbing=[absorbing]
        )
        self.assertEqual(document.data["invariant"], "I")
        self.assertEqual(document.data["absorbing"], [["s2", "s4", "s6"]])
        report = model_format.check_certificate(self.model, document)
        self.assertEqual(report.bound, Fraction(2, 3))

    def test_rule_bundles_survive_serialization(self) -> None:
        cond = self.model.condition
        for rule, bundle in (
            ("rule1", regions.synthesize_rule1_bundle(self.model.chain, cond, self.invariant)),
            ("rule2", regions.synthesize_rule2_bundle(self.model.chain, cond, self.invariant)),
        ):
            with self.subTest(rule=rule):
                document = model_format.certificate_document(rule, self.model, bundle=bundle)
                parsed = model_format.parse_certificate(model_format.serialize_certificate(document))
                report = model_format.check_certificate(self.model, parsed)
                self.assertEqual(report.verdict, Verdict.PASS)
                self.assertEqual(report.bound, Fraction(2, 3))

    def test_bundles_with_stuck_states_reload_and_fail(self) -> None:
        model = model_format.load_model(_text("threeway"))
        everything = Region.of("S", model.chain.universe)
        for rule, bundle in (
            ("rule1", regions.synthesize_rule1_bundle(model.chain, model.condition, everything)),
            ("rule2", regions.synthesize_rule2_bundle(model.chain, model.condition, everything)),
        ):
            with self.subTest(rule=rule):
                w = bundle.pairs[0].w
                self.assertEqual((w("s0"), w("s5")), (0, 0))
                document = model_format.certificate_document(rule, model, bundle=bundle)
                self.assertEqual(len(document.data["pairs"][0]["w"]["table"]), 6)
                parsed = model_format.parse_certificate(model_format.serialize_certificate(document))
                report = model_format.check_certificate(model, parsed)
                self.assertEqual(report.verdict, Verdict.FAIL)
                self.assertIn("s5", report.entry(f"{rule}.positivity", 1).witnesses)

    def test_region_refs_may_list_states(self) -> None:
        certificate = model_format.parse_certificate(
            json.dumps(
                {
                    "version": 1,
                    "rule": "decomposition",
                    "invariant": ["s0", "s1", "s2", "s3", "s4", "s6"],
                    "absorbing": [["s4", "s6"]],
                }
            )
        )
        report = model_format.check_certificate(self.model, certificate)
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual(report.bound, Fraction(2, 3))
