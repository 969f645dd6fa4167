from __future__ import annotations

import unittest
from fractions import Fraction

from reactivity_checker._common.reactivity_common import ModeMismatch
from reactivity_checker.chain import families
from reactivity_checker.chain.markov import Distribution, Kernel, MarkovChain, Region, dirac
from reactivity_checker.omega.product import StreettCondition
from reactivity_checker.oracle import exact


def _condition(model: families.BuiltinModel) -> StreettCondition:
    return StreettCondition.of(*model.region_pairs())


class TestStreettProbability(unittest.TestCase):
    def test_fixture_values(self) -> None:
        for name, expected in (("twoway", Fraction(1)), ("threeway", Fraction(2, 3)), ("leaky", Fraction(2, 3))):
            with self.subTest(name=name):
                model = families.builtin(name)
                self.assertEqual(exact.streett_probability(model.chain, _condition(model)), expected)

    def test_empty_condition_holds_surely(self) -> None:
        model = families.threeway()
        self.assertEqual(exact.streett_probability(model.chain, StreettCondition()), 1)

    def test_per_state_values(self) -> None:
        model = families.leaky()
        values = exact.per_state_streett(model.chain, _condition(model))
        self.assertEqual(values["s5"], 0)
        self.assertEqual(values["s6"], 1)
        self.assertEqual(values["s4"], 1)
        self.assertEqual(values["s0"], Fraction(2, 3))

    def test_rerooted_probability(self) -> None:
        model = families.threeway()
        initial = Distribution({"s1": Fraction(1, 4), "s5": Fraction(3, 4)})
        self.assertEqual(
            exact.streett_probability_from(model.chain, _condition(model), initial), Fraction(1, 4)
        )

    def test_bsccs_carry_their_acceptance(self) -> None:
        model = families.threeway()
        components = exact.bsccs(model.chain, _condition(model))
        self.assertEqual(
            [(sorted(c.states), c.accepts) for c in components],
            [(["s1", "s2"], True), (["s4"], True), (["s5"], False)],
        )

    def test_approximate_rows_are_refused(self) -> None:
        kernel = Kernel.from_rows({"s0": {"s0": 0.5, "s1": 0.5}, "s1": {"s1": 1}})
        chain = MarkovChain(dirac("s0"), kernel)
        with self.assertRaises(ModeMismatch):
            exact.reach_probability(chain, Region.of("T", ["s1"]))


class TestReachAndReturn(unittest.TestCase):
    def test_absorption_vector(self) -> None:
        model = families.leaky()
        vector = exact.absorption_vector(model.chain, model.region("B"))
        self.assertEqual(vector["s0"], Fraction(1, 3))
        self.assertEqual(vector["s6"], 1)
        self.assertEqual(vector["s4"], 0)

    def test_return_probability_counts_from_step_one(self) -> None:
        model = families.leaky()
        a = model.region("A")
        self.assertEqual(exact.return_probability(model.chain, a, "s6"), Fraction(1, 2))
        self.assertEqual(exact.return_probability(model.chain, a, "s1"), Fraction(1, 2))
        self.assertEqual(exact.return_probability(model.chain, a, "s5"), 1)
        self.assertEqual(exact.return_probability(model.chain, a, "s3"), 0)

    def test_stay_probability(self) -> None:
        model = families.leaky()
        self.assertEqual(exact.stay_probability(model.chain, model.region("I")), Fraction(2, 3))

    def test_expected_hitting_times(self) -> None:
        model = families.leaky()
        times = exact.expected_hitting_times(model.chain, model.region("B"))
        self.assertEqual(times["s2"], 0)
        self.assertEqual(times["s6"], 3)
        self.assertEqual(times["s1"], 4)
        self.assertNotIn("s0", times)

    def test_orey_on_twoway(self) -> None:
        model = families.twoway()
        a, b = model.region("A"), model.region("B")
        self.assertEqual(exact.check_orey(model.chain, a, b), (False, 0))
        self.assertEqual(
            exact.check_orey(model.chain, a, b.union(model.region("J"))), (True, 1)
        )

    def test_orey_with_empty_region(self) -> None:
        model = families.twoway()
        self.assertEqual(
            exact.check_orey(model.chain, Region.nothing(), model.region("B")), (True, 1)
        )


class TestRandomChains(unittest.TestCase):
    SEEDS = range(40)

    def test_extra_pair_never_raises_the_probability(self) -> None:
        for seed in self.SEEDS:
            with self.subTest(seed=seed):
                model = families.random_chain(seed, 8, 2)
                first, second = model.region_pairs()
                one = StreettCondition.of(first)
                self.assertLessEqual(
                    exact.streett_probability(model.chain, one.extended(*second)),
                    exact.streett_probability(model.chain, one),
                )

    def test_bscc_reach_probabilities_sum_to_one(self) -> None:
        for seed in self.SEEDS:
            with self.subTest(seed=seed):
                chain = families.random_chain(seed, 8, 1).chain
                total = sum(
                    (
                        exact.reach_probability(chain, Region.of("C", component.states))
                        for component in exact.bsccs(chain)
                    ),
                    Fraction(0),
                )
                self.assertEqual(total, 1)

    def test_orey_implies_almost_sure(self) -> None:
        for seed in self.SEEDS:
            model = families.random_chain(seed, 8, 1)
            [(a, b)] = model.region_pairs()
            holds, _ = exact.check_orey(model.chain, a, b)
            if holds:
                with self.subTest(seed=seed):
                    self.assertEqual(
                        exact.streett_probability(model.chain, StreettCondition.of((a, b))), 1
                    )

    def test_per_state_values_average_to_the_global_value(self) -> None:
        for seed in self.SEEDS:
            with self.subTest(seed=seed):
                model = families.random_chain(seed, 8, 2)
                cond = _condition(model)
                values = exact.per_state_streett(model.chain, cond)
                probability = exact.streett_probability(model.chain, cond)
                support = model.chain.initial.states()
                self.assertEqual(
                    probability,
                    sum((Fraction(p) * values[s] for s, p in model.chain.initial.items()), Fraction(0)),
                )
                if all(values[s] == 1 for s in support):
                    self.assertEqual(probability, 1)
