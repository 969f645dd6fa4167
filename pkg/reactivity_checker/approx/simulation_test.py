from __future__ import annotations

import io
import statistics
import unittest
from fractions import Fraction

from reactivity_checker._common.reactivity_common import DEFAULT_CONFIG, BadParameter
from reactivity_checker.approx import simulation
from reactivity_checker.certificates.functions import casino_return_probability
from reactivity_checker.chain import families
from reactivity_checker.chain.markov import Region


class TestReturnProbabilitySeries(unittest.TestCase):
    def test_casino_return_probability_vanishes_along_trajectories(self) -> None:
        epsilon = DEFAULT_CONFIG.simulation_epsilon
        casino = families.lending_casino(epsilon)
        series = simulation.simulate_return_probability(
            casino.chain,
            casino_return_probability(Fraction(epsilon), exact=False),
            steps=200_000,
            trajectories=10,
            seed=DEFAULT_CONFIG.simulation_seed,
            stride=10_000,
        )
        final = series.final()
        self.assertEqual(len(final), 10)
        self.assertGreaterEqual(sum(1 for value in final if value < 0.01), 8)
        means = simulation.mean_statistic(series)
        self.assertEqual(means[0][0], 0)
        self.assertEqual(means[-1][0], 199_999)
        self.assertTrue(simulation.is_eventually_non_increasing(means, 1000, 0.1))

    def test_series_are_reproducible_from_the_seed(self) -> None:
        casino = families.lending_casino("1/5")
        statistic = casino_return_probability(Fraction(1, 5), exact=False)
        first = simulation.simulate_return_probability(casino.chain, statistic, 500, 4, 7, stride=50)
        second = simulation.simulate_return_probability(casino.chain, statistic, 500, 4, 7, stride=50)
        self.assertEqual(first, second)
        other = simulation.simulate_return_probability(casino.chain, statistic, 500, 4, 8, stride=50)
        self.assertNotEqual(first.trajectories, other.trajectories)
        self.assertEqual([p.n for p in first.trajectories[0]], list(range(0, 500, 50)) + [499])

    def test_csv_keeps_every_recorded_point(self) -> None:
        casino = families.lending_casino("1/5")
        series = simulation.simulate_return_probability(
            casino.chain,
            casino_return_probability(Fraction(1, 5), exact=False),
            steps=30,
            trajectories=3,
            seed=1,
            stride=10,
        )
        stream = io.StringIO()
        simulation.write_csv(series, stream)
        stream.seek(0)
        rows = simulation.read_csv(stream)
        self.assertEqual(len(rows), 3 * 4)
        self.assertEqual(rows[0][:3], (0, 0, "1"))
        expected = [
            (index, point.n, str(point.state), point.statistic)
            for index, points in enumerate(series.trajectories)
            for point in points
        ]
        self.assertEqual(rows, expected)

    def test_sizes_are_validated(self) -> None:
        casino = families.lending_casino("1/5")
        statistic = casino_return_probability(Fraction(1, 5), exact=False)
        for steps, trajectories, stride in ((0, 1, 1), (1, 0, 1), (5, 1, 0)):
            with self.subTest(steps=steps, trajectories=trajectories, stride=stride):
                with self.assertRaises(BadParameter):
                    simulation.simulate_return_probability(
                        casino.chain, statistic, steps, trajectories, 0, stride=stride
                    )


class TestVisitFrequency(unittest.TestCase):
    def test_threeway_spends_a_sixth_of_its_time_in_s2(self) -> None:
        threeway = families.threeway()
        frequencies = simulation.visit_frequency(
            threeway.chain, Region.of("S2", ["s2"]), steps=1000, trajectories=200, seed=20240229
        )
        self.assertEqual(len(frequencies), 200)
        self.assertTrue(0.1 <= statistics.mean(frequencies) <= 0.235)
        # Trajectories either never enter the s1-s2 loop or alternate inside it.
        self.assertTrue(all(f == 0 or 0.49 <= f <= 0.5 for f in frequencies))

    def test_visit_frequency_is_deterministic(self) -> None:
        threeway = families.threeway()
        region = Region.of("S2", ["s2"])
        self.assertEqual(
            simulation.visit_frequency(threeway.chain, region, 100, 20, 5),
            simulation.visit_frequency(threeway.chain, region, 100, 20, 5),
        )
