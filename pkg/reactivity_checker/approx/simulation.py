"""Seeded Monte Carlo evidence: return-probability series and visit frequencies.

Outputs are descriptive only. Simulation cannot decide whether a region is
visited finitely or infinitely often.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import logging
import os
import time
from typing import Any, Callable, Iterable, Optional, Sequence, TextIO, Tuple

from reactivity_checker._common.reactivity_common import (
    DEFAULT_CONFIG,
    BadParameter,
    Number,
    StateId,
)
from reactivity_checker.chain.markov import MarkovChain, Region, iterate_trajectory


@dataclasses.dataclass(frozen=True)
class SeriesPoint:
    n: int
    state: StateId
    statistic: float


@dataclasses.dataclass(frozen=True)
class SimulationSeries:
    """Recorded statistics per trajectory, reproducible from the metadata."""

    trajectories: Tuple[Tuple[SeriesPoint, ...], ...]
    seed: int
    steps: int
    stride: int
    parameters: Tuple[Tuple[str, Any], ...] = ()

    def final(self) -> list[float]:
        return [points[-1].statistic for points in self.trajectories]


def _recorded(steps: int, stride: int) -> set[int]:
    """Recorded time indices.

    >>> sorted(_recorded(7, 3))
    [0, 3, 6]
    >>> sorted(_recorded(5, 3))
    [0, 3, 4]
    """
    times = set(range(0, steps, stride))
    times.add(steps - 1)
    return times


def _run_parallel(work: Callable[[int], Any], trajectories: int) -> list[Any]:
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=os.cpu_count(),
        thread_name_prefix="Thread",
    ) as executor:
        futures = {executor.submit(work, index): index for index in range(trajectories)}
        results: dict[int, Any] = {}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return [results[index] for index in range(trajectories)]


def _check_sizes(steps: int, trajectories: int, stride: int = 1) -> None:
    if steps < 1 or trajectories < 1:
        raise BadParameter("steps and trajectories must be at least 1")
    if stride < 1:
        raise BadParameter("stride must be at least 1")


def simulate_return_probability(
    chain: MarkovChain,
    return_prob: Callable[[StateId], Number],
    steps: int,
    trajectories: int,
    seed: int,
    stride: int = DEFAULT_CONFIG.recording_stride,
    parameters: Optional[dict[str, Any]] = None,
) -> SimulationSeries:
    """Record ``return_prob`` of the current state every ``stride`` steps and at the last step."""
    _check_sizes(steps, trajectories, stride)
    start = time.monotonic()
    recorded = _recorded(steps, stride)

    def work(index: int) -> Tuple[SeriesPoint, ...]:
        points = []
        for n, state in enumerate(iterate_trajectory(chain, steps, seed, index)):
            if n in recorded:
                points.append(SeriesPoint(n, state, float(return_prob(state))))
        return tuple(points)

    series = SimulationSeries(
        trajectories=tuple(_run_parallel(work, trajectories)),
        seed=seed,
        steps=steps,
        stride=stride,
        parameters=tuple(sorted((parameters or {}).items())),
    )
    logging.debug(
        "simulated %d x %d steps, took %dms", trajectories, steps, (time.monotonic() - start) * 1000
    )
    return series


def visit_frequency(
    chain: MarkovChain,
    region: Region,
    steps: int,
    trajectories: int,
    seed: int,
) -> list[float]:
    """Fraction of the first ``steps`` indices spent in ``region``, per trajectory."""
    _check_sizes(steps, trajectories)

    def work(index: int) -> float:
        inside = sum(
            1 for state in iterate_trajectory(chain, steps, seed, index) if region.contains(state)
        )
        return inside / steps

    return _run_parallel(work, trajectories)


def mean_statistic(series: SimulationSeries) -> list[tuple[int, float]]:
    """Statistic averaged over trajectories at each recorded time."""
    columns = zip(*series.trajectories)
    return [
        (points[0].n, sum(p.statistic for p in points) / len(points)) for points in columns
    ]


def is_eventually_non_increasing(
    points: Sequence[tuple[int, float]], burn_in: int, tolerance: float
) -> bool:
    """Whether consecutive values after ``burn_in`` never rise by more than ``tolerance``.

    >>> is_eventually_non_increasing([(0, 0.2), (10, 0.9), (20, 0.5), (30, 0.55)], 5, 0.1)
    True
    >>> is_eventually_non_increasing([(0, 0.2), (10, 0.5), (20, 0.9)], 5, 0.1)
    False
    """
    tail = [value for n, value in points if n >= burn_in]
    return all(later <= earlier + tolerance for earlier, later in zip(tail, tail[1:]))


def write_csv(series: SimulationSeries, stream: TextIO) -> None:
    writer = csv.writer(stream)
    writer.writerow(["trajectory", "n", "state", "statistic"])
    for index, points in enumerate(series.trajectories):
        for point in points:
            writer.writerow([index, point.n, point.state, repr(point.statistic)])


def read_csv(stream: Iterable[str]) -> list[tuple[int, int, str, float]]:
    reader = csv.DictReader(stream)
    return [
        (int(row["trajectory"]), int(row["n"]), row["state"], float(row["statistic"]))
        for row in reader
    ]
