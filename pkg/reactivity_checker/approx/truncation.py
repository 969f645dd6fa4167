"""Certified brackets for reach probabilities on infinite chains.

The chain is cut down to a finite window and solved twice: once treating
every exit from the window as a failure, once valuing each exit state
optimistically. Exits into the target always count as success.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import logging
import os
import time
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import networkx as nx

from reactivity_checker._common.reactivity_common import (
    DEFAULT_CONFIG,
    BadParameter,
    Mode,
    ModeMismatch,
    Number,
    StateId,
    WindowNotClosed,
    format_number,
    sort_states,
)
from reactivity_checker.certificates.checks import Window
from reactivity_checker.chain.markov import Distribution, MarkovChain, Region
from reactivity_checker.oracle.linear import solve_exact

BoundaryValue = Callable[[StateId], Number]


@dataclasses.dataclass(frozen=True)
class ProbabilityInterval:
    lower: Number
    upper: Number

    def __post_init__(self) -> None:
        slack = DEFAULT_CONFIG.probability_slack
        if not -slack <= self.lower <= self.upper + slack or self.upper > 1 + slack:
            raise BadParameter(f"invalid probability interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> Number:
        return self.upper - self.lower

    def __contains__(self, value: Number) -> bool:
        return self.lower <= value <= self.upper

    def asdict(self) -> dict[str, str]:
        return {
            "lower": format_number(self.lower),
            "upper": format_number(self.upper),
            "width": format_number(self.width),
        }


class _Source:
    def __repr__(self) -> str:
        return "<value>"


_SOURCE = _Source()


def _window_states(window: Union[Window, Iterable[StateId]]) -> frozenset:
    if isinstance(window, Window):
        return window.states
    return frozenset(window)


def _solve(
    chain: MarkovChain,
    target: Region,
    states: frozenset,
    boundary: BoundaryValue,
) -> dict[StateId, Fraction]:
    """Reach values inside the window with ``boundary`` valuing exits that miss the target."""
    graph = nx.DiGraph()
    graph.add_nodes_from(states)
    coefficients: dict[StateId, dict[StateId, Fraction]] = {}
    constants: dict[StateId, Fraction] = {}
    hits = {s for s in states if target.contains(s)}
    for state in states - hits:
        row = chain.row(state)
        if row.mode != Mode.EXACT:
            raise ModeMismatch(f"row of {state!r} is approximate")
        inner: dict[StateId, Fraction] = {}
        constant = Fraction(0)
        for successor, p in row.items():
            if target.contains(successor):
                constant += p
            elif successor in states:
                inner[successor] = Fraction(p)
                graph.add_edge(state, successor)
            else:
                constant += p * Fraction(min(Fraction(1), boundary(successor)))
        coefficients[state] = inner
        constants[state] = constant
        if constant > 0:
            graph.add_edge(state, _SOURCE)
    if graph.has_node(_SOURCE):
        live = nx.ancestors(graph, _SOURCE)
    else:
        live = set()
    unknowns = sort_states(live)
    solution = solve_exact(
        unknowns,
        {s: {u: p for u, p in coefficients[s].items() if u in live} for s in unknowns},
        {s: constants[s] for s in unknowns},
    )
    values = {s: Fraction(0) for s in states}
    values.update({s: Fraction(1) for s in hits})
    values.update(solution)
    return values


def bounded_reach_interval(
    chain: MarkovChain,
    target: Region,
    window: Union[Window, Iterable[StateId]],
    initial: Optional[Distribution] = None,
    exit_bound: Optional[BoundaryValue] = None,
) -> ProbabilityInterval:
    """Bracket P_initial(tau_target < infinity) using only the states of ``window``.

    ``exit_bound`` is an upper bound on the reach probability from states
    outside the window, such as a qualitative-safety value function for the
    target; without it exits are valued 1 in the upper solve.
    """
    start = time.monotonic()
    initial = chain.initial if initial is None else initial
    states = _window_states(window)
    stray = initial.states() - states
    if stray:
        raise WindowNotClosed(f"initial states {sort_states(stray)} lie outside the window")
    lower = _solve(chain, target, states, lambda _: Fraction(0))
    upper = _solve(chain, target, states, exit_bound or (lambda _: Fraction(1)))
    interval = ProbabilityInterval(
        sum((Fraction(p) * lower[s] for s, p in initial.items()), Fraction(0)),
        sum((Fraction(p) * upper[s] for s, p in initial.items()), Fraction(0)),
    )
    logging.debug(
        "bracket over %d window states: width %s, took %dms",
        len(states),
        float(interval.width),
        (time.monotonic() - start) * 1000,
    )
    return interval


def bounded_reach_intervals(
    chain: MarkovChain,
    target: Region,
    windows: Sequence[Union[Window, Iterable[StateId]]],
    initial: Optional[Distribution] = None,
    exit_bound: Optional[BoundaryValue] = None,
) -> list[ProbabilityInterval]:
    """``bounded_reach_interval`` for several windows, solved in parallel."""
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=os.cpu_count(),
        thread_name_prefix="Thread",
    ) as executor:
        futures = [
            executor.submit(bounded_reach_interval, chain, target, window, initial, exit_bound)
            for window in windows
        ]
        return [future.result() for future in futures]
