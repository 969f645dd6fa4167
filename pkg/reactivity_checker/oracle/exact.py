"""Exact ground truth on finite chains.

Everything here works in rational arithmetic. Graph questions (which states
can reach a target, the bottom strongly connected components) go through
networkx; the remaining linear systems are solved by ``solve_exact``.

Acceptance of a Streett condition is decided per BSCC: a run of a finite
chain almost surely ends up in some BSCC and then visits each of its states
infinitely often, so a BSCC is accepting iff for every pair it misses A_i or
meets B_i.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Tuple

import networkx as nx

from reactivity_checker._common.reactivity_common import (
    Mode,
    ModeMismatch,
    StateId,
    sort_states,
    state_sort_key,
)
from reactivity_checker.chain.markov import Distribution, MarkovChain, Region
from reactivity_checker.omega.product import StreettCondition
from reactivity_checker.oracle.linear import solve_exact

ProbabilityVector = Mapping[StateId, Fraction]


class _Sink:
    def __repr__(self) -> str:
        return "<sink>"


_SINK = _Sink()


@dataclasses.dataclass(frozen=True)
class Bscc:
    """Bottom strongly connected component with its per-pair acceptance."""

    states: frozenset
    accepting: Tuple[bool, ...] = ()

    @property
    def accepts(self) -> bool:
        return all(self.accepting)


def _exact_row(chain: MarkovChain, state: StateId) -> Distribution:
    row = chain.row(state)
    if row.mode != Mode.EXACT:
        raise ModeMismatch(f"row of {state!r} is approximate; the oracle needs exact rows")
    return row


def transition_graph(chain: MarkovChain, states: Optional[Iterable[StateId]] = None) -> nx.DiGraph:
    """Positive-probability edges out of ``states`` (default: the whole universe)."""
    graph = nx.DiGraph()
    for state in chain.universe if states is None else states:
        graph.add_node(state)
        for successor in _exact_row(chain, state):
            graph.add_edge(state, successor)
    return graph


def bsccs(
    chain: MarkovChain,
    cond: Optional[StreettCondition] = None,
    reachable_only: bool = True,
) -> list[Bscc]:
    """Bottom SCCs of the chain's graph, restricted to the part reachable from the initial support."""
    if reachable_only:
        graph = transition_graph(chain, chain.reachable())
    else:
        graph = transition_graph(chain)
    condensed = nx.condensation(graph)
    components = []
    for node in condensed.nodes:
        if condensed.out_degree(node) == 0:
            members = frozenset(condensed.nodes[node]["members"])
            components.append(Bscc(members, _accepting_flags(members, cond)))
    components.sort(key=lambda c: min(state_sort_key(s) for s in c.states))
    return components


def _accepting_flags(states: frozenset, cond: Optional[StreettCondition]) -> Tuple[bool, ...]:
    if cond is None:
        return ()
    return tuple(
        not any(a.contains(s) for s in states) or any(b.contains(s) for s in states)
        for a, b in cond
    )


def absorption_vector(chain: MarkovChain, target: Region) -> dict[StateId, Fraction]:
    """P_{delta_s}(tau_target < infinity) for every state s of the universe."""
    start = time.monotonic()
    universe = chain.universe
    graph = transition_graph(chain)
    hits = target.enumerate(universe)
    for state in hits:
        graph.add_edge(state, _SINK)
    can_reach = nx.ancestors(graph, _SINK) if hits else set()

    unknowns = sort_states(can_reach - hits)
    coefficients: dict[StateId, dict[StateId, Fraction]] = {}
    constants: dict[StateId, Fraction] = {}
    for state in unknowns:
        row = _exact_row(chain, state)
        coefficients[state] = {u: Fraction(p) for u, p in row.items() if u in can_reach and u not in hits}
        constants[state] = sum((Fraction(p) for u, p in row.items() if u in hits), Fraction(0))
    solution = solve_exact(unknowns, coefficients, constants)

    result = {state: Fraction(0) for state in universe}
    result.update({state: Fraction(1) for state in hits})
    result.update(solution)
    logging.debug(
        "absorption into %s: %d states, %d unknowns, took %dms",
        target.name,
        len(universe),
        len(unknowns),
        (time.monotonic() - start) * 1000,
    )
    return result


def reach_probability(
    chain: MarkovChain, target: Region, initial: Optional[Distribution] = None
) -> Fraction:
    """P_initial(tau_target < infinity); ``initial`` defaults to the chain's own."""
    initial = chain.initial if initial is None else initial
    vector = absorption_vector(chain, target)
    return sum((Fraction(p) * vector[s] for s, p in initial.items()), Fraction(0))


def return_vector(chain: MarkovChain, target: Region) -> dict[StateId, Fraction]:
    """P_{delta_s}(sigma_target < infinity) for every state s."""
    vector = absorption_vector(chain, target)
    return {
        state: sum((Fraction(p) * vector[u] for u, p in _exact_row(chain, state).items()), Fraction(0))
        for state in chain.universe
    }


def return_probability(chain: MarkovChain, target: Region, state: StateId) -> Fraction:
    vector = absorption_vector(chain, target)
    return sum((Fraction(p) * vector[u] for u, p in _exact_row(chain, state).items()), Fraction(0))


def stay_probability(
    chain: MarkovChain, region: Region, initial: Optional[Distribution] = None
) -> Fraction:
    """P_initial(every state lies in ``region``) = 1 - P(tau_{complement} < infinity)."""
    outside = region.complement(chain.universe)
    return 1 - reach_probability(chain, outside, initial)


def _accepting_union(chain: MarkovChain, cond: StreettCondition, reachable_only: bool) -> Region:
    members: set[StateId] = set()
    for component in bsccs(chain, cond, reachable_only=reachable_only):
        if component.accepts:
            members |= component.states
    return Region.of("accepting-bsccs", members)


def streett_probability_from(
    chain: MarkovChain, cond: StreettCondition, initial: Distribution
) -> Fraction:
    """Probability of the Streett event for the chain started in ``initial``."""
    if len(cond) == 0:
        return Fraction(1)
    rooted = chain.rerooted(initial)
    return reach_probability(rooted, _accepting_union(rooted, cond, True), initial)


def streett_probability(chain: MarkovChain, cond: StreettCondition) -> Fraction:
    """P_mu of the intersection over i of Fin(A_i) or Inf(B_i).

    >>> from reactivity_checker.chain.families import threeway
    >>> model = threeway()
    >>> streett_probability(model.chain, StreettCondition.of(*model.region_pairs()))
    Fraction(2, 3)
    """
    return streett_probability_from(chain, cond, chain.initial)


def per_state_streett(chain: MarkovChain, cond: StreettCondition) -> dict[StateId, Fraction]:
    """Streett probability of the chain re-rooted at every state."""
    if len(cond) == 0:
        return {state: Fraction(1) for state in chain.universe}
    return absorption_vector(chain, _accepting_union(chain, cond, False))


def check_orey(chain: MarkovChain, a: Region, b: Region) -> tuple[bool, Fraction]:
    """Return (inf > 0, inf) for inf over s in A of P_{delta_s}(sigma_B < infinity)."""
    members = a.enumerate(chain.universe)
    if not members:
        return True, Fraction(1)
    vector = absorption_vector(chain, b)
    infimum = min(
        sum((Fraction(p) * vector[u] for u, p in _exact_row(chain, s).items()), Fraction(0))
        for s in members
    )
    return infimum > 0, infimum


def expected_hitting_times(chain: MarkovChain, target: Region) -> dict[StateId, Fraction]:
    """Expected steps to reach ``target`` from states that reach it almost surely.

    States reaching the target with probability below one have infinite
    expectation and are left out.
    """
    vector = absorption_vector(chain, target)
    hits = target.enumerate(chain.universe)
    sure = {s for s, p in vector.items() if p == 1}
    unknowns = sort_states(sure - hits)
    coefficients = {
        s: {u: Fraction(p) for u, p in _exact_row(chain, s).items() if u not in hits}
        for s in unknowns
    }
    solution = solve_exact(unknowns, coefficients, {s: Fraction(1) for s in unknowns})
    result = {s: Fraction(0) for s in hits}
    result.update(solution)
    return result
