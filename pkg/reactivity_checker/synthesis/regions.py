"""Constructive witnesses on finite chains.

Builds the regions and certificates whose existence the completeness
arguments promise: absorbing regions J, invariants I_k, the almost-sure
invariant, value functions for the safety rules, and full certificate
bundles for both proof rules.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from fractions import Fraction
from typing import Optional

import networkx as nx

from reactivity_checker._common.reactivity_common import (
    DEFAULT_CONFIG,
    BadParameter,
    NotAlmostSure,
    StateId,
    sort_states,
)
from reactivity_checker.certificates.checks import (
    DecompositionWitness,
    Rule1Bundle,
    Rule1Pair,
    Rule2Bundle,
    Rule2Pair,
    check_decomposition_semantic,
)
from reactivity_checker.certificates.functions import (
    MonotoneScalarFunction,
    RankingFunction,
    Role,
    ValueFunction,
)
from reactivity_checker.chain.markov import MarkovChain, Region
from reactivity_checker.oracle import exact
from reactivity_checker.omega.product import StreettCondition

DEFAULT_K_MAX = 10**6


def synthesize_absorbing(
    chain: MarkovChain,
    invariant: Region,
    a: Region,
    threshold: Fraction = DEFAULT_CONFIG.synthesis_threshold,
) -> Region:
    """States of I outside A whose return probability to A is at most ``threshold``."""
    if not 0 < threshold < 1:
        raise BadParameter(f"threshold must lie in (0, 1), got {threshold}")
    universe = chain.universe
    returns = exact.return_vector(chain, a)
    members = [
        s
        for s in invariant.enumerate(universe)
        if not a.contains(s) and returns[s] <= threshold
    ]
    return Region.of(f"J[{a.name}]", members)


def synthesize_invariant(chain: MarkovChain, cond: StreettCondition, k: int) -> Region:
    """I_k: states from which the condition holds with probability at least 1/(k+1)."""
    if k < 0:
        raise BadParameter(f"k must be a natural number, got {k}")
    level = Fraction(1, k + 1)
    values = exact.per_state_streett(chain, cond)
    return Region.of(f"I{k}", (s for s, p in values.items() if p >= level))


def synthesize_as_invariant(chain: MarkovChain, cond: StreettCondition) -> Region:
    """States from which the condition holds almost surely.

    Issues ``NotAlmostSure`` when the chain itself satisfies the condition
    with probability below one; the region is returned regardless.
    """
    values = exact.per_state_streett(chain, cond)
    probability = exact.streett_probability(chain, cond)
    if probability < 1:
        logging.warning("condition holds with probability %s < 1", probability)
        warnings.warn(
            f"the chain satisfies the condition with probability {probability}",
            NotAlmostSure,
            stacklevel=2,
        )
    return Region.of("I", (s for s, p in values.items() if p == 1))


def witness_quant_safety(chain: MarkovChain, x: Region) -> ValueFunction:
    """V(s) = probability of ever leaving X from s."""
    outside = x.complement(chain.universe)
    return ValueFunction.from_table("V0", exact.absorption_vector(chain, outside))


def witness_qual_safety(chain: MarkovChain, a: Region) -> ValueFunction:
    """V(s) = probability of ever hitting A from s."""
    return ValueFunction.from_table(f"V[{a.name}]", exact.absorption_vector(chain, a))


@dataclasses.dataclass(frozen=True)
class InvariantSearch:
    """Outcome of the search over invariants I_k."""

    probability: Fraction
    k: int
    bound: Fraction
    stable_k: int
    stable_bound: Fraction
    invariant: Region
    absorbing: tuple[Region, ...]


def _candidate_ks(values: dict[StateId, Fraction], k_max: int) -> list[int]:
    """Smallest k at which each distinct positive value enters I_k.

    >>> _candidate_ks({"a": Fraction(1), "b": Fraction(2, 3), "c": Fraction(1, 5), "d": Fraction(0)}, 100)
    [0, 1, 4]
    """
    ks = {math.ceil(1 / p) - 1 for p in values.values() if p > 0}
    return sorted(k for k in ks if k <= k_max) or [0]


def search_invariant(
    chain: MarkovChain,
    cond: StreettCondition,
    epsilon: Fraction,
    k_max: int = DEFAULT_K_MAX,
    threshold: Fraction = DEFAULT_CONFIG.synthesis_threshold,
) -> InvariantSearch:
    """Find the first I_k whose decomposition bound is within ``epsilon`` of the truth.

    Only the finitely many distinct I_k are tried; the largest of them is
    the stabilized invariant.
    """
    probability = exact.streett_probability(chain, cond)
    values = exact.per_state_streett(chain, cond)
    found: Optional[tuple[int, Fraction, Region, tuple[Region, ...]]] = None
    stable: Optional[tuple[int, Fraction]] = None
    for k in _candidate_ks(values, k_max):
        invariant = synthesize_invariant(chain, cond, k)
        absorbing = tuple(synthesize_absorbing(chain, invariant, a, threshold) for a, _ in cond)
        report = check_decomposition_semantic(
            chain, cond, DecompositionWitness(invariant, absorbing)
        )
        logging.debug("I%d: %s, bound %s", k, report.verdict.value, report.bound)
        if not report.passed or report.bound is None:
            continue
        stable = (k, Fraction(report.bound))
        if found is None and report.bound >= probability - epsilon:
            found = (k, Fraction(report.bound), invariant, absorbing)
    if found is None or stable is None:
        raise BadParameter(f"no invariant up to k={k_max} reaches {probability} - {epsilon}")
    k, bound, invariant, absorbing = found
    return InvariantSearch(probability, k, bound, stable[0], stable[1], invariant, absorbing)


def _escape_distances(chain: MarkovChain, escape: frozenset) -> dict[StateId, int]:
    graph = exact.transition_graph(chain).reverse(copy=False)
    lengths = nx.multi_source_dijkstra_path_length(graph, set(escape)) if escape else {}
    return {s: int(d) for s, d in lengths.items()}


def _pair_witnesses(
    chain: MarkovChain,
    cond: StreettCondition,
    invariant: Optional[Region],
    threshold: Fraction,
) -> tuple[Region, list[tuple[Region, Region, Region, ValueFunction, ValueFunction]]]:
    universe = chain.universe
    if invariant is None:
        values = exact.per_state_streett(chain, cond)
        invariant = Region.of("I", (s for s, p in values.items() if p > 0))
    outside = invariant.complement(universe)
    pairs = []
    for index, (a, b) in enumerate(cond, start=1):
        j = synthesize_absorbing(chain, invariant, a, threshold)
        escape = b.union(j).union(outside)
        times = exact.expected_hitting_times(chain, escape)
        # States that miss the escape set with positive probability get W = 0.
        table = {s: times.get(s, Fraction(0)) for s in sort_states(universe)}
        pairs.append(
            (
                a,
                escape,
                j,
                witness_qual_safety(chain, a),
                ValueFunction.from_table(f"W{index}", table),
            )
        )
    return invariant, pairs


def synthesize_rule1_bundle(
    chain: MarkovChain,
    cond: StreettCondition,
    invariant: Optional[Region] = None,
    threshold: Fraction = DEFAULT_CONFIG.synthesis_threshold,
) -> Rule1Bundle:
    """Ranking-rule certificate: W_i expected escape time, U_i graph distance to the escape set."""
    invariant, pairs = _pair_witnesses(chain, cond, invariant, threshold)
    certificates = []
    absorbing = []
    for index, (_, escape, j, v, w) in enumerate(pairs, start=1):
        distances = _escape_distances(chain, escape.enumerate(chain.universe))
        unreachable = len(chain.universe)
        u = RankingFunction.from_table(
            f"U{index}", {s: distances.get(s, unreachable) for s in sort_states(chain.universe)}
        )
        certificates.append(Rule1Pair(v=v, w=w, u=u))
        absorbing.append(j)
    return Rule1Bundle(
        witness=DecompositionWitness(invariant, tuple(absorbing)),
        v0=witness_quant_safety(chain, invariant),
        pairs=tuple(certificates),
    )


def synthesize_rule2_bundle(
    chain: MarkovChain,
    cond: StreettCondition,
    invariant: Optional[Region] = None,
    threshold: Fraction = DEFAULT_CONFIG.synthesis_threshold,
) -> Rule2Bundle:
    """Drift-rule certificate: d_i = 1 and p_i the least chance of dropping W_i by one."""
    invariant, pairs = _pair_witnesses(chain, cond, invariant, threshold)
    certificates = []
    absorbing = []
    for index, (_, escape, j, v, w) in enumerate(pairs, start=1):
        running = [
            s
            for s in sort_states(invariant.enumerate(chain.universe))
            if not escape.contains(s)
        ]
        chances = [
            sum((p for u, p in chain.row(s).items() if w(u) <= w(s) - 1), Fraction(0))
            for s in running
        ]
        least = min((c for c in chances if c > 0), default=Fraction(1))
        certificates.append(
            Rule2Pair(
                v=v,
                w=w,
                d=MonotoneScalarFunction.constant(f"d{index}", Role.DECREASE, Fraction(1)),
                p=MonotoneScalarFunction.constant(f"p{index}", Role.PROBABILITY, least),
            )
        )
        absorbing.append(j)
    return Rule2Bundle(
        witness=DecompositionWitness(invariant, tuple(absorbing)),
        v0=witness_quant_safety(chain, invariant),
        pairs=tuple(certificates),
    )
