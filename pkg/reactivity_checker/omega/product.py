"""Streett conditions, deterministic Streett automata and the synchronous product."""

from __future__ import annotations

import dataclasses
import itertools
import logging
from collections import deque
from typing import Callable, FrozenSet, Hashable, Iterable, Mapping, Optional, Sequence, Tuple

from reactivity_checker._common.reactivity_common import (
    AlphabetMismatch,
    BadParameter,
    StateId,
    UnknownProposition,
    sort_states,
)
from reactivity_checker.chain.markov import Distribution, Kernel, MarkovChain, Region

AutomatonState = Hashable
Letter = FrozenSet[str]

MAX_PROPOSITIONS = 16


@dataclasses.dataclass(frozen=True)
class StreettCondition:
    """Ordered Streett pairs (A_i, B_i): each A_i finitely often or B_i infinitely often."""

    pairs: Tuple[Tuple[Region, Region], ...] = ()

    @classmethod
    def of(cls, *pairs: Tuple[Region, Region]) -> StreettCondition:
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.pairs)

    def __getitem__(self, index: int) -> Tuple[Region, Region]:
        return self.pairs[index]

    def extended(self, a: Region, b: Region) -> StreettCondition:
        return StreettCondition(self.pairs + ((a, b),))


def letter(*propositions: str) -> Letter:
    return frozenset(propositions)


def all_letters(alphabet: Iterable[str]) -> list[Letter]:
    """Every subset of ``alphabet``, smallest first.

    >>> [sorted(x) for x in all_letters(["a", "b"])]
    [[], ['a'], ['b'], ['a', 'b']]
    """
    symbols = sorted(alphabet)
    return [
        frozenset(combo)
        for size in range(len(symbols) + 1)
        for combo in itertools.combinations(symbols, size)
    ]


@dataclasses.dataclass(frozen=True)
class DeterministicStreettAutomaton:
    """Finite monitor with a total transition table over Q x 2^alphabet."""

    states: FrozenSet[AutomatonState]
    initial: AutomatonState
    alphabet: FrozenSet[str]
    transitions: Mapping[Tuple[AutomatonState, Letter], AutomatonState]
    acceptance: Tuple[Tuple[FrozenSet[AutomatonState], FrozenSet[AutomatonState]], ...] = ()

    def __post_init__(self) -> None:
        if len(self.alphabet) > MAX_PROPOSITIONS:
            raise BadParameter(
                f"alphabet has {len(self.alphabet)} propositions, at most {MAX_PROPOSITIONS} allowed"
            )
        if self.initial not in self.states:
            raise BadParameter(f"initial state {self.initial!r} is not an automaton state")
        for q in self.states:
            for word in all_letters(self.alphabet):
                target = self.transitions.get((q, word))
                if target is None:
                    raise BadParameter(
                        f"transition from {q!r} on {sorted(word)} is missing"
                    )
                if target not in self.states:
                    raise BadParameter(f"transition from {q!r} leads to unknown state {target!r}")
        for index, (f_set, g_set) in enumerate(self.acceptance):
            stray = (f_set | g_set) - self.states
            if stray:
                raise BadParameter(f"acceptance pair {index} names unknown states {sort_states(stray)}")

    @classmethod
    def from_function(
        cls,
        states: Iterable[AutomatonState],
        initial: AutomatonState,
        alphabet: Iterable[str],
        step: Callable[[AutomatonState, Letter], AutomatonState],
        acceptance: Sequence[Tuple[Iterable[AutomatonState], Iterable[AutomatonState]]] = (),
    ) -> DeterministicStreettAutomaton:
        """Tabulate ``step`` over every (state, letter) pair."""
        states = frozenset(states)
        alphabet = frozenset(alphabet)
        table = {(q, word): step(q, word) for q in states for word in all_letters(alphabet)}
        return cls(
            states=states,
            initial=initial,
            alphabet=alphabet,
            transitions=table,
            acceptance=tuple((frozenset(f), frozenset(g)) for f, g in acceptance),
        )

    def step(self, state: AutomatonState, word: Iterable[str]) -> AutomatonState:
        word = frozenset(word)
        unknown = word - self.alphabet
        if unknown:
            raise UnknownProposition(f"propositions {sorted(unknown)} are not in the alphabet")
        return self.transitions[(state, word)]


def dsa_run(dsa: DeterministicStreettAutomaton, letters: Sequence[Iterable[str]]) -> list[AutomatonState]:
    """Run of the automaton on a finite word, initial state included.

    >>> toggle = DeterministicStreettAutomaton.from_function(
    ...     ["q0", "q1"], "q0", ["a"],
    ...     lambda q, w: ({"q0": "q1", "q1": "q0"}[q] if "a" in w else q),
    ... )
    >>> dsa_run(toggle, [{"a"}, set(), {"a"}])
    ['q0', 'q1', 'q1', 'q0']
    >>> dsa_run(toggle, [])
    ['q0']
    """
    run = [dsa.initial]
    for word in letters:
        run.append(dsa.step(run[-1], word))
    return run


def dsa_accepts_lasso(
    dsa: DeterministicStreettAutomaton,
    stem: Sequence[Iterable[str]],
    loop: Sequence[Iterable[str]],
) -> bool:
    """Whether the automaton accepts the word ``stem . loop^omega``."""
    if not loop:
        raise BadParameter("lasso loop must be non-empty")
    state = dsa_run(dsa, stem)[-1]
    seen: dict[tuple[AutomatonState, int], int] = {}
    visits: list[AutomatonState] = []
    position = 0
    while (state, position) not in seen:
        seen[(state, position)] = len(visits)
        visits.append(state)
        state = dsa.step(state, loop[position])
        position = (position + 1) % len(loop)
    cycle = frozenset(visits[seen[(state, position)] :])
    return all(not (cycle & f_set) or bool(cycle & g_set) for f_set, g_set in dsa.acceptance)


def _check_alphabet(chain: MarkovChain, dsa: DeterministicStreettAutomaton, state: StateId) -> Letter:
    word = chain.label(state)
    unknown = word - dsa.alphabet
    if unknown:
        raise AlphabetMismatch(
            f"label {sorted(word)} of state {state!r} uses propositions outside the alphabet"
        )
    return word


def lift_acceptance(
    dsa: DeterministicStreettAutomaton, universe: Optional[Iterable[StateId]] = None
) -> StreettCondition:
    """Streett pairs S x F_i and S x G_i of the product chain."""
    members = None if universe is None else frozenset(universe)
    pairs = []
    for index, (f_set, g_set) in enumerate(dsa.acceptance, start=1):
        pairs.append(
            (
                _lifted(f"A{index}", f_set, members),
                _lifted(f"B{index}", g_set, members),
            )
        )
    return StreettCondition(tuple(pairs))


def _lifted(name: str, automaton_states: FrozenSet[AutomatonState], members: Optional[FrozenSet[StateId]]) -> Region:
    def predicate(pair: StateId) -> bool:
        return isinstance(pair, tuple) and len(pair) == 2 and pair[1] in automaton_states

    if members is None:
        return Region.where(name, predicate)
    return Region.of(name, (p for p in members if predicate(p)))


def product(chain: MarkovChain, dsa: DeterministicStreettAutomaton) -> tuple[MarkovChain, StreettCondition]:
    """Synchronous product of a labelled chain with a DSA.

    The automaton reads the label of the source state:
    (s, q) moves to (s', T(q, label(s))) with probability P(s, s').
    """
    initial = Distribution({(s, dsa.initial): p for s, p in chain.initial.items()})

    def successors(pair: StateId) -> Distribution:
        state, q = pair  # type: ignore[misc]
        following = dsa.step(q, _check_alphabet(chain, dsa, state))
        return Distribution({(u, following): p for u, p in chain.row(state).items()})

    def labeling(pair: StateId) -> FrozenSet[str]:
        return chain.label(pair[0])  # type: ignore[index]

    parameters = {"chain": chain.kernel.describe(), "automaton_states": len(dsa.states)}
    if not chain.is_finite:
        kernel = Kernel(successors, family="product", parameters=parameters)
        return MarkovChain(initial, kernel, labeling), lift_acceptance(dsa)

    # Only pairs reachable from the initial support are kept.
    rows: dict[StateId, Distribution] = {}
    frontier = deque(initial.states())
    while frontier:
        pair = frontier.popleft()
        if pair in rows:
            continue
        rows[pair] = successors(pair)
        frontier.extend(u for u in rows[pair] if u not in rows)
    logging.debug(
        "product of %d chain states and %d automaton states has %d reachable pairs",
        len(chain.universe),
        len(dsa.states),
        len(rows),
    )
    universe = frozenset(rows)
    kernel = Kernel(rows.__getitem__, states=universe, family="product", parameters=parameters)
    return MarkovChain(initial, kernel, labeling), lift_acceptance(dsa, universe)


def _test_lasso() -> None:
    """
    >>> toggle = DeterministicStreettAutomaton.from_function(
    ...     ["q0", "q1"], "q0", ["a"],
    ...     lambda q, w: ({"q0": "q1", "q1": "q0"}[q] if "a" in w else q),
    ...     acceptance=[({"q1"}, set())],
    ... )
    >>> dsa_accepts_lasso(toggle, [], [{"a"}, {"a"}])
    False
    >>> dsa_accepts_lasso(toggle, [], [set()])
    True
    """
