"""State universe, distributions, kernels, regions and trajectories."""

from __future__ import annotations

import bisect
import dataclasses
import enum
from collections import deque
from fractions import Fraction
from typing import Any, Callable, FrozenSet, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from reactivity_checker._common.reactivity_common import (
    DEFAULT_CONFIG,
    BadParameter,
    IndexOutOfRange,
    Mode,
    ModeMismatch,
    Number,
    Probability,
    StateId,
    UnboundedEnumeration,
    mode_of,
    sort_states,
)

Labeling = Callable[[StateId], FrozenSet[str]]


@dataclasses.dataclass(frozen=True)
class Distribution:
    """Finite-support probability distribution over states."""

    support: Mapping[StateId, Probability]

    def __post_init__(self) -> None:
        if not self.support:
            raise BadParameter("distribution support must be non-empty")
        for state, probability in self.support.items():
            if isinstance(probability, bool) or not isinstance(probability, (Fraction, int, float)):
                raise BadParameter(f"probability of {state!r} is not a number: {probability!r}")
            if probability <= 0:
                raise BadParameter(f"probability of {state!r} must be positive, got {probability}")
            if probability > 1 + DEFAULT_CONFIG.probability_slack:
                raise BadParameter(f"probability of {state!r} exceeds 1: {probability}")
        total = sum(self.support.values())
        if self.mode == Mode.EXACT:
            if total != 1:
                raise BadParameter(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > 1e-9:
            raise BadParameter(f"probabilities sum to {total}, not 1")

    @classmethod
    def of(cls, weights: Mapping[StateId, Number]) -> Distribution:
        """Build an exact distribution, converting integers to fractions."""
        return cls(
            {
                state: value if isinstance(value, float) else Fraction(value)
                for state, value in weights.items()
            }
        )

    @property
    def mode(self) -> Mode:
        return mode_of(*self.support.values())

    def __getitem__(self, state: StateId) -> Probability:
        return self.support.get(state, Fraction(0))

    def __iter__(self) -> Iterator[StateId]:
        return iter(self.support)

    def items(self) -> Iterable[tuple[StateId, Probability]]:
        return self.support.items()

    def states(self) -> FrozenSet[StateId]:
        return frozenset(self.support)

    def mass(self, region: Region) -> Probability:
        return sum(
            (p for s, p in self.support.items() if region.contains(s)), Fraction(0)
        )

    def expectation(self, function: Callable[[StateId], Number]) -> Number:
        return sum((p * function(s) for s, p in self.support.items()), Fraction(0))


def dirac(state: StateId) -> Distribution:
    """Point mass on ``state``.

    >>> dirac("s0").support
    {'s0': Fraction(1, 1)}
    >>> dirac(-3)[-3]
    Fraction(1, 1)
    """
    return Distribution({state: Fraction(1)})


@dataclasses.dataclass(frozen=True)
class Kernel:
    """Transition kernel over an explicit finite universe or a generated family."""

    successors: Callable[[StateId], Distribution]
    states: Optional[FrozenSet[StateId]] = None
    family: Optional[str] = None
    parameters: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: Mapping[StateId, Mapping[StateId, Number]]) -> Kernel:
        table = {state: Distribution.of(row) for state, row in rows.items()}
        universe = frozenset(table)
        for state, row in table.items():
            stray = row.states() - universe
            if stray:
                raise BadParameter(
                    f"row of {state!r} leaves the universe: {sort_states(stray)}"
                )
        return cls(successors=table.__getitem__, states=universe)

    @property
    def is_finite(self) -> bool:
        return self.states is not None

    def row(self, state: StateId) -> Distribution:
        if self.states is not None and state not in self.states:
            raise BadParameter(f"state {state!r} is not in the universe")
        return self.successors(state)

    def describe(self) -> str:
        if self.family is None:
            return f"explicit({len(self.states or ())} states)"
        args = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.family}({args})"


@dataclasses.dataclass(frozen=True)
class MarkovChain:
    """Time-homogeneous Markov chain (initial distribution, kernel, labels)."""

    initial: Distribution
    kernel: Kernel
    labeling: Optional[Labeling] = None

    def __post_init__(self) -> None:
        if self.kernel.states is not None:
            stray = self.initial.states() - self.kernel.states
            if stray:
                raise BadParameter(
                    f"initial support leaves the universe: {sort_states(stray)}"
                )

    @property
    def is_finite(self) -> bool:
        return self.kernel.is_finite

    @property
    def universe(self) -> FrozenSet[StateId]:
        if self.kernel.states is None:
            raise UnboundedEnumeration(
                f"{self.kernel.describe()} has no finite state universe"
            )
        return self.kernel.states

    def row(self, state: StateId) -> Distribution:
        return self.kernel.row(state)

    def label(self, state: StateId) -> FrozenSet[str]:
        if self.labeling is None:
            return frozenset()
        return frozenset(self.labeling(state))

    def rerooted(self, initial: Distribution) -> MarkovChain:
        return dataclasses.replace(self, initial=initial)

    def reachable(self, sources: Optional[Iterable[StateId]] = None) -> FrozenSet[StateId]:
        """States reachable from ``sources`` (default: the initial support)."""
        frontier = deque(self.initial.states() if sources is None else sources)
        seen = set(frontier)
        while frontier:
            state = frontier.popleft()
            for successor in self.row(state):
                if successor not in seen:
                    seen.add(successor)
                    frontier.append(successor)
        return frozenset(seen)


@dataclasses.dataclass(frozen=True)
class Region:
    """A named set of states given by a predicate and, if known, its members."""

    name: str
    predicate: Callable[[StateId], bool]
    members: Optional[FrozenSet[StateId]] = None

    @classmethod
    def of(cls, name: str, states: Iterable[StateId]) -> Region:
        members = frozenset(states)
        return cls(name, members.__contains__, members)

    @classmethod
    def where(cls, name: str, predicate: Callable[[StateId], bool]) -> Region:
        return cls(name, predicate)

    @classmethod
    def everything(cls, name: str = "S") -> Region:
        return cls(name, lambda _: True)

    @classmethod
    def nothing(cls, name: str = "empty") -> Region:
        return cls(name, lambda _: False, frozenset())

    def contains(self, state: StateId) -> bool:
        return bool(self.predicate(state))

    __contains__ = contains

    def enumerate(self, universe: Optional[Iterable[StateId]] = None) -> FrozenSet[StateId]:
        """Members of this region, within ``universe`` when one is given."""
        if universe is not None:
            if self.members is not None:
                return self.members & frozenset(universe)
            return frozenset(s for s in universe if self.predicate(s))
        if self.members is None:
            raise UnboundedEnumeration(f"region {self.name!r} cannot be enumerated")
        return self.members

    def union(self, other: Region, name: Optional[str] = None) -> Region:
        members = None
        if self.members is not None and other.members is not None:
            members = self.members | other.members
        return Region(
            name or f"({self.name}|{other.name})",
            lambda s: self.contains(s) or other.contains(s),
            members,
        )

    def intersection(self, other: Region, name: Optional[str] = None) -> Region:
        members = None
        if self.members is not None:
            members = frozenset(s for s in self.members if other.contains(s))
        elif other.members is not None:
            members = frozenset(s for s in other.members if self.contains(s))
        return Region(
            name or f"({self.name}&{other.name})",
            lambda s: self.contains(s) and other.contains(s),
            members,
        )

    def difference(self, other: Region, name: Optional[str] = None) -> Region:
        members = None
        if self.members is not None:
            members = frozenset(s for s in self.members if not other.contains(s))
        return Region(
            name or f"({self.name}-{other.name})",
            lambda s: self.contains(s) and not other.contains(s),
            members,
        )

    def complement(self, universe: Optional[Iterable[StateId]] = None) -> Region:
        members = None
        if universe is not None:
            members = frozenset(s for s in universe if not self.contains(s))
        return Region(f"~{self.name}", lambda s: not self.contains(s), members)


class NotHitType(enum.Enum):
    NOT_HIT = "NotHit"

    def __repr__(self) -> str:
        return "NotHit"


NOT_HIT = NotHitType.NOT_HIT
HitTime = Union[int, NotHitType]


@dataclasses.dataclass(frozen=True)
class Trajectory:
    """Finite trajectory prefix with the seed provenance it was sampled from."""

    states: Tuple[StateId, ...]
    seed: Optional[int] = None
    index: Optional[int] = None
    offset: int = 0

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, position: int) -> StateId:
        return self.states[position]


def prefix_probability(chain: MarkovChain, constraints: Sequence[Region]) -> Fraction:
    """Probability that the first ``len(constraints)`` states lie in the regions.

    Iterated sum-product over the trajectory measure of finite prefixes.
    """
    if not constraints:
        return Fraction(1)
    if not chain.is_finite:
        for region in constraints:
            if region.members is None:
                raise UnboundedEnumeration(
                    f"constraint region {region.name!r} cannot be enumerated"
                )
    if chain.initial.mode != Mode.EXACT:
        raise ModeMismatch("prefix probabilities need an exact initial distribution")

    mass: dict[StateId, Fraction] = {
        s: Fraction(p) for s, p in chain.initial.items() if constraints[0].contains(s)
    }
    for region in constraints[1:]:
        following: dict[StateId, Fraction] = {}
        for state, weight in mass.items():
            row = chain.row(state)
            if row.mode != Mode.EXACT:
                raise ModeMismatch(f"row of {state!r} is approximate")
            for successor, probability in row.items():
                if region.contains(successor):
                    following[successor] = following.get(successor, Fraction(0)) + weight * probability
        mass = following
        if not mass:
            return Fraction(0)
    return sum(mass.values(), Fraction(0))


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for trajectory ``index`` of a run seeded with ``seed``."""
    if seed < 0 or index < 0:
        raise BadParameter("seed and index must be natural numbers")
    sequence = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(sequence))


class _Sampler:
    """Inverse-CDF sampling with per-state cumulative tables."""

    BLOCK = 4096

    def __init__(self, chain: MarkovChain, seed: int, index: int) -> None:
        self._chain = chain
        self._rng = trajectory_rng(seed, index)
        self._uniforms: list[float] = []
        self._position = 0
        self._tables: dict[StateId, tuple[list[StateId], list[float]]] = {}

    def _uniform(self) -> float:
        if self._position >= len(self._uniforms):
            self._uniforms = self._rng.random(self.BLOCK).tolist()
            self._position = 0
        value = self._uniforms[self._position]
        self._position += 1
        return value

    def _draw(self, table: tuple[list[StateId], list[float]]) -> StateId:
        states, cumulative = table
        position = bisect.bisect_right(cumulative, self._uniform())
        return states[min(position, len(states) - 1)]

    def _table(self, state: StateId) -> tuple[list[StateId], list[float]]:
        table = self._tables.get(state)
        if table is None:
            if len(self._tables) >= 65536:
                self._tables.clear()
            table = self._tables[state] = _cumulative_table(self._chain.row(state))
        return table

    def walk(self, length: int) -> Iterator[StateId]:
        state = self._draw(_cumulative_table(self._chain.initial))
        yield state
        for _ in range(length - 1):
            state = self._draw(self._table(state))
            yield state


def _cumulative_table(distribution: Distribution) -> tuple[list[StateId], list[float]]:
    states = sort_states(distribution)
    cumulative: list[float] = []
    total = 0.0
    for state in states:
        total += float(distribution[state])
        cumulative.append(total)
    return states, cumulative


def iterate_trajectory(chain: MarkovChain, length: int, seed: int, index: int) -> Iterator[StateId]:
    """Lazily sample the states of ``sample_trajectory``."""
    if length < 1:
        raise BadParameter("trajectory length must be at least 1")
    return _Sampler(chain, seed, index).walk(length)


def sample_trajectory(chain: MarkovChain, length: int, seed: int, index: int = 0) -> Trajectory:
    """Sample ``length`` states; the result depends only on (chain, length, seed, index)."""
    states = tuple(iterate_trajectory(chain, length, seed, index))
    return Trajectory(states=states, seed=seed, index=index)


def first_hitting_time(trajectory: Trajectory, target: Region) -> HitTime:
    """Least index at which the trajectory is in ``target``.

    >>> t = Trajectory(("s0", "s1", "s2"))
    >>> first_hitting_time(t, Region.of("A", ["s2"]))
    2
    >>> first_hitting_time(t, Region.of("A", ["s4"]))
    NotHit
    """
    for position, state in enumerate(trajectory.states):
        if target.contains(state):
            return position
    return NOT_HIT


def first_return_time(trajectory: Trajectory, target: Region) -> HitTime:
    """Least index of at least one at which the trajectory is in ``target``."""
    for position, state in enumerate(trajectory.states[1:], start=1):
        if target.contains(state):
            return position
    return NOT_HIT


def shift(trajectory: Trajectory, n: int) -> Trajectory:
    """Drop the first ``n`` states."""
    if n < 0 or n >= len(trajectory):
        raise IndexOutOfRange(
            f"cannot shift a trajectory of length {len(trajectory)} by {n}"
        )
    return dataclasses.replace(
        trajectory, states=trajectory.states[n:], offset=trajectory.offset + n
    )


def post_expectation(chain: MarkovChain, value: Callable[[StateId], Number], state: StateId) -> Number:
    """One-step expectation PV(s) = sum over u of P(s, u) V(u)."""
    return chain.row(state).expectation(value)


def init_expectation(chain: MarkovChain, value: Callable[[StateId], Number]) -> Number:
    """Initial expectation of ``value`` under the chain's initial distribution."""
    return chain.initial.expectation(value)
