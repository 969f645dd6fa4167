"""Registry of builtin chain families.

Infinite chains cannot be written down in a model file, so they are
referenced by family name and parameters, e.g. ``lending-casino(1/5)``.
The registry also carries the small explicit chains used as fixtures.
"""

from __future__ import annotations

import dataclasses
import re
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Mapping, Optional, Sequence, Tuple

import numpy as np

from reactivity_checker._common.reactivity_common import (
    BadParameter,
    StateId,
    UnknownFamily,
    parse_fraction,
)
from reactivity_checker.chain.markov import Distribution, Kernel, MarkovChain, Region, dirac

FAMILY_CALL_RE = re.compile(r"^\s*(?P<name>[a-z][a-z0-9-]*)\s*(?:\((?P<args>[^()]*)\))?\s*$")


@dataclasses.dataclass(frozen=True)
class BuiltinModel:
    """A chain with its named regions and its natural Streett pairs."""

    chain: MarkovChain
    regions: Mapping[str, Region]
    pairs: Tuple[Tuple[str, str], ...] = ()
    integer_states: bool = False

    def region(self, name: str) -> Region:
        try:
            return self.regions[name]
        except KeyError:
            raise BadParameter(f"unknown region {name!r}") from None

    def region_pairs(self) -> list[tuple[Region, Region]]:
        return [(self.region(a), self.region(b)) for a, b in self.pairs]


@dataclasses.dataclass(frozen=True)
class Family:
    name: str
    parameters: Tuple[str, ...]
    build: Callable[..., BuiltinModel]
    description: str = ""


def _epsilon(value: Any) -> Fraction:
    epsilon = parse_fraction(value) if not isinstance(value, Fraction) else value
    if not 0 < epsilon < 1:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def _natural(value: Any, name: str, minimum: int = 0) -> int:
    if isinstance(value, Fraction) and value.denominator == 1:
        value = value.numerator
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise BadParameter(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def _casino_row(state: int, epsilon: Fraction) -> Distribution:
    if state >= 0:
        up = down = Fraction(1, 2)
    else:
        up, down = (1 - epsilon) / 2, (1 + epsilon) / 2
    return Distribution({state + 1: up, state - 1: down})


def casino_regions() -> dict[str, Region]:
    return {
        "Profit": Region.where("Profit", lambda w: w > 0),
        "Solvency": Region.where("Solvency", lambda w: w >= 0),
        "Debt": Region.where("Debt", lambda w: w < 0),
        "Empty": Region.nothing("Empty"),
    }


def _casino_labels(w: StateId) -> FrozenSet[str]:
    if w > 0:  # type: ignore[operator]
        return frozenset({"profit", "solvency"})
    if w == 0:
        return frozenset({"solvency"})
    return frozenset({"debt"})


def lending_casino(epsilon: Any) -> BuiltinModel:
    """Wealth walk: fair while solvent, biased downwards by epsilon in debt.

    >>> model = lending_casino("1/5")
    >>> model.chain.row(-1).support
    {0: Fraction(2, 5), -2: Fraction(3, 5)}
    >>> model.chain.row(3)[4]
    Fraction(1, 2)
    """
    eps = _epsilon(epsilon)

    def successors(state: StateId) -> Distribution:
        if isinstance(state, bool) or not isinstance(state, int):
            raise BadParameter(f"lending-casino states are integers, got {state!r}")
        return _casino_row(state, eps)

    kernel = Kernel(successors, family="lending-casino", parameters={"epsilon": eps})
    return BuiltinModel(
        chain=MarkovChain(dirac(1), kernel, _casino_labels),
        regions=casino_regions(),
        pairs=(("Solvency", "Empty"),),
        integer_states=True,
    )


def lending_casino_truncated(epsilon: Any, bound: Any) -> BuiltinModel:
    """The casino restricted to [-bound, bound] with absorbing end states."""
    eps = _epsilon(epsilon)
    n = _natural(bound, "bound", minimum=2)
    rows: dict[StateId, Mapping[StateId, Fraction]] = {}
    for w in range(-n, n + 1):
        if abs(w) == n:
            rows[w] = {w: Fraction(1)}
        else:
            rows[w] = dict(_casino_row(w, eps).support)
    explicit = Kernel.from_rows(rows)
    kernel = dataclasses.replace(
        explicit,
        family="lending-casino-truncated",
        parameters={"epsilon": eps, "bound": n},
    )
    universe = explicit.states or frozenset()
    regions = {
        name: Region.of(name, region.enumerate(universe))
        for name, region in casino_regions().items()
    }
    return BuiltinModel(
        chain=MarkovChain(dirac(1), kernel, _casino_labels),
        regions=regions,
        pairs=(("Solvency", "Empty"),),
        integer_states=True,
    )


def biased_walk(p: Any) -> BuiltinModel:
    """Walk on the integers stepping up with probability p, started at 0."""
    up = parse_fraction(p) if not isinstance(p, Fraction) else p
    if not 0 < up < 1:
        raise BadParameter(f"p must lie in (0, 1), got {up}")

    def successors(state: StateId) -> Distribution:
        if isinstance(state, bool) or not isinstance(state, int):
            raise BadParameter(f"biased-walk states are integers, got {state!r}")
        return Distribution({state + 1: up, state - 1: 1 - up})

    kernel = Kernel(successors, family="biased-walk", parameters={"p": up})
    regions = {
        "NonNegative": Region.where("NonNegative", lambda w: w >= 0),
        "Negative": Region.where("Negative", lambda w: w < 0),
        "Origin": Region.of("Origin", [0]),
    }
    return BuiltinModel(chain=MarkovChain(dirac(0), kernel), regions=regions, integer_states=True)


def _explicit(
    rows: Mapping[str, Mapping[str, Any]],
    labels: Mapping[str, Sequence[str]],
    regions: Mapping[str, Sequence[str]],
    pairs: Sequence[Tuple[str, str]],
    initial: str = "s0",
) -> BuiltinModel:
    kernel = Kernel.from_rows(
        {s: {u: parse_fraction(p) for u, p in row.items()} for s, row in rows.items()}
    )
    table = {s: frozenset(labels.get(s, ())) for s in rows}
    return BuiltinModel(
        chain=MarkovChain(dirac(initial), kernel, table.__getitem__),
        regions={name: Region.of(name, members) for name, members in regions.items()},
        pairs=tuple(pairs),
    )


def twoway() -> BuiltinModel:
    """Two-way split into an a/b loop and an a-state leading to a sink."""
    return _explicit(
        rows={
            "s0": {"s1": "1/2", "s3": "1/2"},
            "s1": {"s2": 1},
            "s2": {"s1": 1},
            "s3": {"s4": 1},
            "s4": {"s4": 1},
        },
        labels={"s1": ["a"], "s2": ["b"], "s3": ["a"]},
        regions={"A": ["s1", "s3"], "B": ["s2"], "J": ["s4"]},
        pairs=[("A", "B")],
    )


def threeway() -> BuiltinModel:
    return _explicit(
        rows={
            "s0": {"s1": "1/3", "s3": "1/3", "s5": "1/3"},
            "s1": {"s2": 1},
            "s2": {"s1": 1},
            "s3": {"s4": 1},
            "s4": {"s4": 1},
            "s5": {"s5": 1},
        },
        labels={"s1": ["a"], "s2": ["b"], "s3": ["a"], "s5": ["a"]},
        regions={"A": ["s1", "s3", "s5"], "B": ["s2"], "J": ["s4"]},
        pairs=[("A", "B")],
    )


def leaky() -> BuiltinModel:
    """Chain whose a-loop through s6 escapes to the b-sink with probability 1/2."""
    return _explicit(
        rows={
            "s0": {"s1": "1/3", "s3": "1/3", "s5": "1/3"},
            "s1": {"s6": 1},
            "s6": {"s1": "1/2", "s2": "1/2"},
            "s2": {"s2": 1},
            "s3": {"s4": 1},
            "s4": {"s4": 1},
            "s5": {"s5": 1},
        },
        labels={"s1": ["a"], "s2": ["b"], "s3": ["a"], "s5": ["a"]},
        regions={
            "A": ["s1", "s3", "s5"],
            "B": ["s2"],
            "I": ["s0", "s1", "s2", "s3", "s4", "s6"],
            "J": ["s4", "s6"],
        },
        pairs=[("A", "B")],
    )


def random_chain(seed: Any, states: Any = 8, pairs: Any = 1) -> BuiltinModel:
    """Small random exact chain over 0..states-1 with random Streett pairs.

    >>> a, b = random_chain(7, 6, 2), random_chain(7, 6, 2)
    >>> [a.chain.row(s).support == b.chain.row(s).support for s in range(6)]
    [True, True, True, True, True, True]
    """
    seed = _natural(seed, "seed")
    n = _natural(states, "states", minimum=1)
    k = _natural(pairs, "pairs")
    rng = np.random.default_rng(seed)
    rows: dict[StateId, dict[StateId, Fraction]] = {}
    for s in range(n):
        fanout = int(rng.integers(1, min(3, n) + 1))
        targets = rng.choice(n, size=fanout, replace=False)
        weights = rng.integers(1, 5, size=fanout)
        total = int(weights.sum())
        rows[s] = {int(t): Fraction(int(w), total) for t, w in zip(targets, weights)}
    kernel = dataclasses.replace(
        Kernel.from_rows(rows),
        family="random",
        parameters={"seed": seed, "states": n, "pairs": k},
    )

    starts = sorted({int(t) for t in rng.choice(n, size=int(rng.integers(1, 3)))})
    initial = Distribution({s: Fraction(1, len(starts)) for s in starts})

    regions: dict[str, Region] = {}
    names: list[tuple[str, str]] = []
    for i in range(1, k + 1):
        a_members = [s for s in range(n) if rng.random() < 0.3]
        b_members = [s for s in range(n) if rng.random() < 0.25]
        regions[f"A{i}"] = Region.of(f"A{i}", a_members)
        regions[f"B{i}"] = Region.of(f"B{i}", b_members)
        names.append((f"A{i}", f"B{i}"))

    labels: Dict[StateId, FrozenSet[str]] = {
        s: frozenset(
            name.lower() for name, region in regions.items() if region.contains(s)
        )
        for s in range(n)
    }
    return BuiltinModel(
        chain=MarkovChain(initial, kernel, labels.__getitem__),
        regions=regions,
        pairs=tuple(names),
        integer_states=True,
    )


FAMILIES: dict[str, Family] = {
    family.name: family
    for family in (
        Family("lending-casino", ("epsilon",), lending_casino, "integer wealth walk"),
        Family(
            "lending-casino-truncated",
            ("epsilon", "bound"),
            lending_casino_truncated,
            "casino on [-bound, bound], absorbing ends",
        ),
        Family("biased-walk", ("p",), biased_walk, "integer walk stepping up with probability p"),
        Family("twoway", (), twoway, "five states, satisfies its pair almost surely"),
        Family("threeway", (), threeway, "six states, satisfies its pair with probability 2/3"),
        Family("leaky", (), leaky, "seven states, satisfies its pair with probability 2/3"),
        Family("random", ("seed", "states", "pairs"), random_chain, "seeded random chain"),
    )
}


def available_families() -> list[str]:
    return sorted(FAMILIES)


def builtin(name: str, parameters: Optional[Mapping[str, Any]] = None) -> BuiltinModel:
    """Instantiate a builtin family by name with keyword parameters."""
    family = FAMILIES.get(name)
    if family is None:
        raise UnknownFamily(f"unknown chain family {name!r}; known: {available_families()}")
    parameters = dict(parameters or {})
    unknown = set(parameters) - set(family.parameters)
    if unknown:
        raise BadParameter(f"{name} does not take {sorted(unknown)}")
    return family.build(**parameters)


def parse_family_call(text: str) -> tuple[str, dict[str, str]]:
    """Split ``name(arg, ...)`` into the family name and its keyword parameters.

    >>> parse_family_call("lending-casino(1/5)")
    ('lending-casino', {'epsilon': '1/5'})
    >>> parse_family_call("threeway")
    ('threeway', {})
    """
    match = FAMILY_CALL_RE.match(text)
    if match is None:
        raise BadParameter(f"cannot parse family reference {text!r}")
    name = match.group("name")
    family = FAMILIES.get(name)
    if family is None:
        raise UnknownFamily(f"unknown chain family {name!r}; known: {available_families()}")
    raw = match.group("args")
    args = [arg.strip() for arg in raw.split(",")] if raw and raw.strip() else []
    if len(args) > len(family.parameters):
        raise BadParameter(f"{name} takes at most {len(family.parameters)} arguments")
    return name, dict(zip(family.parameters, args))


def builtin_from_text(text: str) -> BuiltinModel:
    name, parameters = parse_family_call(text)
    return builtin(name, parameters)
