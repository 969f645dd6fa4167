"""Mechanical checkers for supermartingale certificates and region decompositions.

Each checker verifies the universally quantified conditions of one proof
rule state by state and returns a ``CheckReport``. On finite chains every
state of the universe is checked. On generated (infinite) chains the
conditions are checked on a declared finite ``Window`` and the verdict is
``pass-on-window``; value functions are still evaluated at successors that
leave the window.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import re
import time
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Sequence, Tuple

from reactivity_checker._common.reactivity_common import (
    DEFAULT_CONFIG,
    BadParameter,
    CheckEntry,
    CheckerConfig,
    CheckReport,
    DisjointnessViolation,
    EmptyRGrid,
    Number,
    StateId,
    UnboundedEnumeration,
    Verdict,
    is_tight,
    leq,
    mode_of,
    parse_fraction,
    sort_states,
)
from reactivity_checker.certificates.functions import (
    MonotoneScalarFunction,
    RankingFunction,
    ValueFunction,
)
from reactivity_checker.chain.markov import MarkovChain, Region, init_expectation, post_expectation
from reactivity_checker.oracle import exact
from reactivity_checker.omega.product import StreettCondition

WINDOW_RE = re.compile(r"^\s*(?P<low>-?\d+)\s*\.\.\s*(?P<high>-?\d+)\s*$")


@dataclasses.dataclass(frozen=True)
class Window:
    """Finite set of states on which universally quantified conditions are checked."""

    states: frozenset
    label: str

    @classmethod
    def interval(cls, low: int, high: int) -> Window:
        if low > high:
            raise BadParameter(f"empty window {low}..{high}")
        return cls(frozenset(range(low, high + 1)), f"{low}..{high}")

    @classmethod
    def parse(cls, text: str) -> Window:
        """Parse an integer window ``a..b``.

        >>> w = Window.parse("-2..1")
        >>> sorted(w.states), w.label
        ([-2, -1, 0, 1], '-2..1')
        """
        match = WINDOW_RE.match(text)
        if match is None:
            raise BadParameter(f"window must look like a..b, got {text!r}")
        return cls.interval(int(match.group("low")), int(match.group("high")))

    @classmethod
    def of(cls, states: Iterable[StateId], label: Optional[str] = None) -> Window:
        members = frozenset(states)
        return cls(members, label or f"{len(members)} states")


@dataclasses.dataclass(frozen=True)
class DecompositionWitness:
    """Invariant I and one absorbing region J_i per Streett pair."""

    invariant: Region
    absorbing: Tuple[Region, ...]


@dataclasses.dataclass(frozen=True)
class Rule1Pair:
    v: ValueFunction
    w: ValueFunction
    u: RankingFunction
    gamma: Optional[Number] = None


@dataclasses.dataclass(frozen=True)
class Rule2Pair:
    v: ValueFunction
    w: ValueFunction
    d: MonotoneScalarFunction
    p: MonotoneScalarFunction
    gamma: Optional[Number] = None


@dataclasses.dataclass(frozen=True)
class Rule1Bundle:
    witness: DecompositionWitness
    v0: ValueFunction
    pairs: Tuple[Rule1Pair, ...]


@dataclasses.dataclass(frozen=True)
class Rule2Bundle:
    witness: DecompositionWitness
    v0: ValueFunction
    pairs: Tuple[Rule2Pair, ...]


@dataclasses.dataclass(frozen=True)
class _Domain:
    states: Tuple[StateId, ...]
    window: Optional[str]
    on_window: bool


def _domain(chain: MarkovChain, window: Optional[Window]) -> _Domain:
    if chain.is_finite:
        universe = chain.universe
        if window is None:
            return _Domain(tuple(sort_states(universe)), None, False)
        states = window.states & universe
        return _Domain(tuple(sort_states(states)), window.label, not universe <= states)
    if window is None:
        raise UnboundedEnumeration(
            f"{chain.kernel.describe()} is infinite; a verification window is required"
        )
    return _Domain(tuple(sort_states(window.states)), window.label, True)


def _inequality(
    tag: str,
    checks: Iterable[tuple[Any, Number, Number]],
    pair: Optional[int] = None,
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckEntry:
    """Entry for ``lhs <= rhs`` at every (witness, lhs, rhs)."""
    witnesses = []
    slack: Optional[Number] = None
    tight = False
    for witness, lhs, rhs in checks:
        difference = rhs - lhs
        slack = difference if slack is None else min(slack, difference)
        if not leq(lhs, rhs, config.tolerance):
            witnesses.append(witness)
        elif lhs > rhs:
            tight = True
    return CheckEntry(
        tag=tag,
        verdict=Verdict.FAIL if witnesses else Verdict.PASS,
        witnesses=tuple(witnesses),
        slack=slack,
        pair=pair,
        note="tight" if tight else None,
    )


def _positive(
    tag: str,
    checks: Iterable[tuple[Any, Number]],
    pair: Optional[int] = None,
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckEntry:
    """Entry for ``value > margin`` at every (witness, value)."""
    witnesses = []
    slack: Optional[Number] = None
    for witness, value in checks:
        slack = value if slack is None else min(slack, value)
        if not value > config.min_margin(mode_of(value)):
            witnesses.append(witness)
    return CheckEntry(
        tag, Verdict.FAIL if witnesses else Verdict.PASS, tuple(witnesses), slack, pair
    )


def _supermartingale(chain: MarkovChain, v: ValueFunction, states: Iterable[StateId]) -> Iterator[tuple[StateId, Number, Number]]:
    for s in states:
        yield s, post_expectation(chain, v, s), v(s)


def _safety_entries(
    prefix: str,
    chain: MarkovChain,
    invariant: Region,
    v0: ValueFunction,
    domain: _Domain,
    config: CheckerConfig,
) -> list[CheckEntry]:
    inside = [s for s in domain.states if invariant.contains(s)]
    outside = [s for s in domain.states if not invariant.contains(s)]
    return [
        _inequality(
            f"{prefix}.supermartingale",
            _supermartingale(chain, v0, inside),
            config=config,
        ),
        _inequality(
            f"{prefix}.exit-bound",
            ((s, Fraction(1), v0(s)) for s in outside),
            config=config,
        ),
    ]


def _absorbing_entries(
    prefix: str,
    chain: MarkovChain,
    a: Region,
    j: Region,
    v: ValueFunction,
    gamma: Optional[Number],
    domain: _Domain,
    pair: Optional[int],
    config: CheckerConfig,
) -> tuple[list[CheckEntry], Number]:
    """Qualitative safety shape of ``v``; returns the entries and the margin used."""
    overlap = [s for s in domain.states if a.contains(s) and j.contains(s)]
    if overlap:
        raise DisjointnessViolation(
            f"regions {a.name} and {j.name} share states {sort_states(overlap)[:5]}"
        )
    entries = [
        _inequality(
            f"{prefix}.supermartingale",
            _supermartingale(chain, v, (s for s in domain.states if not a.contains(s))),
            pair,
            config,
        ),
        _inequality(
            f"{prefix}.target-bound",
            ((s, Fraction(1), v(s)) for s in domain.states if a.contains(s)),
            pair,
            config,
        ),
    ]
    absorbing = [(s, v(s)) for s in domain.states if j.contains(s)]
    supremum: Number = max((value for _, value in absorbing), default=Fraction(0))
    inferred = gamma is None
    margin = 1 - supremum if inferred else gamma
    assert margin is not None
    if inferred:
        # Witnesses are the states attaining the supremum.
        entries.append(
            _positive(
                f"{prefix}.margin",
                ((s, 1 - value) for s, value in absorbing if is_tight(value, supremum)),
                pair,
                config,
            )
            if absorbing
            else CheckEntry(f"{prefix}.margin", Verdict.PASS, slack=margin, pair=pair)
        )
    else:
        bound_entry = _inequality(
            f"{prefix}.margin",
            ((s, value, 1 - margin) for s, value in absorbing),
            pair,
            config,
        )
        if not margin > config.min_margin(mode_of(margin)):
            bound_entry = dataclasses.replace(
                bound_entry, verdict=Verdict.FAIL, note=f"declared margin {margin} is not positive"
            )
        entries.append(bound_entry)
    return entries, margin


def check_quant_safety(
    chain: MarkovChain,
    x: Region,
    v: ValueFunction,
    window: Optional[Window] = None,
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckReport:
    """Quantitative safety: PV <= V inside X, V >= 1 outside; bound P(X^omega) >= 1 - muV."""
    domain = _domain(chain, window)
    entries = _safety_entries("quant-safety", chain, x, v, domain, config)
    expectation = init_expectation(chain, v)
    return CheckReport.from_entries(
        "quant-safety",
        entries,
        bound=1 - expectation,
        window=domain.window,
        on_window=domain.on_window,
        metrics={"init_expectation": expectation},
    )


def check_qual_safety(
    chain: MarkovChain,
    a: Region,
    j: Region,
    v: ValueFunction,
    window: Optional[Window] = None,
    gamma: Optional[Number] = None,
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckReport:
    """Qualitative safety: returns to A from J happen with probability at most 1 - gamma."""
    domain = _domain(chain, window)
    entries, margin = _absorbing_entries("qual-safety", chain, a, j, v, gamma, domain, None, config)
    return CheckReport.from_entries(
        "qual-safety",
        entries,
        window=domain.window,
        on_window=domain.on_window,
        metrics={"gamma": margin, "return_bound": 1 - margin},
    )


def _check_pair_counts(cond: StreettCondition, witness: DecompositionWitness, pairs: Sequence[Any]) -> None:
    if len(witness.absorbing) != len(cond):
        raise BadParameter(
            f"{len(witness.absorbing)} absorbing regions for {len(cond)} Streett pairs"
        )
    if len(pairs) != len(cond):
        raise BadParameter(f"{len(pairs)} certificate pairs for {len(cond)} Streett pairs")


def check_decomposition_semantic(
    chain: MarkovChain,
    cond: StreettCondition,
    witness: DecompositionWitness,
) -> CheckReport:
    """Check an absorbing-region decomposition on a finite chain with exact probabilities.

    Per pair: J_i lies in I minus A_i, returns to A_i from J_i have
    probability below one, and every state of I almost surely returns to
    B_i, J_i or the complement of I. The bound is P_mu(I^omega).
    """
    if len(witness.absorbing) != len(cond):
        raise BadParameter(
            f"{len(witness.absorbing)} absorbing regions for {len(cond)} Streett pairs"
        )
    start = time.monotonic()
    universe = chain.universe
    invariant = witness.invariant.enumerate(universe)
    outside = witness.invariant.complement(universe)
    entries = []
    for index, ((a, b), j) in enumerate(zip(cond, witness.absorbing), start=1):
        absorbing = sort_states(j.enumerate(universe))
        entries.append(
            CheckEntry(
                "decomposition.absorbing-inclusion",
                Verdict.PASS,
                pair=index,
            )
        )
        stray = [s for s in absorbing if s not in invariant or a.contains(s)]
        if stray:
            entries[-1] = CheckEntry(
                "decomposition.absorbing-inclusion", Verdict.FAIL, tuple(stray), pair=index
            )

        returns = exact.return_vector(chain, a)
        supremum = max((returns[s] for s in absorbing), default=Fraction(0))
        entries.append(
            CheckEntry(
                "decomposition.absorbing-return",
                Verdict.PASS if supremum < 1 else Verdict.FAIL,
                tuple(s for s in absorbing if returns[s] == 1),
                slack=1 - supremum,
                pair=index,
            )
        )

        escape = b.union(j).union(outside)
        arrivals = exact.return_vector(chain, escape)
        inside = sort_states(invariant)
        infimum = min((arrivals[s] for s in inside), default=Fraction(1))
        entries.append(
            CheckEntry(
                "decomposition.termination",
                Verdict.PASS if infimum == 1 else Verdict.FAIL,
                tuple(s for s in inside if arrivals[s] < 1),
                slack=infimum - 1,
                pair=index,
            )
        )

    bound = exact.stay_probability(chain, witness.invariant)
    logging.debug(
        "decomposition check over %d states took %dms",
        len(universe),
        (time.monotonic() - start) * 1000,
    )
    return CheckReport.from_entries("decomposition", entries, bound=bound)


def _grid(r_grid: Sequence[Any]) -> list[Number]:
    if not r_grid:
        raise EmptyRGrid("the r grid must contain at least one level")
    levels = []
    for r in r_grid:
        level = parse_fraction(r) if isinstance(r, str) else r
        if level < 0:
            raise BadParameter(f"grid levels must be non-negative, got {level}")
        levels.append(level)
    return sorted(set(levels))


def _termination_entries(
    prefix: str,
    chain: MarkovChain,
    invariant: Region,
    escape: Region,
    w: ValueFunction,
    u: Optional[RankingFunction],
    domain: _Domain,
    pair: int,
    config: CheckerConfig,
) -> tuple[list[CheckEntry], list[StateId]]:
    """W supermartingale and positive before B_i or J_i, W (and U) zero on them."""
    running = [s for s in domain.states if invariant.contains(s) and not escape.contains(s)]
    stopped = [s for s in domain.states if invariant.contains(s) and escape.contains(s)]
    zero_failures = [
        s
        for s in stopped
        if not is_tight(w(s), 0, config.tolerance) or (u is not None and u(s) != 0)
    ]
    entries = [
        _inequality(
            f"{prefix}.termination-supermartingale",
            _supermartingale(chain, w, running),
            pair,
            config,
        ),
        _positive(f"{prefix}.positivity", ((s, w(s)) for s in running), pair, config),
        CheckEntry(
            f"{prefix}.zero-on-targets",
            Verdict.FAIL if zero_failures else Verdict.PASS,
            tuple(zero_failures),
            pair=pair,
        ),
    ]
    return entries, running


def check_rule1(
    chain: MarkovChain,
    cond: StreettCondition,
    bundle: Rule1Bundle,
    window: Optional[Window] = None,
    r_grid: Sequence[Any] = (),
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckReport:
    """Check a certificate bundle of the ranking-function proof rule.

    The rank-decrease condition is checked for the levels of ``r_grid``
    together with every W value achieved in the window.
    """
    _check_pair_counts(cond, bundle.witness, bundle.pairs)
    levels = _grid(r_grid)
    domain = _domain(chain, window)
    invariant = bundle.witness.invariant
    entries = _safety_entries("rule1.invariant", chain, invariant, bundle.v0, domain, config)
    gammas: dict[int, Number] = {}
    epsilons: dict[int, dict[Number, Number]] = {}
    caveats = []

    for index, ((a, b), j, certificate) in enumerate(
        zip(cond, bundle.witness.absorbing, bundle.pairs), start=1
    ):
        absorbing, gammas[index] = _absorbing_entries(
            "rule1.absorbing", chain, a, j, certificate.v, certificate.gamma, domain, index, config
        )
        entries.extend(absorbing)
        termination, running = _termination_entries(
            "rule1", chain, invariant, b.union(j), certificate.w, certificate.u, domain, index, config
        )
        entries.extend(termination)

        u, w = certificate.u, certificate.w
        decrease = {
            s: sum(
                (p for s2, p in chain.row(s).items() if u(s2) < u(s)),
                Fraction(0),
            )
            for s in running
        }
        achieved = sorted({w(s) for s in running})
        epsilon_r: dict[Number, Number] = {}
        for r in levels:
            sublevel = [decrease[s] for s in running if w(s) <= r]
            if sublevel:
                epsilon_r[r] = min(sublevel)
        epsilons[index] = epsilon_r
        entries.append(
            _positive("rule1.rank-decrease", ((s, decrease[s]) for s in running), index, config)
        )
        entries.append(
            CheckEntry(
                "rule1.rank-bounded",
                Verdict.PASS,
                pair=index,
                note=f"{len(set(levels) | set(achieved))} levels checked",
            )
        )
        if domain.on_window:
            caveats.append(
                f"pair {index}: boundedness of U on sublevel sets of W holds on the window only"
            )

    expectation = init_expectation(chain, bundle.v0)
    return CheckReport.from_entries(
        "rule1",
        entries,
        bound=1 - expectation,
        window=domain.window,
        on_window=domain.on_window,
        caveats=caveats,
        metrics={"gamma": gammas, "epsilon_r": epsilons},
    )


def check_rule2(
    chain: MarkovChain,
    cond: StreettCondition,
    bundle: Rule2Bundle,
    window: Optional[Window] = None,
    r_grid: Sequence[Any] = (),
    config: CheckerConfig = DEFAULT_CONFIG,
) -> CheckReport:
    """Check a certificate bundle of the decrease/probability proof rule.

    Antitonicity of d_i and p_i is checked on every pair of positive levels
    from ``r_grid`` and the achieved W values.
    """
    _check_pair_counts(cond, bundle.witness, bundle.pairs)
    levels = _grid(r_grid)
    domain = _domain(chain, window)
    invariant = bundle.witness.invariant
    entries = _safety_entries("rule2.invariant", chain, invariant, bundle.v0, domain, config)
    gammas: dict[int, Number] = {}

    for index, ((a, b), j, certificate) in enumerate(
        zip(cond, bundle.witness.absorbing, bundle.pairs), start=1
    ):
        absorbing, gammas[index] = _absorbing_entries(
            "rule2.absorbing", chain, a, j, certificate.v, certificate.gamma, domain, index, config
        )
        entries.extend(absorbing)
        termination, running = _termination_entries(
            "rule2", chain, invariant, b.union(j), certificate.w, None, domain, index, config
        )
        entries.extend(termination)

        w, d, p = certificate.w, certificate.d, certificate.p
        drift = []
        for s in running:
            r = w(s)
            if r <= 0:
                continue
            target = r - d(r)
            mass = sum((q for s2, q in chain.row(s).items() if w(s2) <= target), Fraction(0))
            drift.append((s, p(r), mass))
        entries.append(_inequality("rule2.drift", drift, index, config))

        positive = sorted(set(r for r in levels if r > 0) | {w(s) for s in running if w(s) > 0})
        entries.append(_antitone("rule2.probability-antitone", p, positive, index, config))
        entries.append(_antitone("rule2.decrease-antitone", d, positive, index, config))

    expectation = init_expectation(chain, bundle.v0)
    return CheckReport.from_entries(
        "rule2",
        entries,
        bound=1 - expectation,
        window=domain.window,
        on_window=domain.on_window,
        metrics={"gamma": gammas},
    )


def _antitone(
    tag: str,
    function: MonotoneScalarFunction,
    levels: Sequence[Number],
    pair: int,
    config: CheckerConfig,
) -> CheckEntry:
    """f(r) >= f(r') for every r < r' among ``levels``; witnesses are level pairs."""
    values = {r: function(r) for r in levels}
    return _inequality(
        tag,
        (((r, r2), values[r2], values[r]) for r, r2 in itertools.combinations(levels, 2)),
        pair,
        config,
    )
