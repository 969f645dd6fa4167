"""Value, ranking and scalar functions used by certificates, and their builtins."""

from __future__ import annotations

import dataclasses
import enum
from fractions import Fraction
from typing import Any, Callable, Mapping, Optional, Tuple

from reactivity_checker._common.reactivity_common import (
    BadParameter,
    EvaluationError,
    Number,
    ReactivityError,
    StateId,
    UnknownFamily,
    parse_fraction,
)
from reactivity_checker.chain.families import FAMILY_CALL_RE


def _evaluate(name: str, evaluator: Callable[[Any], Number], argument: Any) -> Number:
    try:
        value = evaluator(argument)
    except ReactivityError as err:
        raise EvaluationError(f"{name} cannot be evaluated at {argument!r}: {err}") from err
    except (KeyError, TypeError, ValueError, ArithmeticError) as err:
        raise EvaluationError(f"{name} cannot be evaluated at {argument!r}") from err
    if value is None or isinstance(value, bool) or not isinstance(value, (Fraction, int, float)):
        raise EvaluationError(f"{name} has no numeric value at {argument!r}")
    return value


@dataclasses.dataclass(frozen=True)
class ValueFunction:
    """Non-negative function over states (V_0, V_i and W_i of a certificate)."""

    name: str
    evaluator: Callable[[StateId], Number]
    table: Optional[Mapping[StateId, Number]] = None
    reference: Optional[str] = None

    def __call__(self, state: StateId) -> Number:
        value = _evaluate(self.name, self.evaluator, state)
        if value < 0:
            raise EvaluationError(f"{self.name} is negative at {state!r}: {value}")
        return value

    @classmethod
    def from_table(
        cls, name: str, table: Mapping[StateId, Number], default: Optional[Number] = None
    ) -> ValueFunction:
        """Tabulated function; states missing from the table take ``default``.

        >>> v = ValueFunction.from_table("V0", {"s5": 1, "s0": Fraction(1, 3)}, default=0)
        >>> v("s0"), v("s1")
        (Fraction(1, 3), 0)
        """
        frozen = dict(table)
        if default is None:
            return cls(name, frozen.__getitem__, frozen)
        return cls(name, lambda s: frozen.get(s, default), frozen)

    @classmethod
    def constant(cls, name: str, value: Number) -> ValueFunction:
        return cls(name, lambda _: value, reference=f"constant({value})")

    def scaled(self, factor: Number) -> ValueFunction:
        return ValueFunction(f"{self.name}*{factor}", lambda s: self(s) * factor)

    def shifted(self, offset: Number) -> ValueFunction:
        return ValueFunction(f"{self.name}+{offset}", lambda s: self(s) + offset)

    def with_value(self, state: StateId, value: Number) -> ValueFunction:
        """Copy of this function overriding one state."""
        return ValueFunction(
            f"{self.name}[{state!r}={value}]",
            lambda s: value if s == state else self(s),
        )

    def tabulate(self, states: Any) -> dict[StateId, Number]:
        return {state: self(state) for state in states}


@dataclasses.dataclass(frozen=True)
class RankingFunction:
    """Natural-valued ranking U_i."""

    name: str
    evaluator: Callable[[StateId], Number]
    table: Optional[Mapping[StateId, Number]] = None
    reference: Optional[str] = None

    def __call__(self, state: StateId) -> int:
        value = _evaluate(self.name, self.evaluator, state)
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, Fraction) and value.denominator == 1:
            value = value.numerator
        if not isinstance(value, int) or value < 0:
            raise EvaluationError(f"{self.name} is not a natural number at {state!r}: {value}")
        return value

    @classmethod
    def from_table(
        cls, name: str, table: Mapping[StateId, Number], default: Optional[Number] = None
    ) -> RankingFunction:
        frozen = dict(table)
        if default is None:
            return cls(name, frozen.__getitem__, frozen)
        return cls(name, lambda s: frozen.get(s, default), frozen)

    @classmethod
    def from_value_function(cls, function: ValueFunction) -> RankingFunction:
        return cls(function.name, function.evaluator, function.table, function.reference)


class Role(str, enum.Enum):
    DECREASE = "decrease"
    PROBABILITY = "probability"


@dataclasses.dataclass(frozen=True)
class MonotoneScalarFunction:
    """Decrease function d_i or probability function p_i over levels r > 0."""

    name: str
    role: Role
    evaluator: Callable[[Number], Number]
    reference: Optional[str] = None

    def __call__(self, level: Number) -> Number:
        value = _evaluate(self.name, self.evaluator, level)
        if self.role == Role.PROBABILITY and not 0 < value <= 1:
            raise EvaluationError(f"{self.name}({level}) = {value} is not a probability in (0, 1]")
        if self.role == Role.DECREASE and value <= 0:
            raise EvaluationError(f"{self.name}({level}) = {value} is not a positive decrease")
        return value

    @classmethod
    def constant(cls, name: str, role: Role, value: Number) -> MonotoneScalarFunction:
        return cls(name, role, lambda _: value, reference=f"constant({value})")


def casino_return_probability(epsilon: Fraction, exact: bool = True) -> Callable[[StateId], Number]:
    """Return probability to Solvency in the lending casino: rho^|w| in debt, 1 otherwise.

    With ``exact=False`` the values are floats.

    >>> v1 = casino_return_probability(Fraction(1, 5))
    >>> v1(-1), v1(-2), v1(7)
    (Fraction(2, 3), Fraction(4, 9), Fraction(1, 1))
    """
    ratio: Number = (1 - epsilon) / (1 + epsilon)
    one: Number = Fraction(1)
    if not exact:
        ratio, one = float(ratio), 1.0

    def value(state: StateId) -> Number:
        if isinstance(state, bool) or not isinstance(state, int):
            raise TypeError(state)
        return ratio ** (-state) if state < 0 else one

    return value


def max_plus_one(state: StateId) -> int:
    """max{s + 1, 0}.

    >>> [max_plus_one(s) for s in (-3, -1, 0, 4)]
    [0, 0, 1, 5]
    """
    if isinstance(state, bool) or not isinstance(state, int):
        raise TypeError(state)
    return max(state + 1, 0)


def _epsilon_arg(args: Tuple[str, ...]) -> Fraction:
    if len(args) != 1:
        raise BadParameter("expected a single epsilon argument")
    epsilon = parse_fraction(args[0])
    if not 0 < epsilon < 1:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def _constant_arg(args: Tuple[str, ...]) -> Fraction:
    if len(args) != 1:
        raise BadParameter("constant takes one argument")
    return parse_fraction(args[0])


STATE_FUNCTIONS: dict[str, Callable[[Tuple[str, ...]], Callable[[StateId], Number]]] = {
    "zero": lambda args: (lambda _: Fraction(0)),
    "one": lambda args: (lambda _: Fraction(1)),
    "constant": lambda args: (lambda _, c=_constant_arg(args): c),
    "casino-v1": lambda args: casino_return_probability(_epsilon_arg(args)),
    "max-plus-one": lambda args: max_plus_one,
}

SCALAR_FUNCTIONS: dict[str, Callable[[Tuple[str, ...]], Callable[[Number], Number]]] = {
    "constant": lambda args: (lambda _, c=_constant_arg(args): c),
    "min-one": lambda args: (lambda r: min(Fraction(1), Fraction(r))),
}


def _split_reference(reference: str) -> tuple[str, Tuple[str, ...]]:
    """Split ``name(arg, ...)``.

    >>> _split_reference("casino-v1(1/5)")
    ('casino-v1', ('1/5',))
    >>> _split_reference("zero")
    ('zero', ())
    """
    match = FAMILY_CALL_RE.match(reference)
    if match is None:
        raise BadParameter(f"cannot parse function reference {reference!r}")
    raw = match.group("args")
    args = tuple(a.strip() for a in raw.split(",")) if raw and raw.strip() else ()
    return match.group("name"), args


def builtin_value_function(reference: str, name: Optional[str] = None) -> ValueFunction:
    """Instantiate a builtin state function such as ``casino-v1(1/5)``."""
    key, args = _split_reference(reference)
    factory = STATE_FUNCTIONS.get(key)
    if factory is None:
        raise UnknownFamily(f"unknown value function {key!r}; known: {sorted(STATE_FUNCTIONS)}")
    return ValueFunction(name or reference, factory(args), reference=reference)


def builtin_ranking_function(reference: str, name: Optional[str] = None) -> RankingFunction:
    return RankingFunction.from_value_function(builtin_value_function(reference, name))


def builtin_scalar_function(reference: str, role: Role, name: Optional[str] = None) -> MonotoneScalarFunction:
    key, args = _split_reference(reference)
    factory = SCALAR_FUNCTIONS.get(key)
    if factory is None:
        raise UnknownFamily(f"unknown scalar function {key!r}; known: {sorted(SCALAR_FUNCTIONS)}")
    return MonotoneScalarFunction(name or reference, role, factory(args), reference=reference)
