from __future__ import annotations

import dataclasses
import enum
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, Optional, Tuple, Union

StateId = Hashable
Number = Union[Fraction, int, float]
Probability = Union[Fraction, float]


def eprint(*args: Any, **kwargs: Any) -> None:
    """Print to stderr."""
    print(*args, file=sys.stderr, flush=True, **kwargs)


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        format="<%(threadName)s:%(levelname)s> %(message)s",
        level=logging.NOTSET if verbose else logging.INFO,
        stream=sys.stderr,
    )


class ReactivityError(Exception):
    """Base class of every error raised for malformed inputs."""


class UnboundedEnumeration(ReactivityError):
    pass


class ModeMismatch(ReactivityError):
    pass


class IndexOutOfRange(ReactivityError, IndexError):
    pass


class UnknownProposition(ReactivityError):
    pass


class AlphabetMismatch(ReactivityError):
    pass


class EvaluationError(ReactivityError):
    pass


class EmptyRGrid(ReactivityError):
    pass


class DisjointnessViolation(ReactivityError):
    pass


class WindowNotClosed(ReactivityError):
    pass


class UnknownFamily(ReactivityError):
    pass


class BadParameter(ReactivityError, ValueError):
    pass


class InternalError(ReactivityError):
    pass


class ModelSyntaxError(ReactivityError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ModelValidationError(ReactivityError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class NotAlmostSure(UserWarning):
    """The chain does not satisfy the condition almost surely."""


class Mode(str, enum.Enum):
    """Arithmetic mode of a probability or value."""

    EXACT = "exact"
    APPROXIMATE = "approximate"


def mode_of(*values: Number) -> Mode:
    if any(isinstance(value, float) for value in values):
        return Mode.APPROXIMATE
    return Mode.EXACT


@dataclasses.dataclass(frozen=True)
class CheckerConfig:
    """Numeric knobs shared by the checkers, the solvers and the simulator."""

    tolerance: float = 1e-9
    probability_slack: float = 1e-12
    exact_min_margin: Fraction = Fraction(0)
    approximate_min_margin: float = 1e-9
    synthesis_threshold: Fraction = Fraction(1, 2)
    recording_stride: int = 100
    simulation_epsilon: Fraction = Fraction(1, 20)
    simulation_seed: int = 20240229

    def min_margin(self, mode: Mode) -> Number:
        if mode == Mode.EXACT:
            return self.exact_min_margin
        return self.approximate_min_margin


DEFAULT_CONFIG = CheckerConfig()


def parse_fraction(text: str | int) -> Fraction:
    """Parse an exact rational written as an integer or as "p/q".

    >>> parse_fraction("2/3")
    Fraction(2, 3)
    >>> parse_fraction(4)
    Fraction(4, 1)
    >>> parse_fraction("-1/20")
    Fraction(-1, 20)
    """
    if isinstance(text, bool) or not isinstance(text, (int, str)):
        raise BadParameter(f"expected an integer or a 'p/q' string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise BadParameter(f"not a rational number: {text!r}") from err


def format_number(value: Number) -> str:
    """Render a number the way model and report files write them.

    >>> format_number(Fraction(2, 3))
    '2/3'
    >>> format_number(Fraction(1))
    '1'
    >>> format_number(0.25)
    '0.25'
    """
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def leq(lhs: Number, rhs: Number, tolerance: float = DEFAULT_CONFIG.tolerance) -> bool:
    """Compare exactly when both sides are rational, with slack otherwise."""
    if mode_of(lhs, rhs) == Mode.EXACT:
        return lhs <= rhs
    return float(lhs) <= float(rhs) + tolerance


def is_tight(lhs: Number, rhs: Number, tolerance: float = DEFAULT_CONFIG.tolerance) -> bool:
    if mode_of(lhs, rhs) == Mode.EXACT:
        return lhs == rhs
    return abs(float(lhs) - float(rhs)) <= tolerance


def state_sort_key(state: StateId) -> tuple[Any, ...]:
    """Total order over integer, text and pair states.

    >>> sorted([("s1", "q0"), 3, "s2", -1], key=state_sort_key)
    [-1, 3, 's2', ('s1', 'q0')]
    """
    if isinstance(state, bool):
        return (0, int(state))
    if isinstance(state, int):
        return (0, state)
    if isinstance(state, str):
        return (1, state)
    if isinstance(state, tuple):
        return (2, tuple(state_sort_key(item) for item in state))
    return (3, repr(state))


def sort_states(states: Iterable[StateId]) -> list[StateId]:
    return sorted(states, key=state_sort_key)


def to_jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_number(value)
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (frozenset, set)):
        return [to_jsonable(item) for item in sort_states(value)]
    if isinstance(value, (tuple, list)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, Mapping):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in value.items()}
    return value


class Verdict(str, enum.Enum):
    """Outcome of a certificate condition or of a whole check."""

    PASS = "pass"
    FAIL = "fail"
    PASS_ON_WINDOW = "pass-on-window"


@dataclasses.dataclass(frozen=True)
class CheckEntry:
    """One verified condition of a certificate check."""

    tag: str
    verdict: Verdict
    witnesses: Tuple[Any, ...] = ()
    slack: Optional[Number] = None
    pair: Optional[int] = None
    note: Optional[str] = None

    def asdict(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "verdict": self.verdict.value,
            "witnesses": to_jsonable(self.witnesses),
            "slack": None if self.slack is None else to_jsonable(self.slack),
            "pair": self.pair,
            "note": self.note,
        }

    def display(self) -> None:
        """Print to stdout as one JSON object per line."""
        print(json.dumps(self.asdict()), flush=True)


@dataclasses.dataclass(frozen=True)
class CheckReport:
    """Aggregated result of one certificate check."""

    rule: str
    verdict: Verdict
    entries: Tuple[CheckEntry, ...]
    bound: Optional[Number] = None
    window: Optional[str] = None
    caveats: Tuple[str, ...] = ()
    metrics: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_entries(
        cls,
        rule: str,
        entries: Iterable[CheckEntry],
        *,
        bound: Optional[Number] = None,
        window: Optional[str] = None,
        on_window: bool = False,
        caveats: Iterable[str] = (),
        metrics: Optional[Mapping[str, Any]] = None,
    ) -> CheckReport:
        entries = tuple(entries)
        if any(entry.verdict == Verdict.FAIL for entry in entries):
            verdict = Verdict.FAIL
            bound = None
        elif on_window:
            verdict = Verdict.PASS_ON_WINDOW
        else:
            verdict = Verdict.PASS
        return cls(
            rule=rule,
            verdict=verdict,
            entries=entries,
            bound=bound,
            window=window,
            caveats=tuple(caveats),
            metrics=dict(metrics or {}),
        )

    @property
    def passed(self) -> bool:
        return self.verdict != Verdict.FAIL

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list[CheckEntry]:
        return [entry for entry in self.entries if entry.verdict == Verdict.FAIL]

    def entry(self, tag: str, pair: Optional[int] = None) -> CheckEntry:
        for entry in self.entries:
            if entry.tag == tag and (pair is None or entry.pair == pair):
                return entry
        raise KeyError(tag)

    def asdict(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "verdict": self.verdict.value,
            "bound": None if self.bound is None else to_jsonable(self.bound),
            "window": self.window,
            "caveats": list(self.caveats),
            "metrics": to_jsonable(self.metrics),
            "entries": [entry.asdict() for entry in self.entries],
        }

    def render(self) -> str:
        """Human-readable report."""
        lines = [f"{self.rule}: {self.verdict.value}"]
        if self.window is not None:
            lines.append(f"  window: {self.window}")
        for entry in self.entries:
            where = "" if entry.pair is None else f"[pair {entry.pair}]"
            line = f"  {entry.tag}{where}: {entry.verdict.value}"
            if entry.verdict == Verdict.FAIL and entry.witnesses:
                shown = ", ".join(str(w) for w in entry.witnesses[:5])
                line += f" at {shown}"
            if entry.slack is not None:
                line += f" (slack {format_number(entry.slack)})"
            lines.append(line)
        for caveat in self.caveats:
            lines.append(f"  caveat: {caveat}")
        if self.bound is not None:
            lines.append(f"  bound: {format_number(self.bound)}")
        return "\n".join(lines)
