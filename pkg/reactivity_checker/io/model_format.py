"""JSON model and certificate documents.

A model document holds a chain (explicit rows or a builtin family), labels,
named regions, Streett pairs and an optional automaton. A certificate
document names a proof rule and the regions and functions it needs.
Rationals are written as integers or "p/q" strings.
"""

from __future__ import annotations

import copy
import dataclasses
import json
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

import jsonschema
import jsonschema.exceptions

from reactivity_checker._common.reactivity_common import (
    BadParameter,
    CheckReport,
    ModelSyntaxError,
    ModelValidationError,
    ReactivityError,
    StateId,
    format_number,
    parse_fraction,
    sort_states,
)
from reactivity_checker.certificates import checks
from reactivity_checker.certificates.functions import (
    MonotoneScalarFunction,
    RankingFunction,
    Role,
    ValueFunction,
    builtin_ranking_function,
    builtin_scalar_function,
    builtin_value_function,
)
from reactivity_checker.chain import families
from reactivity_checker.chain.markov import Distribution, Kernel, MarkovChain, Region, dirac
from reactivity_checker.omega.product import DeterministicStreettAutomaton, StreettCondition

FORMAT_VERSION = 1

RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*-?\d+\s*(/\s*\d+\s*)?$"},
    ]
}
STATE = {"type": ["string", "integer"]}
STATE_LIST = {"type": "array", "items": STATE, "uniqueItems": True}

EXPLICIT_CHAIN = {
    "type": "object",
    "required": ["states", "initial", "transitions"],
    "additionalProperties": False,
    "properties": {
        "states": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "initial": {"type": "object", "additionalProperties": RATIONAL, "minProperties": 1},
        "transitions": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": RATIONAL,
                "minProperties": 1,
            },
        },
    },
}

FAMILY_CHAIN = {
    "type": "object",
    "required": ["family"],
    "additionalProperties": False,
    "properties": {
        "family": {"type": "string"},
        "parameters": {
            "type": "object",
            "additionalProperties": {"type": ["string", "integer"]},
        },
        "initial": {"type": "integer"},
    },
}

AUTOMATON = {
    "type": "object",
    "required": ["states", "initial", "alphabet", "transitions"],
    "additionalProperties": False,
    "properties": {
        "states": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "initial": {"type": "string"},
        "alphabet": {
            "type": "array",
            "items": {"type": "string"},
            "maxItems": 16,
            "uniqueItems": True,
        },
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "letter", "to"],
                "additionalProperties": False,
                "properties": {
                    "from": {"type": "string"},
                    "letter": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
                    "to": {"type": "string"},
                },
            },
        },
        "acceptance": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["fin", "inf"],
                "additionalProperties": False,
                "properties": {
                    "fin": {"type": "array", "items": {"type": "string"}},
                    "inf": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}

MODEL_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "reactivity-checker model",
    "type": "object",
    "required": ["version", "chain"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "description": {"type": "string"},
        "chain": {"oneOf": [EXPLICIT_CHAIN, FAMILY_CHAIN]},
        "labels": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        },
        "regions": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    STATE_LIST,
                    {
                        "type": "object",
                        "required": ["builtin"],
                        "additionalProperties": False,
                        "properties": {"builtin": {"type": "string"}},
                    },
                ]
            },
        },
        "streett": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "automaton": AUTOMATON,
    },
}

FUNCTION = {
    "oneOf": [
        {
            "type": "object",
            "required": ["builtin"],
            "additionalProperties": False,
            "properties": {"builtin": {"type": "string"}},
        },
        {
            "type": "object",
            "required": ["table"],
            "additionalProperties": False,
            "properties": {
                "table": {"type": "object", "additionalProperties": RATIONAL},
                "default": RATIONAL,
            },
        },
    ]
}
REGION_REF = {"oneOf": [{"type": "string"}, STATE_LIST]}

CERTIFICATE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "reactivity-checker certificate",
    "type": "object",
    "required": ["version", "rule"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "description": {"type": "string"},
        "rule": {"enum": ["quant-safety", "qual-safety", "decomposition", "rule1", "rule2"]},
        "region": REGION_REF,
        "target": REGION_REF,
        "invariant": REGION_REF,
        "absorbing": {"type": "array", "items": REGION_REF},
        "v": FUNCTION,
        "v0": FUNCTION,
        "gamma": RATIONAL,
        "pairs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["v", "w"],
                "properties": {
                    "v": FUNCTION,
                    "w": FUNCTION,
                    "u": FUNCTION,
                    "d": FUNCTION,
                    "p": FUNCTION,
                    "gamma": RATIONAL,
                },
            },
        },
        "window": {"type": "string"},
        "r_grid": {"type": "array", "items": RATIONAL, "minItems": 1},
    },
}

REQUIRED_FIELDS = {
    "quant-safety": ("region", "v"),
    "qual-safety": ("target", "absorbing", "v"),
    "decomposition": ("invariant", "absorbing"),
    "rule1": ("invariant", "absorbing", "v0", "pairs"),
    "rule2": ("invariant", "absorbing", "v0", "pairs"),
}


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelSyntaxError(err.msg, err.lineno, err.colno) from err


def _validate_schema(data: Any, schema: Mapping[str, Any]) -> None:
    validator = jsonschema.Draft7Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        path = "/".join(str(part) for part in error.absolute_path) or "$"
        raise ModelValidationError(path, error.message)


def _rational(value: Any, path: str) -> Fraction:
    if isinstance(value, float):
        raise ModelValidationError(path, f"{value!r} is a float; write rationals as integers or 'p/q'")
    try:
        return parse_fraction(value.replace(" ", "") if isinstance(value, str) else value)
    except BadParameter as err:
        raise ModelValidationError(path, str(err)) from err


def _probability_row(row: Mapping[str, Any], path: str, known: Optional[set] = None) -> dict[str, str]:
    """Validate and normalize one distribution."""
    total = Fraction(0)
    normalized = {}
    for target, value in row.items():
        if known is not None and target not in known:
            raise ModelValidationError(f"{path}/{target}", f"unknown state {target!r}")
        p = _rational(value, f"{path}/{target}")
        if not 0 < p <= 1:
            raise ModelValidationError(f"{path}/{target}", f"probability {p} is not in (0, 1]")
        total += p
        normalized[target] = format_number(p)
    if total != 1:
        raise ModelValidationError(path, f"probabilities sum to {format_number(total)}, not 1")
    return normalized


def state_name(state: StateId) -> str:
    """Text form of a state; product pairs are written ``s@q``.

    >>> state_name(("s1", "q0")), state_name(-3), state_name("s2")
    ('s1@q0', '-3', 's2')
    """
    if isinstance(state, tuple):
        return "@".join(state_name(part) for part in state)
    return str(state)


@dataclasses.dataclass(frozen=True)
class Model:
    """Built model: chain, named regions, Streett condition and optional automaton."""

    chain: MarkovChain
    regions: Mapping[str, Region]
    condition: StreettCondition
    automaton: Optional[DeterministicStreettAutomaton] = None
    integer_states: bool = False

    def region(self, name: str) -> Region:
        try:
            return self.regions[name]
        except KeyError:
            raise ModelValidationError("regions", f"unknown region {name!r}") from None

    def parse_state(self, text: Any, path: str = "state") -> StateId:
        if self.integer_states:
            try:
                state = int(text)
            except (TypeError, ValueError):
                raise ModelValidationError(path, f"{text!r} is not an integer state") from None
            if self.chain.is_finite and state not in self.chain.universe:
                raise ModelValidationError(path, f"unknown state {text!r}")
            return state
        if self.chain.is_finite and text not in self.chain.universe:
            raise ModelValidationError(path, f"unknown state {text!r}")
        return text


@dataclasses.dataclass(frozen=True)
class ModelDocument:
    """Validated, normalized model document."""

    data: Mapping[str, Any]

    @property
    def is_explicit(self) -> bool:
        return "states" in self.data["chain"]

    def build(self) -> Model:
        data = self.data
        chain_data = data["chain"]
        labels = data.get("labels", {})
        regions: dict[str, Region] = {}
        integer_states = False
        if self.is_explicit:
            kernel = Kernel.from_rows(
                {
                    state: {u: parse_fraction(p) for u, p in row.items()}
                    for state, row in chain_data["transitions"].items()
                }
            )
            initial = Distribution({s: parse_fraction(p) for s, p in chain_data["initial"].items()})
            table = {s: frozenset(labels.get(s, ())) for s in chain_data["states"]}
            chain = MarkovChain(initial, kernel, table.__getitem__)
            builtin_regions = {
                "S": Region.of("S", chain_data["states"]),
                "empty": Region.nothing("empty"),
            }
        else:
            try:
                model = families.builtin(chain_data["family"], chain_data.get("parameters", {}))
            except ReactivityError as err:
                raise ModelValidationError("chain", str(err)) from err
            chain = model.chain
            if "initial" in chain_data:
                try:
                    chain = MarkovChain(dirac(chain_data["initial"]), chain.kernel, chain.labeling)
                except ReactivityError as err:
                    raise ModelValidationError("chain/initial", str(err)) from err
            builtin_regions = {
                **dict(model.regions),
                "S": Region.everything("S"),
                "empty": Region.nothing("empty"),
            }
            regions.update(model.regions)
            integer_states = model.integer_states

        for name, spec in data.get("regions", {}).items():
            if isinstance(spec, Mapping):
                builtin_name = spec["builtin"]
                if builtin_name not in builtin_regions:
                    raise ModelValidationError(
                        f"regions/{name}", f"unknown builtin region {builtin_name!r}"
                    )
                source = builtin_regions[builtin_name]
                regions[name] = dataclasses.replace(source, name=name)
            else:
                regions[name] = Region.of(name, spec)

        pairs = []
        for index, (a, b) in enumerate(data.get("streett", [])):
            for ref in (a, b):
                if ref not in regions and ref not in builtin_regions:
                    raise ModelValidationError(f"streett/{index}", f"unknown region {ref!r}")
            pairs.append((regions.get(a) or builtin_regions[a], regions.get(b) or builtin_regions[b]))

        automaton = None
        if "automaton" in data:
            automaton = _build_automaton(data["automaton"])
        return Model(chain, regions, StreettCondition(tuple(pairs)), automaton, integer_states)


def _build_automaton(data: Mapping[str, Any]) -> DeterministicStreettAutomaton:
    table = {}
    for index, row in enumerate(data["transitions"]):
        key = (row["from"], frozenset(row["letter"]))
        if key in table:
            raise ModelValidationError(
                f"automaton/transitions/{index}", f"duplicate transition for {row['from']!r}"
            )
        table[key] = row["to"]
    try:
        return DeterministicStreettAutomaton(
            states=frozenset(data["states"]),
            initial=data["initial"],
            alphabet=frozenset(data["alphabet"]),
            transitions=table,
            acceptance=tuple(
                (frozenset(pair["fin"]), frozenset(pair["inf"])) for pair in data.get("acceptance", [])
            ),
        )
    except BadParameter as err:
        raise ModelValidationError("automaton", str(err)) from err


def _normalize_model(data: dict[str, Any]) -> dict[str, Any]:
    data = copy.deepcopy(data)
    chain = data["chain"]
    if "states" in chain:
        known = set(chain["states"])
        chain["initial"] = _probability_row(chain["initial"], "chain/initial", known)
        rows = {}
        for state, row in chain["transitions"].items():
            if state not in known:
                raise ModelValidationError(f"chain/transitions/{state}", f"unknown state {state!r}")
            rows[state] = _probability_row(row, f"chain/transitions/{state}", known)
        missing = [s for s in chain["states"] if s not in rows]
        if missing:
            raise ModelValidationError("chain/transitions", f"states without a row: {missing}")
        chain["transitions"] = rows
        for state in data.get("labels", {}):
            if state not in known:
                raise ModelValidationError(f"labels/{state}", f"unknown state {state!r}")
        for name, spec in data.get("regions", {}).items():
            if isinstance(spec, list):
                stray = [s for s in spec if s not in known]
                if stray:
                    raise ModelValidationError(f"regions/{name}", f"unknown states {stray}")
    else:
        if "labels" in data:
            raise ModelValidationError("labels", "builtin families carry their own labels")
        chain["parameters"] = {
            key: value if isinstance(value, int) else value.strip()
            for key, value in chain.get("parameters", {}).items()
        }
    return data


def parse_model(text: str) -> ModelDocument:
    """Parse and validate a model document.

    Raises ``ModelSyntaxError`` with a line and column for malformed JSON
    and ``ModelValidationError`` with a document path otherwise.
    """
    data = _load_json(text)
    _validate_schema(data, MODEL_SCHEMA)
    document = ModelDocument(_normalize_model(data))
    document.build()
    return document


def serialize_model(document: ModelDocument) -> str:
    return json.dumps(document.data, indent=2) + "\n"


def load_model(text: str) -> Model:
    return parse_model(text).build()


def document_from_chain(
    chain: MarkovChain,
    regions: Mapping[str, Region],
    condition_names: Sequence[tuple[str, str]] = (),
    description: Optional[str] = None,
) -> ModelDocument:
    """Explicit model document for a finite chain (states written with ``state_name``)."""
    universe = sort_states(chain.universe)
    names = {s: state_name(s) for s in universe}
    data: dict[str, Any] = {"version": FORMAT_VERSION}
    if description:
        data["description"] = description
    data["chain"] = {
        "states": [names[s] for s in universe],
        "initial": {names[s]: format_number(p) for s, p in chain.initial.items()},
        "transitions": {
            names[s]: {names[u]: format_number(p) for u, p in chain.row(s).items()}
            for s in universe
        },
    }
    labels = {names[s]: sorted(chain.label(s)) for s in universe if chain.label(s)}
    if labels:
        data["labels"] = labels
    data["regions"] = {
        name: [names[s] for s in sort_states(region.enumerate(universe))]
        for name, region in regions.items()
    }
    data["streett"] = [[a, b] for a, b in condition_names]
    return parse_model(json.dumps(data))


@dataclasses.dataclass(frozen=True)
class CertificateDocument:
    data: Mapping[str, Any]

    @property
    def rule(self) -> str:
        return str(self.data["rule"])


def parse_certificate(text: str) -> CertificateDocument:
    data = _load_json(text)
    _validate_schema(data, CERTIFICATE_SCHEMA)
    for field in REQUIRED_FIELDS[data["rule"]]:
        if field not in data:
            raise ModelValidationError(field, f"rule {data['rule']} needs {field!r}")
    for index, pair in enumerate(data.get("pairs", [])):
        needed = ("u",) if data["rule"] == "rule1" else ("d", "p") if data["rule"] == "rule2" else ()
        for field in needed:
            if field not in pair:
                raise ModelValidationError(f"pairs/{index}", f"rule {data['rule']} needs {field!r}")
    return CertificateDocument(data)


def serialize_certificate(document: CertificateDocument) -> str:
    return json.dumps(document.data, indent=2) + "\n"


def _region(model: Model, ref: Any, path: str) -> Region:
    if isinstance(ref, str):
        if ref in model.regions:
            return model.region(ref)
        if ref in ("S", "empty"):
            if ref == "empty":
                return Region.nothing("empty")
            if model.chain.is_finite:
                return Region.of("S", model.chain.universe)
            return Region.everything("S")
        raise ModelValidationError(path, f"unknown region {ref!r}")
    return Region.of(path, (model.parse_state(s, path) for s in ref))


def _table(model: Model, spec: Mapping[str, Any], path: str) -> tuple[dict[StateId, Fraction], Optional[Fraction]]:
    table = {
        model.parse_state(key, f"{path}/table/{key}"): _rational(value, f"{path}/table/{key}")
        for key, value in spec["table"].items()
    }
    default = _rational(spec["default"], f"{path}/default") if "default" in spec else None
    return table, default


def _value_function(model: Model, spec: Mapping[str, Any], name: str, path: str) -> ValueFunction:
    if "builtin" in spec:
        try:
            return builtin_value_function(spec["builtin"], name)
        except ReactivityError as err:
            raise ModelValidationError(path, str(err)) from err
    table, default = _table(model, spec, path)
    return ValueFunction.from_table(name, table, default)


def _ranking_function(model: Model, spec: Mapping[str, Any], name: str, path: str) -> RankingFunction:
    if "builtin" in spec:
        try:
            return builtin_ranking_function(spec["builtin"], name)
        except ReactivityError as err:
            raise ModelValidationError(path, str(err)) from err
    table, default = _table(model, spec, path)
    return RankingFunction.from_table(name, table, default)


def _scalar_function(spec: Mapping[str, Any], role: Role, name: str, path: str) -> MonotoneScalarFunction:
    if "builtin" not in spec:
        raise ModelValidationError(path, "decrease and probability functions must be builtins")
    try:
        return builtin_scalar_function(spec["builtin"], role, name)
    except ReactivityError as err:
        raise ModelValidationError(path, str(err)) from err


def _absorbing(model: Model, data: Mapping[str, Any]) -> tuple[Region, ...]:
    return tuple(_region(model, ref, f"absorbing/{i}") for i, ref in enumerate(data["absorbing"]))


def _grid(data: Mapping[str, Any], override: Optional[Sequence[Any]]) -> list[Fraction]:
    if override is not None:
        return [parse_fraction(r) if isinstance(r, str) else r for r in override]
    return [_rational(r, f"r_grid/{i}") for i, r in enumerate(data.get("r_grid", []))]


def _window(model: Model, data: Mapping[str, Any], override: Optional[checks.Window]) -> Optional[checks.Window]:
    if override is not None:
        return override
    if "window" in data:
        try:
            return checks.Window.parse(data["window"])
        except BadParameter as err:
            raise ModelValidationError("window", str(err)) from err
    return None


def _achieved_levels(model: Model, window: Optional[checks.Window], functions: Sequence[ValueFunction]) -> list[Any]:
    states = window.states if window is not None else model.chain.universe
    levels = set()
    for f in functions:
        # Tables may be partial; only tabulated states have a level.
        domain = states if f.table is None else states & set(f.table)
        levels.update(f(s) for s in domain)
    return sorted(levels)


def check_certificate(
    model: Model,
    certificate: CertificateDocument,
    window: Optional[checks.Window] = None,
    r_grid: Optional[Sequence[Any]] = None,
) -> CheckReport:
    """Dispatch a certificate document to the checker of its rule."""
    data = certificate.data
    rule = certificate.rule
    win = _window(model, data, window)
    if rule == "quant-safety":
        return checks.check_quant_safety(
            model.chain,
            _region(model, data["region"], "region"),
            _value_function(model, data["v"], "V", "v"),
            win,
        )
    if rule == "qual-safety":
        gamma = _rational(data["gamma"], "gamma") if "gamma" in data else None
        absorbing = _absorbing(model, data)
        if len(absorbing) != 1:
            raise ModelValidationError("absorbing", "qualitative safety takes exactly one region")
        return checks.check_qual_safety(
            model.chain,
            _region(model, data["target"], "target"),
            absorbing[0],
            _value_function(model, data["v"], "V", "v"),
            win,
            gamma,
        )
    witness = checks.DecompositionWitness(
        _region(model, data["invariant"], "invariant"), _absorbing(model, data)
    )
    if rule == "decomposition":
        return checks.check_decomposition_semantic(model.chain, model.condition, witness)

    v0 = _value_function(model, data["v0"], "V0", "v0")
    pairs_data = data["pairs"]
    ws = [_value_function(model, p["w"], f"W{i}", f"pairs/{i - 1}/w") for i, p in enumerate(pairs_data, start=1)]
    grid = _grid(data, r_grid) or _achieved_levels(model, win, ws)
    if rule == "rule1":
        pairs1 = tuple(
            checks.Rule1Pair(
                v=_value_function(model, p["v"], f"V{i}", f"pairs/{i - 1}/v"),
                w=w,
                u=_ranking_function(model, p["u"], f"U{i}", f"pairs/{i - 1}/u"),
                gamma=_rational(p["gamma"], f"pairs/{i - 1}/gamma") if "gamma" in p else None,
            )
            for i, (p, w) in enumerate(zip(pairs_data, ws), start=1)
        )
        return checks.check_rule1(
            model.chain, model.condition, checks.Rule1Bundle(witness, v0, pairs1), win, grid
        )
    pairs2 = tuple(
        checks.Rule2Pair(
            v=_value_function(model, p["v"], f"V{i}", f"pairs/{i - 1}/v"),
            w=w,
            d=_scalar_function(p["d"], Role.DECREASE, f"d{i}", f"pairs/{i - 1}/d"),
            p=_scalar_function(p["p"], Role.PROBABILITY, f"p{i}", f"pairs/{i - 1}/p"),
            gamma=_rational(p["gamma"], f"pairs/{i - 1}/gamma") if "gamma" in p else None,
        )
        for i, (p, w) in enumerate(zip(pairs_data, ws), start=1)
    )
    return checks.check_rule2(
        model.chain, model.condition, checks.Rule2Bundle(witness, v0, pairs2), win, grid
    )


def _function_spec(function: Any, universe: Sequence[StateId]) -> dict[str, Any]:
    reference = getattr(function, "reference", None)
    if reference is not None:
        return {"builtin": reference}
    table = getattr(function, "table", None)
    states = universe if table is None else [s for s in universe if s in table]
    return {
        "table": {state_name(s): format_number(function(s)) for s in states}
    }


def _region_spec(region: Region, universe: Sequence[StateId], names: Mapping[str, Region]) -> Any:
    for name, known in names.items():
        if known is region:
            return name
    return [state_name(s) for s in sort_states(region.enumerate(universe))]


def certificate_document(
    rule: str,
    model: Model,
    *,
    region: Optional[Region] = None,
    target: Optional[Region] = None,
    invariant: Optional[Region] = None,
    absorbing: Sequence[Region] = (),
    v: Optional[ValueFunction] = None,
    bundle: Optional[Any] = None,
    description: Optional[str] = None,
) -> CertificateDocument:
    """Certificate document for synthesized regions and functions on a finite model."""
    universe = sort_states(model.chain.universe)

    def spec(region: Region) -> Any:
        return _region_spec(region, universe, model.regions)

    data: dict[str, Any] = {"version": FORMAT_VERSION, "rule": rule}
    if description:
        data["description"] = description
    if region is not None:
        data["region"] = spec(region)
    if target is not None:
        data["target"] = spec(target)
    if bundle is not None:
        invariant = bundle.witness.invariant
        absorbing = bundle.witness.absorbing
    if invariant is not None:
        data["invariant"] = spec(invariant)
    if absorbing:
        data["absorbing"] = [spec(j) for j in absorbing]
    if v is not None:
        data["v"] = _function_spec(v, universe)
    if bundle is not None:
        data["v0"] = _function_spec(bundle.v0, universe)
        pairs = []
        for pair in bundle.pairs:
            entry = {"v": _function_spec(pair.v, universe), "w": _function_spec(pair.w, universe)}
            for field in ("u", "d", "p"):
                if hasattr(pair, field):
                    entry[field] = _function_spec(getattr(pair, field), universe)
            pairs.append(entry)
        data["pairs"] = pairs
    return parse_certificate(json.dumps(data))
