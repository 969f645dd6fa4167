"""Convert JSON-lines check entries into one report document keyed by condition tag."""

from __future__ import annotations

import argparse
import json
import os
from typing import Any, Iterable

from reactivity_checker._common.reactivity_common import BadParameter

VERDICT_ORDER = {"pass": 0, "pass-on-window": 1, "fail": 2}


def format_condition_name(entry: dict[str, Any]) -> str:
    if entry.get("pair") is None:
        return entry["tag"]
    return f"{entry['tag']}[{entry['pair']}]"


def worst_verdict(verdicts: Iterable[str]) -> str:
    """The most severe verdict.

    >>> worst_verdict(["pass", "fail", "pass-on-window"])
    'fail'
    >>> worst_verdict([])
    'pass'
    """
    return max(verdicts, key=VERDICT_ORDER.__getitem__, default="pass")


def parse_single_entry(entry: dict[str, Any]) -> tuple[str, dict[str, Any]]:
    r"""Parse a single check entry.

    An entry looks like this:
    {
        "tag": "decomposition.termination",
        "verdict": "fail",
        "witnesses": ["s0", "s5"],
        "slack": "-1",
        "pair": 1,
        "note": null
    }
    """
    if not isinstance(entry, dict):
        raise BadParameter(f"check entry must be an object, got {entry!r}")
    for key in ("tag", "verdict"):
        if key not in entry:
            raise BadParameter(f"check entry has no {key!r}: {entry!r}")
    if not isinstance(entry["verdict"], str) or entry["verdict"] not in VERDICT_ORDER:
        raise BadParameter(f"unknown verdict {entry['verdict']!r}")
    condition = {
        "tag": entry["tag"],
        "pair": entry.get("pair"),
        "verdict": entry["verdict"],
        "witnesses": list(entry.get("witnesses") or []),
        "slack": entry.get("slack"),
    }
    if entry.get("note"):
        condition["note"] = entry["note"]
    return format_condition_name(entry), condition


def load_entries(lines: Iterable[str]) -> list[Any]:
    """Decode one JSON value per non-blank line."""
    entries = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as err:
            raise BadParameter(f"line {number}: {err.msg}") from None
    return entries


def produce_document(entries: Iterable[dict[str, Any]]) -> dict[str, Any]:
    """Convert check entries into a report document."""
    conditions: dict[str, dict[str, Any]] = {}
    for entry in entries:
        name, condition = parse_single_entry(entry)
        if name in conditions:
            merged = conditions[name]
            merged["verdict"] = worst_verdict([merged["verdict"], condition["verdict"]])
            merged["witnesses"].extend(condition["witnesses"])
        else:
            conditions[name] = condition

    return {
        "version": 1,
        "verdict": worst_verdict(c["verdict"] for c in conditions.values()),
        "failures": sorted(name for name, c in conditions.items() if c["verdict"] == "fail"),
        "conditions": conditions,
    }


def main(args: Any) -> None:
    with open(args.input, encoding="utf-8") as f:
        entries = load_entries(f)

    document = produce_document(entries)

    output_dir = os.path.dirname(args.output)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)

    with open(args.output, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument(
        "--input", type=str, required=True, help="JSON-lines file of check entries"
    )
    parser.add_argument("--output", type=str, required=True, help="output report document")
    main(parser.parse_args())
