"""Identification as a Prolog implication system.

One ``defect(X)`` rule per positive object lists that object's excesses;
one ``is_high(i, z)`` fact per excess of the query object ``z``. The query
``defect(z)`` succeeds iff every excess of z is an excess of some rule's
object. Indices are 0-based in Python and 1-based in the emitted text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError
from .predicates import IncidenceVector


@dataclass(frozen=True)
class ImplicationSystem:
    rules: tuple[tuple[int, ...], ...]
    rule_ids: tuple[int, ...]
    query_facts: tuple[int, ...]
    size: int

    def __post_init__(self):
        if len(self.rules) != len(self.rule_ids):
            raise DataError("one id per rule required")
        for idx in (*self.rules, self.query_facts):
            if any(not 0 <= i < self.size for i in idx):
                raise DataError(f"predicate index out of range [0, {self.size})")
        if any(len(r) == 0 for r in self.rules):
            raise DataError("rules must have a non-empty body")


def build_system(positives: Sequence[IncidenceVector], query: IncidenceVector,
                 ids: Sequence[int] | None = None) -> ImplicationSystem:
    """Objects without any excess get no rule (they cannot contain a non-empty query)."""
    ids = list(range(len(positives))) if ids is None else list(ids)
    if len(ids) != len(positives):
        raise DataError("one id per positive object required")
    rules, rule_ids = [], []
    for v, i in zip(positives, ids):
        if v.size != query.size:
            raise DataError(f"bit lengths differ ({v.size} vs {query.size})")
        if v.weight:
            rules.append(tuple(v.indices()))
            rule_ids.append(int(i))
    return ImplicationSystem(tuple(rules), tuple(rule_ids), tuple(query.indices()), query.size)


def emit_prolog(sys: ImplicationSystem) -> str:
    out = [f"% implication system: {len(sys.rules)} rules over {sys.size} predicates"]
    for rid, body in zip(sys.rule_ids, sys.rules):
        goals = " , ".join(f"is_high({i + 1}, X)" for i in body)
        out.append(f"% y = {rid}")
        out.append(f"defect(X) :- {goals}.")
    out.append("")
    out += [f"is_high({i + 1}, z)." for i in sys.query_facts]
    out.append("")
    out.append("% ?- defect(z).")
    return "\n".join(out) + "\n"


_HEADER = re.compile(r"^% implication system: (\d+) rules over (\d+) predicates$")
_RULE_ID = re.compile(r"^% y = (-?\d+)$")
_RULE = re.compile(r"^defect\(X\) :- (.*)\.$")
_GOAL = re.compile(r"is_high\((\d+), X\)")
_BODY = re.compile(r"is_high\(\d+, X\)(?:\s*,\s*is_high\(\d+, X\))*")
_FACT = re.compile(r"^is_high\((\d+), z\)\.$")


def parse_prolog(text: str) -> ImplicationSystem:
    """Inverse of :func:`emit_prolog`; accepts only that clause shape."""
    size = None
    rules, rule_ids, facts = [], [], []
    pending_id = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if m := _HEADER.match(line):
            size = int(m.group(2))
        elif m := _RULE_ID.match(line):
            pending_id = int(m.group(1))
        elif m := _RULE.match(line):
            if not _BODY.fullmatch(m.group(1).strip()):
                raise DataError(f"line {n}: unexpected rule body {m.group(1)!r}")
            rules.append(tuple(int(i) - 1 for i in _GOAL.findall(m.group(1))))
            rule_ids.append(len(rules) - 1 if pending_id is None else pending_id)
            pending_id = None
        elif m := _FACT.match(line):
            facts.append(int(m.group(1)) - 1)
        elif line.startswith("%"):
            continue
        else:
            raise DataError(f"line {n}: cannot parse {line!r}")
    if size is None:
        size = 1 + max([i for r in rules for i in r] + facts, default=-1)
    return ImplicationSystem(tuple(rules), tuple(rule_ids), tuple(facts), size)


def solve(sys: ImplicationSystem) -> tuple[bool, int | None]:
    """(satisfiable, index of the first witnessing rule).

    Satisfiable iff the query has at least one excess and all of them occur
    in some rule body.
    """
    if not sys.query_facts:
        return False, None
    need = set(sys.query_facts)
    for k, body in enumerate(sys.rules):
        if need.issubset(body):
            return True, k
    return False, None
