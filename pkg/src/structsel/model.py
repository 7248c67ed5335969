"""Sparsity patterns, structured systems, and the canonical on-disk format.

A structured matrix stores only which entries are free parameters; a system
bundles the state pattern, the input pattern, and per-input activation costs.
Files are JSON documents with 1-based indices; everything is 0-based in
memory.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .rationals import format_rational, parse_rational


class ParseError(ValueError):
    """Malformed system document; ``context`` names the offending field."""

    def __init__(self, message: str, context: str = ""):
        self.context = context
        super().__init__(f"{context}: {message}" if context else message)


@dataclass(frozen=True)
class SparsityPattern:
    """Zero/free-parameter pattern of a matrix, stored as nonzero positions."""

    rows: int
    cols: int
    nonzeros: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("pattern dimensions must be nonnegative")
        for i, j in self.nonzeros:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise ValueError(f"nonzero ({i},{j}) outside {self.rows}x{self.cols} pattern")

    @classmethod
    def from_pairs(cls, rows: int, cols: int, pairs: Iterable[tuple[int, int]]) -> "SparsityPattern":
        return cls(rows, cols, frozenset((int(i), int(j)) for i, j in pairs))

    def __contains__(self, pos: tuple[int, int]) -> bool:
        return pos in self.nonzeros

    def column(self, j: int) -> frozenset[int]:
        """Row indices with a free parameter in column j."""
        return frozenset(i for i, jj in self.nonzeros if jj == j)

    def zero_columns(self) -> tuple[int, ...]:
        occupied = {j for _, j in self.nonzeros}
        return tuple(j for j in range(self.cols) if j not in occupied)

    def select_columns(self, columns: Sequence[int]) -> "SparsityPattern":
        """Pattern restricted to the given columns, renumbered 0..len-1."""
        remap = {old: new for new, old in enumerate(columns)}
        pairs = frozenset((i, remap[j]) for i, j in self.nonzeros if j in remap)
        return SparsityPattern(self.rows, len(columns), pairs)

    def union(self, other: "SparsityPattern") -> "SparsityPattern":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("entrywise union needs equal dimensions")
        return SparsityPattern(self.rows, self.cols, self.nonzeros | other.nonzeros)

    @staticmethod
    def hstack(patterns: Sequence["SparsityPattern"]) -> "SparsityPattern":
        if not patterns:
            raise ValueError("hstack of no patterns")
        rows = patterns[0].rows
        if any(p.rows != rows for p in patterns):
            raise ValueError("hstack needs equal row counts")
        pairs = set()
        offset = 0
        for p in patterns:
            pairs.update((i, j + offset) for i, j in p.nonzeros)
            offset += p.cols
        return SparsityPattern(rows, offset, frozenset(pairs))


@dataclass(frozen=True)
class StructuredSystem:
    """Fixed structured system: square state pattern, input pattern, costs."""

    a: SparsityPattern
    b: SparsityPattern
    costs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.a.rows != self.a.cols:
            raise ValueError("state pattern must be square")
        if self.b.rows != self.a.rows:
            raise ValueError("input pattern row count must match state count")
        if len(self.costs) != self.b.cols:
            raise ValueError("need one cost per input column")
        for i, c in enumerate(self.costs):
            if c < 0:
                raise ValueError(f"negative cost for input {i + 1}")

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def m(self) -> int:
        return self.b.cols

    def useless_inputs(self) -> tuple[int, ...]:
        """Inputs whose column is entirely zero; they can never help."""
        return self.b.zero_columns()

    def restrict_inputs(self, selected: Iterable[int]) -> "StructuredSystem":
        cols = sorted(set(selected))
        return StructuredSystem(self.a, self.b.select_columns(cols),
                                tuple(self.costs[j] for j in cols))


@dataclass(frozen=True)
class SwitchedStructuredSystem:
    """Switched structured system: one (A_k, B_k) pair and cost list per mode."""

    modes: tuple[tuple[SparsityPattern, SparsityPattern], ...]
    costs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.modes:
            raise ValueError("switched system needs at least one mode")
        if len(self.costs) != len(self.modes):
            raise ValueError("need one cost list per mode")
        n = self.modes[0][0].rows
        for k, (a, b) in enumerate(self.modes):
            if a.rows != a.cols:
                raise ValueError(f"mode {k + 1}: state pattern must be square")
            if a.rows != n:
                raise ValueError(f"mode {k + 1}: state dimension {a.rows} != {n}")
            if b.rows != n:
                raise ValueError(f"mode {k + 1}: input pattern row count must match state count")
            if len(self.costs[k]) != b.cols:
                raise ValueError(f"mode {k + 1}: need one cost per input column")
            for i, c in enumerate(self.costs[k]):
                if c < 0:
                    raise ValueError(f"mode {k + 1}: negative cost for input {i + 1}")

    @property
    def n(self) -> int:
        return self.modes[0][0].rows

    @property
    def p(self) -> int:
        return len(self.modes)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(b.cols for _, b in self.modes)

    def total_inputs(self) -> int:
        return sum(self.mode_sizes)

    def flat_costs(self) -> tuple[Fraction, ...]:
        """Costs in mode-major input order."""
        return tuple(c for mode_costs in self.costs for c in mode_costs)


def union_system(sw: SwitchedStructuredSystem) -> tuple[SparsityPattern, SparsityPattern, SparsityPattern]:
    """Entrywise union of the state patterns, plus the two stacked forms.

    Returns (union of all A_k, horizontal stack of all B_k, horizontal stack
    of all A_k).
    """
    a_union = sw.modes[0][0]
    for a, _ in sw.modes[1:]:
        a_union = a_union.union(a)
    b_stack = SparsityPattern.hstack([b for _, b in sw.modes])
    a_stack = SparsityPattern.hstack([a for a, _ in sw.modes])
    return a_union, b_stack, a_stack


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ParseError(f"missing field '{key}'", context)
    return doc[key]


def _parse_count(value, context: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ParseError(f"expected a positive integer, got {value!r}", context)
    return value


def _parse_pairs(value, rows: int, cols: int, context: str) -> frozenset[tuple[int, int]]:
    if not isinstance(value, list):
        raise ParseError("expected a list of [i, j] pairs", context)
    pairs = set()
    for idx, entry in enumerate(value):
        where = f"{context}[{idx}]"
        if (not isinstance(entry, list)) or len(entry) != 2:
            raise ParseError(f"expected [i, j], got {entry!r}", where)
        i, j = entry
        if not isinstance(i, int) or not isinstance(j, int):
            raise ParseError(f"indices must be integers, got {entry!r}", where)
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"index [{i}, {j}] out of range for {rows}x{cols}", where)
        pos = (i - 1, j - 1)
        if pos in pairs:
            raise ParseError(f"duplicate entry [{i}, {j}]", where)
        pairs.add(pos)
    return frozenset(pairs)


def _parse_costs(value, m: int, context: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise ParseError("expected a list of rationals", context)
    if len(value) != m:
        raise ParseError(f"expected {m} costs, got {len(value)}", context)
    costs = []
    for idx, entry in enumerate(value):
        where = f"{context}[{idx}]"
        try:
            cost = parse_rational(entry)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), where) from None
        if cost < 0:
            raise ParseError(f"negative cost {entry!r}", where)
        costs.append(cost)
    return tuple(costs)


def _load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", "document") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "document")
    return doc


def parse_system(text: str) -> StructuredSystem:
    """Parse the canonical fixed-system document (fields n, m, A, B, costs)."""
    doc = _load_document(text)
    n = _parse_count(_require(doc, "n", "document"), "n")
    m = _parse_count(_require(doc, "m", "document"), "m")
    a = SparsityPattern(n, n, _parse_pairs(_require(doc, "A", "document"), n, n, "A"))
    b = SparsityPattern(n, m, _parse_pairs(_require(doc, "B", "document"), n, m, "B"))
    costs = _parse_costs(_require(doc, "costs", "document"), m, "costs")
    return StructuredSystem(a, b, costs)


def parse_switched_system(text: str) -> SwitchedStructuredSystem:
    """Parse the switched document (fields n, modes: [{A, B, costs}, ...]).

    Each mode's input count is the length of its cost list.  Zero columns of
    a mode's B are stripped (with a warning naming them); only effective
    input vectors are kept.
    """
    doc = _load_document(text)
    n = _parse_count(_require(doc, "n", "document"), "n")
    raw_modes = _require(doc, "modes", "document")
    if not isinstance(raw_modes, list) or not raw_modes:
        raise ParseError("expected a nonempty list of modes", "modes")
    modes = []
    costs = []
    for k, mode_doc in enumerate(raw_modes):
        where = f"modes[{k}]"
        if not isinstance(mode_doc, dict):
            raise ParseError("expected an object", where)
        raw_costs = _require(mode_doc, "costs", where)
        if not isinstance(raw_costs, list) or not raw_costs:
            raise ParseError("expected a nonempty cost list", f"{where}.costs")
        m_k = len(raw_costs)
        a = SparsityPattern(n, n, _parse_pairs(_require(mode_doc, "A", where), n, n, f"{where}.A"))
        b = SparsityPattern(n, m_k, _parse_pairs(_require(mode_doc, "B", where), n, m_k, f"{where}.B"))
        mode_costs = _parse_costs(raw_costs, m_k, f"{where}.costs")
        dropped = b.zero_columns()
        if dropped:
            warnings.warn(
                f"mode {k + 1}: stripped zero input columns {[j + 1 for j in dropped]}",
                stacklevel=2,
            )
            keep = [j for j in range(m_k) if j not in dropped]
            b = b.select_columns(keep)
            mode_costs = tuple(mode_costs[j] for j in keep)
        modes.append((a, b))
        costs.append(mode_costs)
    return SwitchedStructuredSystem(tuple(modes), tuple(costs))


def _pairs_to_doc(p: SparsityPattern) -> list[list[int]]:
    return [[i + 1, j + 1] for i, j in sorted(p.nonzeros)]


def serialize_system(sys: StructuredSystem) -> str:
    doc = {
        "n": sys.n,
        "m": sys.m,
        "A": _pairs_to_doc(sys.a),
        "B": _pairs_to_doc(sys.b),
        "costs": [format_rational(c) for c in sys.costs],
    }
    return json.dumps(doc, indent=2) + "\n"


def serialize_switched_system(sw: SwitchedStructuredSystem) -> str:
    doc = {
        "n": sw.n,
        "modes": [
            {
                "A": _pairs_to_doc(a),
                "B": _pairs_to_doc(b),
                "costs": [format_rational(c) for c in sw.costs[k]],
            }
            for k, (a, b) in enumerate(sw.modes)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
