"""Minimal statistical database: records, predicates, true and noisy counts.

Records are flat string-valued rows loaded from comma-separated text.  The
trusted side evaluates a predicate to a true count and releases only the
Laplace-perturbed value; :func:`public_answer` is the single serialisation
point for what crosses to the untrusted side.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .mechanism import PrivacyLevel, sample_noise

__all__ = [
    "RELATIONS",
    "Predicate",
    "RecordSet",
    "QueryResult",
    "load_records",
    "count_query",
    "noisy_count_query",
    "public_answer",
]

RELATIONS = ("equals", "not-equals", "in-set")


@dataclass(frozen=True)
class Predicate:
    """Single-field test: equals / not-equals one value, or membership in a set.

    Evaluation is total: a record without the field matches nothing,
    whatever the relation.
    """

    field: str
    relation: str
    values: tuple

    def __post_init__(self) -> None:
        if not self.field:
            raise ValueError("predicate field name must be non-empty")
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        values = tuple(self.values)
        if not values:
            raise ValueError("predicate needs at least one value")
        if self.relation != "in-set" and len(values) != 1:
            raise ValueError(f"{self.relation} takes exactly one value, got {len(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        """Parse ``"field relation value"``; in-set values are comma-separated."""
        parts = text.split(maxsplit=2)
        if len(parts) != 3:
            raise ValueError(f"predicate must look like 'field relation value', got {text!r}")
        field, relation, value = parts
        values = tuple(value.split(",")) if relation == "in-set" else (value,)
        return cls(field=field, relation=relation, values=values)

    def matches(self, record: dict) -> bool:
        value = record.get(self.field)
        if value is None:
            return False
        if self.relation == "equals":
            return value == self.values[0]
        if self.relation == "not-equals":
            return value != self.values[0]
        return value in self.values


@dataclass(frozen=True)
class RecordSet:
    """Immutable collection of records (field name -> string value)."""

    records: tuple

    @property
    def size(self) -> int:
        return len(self.records)


def load_records(source) -> RecordSet:
    """Read comma-separated rows, header first, into a :class:`RecordSet`.

    Accepts an open text stream or a string holding the full content.
    Standard doubled-quote escaping applies.

    Raises:
        ValueError: naming the offending row, on a missing or empty header
            or on a row whose field count differs from the header's.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("row 1: missing header") from None
    if all(name == "" for name in header):
        raise ValueError("row 1: empty header")
    records = []
    for row in reader:
        if len(row) != len(header):
            raise ValueError(
                f"row {reader.line_num}: expected {len(header)} fields, got {len(row)}"
            )
        records.append(dict(zip(header, row)))
    return RecordSet(records=tuple(records))


@dataclass(frozen=True)
class QueryResult:
    """Noisy answer plus trusted-side context that must never be serialised."""

    true_count: int
    noisy_value: float
    epsilon_used: float


def count_query(db: RecordSet, pred: Predicate) -> int:
    """Number of records matching the predicate; unknown fields match nothing."""
    return sum(1 for record in db.records if pred.matches(record))


def noisy_count_query(db: RecordSet, pred: Predicate, level: PrivacyLevel, rng) -> QueryResult:
    """True count plus one calibrated Laplace draw; the sum is never clamped.

    Clamping or re-rounding the released value would leak which side of the
    boundary the true count sits on, so the raw perturbed real goes out.
    """
    true_count = count_query(db, pred)
    return QueryResult(
        true_count=true_count,
        noisy_value=true_count + sample_noise(level, rng),
        epsilon_used=level.epsilon,
    )


def public_answer(result: QueryResult) -> str:
    """The untrusted-side answer line: noisy value and epsilon, nothing else."""
    return json.dumps({"noisy_value": result.noisy_value, "epsilon": result.epsilon_used})
