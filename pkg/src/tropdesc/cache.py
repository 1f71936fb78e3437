"""Persisted value tables in the line-oriented ``TDESC-CACHE v1`` format.

Each entry line holds four tab-separated fields::

    <canonical invariant>	<p/q>	<engine>	<seeds>

where ``seeds`` is a comma-separated list or ``-``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

from .errors import BaseUnavailable, CacheConflict
from .invariant import Invariant, canonicalize, format_invariant, parse_invariant

HEADER = "TDESC-CACHE v1"
ENGINES = ("recursion", "oracle", "table")
CACHE_ENV = "TDESC_CACHE"


def format_value(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_value(text: str) -> Fraction:
    return Fraction(text.strip())


def default_cache_path() -> Path | None:
    path = os.environ.get(CACHE_ENV)
    return Path(path) if path else None


@dataclass(frozen=True)
class CacheEntry:
    invariant: Invariant
    value: Fraction
    engine: str
    seeds: tuple[int, ...] = ()

    def to_line(self) -> str:
        seeds = ",".join(map(str, self.seeds)) or "-"
        return "\t".join(
            [format_invariant(self.invariant), format_value(self.value), self.engine, seeds]
        )

    @classmethod
    def from_line(cls, line: str) -> "CacheEntry":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 4:
            raise ValueError(f"expected 4 tab-separated fields, got {len(fields)}")
        text, value, engine, seeds = fields
        if engine not in ENGINES:
            raise ValueError(f"unknown engine tag {engine!r}")
        seed_list = () if seeds.strip() in ("", "-") else tuple(int(s) for s in seeds.split(","))
        return cls(parse_invariant(text), parse_value(value), engine, seed_list)


class ValueTable:
    """One value per canonical invariant; disagreeing values are a conflict."""

    def __init__(self, entries: Iterable[CacheEntry] = ()):
        self._entries: dict[Invariant, CacheEntry] = {}
        for entry in entries:
            self.add(entry)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[CacheEntry]:
        return iter(sorted(self._entries.values(), key=lambda e: format_invariant(e.invariant)))

    def __contains__(self, inv: Invariant) -> bool:
        return canonicalize(inv) in self._entries

    def get(self, inv: Invariant) -> CacheEntry | None:
        return self._entries.get(canonicalize(inv))

    def add(self, entry: CacheEntry) -> None:
        key = canonicalize(entry.invariant)
        old = self._entries.get(key)
        if old is None:
            self._entries[key] = CacheEntry(key, Fraction(entry.value), entry.engine, entry.seeds)
            return
        if old.value != entry.value:
            raise CacheConflict(
                f"{format_invariant(key)}: {format_value(old.value)} ({old.engine}) "
                f"disagrees with {format_value(entry.value)} ({entry.engine})"
            )
        seeds = tuple(sorted(set(old.seeds) | set(entry.seeds)))
        self._entries[key] = CacheEntry(key, old.value, old.engine, seeds)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ValueTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != HEADER:
                raise ValueError(f"{path}: bad header {header!r}, expected {HEADER!r}")
            for lineno, line in enumerate(fh, start=2):
                if not line.strip() or line.startswith("#"):
                    continue
                try:
                    entry = CacheEntry.from_line(line)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
                try:
                    table.add(entry)
                except CacheConflict as exc:
                    raise CacheConflict(f"{path}:{lineno}: {exc}") from exc
        return table

    def dump(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(HEADER + "\n")
            for entry in self:
                fh.write(entry.to_line() + "\n")


class TableProvider:
    """Base values read from a value table."""

    name = "table"

    def __init__(self, table: ValueTable):
        self.table = table

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "TableProvider":
        return cls(ValueTable.load(path))

    def __call__(self, inv: Invariant) -> Fraction:
        entry = self.table.get(inv)
        if entry is None:
            raise BaseUnavailable(format_invariant(canonicalize(inv)))
        return entry.value
