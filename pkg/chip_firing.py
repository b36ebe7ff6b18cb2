#!/usr/bin/env python3
"""
Chip-firing on refined metric graphs
Divisors, piecewise-linear functions and their divisors, q-reduced divisors
(Dhar's burning algorithm), linear equivalence, and exact rank.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from errors import InvalidFunctionError, InvalidInputError, ParseError
from graph_core import (
    MetricPoint,
    ModelGraph,
    Rational,
    RefinedGraph,
    format_rational,
    parse_rational,
    to_fraction,
)

logger = logging.getLogger(__name__)


class Divisor:
    """Finite integer combination of metric points. Zero coefficients are never stored."""

    __slots__ = ('_chips', '_degree')

    def __init__(self, chips: Optional[Mapping[MetricPoint, int]] = None):
        cleaned: Dict[MetricPoint, int] = {}
        for point, count in (chips or {}).items():
            if not isinstance(point, MetricPoint):
                raise InvalidInputError(f"divisor keys must be MetricPoints, got {point!r}")
            if count:
                cleaned[point] = int(count)
        self._chips = cleaned
        self._degree = sum(cleaned.values())

    @classmethod
    def from_points(cls, points: Iterable[MetricPoint]) -> 'Divisor':
        """Sum of the given points, with repetition."""
        return cls(Counter(points))

    @property
    def degree(self) -> int:
        return self._degree

    def __getitem__(self, point: MetricPoint) -> int:
        return self._chips.get(point, 0)

    def items(self):
        return self._chips.items()

    def support(self) -> FrozenSet[MetricPoint]:
        return frozenset(self._chips)

    def is_effective(self) -> bool:
        return all(count > 0 for count in self._chips.values())

    def restricted_to(self, graph: ModelGraph) -> 'Divisor':
        return Divisor({p: c for p, c in self._chips.items() if graph.contains(p)})

    def sorted_items(self, graph: ModelGraph) -> List[Tuple[MetricPoint, int]]:
        return sorted(self._chips.items(), key=lambda item: graph.sort_key(item[0]))

    def __bool__(self) -> bool:
        return bool(self._chips)

    def __add__(self, other: 'Divisor') -> 'Divisor':
        if not isinstance(other, Divisor):
            return NotImplemented
        merged = dict(self._chips)
        for point, count in other._chips.items():
            merged[point] = merged.get(point, 0) + count
        return Divisor(merged)

    def __neg__(self) -> 'Divisor':
        return Divisor({p: -c for p, c in self._chips.items()})

    def __sub__(self, other: 'Divisor') -> 'Divisor':
        if not isinstance(other, Divisor):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor: int) -> 'Divisor':
        if not isinstance(factor, int):
            return NotImplemented
        return Divisor({p: factor * c for p, c in self._chips.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Divisor) and self._chips == other._chips

    def __hash__(self) -> int:
        return hash(frozenset(self._chips.items()))

    def __repr__(self) -> str:
        if not self._chips:
            return "Divisor(0)"
        terms = sorted(self._chips.items(), key=lambda item: str(item[0]))
        return "Divisor(" + " + ".join(f"{c}*{p}" for p, c in terms) + ")"


@dataclass(frozen=True)
class PLFunction:
    """
    Continuous piecewise-linear function given by its values at the vertices of a
    refined graph; it is linear along every refined edge.
    """
    refined: RefinedGraph
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(to_fraction(v) for v in self.values)
        if len(values) != len(self.refined):
            raise InvalidInputError(
                f"expected {len(self.refined)} values, got {len(values)}")
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_point_values(cls, refined: RefinedGraph,
                          values: Mapping[MetricPoint, Rational]) -> 'PLFunction':
        missing = [str(p) for p in refined.points if p not in values]
        if missing:
            raise InvalidInputError(f"no value given at {', '.join(missing[:5])}")
        return cls(refined, tuple(values[p] for p in refined.points))

    def __call__(self, point: MetricPoint) -> Fraction:
        return self.values[self.refined.index_of(point)]

    def slope(self, a: MetricPoint, b: MetricPoint) -> Fraction:
        """Slope from grid point a towards an adjacent grid point b."""
        return (self(b) - self(a)) / self.refined.granularity


@dataclass(frozen=True)
class RankResult:
    """Rank of a divisor plus an effective E of degree rank+1 with |D - E| empty."""
    rank: int
    witness: Divisor


@dataclass(frozen=True)
class EmptinessCertificate:
    """Whether |D - E| is empty, certified by the reduced divisor of D - E at `base`."""
    empty: bool
    reduced: Divisor
    base: MetricPoint


# Vector form

def divisor_vector(refined: RefinedGraph, divisor: Divisor) -> List[int]:
    """Chip counts indexed like refined.points; raises on off-grid support."""
    chips = [0] * len(refined)
    for point, count in divisor.items():
        chips[refined.index_of(point)] += count
    return chips


def vector_divisor(refined: RefinedGraph, chips: Sequence[int]) -> Divisor:
    return Divisor({refined.points[i]: c for i, c in enumerate(chips) if c})


def indices_divisor(refined: RefinedGraph, indices: Iterable[int]) -> Divisor:
    return Divisor.from_points(refined.points[i] for i in indices)


# Reduction engine

def _make_effective_away_from(refined: RefinedGraph, chips: List[int], q: int) -> None:
    """Fire the hop-balls around q, outermost first, until every vertex but q is nonnegative."""
    adjacency = refined.adjacency
    hops, layers = refined.hop_layers(q)
    for k in range(len(layers) - 2, -1, -1):
        times = 0
        for u in layers[k + 1]:
            if chips[u] < 0:
                inflow = sum(mult for w, mult in adjacency[u] if hops[w] == k)
                times = max(times, (-chips[u] + inflow - 1) // inflow)
        if times:
            for v in layers[k]:
                for w, mult in adjacency[v]:
                    if hops[w] == k + 1:
                        chips[v] -= times * mult
                        chips[w] += times * mult


def _burn(refined: RefinedGraph, chips: Sequence[int], q: int) -> Tuple[List[bool], List[int]]:
    """Dhar's fire from q; returns burnt flags and the edge count each vertex received from fire."""
    adjacency = refined.adjacency
    burnt = [False] * len(chips)
    hits = [0] * len(chips)
    burnt[q] = True
    stack = [q]
    while stack:
        v = stack.pop()
        for w, mult in adjacency[v]:
            if not burnt[w]:
                hits[w] += mult
                if hits[w] > chips[w]:
                    burnt[w] = True
                    stack.append(w)
    return burnt, hits


def _is_dhar_stable(refined: RefinedGraph, chips: Sequence[int], q: int) -> bool:
    if any(c < 0 for i, c in enumerate(chips) if i != q):
        return False
    burnt, _ = _burn(refined, chips, q)
    return all(burnt)


def _reduce_chips(refined: RefinedGraph, chips: Sequence[int], q: int) -> List[int]:
    """q-reduced representative of the class of `chips` on the refined graph."""
    chips = list(chips)
    _make_effective_away_from(refined, chips, q)
    adjacency = refined.adjacency
    while True:
        burnt, hits = _burn(refined, chips, q)
        unburnt = [v for v, flag in enumerate(burnt) if not flag]
        if not unburnt:
            return chips
        # unburnt vertices hold at least `hits` chips
        times = min(chips[v] // hits[v] for v in unburnt if hits[v])
        for v in unburnt:
            if hits[v]:
                for w, mult in adjacency[v]:
                    if burnt[w]:
                        chips[v] -= times * mult
                        chips[w] += times * mult


class _EmptinessSearch:
    """Tests |D - E| = empty for many E, caching the reduced forms of D per base point."""

    def __init__(self, refined: RefinedGraph, chips: Sequence[int]):
        self.refined = refined
        self.chips = tuple(chips)
        self._reduced: Dict[int, Tuple[int, ...]] = {}

    def reduced_at(self, q: int) -> Tuple[int, ...]:
        cached = self._reduced.get(q)
        if cached is None:
            cached = tuple(_reduce_chips(self.refined, self.chips, q))
            self._reduced[q] = cached
        return cached

    def is_empty(self, combo: Tuple[int, ...]) -> bool:
        if not combo:
            return self.reduced_at(0)[0] < 0
        q = combo[0]
        start = list(self.reduced_at(q))
        for v in combo:
            start[v] -= 1
        if all(v == q for v in combo):
            return start[q] < 0
        return _reduce_chips(self.refined, start, q)[q] < 0

    def first_empty(self, degree: int) -> Optional[Tuple[int, ...]]:
        for combo in combinations_with_replacement(range(len(self.refined)), degree):
            if self.is_empty(combo):
                return combo
        return None


# Public operations

def div_of_pl_function(f: PLFunction) -> Divisor:
    """
    Principal divisor of f: at each vertex, the sum over incident refined edges of
    the slope of f arriving at that vertex.
    """
    refined = f.refined
    q = refined.granularity
    chips = [0] * len(refined)
    for v, neighbours in enumerate(refined.adjacency):
        total = Fraction(0)
        for w, mult in neighbours:
            slope = (f.values[v] - f.values[w]) / q
            if slope.denominator != 1:
                raise InvalidFunctionError(
                    f"non-integer slope {slope} between {refined.points[v]} and {refined.points[w]}")
            total += mult * slope
        chips[v] = int(total)
    return vector_divisor(refined, chips)


def reduce(refined: RefinedGraph, divisor: Divisor, base: MetricPoint) -> Divisor:
    """The unique base-reduced divisor equivalent to `divisor`."""
    q = refined.index_of(base)
    return vector_divisor(refined, _reduce_chips(refined, divisor_vector(refined, divisor), q))


def is_reduced(refined: RefinedGraph, divisor: Divisor, base: MetricPoint) -> bool:
    q = refined.index_of(base)
    return _is_dhar_stable(refined, divisor_vector(refined, divisor), q)


def is_equivalent(refined: RefinedGraph, first: Divisor, second: Divisor) -> bool:
    """Linear equivalence, decided by comparing reduced forms at the first vertex."""
    a = divisor_vector(refined, first)
    b = divisor_vector(refined, second)
    if sum(a) != sum(b):
        return False
    return _reduce_chips(refined, a, 0) == _reduce_chips(refined, b, 0)


def emptiness_witness(refined: RefinedGraph, divisor: Divisor, effective: Divisor,
                      base: Optional[MetricPoint] = None) -> EmptinessCertificate:
    """
    Decide whether |D - E| is empty.

    Args:
        refined: refined graph carrying both divisors
        divisor: D
        effective: E, must be effective
        base: base point of the reduction (default: first vertex)

    Returns:
        EmptinessCertificate; the reduced divisor is negative at the base iff empty
    """
    if not effective.is_effective():
        raise InvalidInputError("E must be effective")
    q = 0 if base is None else refined.index_of(base)
    reduced = _reduce_chips(refined, divisor_vector(refined, divisor - effective), q)
    return EmptinessCertificate(reduced[q] < 0, vector_divisor(refined, reduced), refined.points[q])


def rank(refined: RefinedGraph, divisor: Divisor) -> RankResult:
    """
    Rank by iterative deepening over effective E of degree 0, 1, 2, ... in canonical
    order. The first E with |D - E| empty is returned as witness.
    """
    chips = divisor_vector(refined, divisor)
    degree = sum(chips)
    if degree < 0:
        return RankResult(-1, Divisor())
    search = _EmptinessSearch(refined, chips)
    if search.is_empty(()):
        return RankResult(-1, Divisor())
    for r in range(1, degree + 2):
        combo = search.first_empty(r)
        if combo is not None:
            logger.debug("rank %d, witness %s", r - 1, combo)
            return RankResult(r - 1, indices_divisor(refined, combo))
    raise AssertionError("a divisor of degree d cannot have rank above d")


def has_rank_at_least(refined: RefinedGraph, divisor: Divisor, r: int) -> bool:
    chips = divisor_vector(refined, divisor)
    if r < 0:
        return True
    if sum(chips) < r:
        return False
    search = _EmptinessSearch(refined, chips)
    if r == 0:
        return not search.is_empty(())
    return search.first_empty(r) is None


def reduced_effective_divisors(refined: RefinedGraph, degree: int,
                               base: MetricPoint) -> Iterator[Divisor]:
    """Every base-reduced effective grid divisor of the given degree, in canonical order."""
    q = refined.index_of(base)
    n = len(refined)
    for combo in combinations_with_replacement(range(n), degree):
        chips = [0] * n
        for v in combo:
            chips[v] += 1
        if _is_dhar_stable(refined, chips, q):
            yield vector_divisor(refined, chips)


def canonical_divisor(graph: ModelGraph) -> Divisor:
    """K = sum over vertices of (deg(v) - 2) v."""
    return Divisor({MetricPoint.at_vertex(v): graph.degree(v) - 2 for v in graph.vertices})


# Text format

def format_divisor(graph: ModelGraph, divisor: Divisor) -> str:
    lines = []
    for point, count in divisor.sorted_items(graph):
        if point.is_vertex:
            lines.append(f"chip {point.vertex} {count}")
        else:
            lines.append(f"chip {point.edge} {format_rational(point.offset)} {count}")
    return "".join(line + "\n" for line in lines)


def parse_divisor(text: str, graph: ModelGraph) -> Divisor:
    """Parse `chip <vertex> <count>` and `chip <edge> <num>/<den> <count>` lines."""
    chips: Counter = Counter()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] != 'chip' or len(fields) not in (3, 4):
            raise ParseError(f"unrecognized declaration: {line!r}", number)
        try:
            count = int(fields[-1])
        except ValueError:
            raise ParseError(f"chip count must be an integer: {fields[-1]!r}", number) from None
        if len(fields) == 3:
            if not graph.has_vertex(fields[1]):
                raise ParseError(f"unknown vertex: {fields[1]}", number)
            point = MetricPoint.at_vertex(fields[1])
        else:
            offset = parse_rational(fields[2], number)
            try:
                point = graph.point(fields[1], offset)
            except InvalidInputError as exc:
                raise ParseError(str(exc), number) from exc
        chips[point] += count
    return Divisor(chips)
