#!/usr/bin/env python3
"""
Lattice Paths and Linear Pencils on the Chain of Loops
Enumerates the lattice paths that index pencils of degree g/2+1, computes their
closed-form counts, and turns a path into its v_0-reduced divisor D_p.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Tuple

from chip_firing import (
    Divisor,
    has_rank_at_least,
    is_equivalent,
    is_reduced,
    rank,
    reduced_effective_divisors,
)
from config import DEFAULT_MAX_REFINEMENTS
from errors import (
    CertificationError,
    InvalidParameterError,
    ParseError,
    PrecisionError,
)
from graph_core import (
    ChainOfLoops,
    MetricPoint,
    Rational,
    long_edge_name,
    refine,
    short_edge_name,
    to_fraction,
)

logger = logging.getLogger(__name__)


def _check_genus(g: int) -> None:
    if isinstance(g, bool) or not isinstance(g, int) or g < 2 or g % 2:
        raise InvalidParameterError(f"g must be an even integer >= 2, got {g!r}")


@dataclass(frozen=True, order=True)
class LatticePath:
    """
    Heights p_0..p_g with p_0 = p_g = 1, every p_i >= 1 and unit steps.
    The genus g is even and the pencil degree is d = g/2 + 1.
    """
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, 'entries', entries)
        if len(entries) < 3 or (len(entries) - 1) % 2:
            raise InvalidParameterError(f"a path needs an even number g >= 2 of steps, got {entries}")
        if any(isinstance(p, bool) or not isinstance(p, int) for p in entries):
            raise InvalidParameterError(f"path entries must be integers: {entries}")
        if entries[0] != 1 or entries[-1] != 1:
            raise InvalidParameterError(f"a path must start and end at height 1: {entries}")
        if min(entries) < 1:
            raise InvalidParameterError(f"path heights must be >= 1: {entries}")
        if any(abs(b - a) != 1 for a, b in zip(entries, entries[1:])):
            raise InvalidParameterError(f"path steps must be +1 or -1: {entries}")

    @property
    def g(self) -> int:
        return len(self.entries) - 1

    @property
    def degree(self) -> int:
        return self.g // 2 + 1

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def ascents(self) -> List[int]:
        """Indices i in 1..g with p_i - p_{i-1} = 1."""
        return [i for i in range(1, len(self.entries)) if self.entries[i] > self.entries[i - 1]]

    def is_symmetric(self) -> bool:
        return self.entries == self.entries[::-1]

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.entries)

    @classmethod
    def parse(cls, text: str) -> 'LatticePath':
        """Parse the comma-separated form, e.g. `1,2,3,2,1`."""
        try:
            entries = tuple(int(field) for field in text.strip().split(','))
        except ValueError:
            raise ParseError(f"not a comma-separated list of integers: {text!r}") from None
        try:
            return cls(entries)
        except InvalidParameterError as exc:
            raise ParseError(str(exc)) from exc


@dataclass(frozen=True)
class PencilDivisor:
    """D_p = v_0 + sum of w_i over the ascent indices of p, on a given grid."""
    path: LatticePath
    chain: ChainOfLoops
    divisor: Divisor
    ascent_points: Dict[int, MetricPoint]
    granularity: Fraction


# Enumeration

def enumerate_paths(g: int) -> List[LatticePath]:
    """All lattice paths of length g in lexicographic order."""
    _check_genus(g)
    paths: List[LatticePath] = []
    prefix = [1]

    def extend(i: int) -> None:
        if i > g:
            paths.append(LatticePath(tuple(prefix)))
            return
        for step in (-1, 1):
            nxt = prefix[-1] + step
            # must still be able to come down to 1 at index g
            if nxt < 1 or nxt > g - i + 1:
                continue
            prefix.append(nxt)
            extend(i + 1)
            prefix.pop()

    extend(1)
    return paths


def reverse_path(path: LatticePath) -> LatticePath:
    return LatticePath(path.entries[::-1])


def enumerate_symmetric_paths(g: int) -> List[LatticePath]:
    """Palindromic paths, built by mirroring every admissible first half."""
    _check_genus(g)
    half = g // 2
    halves: List[Tuple[int, ...]] = []

    def extend(prefix: Tuple[int, ...]) -> None:
        if len(prefix) == half + 1:
            halves.append(prefix)
            return
        for step in (-1, 1):
            nxt = prefix[-1] + step
            if nxt >= 1:
                extend(prefix + (nxt,))

    extend((1,))
    return sorted(LatticePath(h + h[-2::-1]) for h in halves)


# Counts

def catalan_count(d: int) -> int:
    """lambda = C(2d-2, d-1) / d, the number of pencils of degree d."""
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    numerator = comb(2 * d - 2, d - 1)
    if numerator % d:
        raise CertificationError(f"C({2 * d - 2}, {d - 1}) is not divisible by {d}")
    return numerator // d


def symmetric_count_closed_form(d: int) -> int:
    """lambda' = C(d-1, ceil((d-1)/2)), the number of palindromic paths."""
    if d < 2:
        raise InvalidParameterError(f"d must be >= 2, got {d}")
    return comb(d - 1, -(-(d - 1) // 2))


def midheights(d: int) -> List[int]:
    """Possible middle heights p_{d-1} of a palindromic path of degree d."""
    if d < 2:
        raise InvalidParameterError(f"d must be >= 2, got {d}")
    return list(range(2 - d % 2, d + 1, 2))


def symmetric_count_by_midheight(d: int, m: int) -> int:
    """
    Palindromic paths of degree d whose middle height is m, via the reflection
    method. Computes (m/d) C(d, (d-m)/2) and the ballot difference
    C(d-1, k) - C(d-1, k-1) with k = (d-m)/2, and insists they agree.

    Args:
        d: pencil degree, >= 2
        m: middle height, 1 <= m <= d and m = d mod 2

    Returns:
        The exact count
    """
    if d < 2:
        raise InvalidParameterError(f"d must be >= 2, got {d}")
    if not 1 <= m <= d or (d - m) % 2:
        raise InvalidParameterError(f"middle height {m} must satisfy 1 <= m <= {d} and m = d mod 2")
    k = (d - m) // 2
    reflected = Fraction(m, d) * comb(d, k)
    if reflected.denominator != 1:
        raise CertificationError(f"(m/d) C(d, k) is not an integer for d={d}, m={m}")
    ballot = comb(d - 1, k) - (comb(d - 1, k - 1) if k >= 1 else 0)
    if reflected != ballot:
        raise CertificationError(f"reflection count {reflected} != ballot count {ballot} for d={d}, m={m}")
    return ballot


def brill_noether_number(g: int, r: int, d: int) -> int:
    """rho = g - (r+1)(g-d+r)."""
    return g - (r + 1) * (g - d + r)


def brill_noether_count(g: int, r: int, d: int) -> int:
    """Number of g^r_d on a general curve of genus g when rho = 0."""
    if g < 1 or r < 0 or g - d + r < 0:
        raise InvalidParameterError(f"need g >= 1, r >= 0, g-d+r >= 0; got g={g}, r={r}, d={d}")
    if brill_noether_number(g, r, d) != 0:
        raise InvalidParameterError(f"the count formula needs rho = 0 (g={g}, r={r}, d={d})")
    value = Fraction(factorial(g))
    for i in range(r + 1):
        value *= Fraction(factorial(i), factorial(g - d + r + i))
    if value.denominator != 1:
        raise CertificationError(f"Brill-Noether count is not an integer for g={g}, r={r}, d={d}")
    return value.numerator


# Path -> divisor

def _loop_position(chain: ChainOfLoops, i: int, point: MetricPoint) -> Fraction:
    """Coordinate of a point of loop i on the circle of length l_i + m_i, with v_{i-1} at 0."""
    m_i = chain.short_lengths[i - 1]
    circumference = m_i + chain.long_lengths[i - 1]
    if point == chain.vertex(i - 1):
        return Fraction(0)
    if point == chain.vertex(i):
        return m_i
    if point.edge == short_edge_name(i):
        return point.offset
    if point.edge == long_edge_name(i):
        return circumference - point.offset
    raise InvalidParameterError(f"point {point} is not on loop {i}")


def _circle_class_matches(chain: ChainOfLoops, i: int, before: int, after: int,
                          point: MetricPoint) -> bool:
    """On a single circle, before*v_{i-1} + w ~ after*v_i iff the positions agree mod the circumference."""
    circumference = chain.short_lengths[i - 1] + chain.long_lengths[i - 1]
    left = before * _loop_position(chain, i, chain.vertex(i - 1)) + _loop_position(chain, i, point)
    right = after * _loop_position(chain, i, chain.vertex(i))
    return (left - right) % circumference == 0


def _certified_ascent_point(chain: ChainOfLoops, i: int, before: int, after: int,
                            granularity: Fraction) -> Optional[MetricPoint]:
    """The grid point w of loop i with before*v_{i-1} + w ~ after*v_i, or None if off-grid."""
    loop = refine(chain.loops_subgraph(i, i), granularity)
    left, right = chain.vertex(i - 1), chain.vertex(i)
    target = Divisor({right: after})
    found = []
    for point in loop.points:
        candidate = Divisor({left: before}) + Divisor({point: 1})
        equivalent = is_equivalent(loop, candidate, target)
        if equivalent != _circle_class_matches(chain, i, before, after, point):
            raise CertificationError(
                f"loop {i}: chip-firing and circle position disagree at {point}")
        if equivalent:
            found.append(point)
    if len(found) > 1:
        raise CertificationError(f"loop {i}: several points satisfy the equivalence: {found}")
    return found[0] if found else None


def path_to_divisor(path: LatticePath, chain: ChainOfLoops,
                    granularity: Optional[Rational] = None,
                    max_refinements: Optional[int] = None,
                    certify: bool = True) -> PencilDivisor:
    """
    Build D_p by locating every ascent point w_i through exhaustive grid search.

    Args:
        path: lattice path of length g
        chain: chain of loops of genus g
        granularity: starting grid (default: the chain's natural granularity)
        max_refinements: how often the grid may be halved when some w_i is off-grid
        certify: also check that D_p is v_0-reduced and has rank exactly 1

    Returns:
        PencilDivisor on the grid where every w_i was found
    """
    if path.g != chain.g:
        raise InvalidParameterError(f"path has g={path.g} but the chain has genus {chain.g}")
    q = chain.natural_granularity() if granularity is None else to_fraction(granularity)
    refinements = DEFAULT_MAX_REFINEMENTS if max_refinements is None else max_refinements

    for attempt in range(refinements + 1):
        points: Dict[int, MetricPoint] = {}
        missing = None
        for i in path.ascents():
            w = _certified_ascent_point(chain, i, path[i - 1], path[i], q)
            if w is None:
                missing = i
                break
            points[i] = w
        if missing is None:
            break
        if attempt == refinements:
            raise PrecisionError(
                f"no grid point of loop {missing} carries w_{missing} for path {path} "
                f"down to granularity {q}")
        logger.warning("w_%d for path %s is off the grid at granularity %s; retrying at %s",
                       missing, path, q, q / 2)
        q = q / 2

    divisor = Divisor({chain.vertex(0): 1}) + Divisor.from_points(points.values())
    if certify:
        refined = refine(chain.graph, q)
        if not is_reduced(refined, divisor, chain.vertex(0)):
            raise CertificationError(f"D_p for {path} is not v_0-reduced: {divisor}")
        found = rank(refined, divisor).rank
        if found != 1:
            raise CertificationError(f"D_p for {path} has rank {found}, expected 1")
    return PencilDivisor(path, chain, divisor, points, q)


def enumerate_pencil_classes(chain: ChainOfLoops,
                             granularity: Optional[Rational] = None) -> List[Divisor]:
    """
    Every v_0-reduced effective grid divisor of degree g/2+1 and rank >= 1.
    Reduced representatives are unique, so this lists the pencil classes met by the grid.
    """
    _check_genus(chain.g)
    q = chain.natural_granularity() if granularity is None else to_fraction(granularity)
    refined = refine(chain.graph, q)
    degree = chain.g // 2 + 1
    classes = [D for D in reduced_effective_divisors(refined, degree, chain.vertex(0))
               if has_rank_at_least(refined, D, 1)]
    logger.debug("genus %d: %d pencil classes at granularity %s", chain.g, len(classes), q)
    return classes
