#!/usr/bin/env python3
"""
Mirror Involution of the Symmetric Chain of Loops
sigma swaps loop i with loop g+1-i and fixes only v_{g/2}. This module pushes
divisors through sigma, builds the explicit function whose divisor is
sigma(D_{reverse(p)}) - D_p, and tests which pencils are sigma-invariant.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from chip_firing import Divisor, PLFunction, div_of_pl_function, is_equivalent, reduce
from errors import (
    CertificationError,
    InvalidInputError,
    InvalidParameterError,
    PrecisionError,
    UnsupportedGraphError,
)
from graph_core import (
    ChainOfLoops,
    MetricPoint,
    Rational,
    RefinedGraph,
    build_chain_of_loops,
    long_edge_name,
    refine,
    short_edge_name,
    to_fraction,
    vertex_name,
)
from lattice_paths import LatticePath, enumerate_paths, path_to_divisor, reverse_path

logger = logging.getLogger(__name__)


def _loop_edges(chain: ChainOfLoops) -> Dict[str, Tuple[str, int]]:
    edges = {}
    for i in range(1, chain.g + 1):
        edges[short_edge_name(i)] = ('I', i)
        edges[long_edge_name(i)] = ('J', i)
    return edges


def _require_symmetric(chain: ChainOfLoops) -> None:
    if not chain.is_uniform:
        raise UnsupportedGraphError("sigma needs equal loop lengths on every loop")
    if chain.g % 2:
        raise UnsupportedGraphError(f"sigma needs an even genus, got {chain.g}")


def _mirror(chain: ChainOfLoops, point: MetricPoint) -> MetricPoint:
    g = chain.g
    if point.is_vertex:
        i = int(point.vertex.split('_', 1)[1])
        return MetricPoint.at_vertex(vertex_name(g - i))
    kind, i = _loop_edges(chain)[point.edge]
    if kind == 'I':
        return chain.graph.point(short_edge_name(g + 1 - i), chain.m - point.offset)
    return chain.graph.point(long_edge_name(g + 1 - i), chain.ell - point.offset)


@dataclass(frozen=True)
class Involution:
    """sigma on a symmetric chain, tabulated on the grid of the given granularity."""
    chain: ChainOfLoops
    granularity: Fraction
    point_map: Dict[MetricPoint, MetricPoint]

    def fixed_points(self) -> List[MetricPoint]:
        return [x for x, y in self.point_map.items() if x == y]


def _preserves_grid_edges(refined: RefinedGraph, point_map: Dict[MetricPoint, MetricPoint]) -> bool:
    """All refined edges have one length, so a bijection keeping adjacency with multiplicity is an isometry."""
    image = [refined.index_of(point_map[x]) for x in refined.points]
    for v, neighbours in enumerate(refined.adjacency):
        moved = sorted((image[w], mult) for w, mult in neighbours)
        if moved != sorted(refined.adjacency[image[v]]):
            return False
    return True


def build_involution(chain: ChainOfLoops, granularity: Optional[Rational] = None) -> Involution:
    """
    Tabulate sigma on the grid and certify that it is an isometric involution
    whose only fixed point is v_{g/2}.

    Raises:
        UnsupportedGraphError: non-uniform lengths or odd genus
    """
    _require_symmetric(chain)
    q = chain.natural_granularity() if granularity is None else to_fraction(granularity)
    refined = refine(chain.graph, q)
    point_map = {x: _mirror(chain, x) for x in refined.points}
    for x, y in point_map.items():
        if point_map.get(y) != x:
            raise CertificationError(f"sigma is not an involution at {x}")
    if not _preserves_grid_edges(refined, point_map):
        raise CertificationError("sigma does not preserve the grid edges")
    inv = Involution(chain, q, point_map)
    fixed = inv.fixed_points()
    if fixed != [chain.vertex(chain.g // 2)]:
        raise CertificationError(f"sigma has fixed points {[str(x) for x in fixed]}")
    return inv


def sigma_point(inv: Involution, point: MetricPoint) -> MetricPoint:
    mirrored = inv.point_map.get(point)
    if mirrored is not None:
        return mirrored
    if not inv.chain.graph.contains(point):
        raise InvalidInputError(f"point {point} is not on the chain")
    return _mirror(inv.chain, point)


def sigma_divisor(inv: Involution, divisor: Divisor) -> Divisor:
    result: Dict[MetricPoint, int] = {}
    for point, count in divisor.items():
        image = sigma_point(inv, point)
        result[image] = result.get(image, 0) + count
    return Divisor(result)


def _f_vertex_values(path: LatticePath) -> List[int]:
    values = [0]
    for i in range(1, path.g + 1):
        if path[i] > path[i - 1]:
            values.append(values[-1] + path[i - 1])
        else:
            values.append(values[-1] + path[i])
    return values


def build_f_function(path: LatticePath, chain: ChainOfLoops,
                     granularity: Optional[Rational] = None) -> PLFunction:
    """
    The piecewise-linear f with f(v_0) = 0 and div(f) = sigma(D_{reverse(p)}) - D_p.

    On loop i, f rises with slope p_{i-1} (ascent) or p_i (descent) along I_i.
    Along J_i it is flat then rises with slope 1 from offset l - p_{i-1} on an
    ascent, and rises with slope 1 up to offset p_i then stays flat on a descent.

    Args:
        path: lattice path of length g
        chain: uniform chain with m = 1 and l >= g/2 + 1
        granularity: grid for the returned function (default natural)

    Returns:
        PLFunction with integer slopes on the refined chain
    """
    _require_symmetric(chain)
    if chain.m != 1:
        raise UnsupportedGraphError(f"the explicit function needs m = 1, got m = {chain.m}")
    if path.g != chain.g:
        raise InvalidParameterError(f"path has g={path.g} but the chain has genus {chain.g}")
    ell = chain.ell
    if ell < path.degree:
        raise InvalidParameterError(f"the explicit function needs l >= d = {path.degree}, got l = {ell}")
    q = chain.natural_granularity() if granularity is None else to_fraction(granularity)
    refined = refine(chain.graph, q)

    f_vertex = _f_vertex_values(path)
    for i in range(1, path.g + 1):
        kink = ell - path[i - 1] if path[i] > path[i - 1] else Fraction(path[i])
        if (kink / q).denominator != 1:
            raise PrecisionError(f"kink {kink} on {long_edge_name(i)} is off the grid of granularity {q}")

    edges = _loop_edges(chain)
    values = []
    for point in refined.points:
        if point.is_vertex:
            values.append(Fraction(f_vertex[int(point.vertex.split('_', 1)[1])]))
            continue
        kind, i = edges[point.edge]
        ascent = path[i] > path[i - 1]
        x = point.offset
        base = f_vertex[i - 1]
        if kind == 'I':
            values.append(base + (path[i - 1] if ascent else path[i]) * x)
        elif ascent:
            values.append(base + max(Fraction(0), x - (ell - path[i - 1])))
        else:
            values.append(base + min(x, Fraction(path[i])))
    return PLFunction(refined, tuple(values))


def is_invariant_pencil(path: LatticePath, chain: ChainOfLoops,
                        granularity: Optional[Rational] = None) -> bool:
    """D_p ~ sigma(D_p); raises CertificationError unless this matches p being a palindrome."""
    pencil = path_to_divisor(path, chain, granularity, certify=False)
    inv = build_involution(chain, pencil.granularity)
    refined = refine(chain.graph, pencil.granularity)
    invariant = is_equivalent(refined, pencil.divisor, sigma_divisor(inv, pencil.divisor))
    if invariant != path.is_symmetric():
        raise CertificationError(
            f"path {path}: sigma-invariance is {invariant} but palindromic is {path.is_symmetric()}")
    return invariant


@dataclass(frozen=True)
class SigmaCase:
    """Per-path outcome of the sigma checks."""
    path: LatticePath
    equivalent: bool
    f_witness: bool
    mirror_reduced: bool
    invariant: bool

    @property
    def passed(self) -> bool:
        return (self.equivalent and self.f_witness and self.mirror_reduced
                and self.invariant == self.path.is_symmetric())


def check_sigma_case(path: LatticePath, chain: ChainOfLoops,
                     granularity: Optional[Rational] = None) -> SigmaCase:
    """
    Check D_p ~ sigma(D_{reverse(p)}) twice, by reduced forms and by the explicit
    function, then check both directions of the invariance criterion.
    """
    pencil = path_to_divisor(path, chain, granularity, certify=False)
    q = pencil.granularity
    mirror = path_to_divisor(reverse_path(path), chain, q, max_refinements=0, certify=False).divisor
    refined = refine(chain.graph, q)
    inv = build_involution(chain, q)

    pulled = sigma_divisor(inv, mirror)
    equivalent = is_equivalent(refined, pencil.divisor, pulled)
    f = build_f_function(path, chain, q)
    f_witness = div_of_pl_function(f) == pulled - pencil.divisor
    pushed = sigma_divisor(inv, pencil.divisor)
    mirror_reduced = reduce(refined, pushed, chain.vertex(0)) == mirror
    invariant = is_equivalent(refined, pencil.divisor, pushed)
    case = SigmaCase(path, equivalent, f_witness, mirror_reduced, invariant)
    logger.debug("sigma %s: %s", path, case)
    return case


def verify_prop_sigma(g: int, ell: Optional[Rational] = None,
                      granularity: Optional[Rational] = None) -> List[SigmaCase]:
    """Run check_sigma_case for every lattice path of length g on the uniform chain."""
    chain = build_chain_of_loops(g, ell)
    return [check_sigma_case(p, chain, granularity) for p in enumerate_paths(g)]
