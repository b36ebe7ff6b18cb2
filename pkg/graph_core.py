#!/usr/bin/env python3
"""
Graph Core for the Chain-of-Loops Pencil Toolkit
Model graphs with exact rational edge lengths, points of the associated metric
graph, grid refinement, and the chain-of-loops constructor.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from errors import (
    InvalidGranularityError,
    InvalidInputError,
    InvalidParameterError,
    InvalidSupportError,
    ParseError,
)

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction, str]


def to_fraction(value: Rational) -> Fraction:
    """Coerce an int, Fraction or 'num/den' string to a Fraction. Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidParameterError(f"expected an exact rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParameterError(f"not a rational number: {value!r}") from exc
    raise InvalidParameterError(f"expected an exact rational, got {type(value).__name__}")


def rational_gcd(values: Iterable[Rational]) -> Fraction:
    """Largest rational q such that every value is an integer multiple of q."""
    result = Fraction(0)
    for value in values:
        value = abs(to_fraction(value))
        if value == 0:
            continue
        if result == 0:
            result = value
            continue
        common = result.denominator * value.denominator // gcd(result.denominator, value.denominator)
        result = Fraction(gcd(int(result * common), int(value * common)), common)
    if result == 0:
        raise InvalidParameterError("rational_gcd needs at least one nonzero value")
    return result


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Edge:
    """One edge of a model graph, identified with the segment [0, length] from tail to head."""
    name: str
    tail: str
    head: str
    length: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'length', to_fraction(self.length))


@dataclass(frozen=True)
class MetricPoint:
    """
    A point of the metric graph.

    Vertices are stored by name; every other point is an (edge, offset) pair with
    0 < offset < length. Build edge points through ModelGraph.point so that
    offsets 0 and length collapse onto the tail/head vertex.
    """
    vertex: Optional[str] = None
    edge: Optional[str] = None
    offset: Fraction = Fraction(0)

    @classmethod
    def at_vertex(cls, name: str) -> 'MetricPoint':
        return cls(vertex=name)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def __str__(self) -> str:
        if self.is_vertex:
            return self.vertex
        return f"{self.edge}@{self.offset}"


@dataclass(frozen=True)
class ModelGraph:
    """
    Finite loopless multigraph with positive rational edge lengths.

    Construction rejects self-loops, unknown endpoints, duplicate names and
    non-positive lengths. Connectivity is checked by genus() and refine().
    """
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'edges', tuple(self.edges))
        if not self.vertices:
            raise InvalidInputError("a model graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidInputError("duplicate vertex names")
        known = set(self.vertices)
        seen = set()
        for edge in self.edges:
            if edge.name in seen or edge.name in known:
                raise InvalidInputError(f"duplicate name: {edge.name}")
            seen.add(edge.name)
            if edge.tail not in known or edge.head not in known:
                raise InvalidInputError(f"edge {edge.name} has an unknown endpoint")
            if edge.tail == edge.head:
                raise InvalidInputError(f"edge {edge.name} is a self-loop")
            if edge.length <= 0:
                raise InvalidInputError(f"edge {edge.name} has non-positive length {edge.length}")

    @cached_property
    def _edge_by_name(self) -> Dict[str, Edge]:
        return {edge.name: edge for edge in self.edges}

    @cached_property
    def _vertex_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.vertices)}

    @cached_property
    def _edge_index(self) -> Dict[str, int]:
        return {edge.name: i for i, edge in enumerate(self.edges)}

    @cached_property
    def nx_graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        for edge in self.edges:
            graph.add_edge(edge.tail, edge.head, key=edge.name, length=edge.length)
        return graph

    @cached_property
    def _vertex_distances(self) -> Dict[str, Dict[str, Fraction]]:
        if not self.is_connected():
            raise InvalidInputError("distances need a connected graph")
        return dict(nx.all_pairs_dijkstra_path_length(self.nx_graph, weight='length'))

    def edge(self, name: str) -> Edge:
        try:
            return self._edge_by_name[name]
        except KeyError:
            raise InvalidInputError(f"unknown edge: {name}") from None

    def has_vertex(self, name: str) -> bool:
        return name in self._vertex_index

    def degree(self, vertex: str) -> int:
        if not self.has_vertex(vertex):
            raise InvalidInputError(f"unknown vertex: {vertex}")
        return sum((edge.tail == vertex) + (edge.head == vertex) for edge in self.edges)

    def is_connected(self) -> bool:
        return nx.is_connected(self.nx_graph)

    def vertex_point(self, name: str) -> MetricPoint:
        if not self.has_vertex(name):
            raise InvalidInputError(f"unknown vertex: {name}")
        return MetricPoint.at_vertex(name)

    def point(self, edge_name: str, offset: Rational) -> MetricPoint:
        """Canonical point at the given offset from the tail of an edge."""
        edge = self.edge(edge_name)
        x = to_fraction(offset)
        if x < 0 or x > edge.length:
            raise InvalidInputError(f"offset {x} outside edge {edge.name} of length {edge.length}")
        if x == 0:
            return MetricPoint.at_vertex(edge.tail)
        if x == edge.length:
            return MetricPoint.at_vertex(edge.head)
        return MetricPoint(edge=edge.name, offset=x)

    def contains(self, point: MetricPoint) -> bool:
        if point.is_vertex:
            return self.has_vertex(point.vertex)
        edge = self._edge_by_name.get(point.edge)
        return edge is not None and 0 < point.offset < edge.length

    def sort_key(self, point: MetricPoint) -> Tuple[int, int, Fraction]:
        """Canonical order: vertices in declaration order, then (edge index, offset)."""
        if point.is_vertex:
            return (0, self._vertex_index[point.vertex], Fraction(0))
        return (1, self._edge_index[point.edge], point.offset)

    def _anchors(self, point: MetricPoint) -> List[Tuple[str, Fraction]]:
        if point.is_vertex:
            return [(point.vertex, Fraction(0))]
        edge = self.edge(point.edge)
        return [(edge.tail, point.offset), (edge.head, edge.length - point.offset)]

    def distance(self, a: MetricPoint, b: MetricPoint) -> Fraction:
        """Shortest-path distance between two points of the metric graph."""
        for point in (a, b):
            if not self.contains(point):
                raise InvalidInputError(f"point {point} is not on this graph")
        table = self._vertex_distances
        best = None
        if not a.is_vertex and not b.is_vertex and a.edge == b.edge:
            best = abs(a.offset - b.offset)
        for va, da in self._anchors(a):
            for vb, db in self._anchors(b):
                candidate = da + table[va][vb] + db
                if best is None or candidate < best:
                    best = candidate
        return Fraction(best)

    def subgraph(self, edge_names: Iterable[str]) -> 'ModelGraph':
        """Model graph spanned by the named edges (vertex and edge order preserved)."""
        wanted = set(edge_names)
        for name in wanted:
            self.edge(name)
        edges = [edge for edge in self.edges if edge.name in wanted]
        touched = {edge.tail for edge in edges} | {edge.head for edge in edges}
        return ModelGraph(tuple(v for v in self.vertices if v in touched), tuple(edges))

    def grid_points(self, granularity: Rational) -> Tuple[MetricPoint, ...]:
        return refine(self, to_fraction(granularity)).points


def genus(graph: ModelGraph) -> int:
    """First Betti number |E| - |V| + 1 of a connected model graph."""
    if not graph.is_connected():
        raise InvalidInputError("genus is only defined for connected graphs")
    return len(graph.edges) - len(graph.vertices) + 1


def natural_granularity(graph: ModelGraph, points: Iterable[MetricPoint] = ()) -> Fraction:
    """Coarsest grid containing every vertex, every edge endpoint and the given points."""
    values = [edge.length for edge in graph.edges]
    values.extend(point.offset for point in points if not point.is_vertex)
    if not values:
        return Fraction(1)
    return rational_gcd(values)


class RefinedGraph:
    """
    Subdivision of a model graph into edges of equal length `granularity`.

    `points` lists the grid points of the original metric graph in canonical
    order and fixes the integer index used by the chip-firing engine;
    `point_map` sends each of them to its vertex name in `graph`.
    """

    def __init__(self, base: ModelGraph, granularity: Fraction, graph: ModelGraph,
                 points: Sequence[MetricPoint], names: Sequence[str],
                 adjacency: Tuple[Tuple[Tuple[int, int], ...], ...]):
        self.base = base
        self.granularity = granularity
        self.graph = graph
        self.points = tuple(points)
        self.names = tuple(names)
        self.adjacency = adjacency
        self.index = {point: i for i, point in enumerate(self.points)}
        self.point_map = dict(zip(self.points, self.names))
        self._layers: Dict[int, Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]] = {}

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"RefinedGraph(vertices={len(self.points)}, granularity={self.granularity})"

    def index_of(self, point: MetricPoint) -> int:
        try:
            return self.index[point]
        except KeyError:
            pass
        if not self.base.contains(point):
            raise InvalidInputError(f"point {point} is not on this graph")
        raise InvalidSupportError(f"point {point} is off the grid of granularity {self.granularity}")

    def original_point(self, name: str) -> MetricPoint:
        for point, refined_name in self.point_map.items():
            if refined_name == name:
                return point
        raise InvalidInputError(f"unknown refined vertex: {name}")

    @cached_property
    def index_graph(self) -> nx.Graph:
        """Simple graph on the integer indices, for traversals that ignore multiplicity."""
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.points)))
        graph.add_edges_from((v, w) for v, row in enumerate(self.adjacency) for w, _ in row)
        return graph

    def hop_layers(self, q: int) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
        """Breadth-first hop distance from q and the vertices grouped by it."""
        cached = self._layers.get(q)
        if cached is None:
            layers = tuple(tuple(layer) for layer in nx.bfs_layers(self.index_graph, q))
            hops = [-1] * len(self.points)
            for k, layer in enumerate(layers):
                for v in layer:
                    hops[v] = k
            cached = (tuple(hops), layers)
            self._layers[q] = cached
        return cached


@lru_cache(maxsize=64)
def refine(graph: ModelGraph, granularity: Fraction) -> RefinedGraph:
    """
    Subdivide every edge of a connected graph into pieces of length `granularity`.

    Args:
        graph: connected model graph
        granularity: positive rational dividing every edge length

    Returns:
        RefinedGraph holding the refined ModelGraph and the grid point mapping
    """
    q = to_fraction(granularity)
    if q <= 0:
        raise InvalidGranularityError(f"granularity must be positive, got {q}")
    if not graph.is_connected():
        raise InvalidInputError("cannot refine a disconnected graph")

    pieces = {}
    for edge in graph.edges:
        count = edge.length / q
        if count.denominator != 1:
            raise InvalidGranularityError(
                f"granularity {q} does not divide length {edge.length} of edge {edge.name}")
        pieces[edge.name] = count.numerator

    points = [MetricPoint.at_vertex(v) for v in graph.vertices]
    names = list(graph.vertices)
    for edge in graph.edges:
        for k in range(1, pieces[edge.name]):
            points.append(MetricPoint(edge=edge.name, offset=k * q))
            names.append(f"{edge.name}:{k}")
    index = {point: i for i, point in enumerate(points)}

    refined_edges = []
    neighbours = [defaultdict(int) for _ in points]
    for edge in graph.edges:
        n = pieces[edge.name]
        path = [index[MetricPoint.at_vertex(edge.tail)]]
        path.extend(index[MetricPoint(edge=edge.name, offset=k * q)] for k in range(1, n))
        path.append(index[MetricPoint.at_vertex(edge.head)])
        for j, (a, b) in enumerate(zip(path, path[1:]), start=1):
            name = edge.name if n == 1 else f"{edge.name}.{j}"
            refined_edges.append(Edge(name, names[a], names[b], q))
            neighbours[a][b] += 1
            neighbours[b][a] += 1

    adjacency = tuple(tuple(sorted(nb.items())) for nb in neighbours)
    refined = ModelGraph(tuple(names), tuple(refined_edges))
    return RefinedGraph(graph, q, refined, points, names, adjacency)


# Chain of loops

def vertex_name(i: int) -> str:
    return f"v_{i}"


def short_edge_name(i: int) -> str:
    return f"I_{i}"


def long_edge_name(i: int) -> str:
    return f"J_{i}"


def default_long_length(g: int) -> Fraction:
    return Fraction(max(2 * g - 2, 1))


@dataclass(frozen=True)
class ChainOfLoops:
    """
    g loops in a row. Loop i has a short edge I_i (length m_i) and a long edge
    J_i (length l_i), both running from v_{i-1} to v_i; v_1..v_{g-1} are
    4-valent and the ends v_0, v_g are 2-valent.
    """
    g: int
    long_lengths: Tuple[Fraction, ...]
    short_lengths: Tuple[Fraction, ...]
    graph: ModelGraph
    below_generic_bound: bool = False

    @property
    def ell(self) -> Fraction:
        return self.long_lengths[0]

    @property
    def m(self) -> Fraction:
        return self.short_lengths[0]

    @property
    def is_uniform(self) -> bool:
        return len(set(self.long_lengths)) == 1 and len(set(self.short_lengths)) == 1

    def vertex(self, i: int) -> MetricPoint:
        if not 0 <= i <= self.g:
            raise InvalidParameterError(f"vertex index {i} outside 0..{self.g}")
        return MetricPoint.at_vertex(vertex_name(i))

    def marked_vertices(self) -> Tuple[MetricPoint, ...]:
        return tuple(self.vertex(i) for i in range(self.g + 1))

    def loops_subgraph(self, first: int, last: int) -> ModelGraph:
        """Model graph of loops first..last (1-based, inclusive)."""
        if not 1 <= first <= last <= self.g:
            raise InvalidParameterError(f"loop range {first}..{last} outside 1..{self.g}")
        names = []
        for i in range(first, last + 1):
            names.extend((short_edge_name(i), long_edge_name(i)))
        return self.graph.subgraph(names)

    def natural_granularity(self) -> Fraction:
        return natural_granularity(self.graph)


def build_generic_chain(long_lengths: Sequence[Rational],
                        short_lengths: Sequence[Rational]) -> ChainOfLoops:
    """Chain of loops with per-loop lengths l_i (edge J_i) and m_i (edge I_i)."""
    longs = tuple(to_fraction(x) for x in long_lengths)
    shorts = tuple(to_fraction(x) for x in short_lengths)
    if not longs or len(longs) != len(shorts):
        raise InvalidParameterError("need one long and one short length per loop")
    if any(x <= 0 for x in longs + shorts):
        raise InvalidParameterError("edge lengths must be positive")
    g = len(longs)

    vertices = tuple(vertex_name(i) for i in range(g + 1))
    edges = []
    for i in range(1, g + 1):
        edges.append(Edge(short_edge_name(i), vertex_name(i - 1), vertex_name(i), shorts[i - 1]))
        edges.append(Edge(long_edge_name(i), vertex_name(i - 1), vertex_name(i), longs[i - 1]))

    below = any(l_i < (2 * g - 2) * m_i for l_i, m_i in zip(longs, shorts))
    if below:
        logger.warning("chain of genus %d has a loop with l/m below 2g-2 = %d; "
                       "Brill-Noether genericity is not guaranteed", g, 2 * g - 2)
    return ChainOfLoops(g, longs, shorts, ModelGraph(vertices, tuple(edges)), below)


def build_chain_of_loops(g: int, ell: Optional[Rational] = None, m: Rational = 1) -> ChainOfLoops:
    """
    Build the chain of g loops with l_i = ell and m_i = m.

    Args:
        g: genus, at least 1
        ell: long edge length (default max(2g-2, 1))
        m: short edge length (default 1)

    Returns:
        ChainOfLoops whose `below_generic_bound` flags ell < (2g-2)*m
    """
    if isinstance(g, bool) or not isinstance(g, int) or g < 1:
        raise InvalidParameterError(f"genus must be an integer >= 1, got {g!r}")
    ell = default_long_length(g) if ell is None else ell
    return build_generic_chain([ell] * g, [m] * g)


# Text format

def format_graph(graph: ModelGraph, comment: Optional[str] = None) -> str:
    lines = [f"# {comment}"] if comment else []
    lines.extend(f"vertex {v}" for v in graph.vertices)
    lines.extend(f"edge {e.name} {e.tail} {e.head} {format_rational(e.length)}" for e in graph.edges)
    return "\n".join(lines) + "\n"


def format_chain(chain: ChainOfLoops) -> str:
    if chain.is_uniform:
        comment = f"chain of loops g={chain.g} ell={chain.ell} m={chain.m}"
    else:
        comment = f"chain of loops g={chain.g}"
    return format_graph(chain.graph, comment)


def parse_rational(text: str, line_number: Optional[int] = None) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational number: {text!r}", line_number) from None


def parse_graph(text: str) -> ModelGraph:
    """Parse `vertex <name>` / `edge <name> <tail> <head> <num>/<den>` lines."""
    vertex_lines: Dict[str, int] = {}
    edge_lines: List[Tuple[int, Edge]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == 'vertex' and len(fields) == 2:
            if fields[1] in vertex_lines:
                raise ParseError(f"duplicate name: {fields[1]}", number)
            vertex_lines[fields[1]] = number
        elif fields[0] == 'edge' and len(fields) == 5:
            edge_lines.append((number, Edge(fields[1], fields[2], fields[3],
                                            parse_rational(fields[4], number))))
        else:
            raise ParseError(f"unrecognized declaration: {line!r}", number)

    # edges may precede their endpoints' declarations
    seen = set(vertex_lines)
    for number, edge in edge_lines:
        if edge.name in seen:
            raise ParseError(f"duplicate name: {edge.name}", number)
        seen.add(edge.name)
        if edge.tail not in vertex_lines or edge.head not in vertex_lines:
            raise ParseError(f"edge {edge.name} has an unknown endpoint", number)
        if edge.tail == edge.head:
            raise ParseError(f"edge {edge.name} is a self-loop", number)
        if edge.length <= 0:
            raise ParseError(f"edge {edge.name} has non-positive length {edge.length}", number)
    try:
        return ModelGraph(tuple(vertex_lines), tuple(edge for _, edge in edge_lines))
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc
