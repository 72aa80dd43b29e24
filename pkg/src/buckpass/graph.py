"""Directed-graph model, JSON parsing, strong components and unicycles.

Vertices are 0-based integers. A graph stores, for every vertex, the ordered
tuple of its out-neighbors; that order is the order in which edges first
appear in the input and drives every deterministic iteration downstream.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .errors import (
    CapExceededError,
    DuplicateEdgeError,
    EmptyOutNeighborsError,
    GraphParseError,
    InputError,
    LoopEdgeError,
    MeasureError,
)

MEASURE_TOL = 1e-12
TREE_ENUMERATION_CAP = 10


@dataclass(frozen=True)
class Graph:
    """Simple loop-free digraph with nonempty, ordered out-neighbor lists."""

    n: int
    out_neighbors: tuple[tuple[int, ...], ...]
    _edge_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise GraphParseError(f"vertex count must be a positive integer, got {self.n!r}", field="n")
        if len(self.out_neighbors) != self.n:
            raise GraphParseError(
                f"expected {self.n} out-neighbor lists, got {len(self.out_neighbors)}"
            )
        out = tuple(tuple(int(j) for j in nbrs) for nbrs in self.out_neighbors)
        for i, nbrs in enumerate(out):
            if not nbrs:
                raise EmptyOutNeighborsError(f"vertex {i} has no out-neighbors", vertex=i)
            seen = set()
            for j in nbrs:
                if not 0 <= j < self.n:
                    raise GraphParseError(f"edge ({i},{j}) leaves the vertex range", vertex=i)
                if j == i:
                    raise LoopEdgeError(f"loop at vertex {i}", vertex=i)
                if j in seen:
                    raise DuplicateEdgeError(f"duplicate edge ({i},{j}) at vertex {i}", vertex=i)
                seen.add(j)
        object.__setattr__(self, "out_neighbors", out)
        object.__setattr__(
            self, "_edge_set", frozenset((i, j) for i, nbrs in enumerate(out) for j in nbrs)
        )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        lists: list[list[int]] = [[] for _ in range(n)] if isinstance(n, int) and n > 0 else []
        if not lists:
            raise GraphParseError(f"vertex count must be a positive integer, got {n!r}", field="n")
        for e in edges:
            if len(e) != 2:
                raise GraphParseError(f"edge {e!r} is not a [from, to] pair")
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < n and 0 <= j < n):
                raise GraphParseError(f"edge ({i},{j}) leaves the vertex range 0..{n - 1}", vertex=i)
            if i == j:
                raise LoopEdgeError(f"loop at vertex {i}", vertex=i)
            if j in lists[i]:
                raise DuplicateEdgeError(f"duplicate edge ({i},{j}) at vertex {i}", vertex=i)
            lists[i].append(j)
        return cls(n, tuple(tuple(x) for x in lists))

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_set

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.out_neighbors) for j in nbrs]

    def num_profiles(self) -> int:
        total = 1
        for nbrs in self.out_neighbors:
            total *= len(nbrs)
        return total

    def profiles(self) -> Iterator[tuple[int, ...]]:
        """All pure profiles, lexicographic in out-neighbor order."""
        return itertools.product(*self.out_neighbors)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}


@dataclass(frozen=True)
class InitialMeasure:
    """Probability vector over the vertices, stored as exact rationals."""

    mu: tuple[Fraction, ...]

    def __post_init__(self):
        mu = tuple(_to_fraction(x, i) for i, x in enumerate(self.mu))
        for i, x in enumerate(mu):
            if x < 0:
                raise MeasureError(f"negative mass {x} at vertex {i}", vertex=i)
        total = sum(mu, Fraction(0))
        if abs(float(total) - 1.0) > MEASURE_TOL:
            raise MeasureError(f"measure sums to {float(total)!r}, not 1")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def uniform(cls, n: int) -> "InitialMeasure":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def point(cls, n: int, j: int) -> "InitialMeasure":
        return cls(tuple(Fraction(int(i == j)) for i in range(n)))

    @property
    def full_support(self) -> bool:
        return all(x > 0 for x in self.mu)

    def __len__(self):
        return len(self.mu)

    def __getitem__(self, i):
        return self.mu[i]

    def as_floats(self) -> list[float]:
        return [float(x) for x in self.mu]


def _to_fraction(x, i) -> Fraction:
    if isinstance(x, bool):
        raise MeasureError(f"mass at vertex {i} is not a number", vertex=i)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            pass
    raise MeasureError(f"mass at vertex {i} is not a number: {x!r}", vertex=i)


def as_measure(mu, n: int) -> InitialMeasure:
    """Coerce ``None`` (uniform), a sequence, or an InitialMeasure."""
    if mu is None:
        return InitialMeasure.uniform(n)
    if isinstance(mu, InitialMeasure):
        m = mu
    else:
        m = InitialMeasure(tuple(mu))
    if len(m) != n:
        raise MeasureError(f"measure has {len(m)} entries for {n} vertices")
    return m


def _load(text):
    if isinstance(text, (dict, list)):
        return text
    try:
        # Decimal literals become exact rationals.
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


def parse_graph(text) -> tuple[Graph, InitialMeasure]:
    """Parse ``{"n": int, "edges": [[from, to], ...], "mu": [...]}``.

    A missing ``mu`` means the uniform measure.

    >>> g, mu = parse_graph('{"n": 2, "edges": [[0, 1], [1, 0]]}')
    >>> g.out_neighbors, mu.mu
    (((1,), (0,)), (Fraction(1, 2), Fraction(1, 2)))
    """
    doc = _load(text)
    if not isinstance(doc, dict):
        raise InputError("graph document must be a JSON object")
    if "n" not in doc:
        raise GraphParseError("missing field 'n'", field="n")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise GraphParseError(f"'n' must be an integer, got {n!r}", field="n")
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise GraphParseError("'edges' must be a list of [from, to] pairs")
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise GraphParseError(f"edge {e!r} is not a pair of integers")
    g = Graph.from_edges(n, edges)
    if "mu" in doc and doc["mu"] is not None:
        mu = doc["mu"]
        if not isinstance(mu, list):
            raise MeasureError("'mu' must be a list")
        measure = as_measure(mu, n)
    else:
        measure = InitialMeasure.uniform(n)
    return g, measure


def parse_profile(g: Graph, text) -> tuple[int, ...]:
    """Parse ``{"s": [...]}`` and check it against ``g``."""
    doc = _load(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("s"), list):
        raise InputError("profile document must be an object with list field 's'", field="s")
    return check_profile(g, doc["s"])


def check_profile(g: Graph, s: Sequence[int]) -> tuple[int, ...]:
    if len(s) != g.n:
        raise InputError(f"profile has {len(s)} entries for {g.n} vertices", field="s")
    out = []
    for i, t in enumerate(s):
        if isinstance(t, bool) or not isinstance(t, int) or not g.has_edge(i, t):
            raise InputError(f"s[{i}]={t!r} is not an out-neighbor of vertex {i}", field="s")
        out.append(t)
    return tuple(out)


# ---------------------------------------------------------------------------
# strongly connected components


@dataclass(frozen=True)
class Components:
    components: tuple[frozenset, ...]
    component_of: tuple[int, ...]
    condensation_edges: frozenset

    def sinks(self) -> list[int]:
        """Indices of components with no outgoing condensation edge."""
        has_out = {a for a, _ in self.condensation_edges}
        return [c for c in range(len(self.components)) if c not in has_out]


def _tarjan(n: int, adj: Sequence[Sequence[int]]) -> list[list[int]]:
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            nbrs = adj[v]
            if k < len(nbrs):
                work[-1] = (v, k + 1)
                w = nbrs[k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def components_of(n: int, adj: Sequence[Sequence[int]]) -> Components:
    """Strong components of an adjacency list, ordered by smallest vertex."""
    comps = sorted((frozenset(c) for c in _tarjan(n, adj)), key=min)
    comp_of = [0] * n
    for c, members in enumerate(comps):
        for v in members:
            comp_of[v] = c
    cond = frozenset(
        (comp_of[i], comp_of[j]) for i in range(n) for j in adj[i] if comp_of[i] != comp_of[j]
    )
    return Components(tuple(comps), tuple(comp_of), cond)


def strongly_connected_components(g: Graph) -> Components:
    return components_of(g.n, g.out_neighbors)


# ---------------------------------------------------------------------------
# unicycles


@dataclass(frozen=True)
class UnicycleDecomposition:
    """Unicycles of the out-degree-one graph induced by a pure profile.

    ``components[l] = (unicycle_vertices, cycle)`` where ``cycle`` lists the
    cycle vertices in traversal order starting from its smallest vertex.
    Components are labelled by their smallest vertex.
    """

    count: int
    components: tuple[tuple[frozenset, tuple[int, ...]], ...]
    label: tuple[int, ...]
    on_cycle: tuple[bool, ...]

    def cycle_of(self, i: int) -> tuple[int, ...]:
        return self.components[self.label[i]][1]

    def unicycle_of(self, i: int) -> frozenset:
        return self.components[self.label[i]][0]


def decompose(s: Sequence[int]) -> UnicycleDecomposition:
    """Unicycle decomposition of a functional graph, without validation."""
    n = len(s)
    state = [0] * n  # 0 unseen, 1 on current walk, 2 done
    root_cycle = [-1] * n  # id of the cycle each vertex drains into
    cycles: list[list[int]] = []
    for start in range(n):
        if state[start]:
            continue
        walk = []
        v = start
        while state[v] == 0:
            state[v] = 1
            walk.append(v)
            v = s[v]
        if state[v] == 1:
            k = walk.index(v)
            cyc = walk[k:]
            cid = len(cycles)
            cycles.append(cyc)
        else:
            cid = root_cycle[v]
        for w in walk:
            state[w] = 2
            root_cycle[w] = cid
    order = sorted(range(len(cycles)), key=lambda c: min(x for x in range(n) if root_cycle[x] == c))
    relabel = {old: new for new, old in enumerate(order)}
    label = tuple(relabel[root_cycle[v]] for v in range(n))
    on_cycle = [False] * n
    comps = []
    for old in order:
        cyc = cycles[old]
        m = cyc.index(min(cyc))
        cyc = cyc[m:] + cyc[:m]
        for v in cyc:
            on_cycle[v] = True
        members = frozenset(v for v in range(n) if root_cycle[v] == old)
        comps.append((members, tuple(cyc)))
    return UnicycleDecomposition(len(comps), tuple(comps), label, tuple(on_cycle))


def unicycle_decomposition(g: Graph, s: Sequence[int]) -> UnicycleDecomposition:
    return decompose(check_profile(g, s))


# ---------------------------------------------------------------------------
# rooted trees


def enumerate_rooted_trees(
    vertices: Iterable[int],
    root: int,
    support: Callable[[int, int], bool] | None = None,
    cap: int = TREE_ENUMERATION_CAP,
) -> list[frozenset]:
    """All ``root``-rooted spanning trees on ``vertices``.

    A tree is a set of edges ``(child, parent)``: the root has no outgoing
    edge, every other vertex exactly one, with ``support(child, parent)``
    true, and there is no cycle. ``support=None`` means the complete graph.
    """
    verts = sorted(set(vertices))
    if root not in verts:
        raise InputError(f"root {root} is not among the vertices", field="root")
    if len(verts) > cap:
        raise CapExceededError(f"{len(verts)} vertices exceed the tree enumeration cap {cap}")
    others = [v for v in verts if v != root]
    choices = {
        v: [p for p in verts if p != v and (support is None or support(v, p))] for v in others
    }
    parent: dict[int, int] = {}
    trees: list[frozenset] = []

    def closes_cycle(v, p):
        while p != root and p in parent:
            if p == v:
                return True
            p = parent[p]
        return p == v

    def extend(k):
        if k == len(others):
            trees.append(frozenset(parent.items()))
            return
        v = others[k]
        for p in choices[v]:
            if closes_cycle(v, p):
                continue
            parent[v] = p
            extend(k + 1)
            del parent[v]

    extend(0)
    return trees
