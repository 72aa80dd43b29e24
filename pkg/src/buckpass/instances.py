"""Named graphs and profiles from the worked examples, plus random generators."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .graph import Graph


def two_cycle() -> Graph:
    return Graph(2, ((1,), (0,)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(tuple(j for j in range(n) if j != i) for i in range(n)))


def bidirectional_cycle(n: int) -> Graph:
    """C_n with both orientations; vertex i links to i-1 and i+1."""
    return Graph(n, tuple(((i - 1) % n, (i + 1) % n) for i in range(n)))


def wheel(n: int) -> Graph:
    """Clockwise ring 0 -> 1 -> ... -> n-2 -> 0 plus hub n-1 linked both ways."""
    hub = n - 1
    ring = n - 1
    out = [((i + 1) % ring, hub) for i in range(ring)]
    out.append(tuple(range(ring)))
    return Graph(n, tuple(out))


def pivot_graph(n: int = 6) -> Graph:
    """Directed (n-2)-cycle and a 2-cycle; vertex 0 also links into the 2-cycle."""
    m = n - 2
    out = [((i + 1) % m,) for i in range(m)]
    out[0] = (1, m)
    out.append((m + 1,))
    out.append((m,))
    return Graph(n, tuple(out))


def bicycle_graph() -> Graph:
    """Two 2-cycles {0,1}, {2,3} and a transient vertex 4 linked to 0 and 2."""
    return Graph(5, ((1,), (0,), (3,), (2,), (0, 2)))


def disjoint_two_cycles_plus_vertex() -> Graph:
    return bicycle_graph()


def five_player_graph() -> Graph:
    """Support of the five-player profile whose potential jumps at p=q=0."""
    return Graph(5, ((1,), (0,), (0, 3), (1, 2), (1,)))


def five_player_profile(p, q):
    """Row-stochastic matrix of that profile (exact if p, q are Fractions)."""
    one = type(p)(1) if isinstance(p, Fraction) else 1.0
    zero = one - one
    pi = [[zero] * 5 for _ in range(5)]
    pi[0][1] = one
    pi[1][0] = one
    pi[2][0] = p
    pi[2][3] = one - p
    pi[3][1] = q
    pi[3][2] = one - q
    pi[4][1] = one
    if isinstance(p, Fraction):
        return np.array(pi, dtype=object)
    return np.array(pi, dtype=float)


def k3_mixed_profile(exact: bool = False):
    """On K_3: vertex 0 splits evenly between 1 and 2, 1 -> 0, 2 -> 1."""
    if exact:
        h, o, z = Fraction(1, 2), Fraction(1), Fraction(0)
        return np.array([[z, h, h], [o, z, z], [z, o, z]], dtype=object)
    return np.array([[0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def wheel_hub_uniform_profile(n: int) -> np.ndarray:
    """Hub spreads uniformly over the ring; ring vertices follow the ring."""
    hub = n - 1
    ring = n - 1
    pi = np.zeros((n, n))
    for i in range(ring):
        pi[i, (i + 1) % ring] = 1.0
    pi[hub, :ring] = 1.0 / ring
    return pi


def lift(s, n: int | None = None, exact: bool = False) -> np.ndarray:
    """0/1 transition matrix of a pure profile."""
    n = len(s) if n is None else n
    if exact:
        pi = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
        for i, j in enumerate(s):
            pi[i, j] = Fraction(1)
        return pi
    pi = np.zeros((n, n))
    pi[np.arange(n), list(s)] = 1.0
    return pi


# ---------------------------------------------------------------------------
# random instances


def random_graph(n: int, rng: np.random.Generator, density: float = 0.5) -> Graph:
    """Random simple digraph with every out-list nonempty."""
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        keep = [j for j in others if rng.random() < density]
        if not keep:
            keep = [others[rng.integers(len(others))]]
        rng.shuffle(keep)
        out.append(tuple(keep))
    return Graph(n, tuple(out))


def random_strongly_connected_graph(n: int, rng: np.random.Generator, density: float = 0.4) -> Graph:
    perm = rng.permutation(n)
    succ = {int(perm[k]): int(perm[(k + 1) % n]) for k in range(n)}
    out = []
    for i in range(n):
        nbrs = [succ[i]] + [j for j in range(n) if j != i and j != succ[i] and rng.random() < density]
        out.append(tuple(nbrs))
    return Graph(n, tuple(out))


def random_row(nbrs, n: int, rng: np.random.Generator, p_pure: float = 0.3) -> np.ndarray:
    """Random distribution over a random nonempty subset of ``nbrs``."""
    row = np.zeros(n)
    nbrs = list(nbrs)
    if len(nbrs) == 1 or rng.random() < p_pure:
        row[nbrs[rng.integers(len(nbrs))]] = 1.0
        return row
    k = int(rng.integers(1, len(nbrs) + 1))
    chosen = rng.choice(nbrs, size=k, replace=False)
    row[chosen] = rng.dirichlet(np.ones(k))
    return row


def random_profile(g: Graph, rng: np.random.Generator, p_pure: float = 0.3) -> np.ndarray:
    return np.array([random_row(nbrs, g.n, rng, p_pure) for nbrs in g.out_neighbors])


def random_irreducible_chain(n: int, rng: np.random.Generator, density: float = 0.4) -> np.ndarray:
    g = random_strongly_connected_graph(n, rng, density)
    pi = np.zeros((n, n))
    for i, nbrs in enumerate(g.out_neighbors):
        pi[i, list(nbrs)] = rng.dirichlet(np.ones(len(nbrs)))
    return pi


def random_full_support_measure(n: int, rng: np.random.Generator) -> list[Fraction]:
    """Fully supported rational measure with small denominators."""
    w = [int(x) for x in rng.integers(1, 10, size=n)]
    total = sum(w)
    return [Fraction(x, total) for x in w]
