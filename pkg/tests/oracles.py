"""Independent brute-force reference implementations used by the tests."""

from fractions import Fraction


def cycle_from(s, v):
    """The cycle reached from ``v`` by pointer chasing, as a frozenset."""
    seen = []
    while v not in seen:
        seen.append(v)
        v = s[v]
    return frozenset(seen[seen.index(v):])


def det_costs(s, mu):
    n = len(s)
    cycles = [cycle_from(s, v) for v in range(n)]
    out = []
    for i in range(n):
        mass = sum((Fraction(mu[v]) for v in range(n) if i in cycles[v]), Fraction(0))
        on = any(i in c for c in cycles)
        out.append(mass / len(cycles[i]) if on else Fraction(0))
    return out


def det_potential(s):
    n = len(s)
    cycles = {cycle_from(s, v) for v in range(n)}
    return sum(n - len(c) for c in cycles)


def profitable_moves(g, s, mu, game="passing"):
    """All (player, target, gain) with strictly positive gain."""
    base = det_costs(s, mu)
    out = []
    for i in range(g.n):
        for t in g.out_neighbors[i]:
            if t == s[i]:
                continue
            s2 = list(s)
            s2[i] = t
            new = det_costs(s2, mu)[i]
            gain = base[i] - new if game == "passing" else new - base[i]
            if gain > 0:
                out.append((i, t, gain))
    return out
