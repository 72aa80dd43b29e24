"""Deterministic buck-passing game on a digraph.

Each player designates one out-neighbor; the buck eventually circles a cycle
of the induced out-degree-one graph and every cycle member pays the initial
mass of its unicycle divided by the cycle length. All costs are exact
``Fraction`` values so "profitable" is a strict rational comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CapExceededError, ConsistencyError, PreconditionError
from .graph import Graph, InitialMeasure, as_measure, check_profile, decompose
from .instances import complete_graph

NASH_CAP = 10**6

PASSING = "passing"
HOLDING = "holding"


@dataclass(frozen=True)
class Deviation:
    """A unilateral move ``player -> new_target``.

    ``kind`` is D1/D2 in the passing game and C1/C2 in the holding game;
    ``improvement`` is the (positive) exact gain of the deviating player.
    """

    player: int
    new_target: int
    kind: str
    improvement: Fraction

    def to_json(self) -> dict:
        return {
            "player": self.player,
            "new_target": self.new_target,
            "kind": self.kind,
            "improvement": str(self.improvement),
        }


@dataclass(frozen=True)
class Step:
    profile: tuple[int, ...]
    deviation: Deviation


@dataclass
class ImprovementPath:
    start: tuple[int, ...]
    steps: list[Step] = field(default_factory=list)
    final: tuple[int, ...] = ()

    def __len__(self):
        return len(self.steps)

    @property
    def profiles(self) -> list[tuple[int, ...]]:
        return [st.profile for st in self.steps] + [self.final]


def apply(s: Sequence[int], player: int, target: int) -> tuple[int, ...]:
    s = list(s)
    s[player] = target
    return tuple(s)


def _unicycle_masses(dec, mu: InitialMeasure) -> list[Fraction]:
    return [sum((mu[v] for v in members), Fraction(0)) for members, _ in dec.components]


def _costs_from(dec, mu: InitialMeasure) -> list[Fraction]:
    masses = _unicycle_masses(dec, mu)
    out = []
    for i in range(len(dec.label)):
        if dec.on_cycle[i]:
            lbl = dec.label[i]
            out.append(masses[lbl] / len(dec.components[lbl][1]))
        else:
            out.append(Fraction(0))
    return out


def det_cost_vector(g: Graph, mu, s: Sequence[int]) -> list[Fraction]:
    """Exact long-run holding frequency of every player under ``s``."""
    s = check_profile(g, s)
    return _costs_from(decompose(s), as_measure(mu, g.n))


def _potential_from(dec, n: int) -> int:
    return sum(n - len(cyc) for _, cyc in dec.components)


def det_potential(g: Graph, s: Sequence[int]) -> int:
    """Sum over induced cycles of ``n - cycle length``; independent of the measure."""
    s = check_profile(g, s)
    return _potential_from(decompose(s), g.n)


def _steps_to(s, start: int, goal: int, limit: int) -> int | None:
    """Number of ``s``-steps from ``start`` to ``goal`` (None if never within limit)."""
    v = start
    for k in range(limit + 1):
        if v == goal:
            return k
        v = s[v]
    return None


def _upstream_mass(s, i: int, mu: InitialMeasure) -> Fraction:
    """Mass of the vertices whose ``s``-path passes through ``i``."""
    n = len(s)
    total = Fraction(0)
    for v in range(n):
        if _steps_to(s, v, i, n) is not None:
            total += mu[v]
    return total


class _Evaluator:
    """Outcome of every unilateral move from one fixed profile."""

    def __init__(self, s: tuple[int, ...], mu: InitialMeasure):
        self.s = s
        self.mu = mu
        self.dec = decompose(s)
        self.masses = _unicycle_masses(self.dec, mu)
        self.costs = _costs_from(self.dec, mu)

    def value_after(self, i: int, t: int) -> Fraction:
        """Player ``i``'s frequency after switching to ``t``."""
        s, dec, n = self.s, self.dec, len(self.s)
        if t == s[i]:
            return self.costs[i]
        lbl = dec.label[i]
        if dec.on_cycle[i]:
            if t not in dec.components[lbl][0]:
                return Fraction(0)
            # t drains into the old cycle, which still reaches i
            length = _steps_to(s, t, i, n) + 1
            return self.masses[lbl] / length
        k = _steps_to(s, t, i, n)
        if k is None:
            return Fraction(0)
        # i closes a new cycle over its own in-tree
        return _upstream_mass(s, i, self.mu) / (k + 1)

    def deviations(self, g: Graph, player: int, game: str) -> list[Deviation]:
        out = []
        cur = self.costs[player]
        dec = self.dec
        if game == PASSING and cur == 0:
            return out
        for t in g.out_neighbors[player]:
            if t == self.s[player]:
                continue
            new = self.value_after(player, t)
            gain = cur - new if game == PASSING else new - cur
            if gain <= 0:
                continue
            if game == PASSING:
                kind = "D1" if t in dec.unicycle_of(player) else "D2"
            else:
                kind = "C1" if dec.on_cycle[player] else "C2"
            out.append(Deviation(player, t, kind, gain))
        return out


def profitable_deviations(g: Graph, mu, s, player: int, game: str = PASSING) -> list[Deviation]:
    s = check_profile(g, s)
    mu = as_measure(mu, g.n)
    return _Evaluator(s, mu).deviations(g, player, game)


def det_profitable_deviations(g: Graph, mu, s, player: int) -> list[Deviation]:
    """Every strictly cost-reducing move of ``player``, classified D1/D2.

    D1 keeps the player inside its unicycle and lengthens the cycle; D2 leaves
    the unicycle, dissolving the cycle. Zero-cost players get an empty list.
    """
    return profitable_deviations(g, mu, s, player, PASSING)


def all_deviations(g: Graph, mu: InitialMeasure, s: tuple[int, ...], game: str) -> list[Deviation]:
    ev = _Evaluator(s, mu)
    out = []
    for i in range(g.n):
        out.extend(ev.deviations(g, i, game))
    return out


def is_nash(g: Graph, mu, s, game: str = PASSING) -> bool:
    s = check_profile(g, s)
    mu = as_measure(mu, g.n)
    ev = _Evaluator(s, mu)
    return not any(ev.deviations(g, i, game) for i in range(g.n))


def _choose(devs: list[Deviation], rule: str) -> Deviation:
    if rule == "first":
        return devs[0]
    if rule == "max":
        return min(devs, key=lambda d: (-d.improvement, d.player, d.new_target))
    raise PreconditionError(f"unknown rule {rule!r}; expected 'max' or 'first'")


def fip_bound(n: int) -> int:
    """Longest possible improvement path: n^2/4 - 1 (floored)."""
    return n * n // 4 - 1


def run_dynamics(g: Graph, mu, s0, rule: str, cap: int | None, game: str) -> ImprovementPath:
    s = check_profile(g, s0)
    mu = as_measure(mu, g.n)
    if cap is None:
        cap = math.ceil(g.n * g.n / 4)
    path = ImprovementPath(start=s)
    pot = det_potential(g, s)
    while True:
        devs = all_deviations(g, mu, s, game)
        if not devs:
            break
        if len(path) >= cap:
            raise ConsistencyError(
                f"improvement path reached cap {cap} without converging; finite improvement violated"
            )
        d = _choose(devs, rule)
        path.steps.append(Step(s, d))
        s = apply(s, d.player, d.new_target)
        new_pot = det_potential(g, s)
        if (game == PASSING and new_pot >= pot) or (game == HOLDING and new_pot <= pot):
            raise ConsistencyError(f"potential failed to move monotonically: {pot} -> {new_pot}")
        pot = new_pot
    path.final = s
    return path


def improvement_dynamics(g: Graph, mu, s0, rule: str = "max", cap: int | None = None) -> ImprovementPath:
    """Follow profitable deviations until a Nash equilibrium.

    ``rule="max"`` picks the largest improvement (ties: smallest player, then
    smallest target); ``rule="first"`` takes the first profitable move
    scanning players by id and targets in out-neighbor order. ``cap``
    defaults to ceil(n^2/4); hitting it raises ``ConsistencyError``.
    """
    if cap is not None and cap < math.ceil(g.n * g.n / 4):
        raise PreconditionError(f"cap must be at least ceil(n^2/4) = {math.ceil(g.n * g.n / 4)}")
    return run_dynamics(g, mu, s0, rule, cap, PASSING)


def _worstcase_schedule(n: int) -> list[tuple[tuple[int, ...], int, int]]:
    """(profile, player, target) triples of the merge-and-collect schedule on K_n."""
    if n % 2 or n < 4:
        raise PreconditionError(f"worst-case construction needs an even n >= 4, got {n}")
    s = [0] * n
    for a in range(0, n, 2):
        s[a], s[a + 1] = a + 1, a
    moves = []
    merged = [0, 1]  # cycle order: merged[k] -> merged[k+1] -> ... -> merged[0]
    for b0 in range(2, n, 2):
        b1 = b0 + 1
        last = merged[-1]
        # break the accumulated cycle, hanging it as a tail in front of b0
        moves.append((tuple(s), last, b0))
        s[last] = b0
        # b1 (predecessor of the attachment point) pulls in the nearest tail vertex
        for v in reversed(merged):
            moves.append((tuple(s), b1, v))
            s[b1] = v
        merged = [b0, b1] + merged
    moves.append((tuple(s), -1, -1))
    return moves


def worstcase_path_construction(n: int) -> ImprovementPath:
    """Improvement path of length n^2/4 - 1 on K_n under the uniform measure.

    Starts from n/2 disjoint 2-cycles; at each stage the accumulated cycle is
    broken into a tail of the next 2-cycle and then absorbed one vertex at a
    time, each absorption being the smallest profitable lengthening.
    """
    g = complete_graph(n)
    mu = InitialMeasure.uniform(n)
    sched = _worstcase_schedule(n)
    path = ImprovementPath(start=sched[0][0])
    for prof, player, target in sched[:-1]:
        ev = _Evaluator(prof, mu)
        gain = ev.costs[player] - ev.value_after(player, target)
        if gain <= 0 or not g.has_edge(player, target):
            raise ConsistencyError(f"schedule step {player} -> {target} is not a profitable move")
        kind = "D1" if target in ev.dec.unicycle_of(player) else "D2"
        path.steps.append(Step(prof, Deviation(player, target, kind, gain)))
    path.final = sched[-1][0]
    return path


def enumerate_pure_nash(g: Graph, mu, cap: int = NASH_CAP, game: str = PASSING) -> list[tuple[int, ...]]:
    """All pure Nash equilibria, sorted lexicographically."""
    total = g.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the enumeration cap {cap}")
    mu = as_measure(mu, g.n)
    out = []
    for s in g.profiles():
        ev = _Evaluator(s, mu)
        if not any(ev.deviations(g, i, game) for i in range(g.n)):
            out.append(s)
    return sorted(out)


def potential_minimizers(g: Graph, cap: int = NASH_CAP) -> list[tuple[int, ...]]:
    total = g.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the enumeration cap {cap}")
    vals = {s: _potential_from(decompose(s), g.n) for s in g.profiles()}
    best = min(vals.values())
    return sorted(s for s, v in vals.items() if v == best)


def is_prior_free(g: Graph, s) -> bool:
    """Nash under every initial measure.

    Costs are linear in the measure, so it suffices to test the n point
    masses at the vertices.
    """
    s = check_profile(g, s)
    return all(is_nash(g, InitialMeasure.point(g.n, j), s) for j in range(g.n))


def meta_graph(g: Graph, mu, game: str = PASSING, cap: int = NASH_CAP) -> dict:
    """Profile -> list of profiles reachable by one profitable deviation."""
    total = g.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the enumeration cap {cap}")
    mu = as_measure(mu, g.n)
    out = {}
    for s in g.profiles():
        ev = _Evaluator(s, mu)
        succ = []
        for i in range(g.n):
            succ.extend(apply(s, d.player, d.new_target) for d in ev.deviations(g, i, game))
        out[s] = succ
    return out


def longest_improvement_path(g: Graph, mu, game: str = PASSING, cap: int = NASH_CAP) -> int:
    """Length of the longest path in the meta-graph (which must be acyclic)."""
    mg = meta_graph(g, mu, game, cap)
    depth: dict = {}
    color: dict = {}
    for root in mg:
        if root in depth:
            continue
        stack = [(root, iter(mg[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                depth[v] = max((depth[w] + 1 for w in mg[v]), default=0)
                color[v] = 2
                stack.pop()
            elif color.get(nxt) == 1:
                raise ConsistencyError("meta-graph has a cycle; finite improvement violated")
            elif nxt not in color:
                color[nxt] = 1
                stack.append((nxt, iter(mg[nxt])))
    return max(depth.values(), default=0)


def find_prior_sensitive_equilibrium(g: Graph, cap: int = NASH_CAP):
    """Search point-mass measures for an equilibrium that breaks under uniform mass.

    Returns ``(j, s)`` where ``s`` is Nash under the point mass at ``j`` but
    not under the uniform measure, or ``None`` if every such equilibrium is
    prior-free.
    """
    uniform = InitialMeasure.uniform(g.n)
    for j in range(g.n):
        for s in enumerate_pure_nash(g, InitialMeasure.point(g.n, j), cap):
            if not is_nash(g, uniform, s):
                return j, s
    return None
