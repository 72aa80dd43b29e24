"""Buck-holding: players want the buck, and the PageRank game built on it.

In the holding game the payoff is the same long-run frequency that is a cost
in the passing game. With a fully supported initial measure the deterministic
potential is an ordinal potential that increases along improvement paths.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .chain import stationary_distribution
from .det_game import (
    HOLDING,
    Deviation,
    ImprovementPath,
    NASH_CAP,
    Step,
    _Evaluator,
    _worstcase_schedule,
    is_nash,
    profitable_deviations,
    run_dynamics,
)
from .errors import CapExceededError, ConsistencyError, InputError, PreconditionError
from .graph import Graph, InitialMeasure, _load, as_measure
from .instances import complete_graph, random_full_support_measure
from .stoch_game import stoch_cost_vector

CERTIFY_MEASURES = 5
PR_IMPROVE_TOL = 1e-12


def _require_full_support(mu, n: int) -> InitialMeasure:
    m = as_measure(mu, n)
    if not m.full_support:
        raise PreconditionError("the holding game needs a fully supported initial measure")
    return m


def bhg_profitable_deviations(g: Graph, mu, s, player: int):
    """Moves that strictly raise ``player``'s payoff, classified C1/C2.

    C1: the player is on a cycle and shortens it. C2: the player is
    transient and closes a new cycle through itself.
    """
    mu = _require_full_support(mu, g.n)
    return profitable_deviations(g, mu, s, player, HOLDING)


@dataclass
class BhgResult:
    path: ImprovementPath
    certification: str
    measures_checked: int


def bhg_dynamics(g: Graph, mu, s0, rule: str = "max", cap: int | None = None, seed: int = 0) -> BhgResult:
    """Improvement dynamics of the holding game.

    The endpoint is re-checked as an equilibrium under 5 random fully
    supported measures; failing that raises ``ConsistencyError``.
    """
    mu = _require_full_support(mu, g.n)
    if cap is None:
        cap = g.n * g.n
    path = run_dynamics(g, mu, s0, rule, cap, HOLDING)
    rng = np.random.default_rng(seed)
    for _ in range(CERTIFY_MEASURES):
        m = random_full_support_measure(g.n, rng)
        if not is_nash(g, m, path.final, HOLDING):
            raise ConsistencyError(f"endpoint {path.final} is not an equilibrium under measure {m}")
    return BhgResult(path, "sampled-certified", CERTIFY_MEASURES)


def bhg_worstcase_path_construction(n: int) -> ImprovementPath:
    """Length n^2/4 - 1 holding path on K_n: the passing schedule run backwards."""
    sched = _worstcase_schedule(n)
    profiles = [p for p, _, _ in sched]
    profiles.reverse()
    mu = InitialMeasure.uniform(n)
    path = ImprovementPath(start=profiles[0])
    for cur, nxt in zip(profiles, profiles[1:]):
        diff = [i for i in range(n) if cur[i] != nxt[i]]
        if len(diff) != 1:
            raise ConsistencyError("reversed schedule is not unilateral")
        i = diff[0]
        ev = _Evaluator(cur, mu)
        gain = ev.value_after(i, nxt[i]) - ev.costs[i]
        kind = "C1" if ev.dec.on_cycle[i] else "C2"
        path.steps.append(Step(cur, Deviation(i, nxt[i], kind, gain)))
    path.final = profiles[-1]
    return path


def perfect_matching_profile(n: int) -> tuple[int, ...]:
    if n % 2:
        raise PreconditionError("perfect matching needs an even number of players")
    return tuple(i + 1 if i % 2 == 0 else i - 1 for i in range(n))


# ---------------------------------------------------------------------------
# PageRank game


@dataclass(frozen=True)
class PageRankSpec:
    """Damping ``alpha``, teleport law ``nu`` and admissible link sets per player."""

    alpha: float
    nu: tuple[float, ...]
    link_sets: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        n = len(self.nu)
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}", field="alpha")
        if any(x <= 0 for x in self.nu) or abs(sum(self.nu) - 1) > 1e-12:
            raise InputError("nu must be a fully supported probability vector", field="nu")
        if len(self.link_sets) != n:
            raise InputError(f"{len(self.link_sets)} link-set lists for {n} players", field="link_sets")
        for i, options in enumerate(self.link_sets):
            if not options:
                raise InputError(f"player {i} has no admissible link set", field="link_sets")
            for L in options:
                if not L or i in L or len(set(L)) != len(L) or any(not 0 <= j < n for j in L):
                    raise InputError(f"player {i}: invalid link set {list(L)}", field="link_sets")

    @property
    def n(self) -> int:
        return len(self.nu)

    def num_profiles(self) -> int:
        return math.prod(len(o) for o in self.link_sets)


def parse_pagerank_spec(text) -> PageRankSpec:
    """``{"alpha": f, "nu": [...], "link_sets": [[[j, ...], ...], ...]}``."""
    doc = _load(text)
    if not isinstance(doc, dict):
        raise InputError("PageRank spec must be a JSON object", field="alpha")
    for key in ("alpha", "nu", "link_sets"):
        if key not in doc:
            raise InputError(f"missing field {key!r}", field=key)
    try:
        alpha = float(doc["alpha"])
        nu = tuple(float(x) for x in doc["nu"])
        sets = tuple(tuple(tuple(int(j) for j in L) for L in opts) for opts in doc["link_sets"])
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed PageRank spec: {exc}", field="link_sets") from exc
    return PageRankSpec(alpha, nu, sets)


def pagerank_profile(spec: PageRankSpec, choice) -> np.ndarray:
    """Transition matrix for the chosen link sets (indices or explicit subsets).

    Row i follows a uniform chosen link with probability ``1 - alpha`` and
    teleports according to ``nu`` otherwise, so the diagonal gets
    ``alpha * nu_i``.
    """
    n = spec.n
    if len(choice) != n:
        raise InputError(f"choice has {len(choice)} entries for {n} players", field="choice")
    nu = np.asarray(spec.nu)
    pi = np.tile(spec.alpha * nu, (n, 1))
    for i, c in enumerate(choice):
        L = spec.link_sets[i][c] if isinstance(c, (int, np.integer)) else tuple(c)
        if not L:
            raise InputError(f"player {i} chose an empty link set", field="choice")
        if tuple(L) not in spec.link_sets[i]:
            raise InputError(f"player {i}: link set {list(L)} is not admissible", field="choice")
        pi[i, list(L)] += (1 - spec.alpha) / len(L)
    return pi


def pagerank_graph(spec: PageRankSpec) -> Graph:
    return complete_graph(spec.n)


def pagerank_payoffs(spec: PageRankSpec, choice, mu=None) -> np.ndarray:
    """Long-run frequencies under ``mu`` (equal to the rank vector)."""
    return stoch_cost_vector(pagerank_graph(spec), mu, pagerank_profile(spec, choice), allow_loops=True).costs


def pagerank_rank(spec: PageRankSpec, choice) -> np.ndarray:
    return stationary_distribution(pagerank_profile(spec, choice))


def _best_response(spec, idx, i):
    cur = pagerank_rank(spec, idx)[i]
    best_k, best_v = idx[i], cur
    for k in range(len(spec.link_sets[i])):
        if k == idx[i]:
            continue
        trial = idx[:i] + (k,) + idx[i + 1:]
        v = pagerank_rank(spec, trial)[i]
        if v > best_v + PR_IMPROVE_TOL:
            best_k, best_v = k, v
    return best_k


def is_pagerank_equilibrium(spec: PageRankSpec, idx) -> bool:
    idx = tuple(idx)
    return all(_best_response(spec, idx, i) == idx[i] for i in range(spec.n))


def pagerank_equilibrium(spec: PageRankSpec, cap: int = NASH_CAP, start=None) -> tuple[tuple[int, ...], np.ndarray]:
    """Round-robin best response until nobody can raise their own rank.

    Returns the chosen link-set indices and the stationary rank vector.
    """
    total = spec.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the cap {cap}")
    idx = tuple(start) if start is not None else (0,) * spec.n
    seen = {idx}
    while True:
        changed = False
        for i in range(spec.n):
            k = _best_response(spec, idx, i)
            if k != idx[i]:
                idx = idx[:i] + (k,) + idx[i + 1:]
                changed = True
                if idx in seen:
                    raise ConsistencyError("best-response dynamics revisited a profile")
                seen.add(idx)
        if not changed:
            break
    if not is_pagerank_equilibrium(spec, idx):
        raise ConsistencyError("best-response endpoint failed certification")
    return idx, pagerank_rank(spec, idx)


def enumerate_pagerank_equilibria(spec: PageRankSpec, cap: int = NASH_CAP) -> list[tuple[int, ...]]:
    total = spec.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the cap {cap}")
    grid = itertools.product(*(range(len(o)) for o in spec.link_sets))
    return [idx for idx in grid if is_pagerank_equilibrium(spec, idx)]


def random_pagerank_spec(n: int, rng: np.random.Generator, max_sets: int = 3) -> PageRankSpec:
    alpha = float(rng.uniform(0.05, 0.5))
    nu = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
    nu = nu / nu.sum()
    sets = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        k = int(rng.integers(1, max_sets + 1))
        opts = set()
        while len(opts) < k:
            size = int(rng.integers(1, len(others) + 1))
            opts.add(tuple(sorted(int(x) for x in rng.choice(others, size=size, replace=False))))
            if len(opts) >= 2 ** len(others) - 1:
                break
        sets.append(tuple(sorted(opts)))
    return PageRankSpec(alpha, tuple(float(x) for x in nu), tuple(sets))
