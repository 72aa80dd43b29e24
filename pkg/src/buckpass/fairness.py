"""Rawlsian social cost, price of anarchy and price of stability.

The social cost of a profile is the largest individual cost. Deterministic
reports are exhaustive over pure profiles and exact in rationals; reports over
a parameterized stochastic family are grid searches, labeled as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import stochastic_profile
from .det_game import NASH_CAP, _Evaluator, enumerate_pure_nash
from .errors import CapExceededError, InputError
from .graph import Graph, _load, as_measure, components_of, decompose
from .stoch_game import DEFAULT_GRID_STEP, _analyze, _mu_array, is_stochastic_ne

SC_TOL = 1e-9
CYCLE_SEARCH_CAP = 12


def social_cost(c) -> Fraction | float:
    """Largest entry of the cost vector."""
    return max(c)


def _ratio(a, b):
    if a is None or b is None:
        return None
    return a / b


@dataclass
class FairnessReport:
    """Social-cost extremes and the derived efficiency ratios.

    Deterministic fields (``*_det``) are exact; ``*_param`` fields come from a
    grid search and carry ``certification == "grid-certified"``.
    """

    min_sc_det: Fraction | None = None
    worst_ne_sc: Fraction | None = None
    best_ne_sc: Fraction | None = None
    poa: Fraction | None = None
    pos: Fraction | None = None
    min_sc_param: float | None = None
    worst_ne_sc_param: float | None = None
    best_ne_sc_param: float | None = None
    poa_param: float | None = None
    pos_param: float | None = None
    grid_step: float | None = None
    certification: str = "exact"
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else x

        return {
            "min_sc_det": enc(self.min_sc_det),
            "worst_ne_sc": enc(self.worst_ne_sc),
            "best_ne_sc": enc(self.best_ne_sc),
            "poa": enc(self.poa),
            "pos": enc(self.pos),
            "min_sc_param": self.min_sc_param,
            "worst_ne_sc_param": self.worst_ne_sc_param,
            "best_ne_sc_param": self.best_ne_sc_param,
            "poa_param": self.poa_param,
            "pos_param": self.pos_param,
            "grid_step": self.grid_step,
            "certification": self.certification,
            "witnesses": {k: list(v) if isinstance(v, tuple) else v for k, v in self.witnesses.items()},
        }


def fairness_report_det(g: Graph, mu=None, cap: int = NASH_CAP) -> FairnessReport:
    """Exhaustive social-cost report over pure profiles."""
    total = g.num_profiles()
    if total > cap:
        raise CapExceededError(f"{total} profiles exceed the enumeration cap {cap}")
    mu = as_measure(mu, g.n)
    best = None
    for s in g.profiles():
        sc = social_cost(_Evaluator(s, mu).costs)
        if best is None or sc < best[0]:
            best = (sc, s)
    rep = FairnessReport(min_sc_det=best[0])
    rep.witnesses["min_sc_det"] = best[1]
    ne = [(social_cost(_Evaluator(s, mu).costs), s) for s in enumerate_pure_nash(g, mu, cap)]
    if ne:
        worst = max(ne, key=lambda t: (t[0], [-v for v in t[1]]))
        bestne = min(ne)
        rep.worst_ne_sc, rep.best_ne_sc = worst[0], bestne[0]
        rep.witnesses["worst_ne"] = worst[1]
        rep.witnesses["best_ne"] = bestne[1]
        rep.poa = _ratio(rep.worst_ne_sc, rep.min_sc_det)
        rep.pos = _ratio(rep.best_ne_sc, rep.min_sc_det)
    return rep


# ---------------------------------------------------------------------------
# parameterized families


@dataclass(frozen=True)
class ParamFamily:
    """Profiles whose randomizing rows are affine in a few parameters.

    ``rows[i][j]`` maps a parameter name (or ``"const"``) to its coefficient
    in ``pi[i, j]``. Players absent from ``rows`` must have out-degree one.
    """

    params: tuple[str, ...]
    rows: dict
    grid_step: Fraction = Fraction(1, 16)

    def profile(self, g: Graph, values) -> np.ndarray:
        vals = dict(zip(self.params, (float(v) for v in values)))
        vals["const"] = 1.0
        pi = np.zeros((g.n, g.n))
        for i, nbrs in enumerate(g.out_neighbors):
            if i in self.rows:
                for j, coefs in self.rows[i].items():
                    pi[i, j] = sum(float(c) * vals[name] for name, c in coefs.items())
            else:
                pi[i, nbrs[0]] = 1.0
        pi[np.abs(pi) < 1e-15] = 0.0
        return pi

    def validate(self, g: Graph):
        for i, nbrs in enumerate(g.out_neighbors):
            if i not in self.rows and len(nbrs) != 1:
                raise InputError(f"player {i} has {len(nbrs)} out-neighbors but no family row", field="rows")
        for i, row in self.rows.items():
            if not 0 <= i < g.n:
                raise InputError(f"family row for unknown player {i}", field="rows")
            for coefs in row.values():
                for name in coefs:
                    if name != "const" and name not in self.params:
                        raise InputError(f"unknown parameter {name!r}", field="params")
        for vals in self.grid(self.grid_step):
            try:
                stochastic_profile(g, self.profile(g, vals))
            except InputError as exc:
                raise InputError(f"family is invalid at {dict(zip(self.params, vals))}: {exc}", field="rows") from exc

    def grid(self, step) -> list[tuple[Fraction, ...]]:
        m = round(1 / Fraction(step))
        axis = [Fraction(k, m) for k in range(m + 1)]
        return list(itertools.product(axis, repeat=len(self.params)))


def parse_family(text) -> ParamFamily:
    """``{"params": [...], "grid_step": f, "rows": [{"i": int, "probs": {target: {name: coef}}}]}``."""
    doc = _load(text)
    if not isinstance(doc, dict):
        raise InputError("family must be a JSON object", field="params")
    params = doc.get("params", [])
    if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
        raise InputError("'params' must be a list of names", field="params")
    rows = {}
    for r in doc.get("rows", []):
        if not isinstance(r, dict) or "i" not in r or not isinstance(r.get("probs"), dict):
            raise InputError("each family row needs 'i' and an object 'probs'", field="rows")
        rows[int(r["i"])] = {int(j): {k: Fraction(v) for k, v in c.items()} for j, c in r["probs"].items()}
    step = Fraction(doc.get("grid_step", Fraction(1, 16)))
    return ParamFamily(tuple(params), rows, step)


def bicycle_family() -> ParamFamily:
    """Transient vertex 4 sends the buck to 0 with probability p, else to 2."""
    return ParamFamily(("p",), {4: {0: {"p": 1}, 2: {"const": 1, "p": -1}}})


def _family_sc(g, fam, mu_arr, vals) -> float:
    return float(social_cost(_analyze(fam.profile(g, vals), mu_arr)[0]))


def _refine_min(g, fam, mu_arr, best_vals, step, rounds):
    """Local search on successively halved grids around the incumbent."""
    best = (_family_sc(g, fam, mu_arr, best_vals), tuple(best_vals))
    step = Fraction(step)
    for _ in range(rounds):
        step /= 2
        center = best[1]
        for delta in itertools.product((-1, 0, 1), repeat=len(center)):
            cand = tuple(min(Fraction(1), max(Fraction(0), c + d * step)) for c, d in zip(center, delta))
            sc = _family_sc(g, fam, mu_arr, cand)
            if sc < best[0] - SC_TOL:
                best = (sc, cand)
    return best, step


def fairness_report_param(
    g: Graph,
    mu,
    family: ParamFamily,
    refine_rounds: int = 0,
    deviation_step=DEFAULT_GRID_STEP,
    det_cap: int = NASH_CAP,
) -> FairnessReport:
    """Grid search of a parameterized family, plus the exact pure report.

    Equilibria within the family are certified by checking every player
    against deterministic rows and a simplex grid of step ``deviation_step``.
    """
    family.validate(g)
    mu_arr = _mu_array(mu, g.n)
    points = family.grid(family.grid_step)
    scored = []
    for vals in points:
        pi = family.profile(g, vals)
        scored.append((float(social_cost(_analyze(pi, mu_arr)[0])), vals, pi))
    best = min(scored, key=lambda t: t[0])
    (min_sc, min_vals), step = _refine_min(g, family, mu_arr, best[1], family.grid_step, refine_rounds)
    ne = [(sc, vals) for sc, vals, pi in scored if is_stochastic_ne(g, mu, pi, deviation_step)]

    rep = fairness_report_det(g, mu, det_cap) if g.num_profiles() <= det_cap else FairnessReport()
    rep.certification = "grid-certified"
    rep.grid_step = float(step)
    rep.min_sc_param = min_sc
    rep.witnesses["min_sc_param"] = tuple(str(v) for v in min_vals)
    if ne:
        worst = max(ne, key=lambda t: t[0])
        bestne = min(ne, key=lambda t: t[0])
        rep.worst_ne_sc_param, rep.best_ne_sc_param = worst[0], bestne[0]
        rep.witnesses["worst_ne_param"] = tuple(str(v) for v in worst[1])
        rep.witnesses["best_ne_param"] = tuple(str(v) for v in bestne[1])
        rep.poa_param = worst[0] / min_sc
        rep.pos_param = bestne[0] / min_sc
    return rep


# ---------------------------------------------------------------------------
# longest cycles per strongly connected component


def longest_cycle(g: Graph, vertices, cap: int = CYCLE_SEARCH_CAP) -> tuple[int, ...]:
    """A longest simple cycle inside ``vertices`` by exhaustive DFS."""
    verts = sorted(vertices)
    if len(verts) > cap:
        raise CapExceededError(f"component of size {len(verts)} exceeds the cycle search cap {cap}")
    vs = set(verts)
    best: list[int] = []

    def dfs(start, path, seen):
        nonlocal best
        for w in g.out_neighbors[path[-1]]:
            if w == start and len(path) > len(best):
                best = list(path)
            elif w in vs and w > start and w not in seen:
                seen.add(w)
                path.append(w)
                dfs(start, path, seen)
                path.pop()
                seen.discard(w)

    for v in verts:
        if len(best) == len(verts):
            break
        dfs(v, [v], {v})
    return tuple(best)


def longest_cycle_profile(g: Graph, cap: int = CYCLE_SEARCH_CAP) -> tuple[int, ...]:
    """Each strongly connected component runs one of its longest cycles.

    Off-cycle vertices route along a shortest path into that cycle, staying
    inside their component.
    """
    comps = components_of(g.n, g.out_neighbors)
    s = [-1] * g.n
    for comp in comps.components:
        if len(comp) == 1:
            v = next(iter(comp))
            s[v] = g.out_neighbors[v][0]
            continue
        cyc = longest_cycle(g, comp, cap)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            s[a] = b
        # reverse BFS from the cycle inside the component
        frontier = list(cyc)
        reached = set(cyc)
        while frontier:
            nxt = []
            for v in frontier:
                for u in sorted(comp):
                    if u not in reached and g.has_edge(u, v):
                        s[u] = v
                        reached.add(u)
                        nxt.append(u)
            frontier = nxt
    return tuple(s)


def is_disjoint_union_of_sccs(g: Graph) -> bool:
    return not components_of(g.n, g.out_neighbors).condensation_edges


def cycle_lengths(s) -> list[int]:
    return [len(c) for _, c in decompose(s).components]
