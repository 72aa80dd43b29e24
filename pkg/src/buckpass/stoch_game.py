"""Stochastic buck-passing: costs, potential, dynamics over finite strategy sets.

A stochastic profile is a row-stochastic matrix ``pi`` supported on the
graph. Each player's cost is the long-run share of time holding the buck,
``c_i = sum_l mu^l rho^l(i)``, where ``mu^l`` is the mass absorbed by the
recurrent class ``l`` and ``rho^l`` its stationary law. The potential is
``sum_l (n - Omega^l)`` with ``Omega^l`` the total tree volume of the class
closure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import (
    RecurrentStructure,
    class_stationary,
    recurrent_classes,
    recurrent_structure,
    stochastic_profile,
)
from .det_game import PASSING, HOLDING, is_nash
from .errors import CapExceededError, ConsistencyError, InputError, PreconditionError
from .graph import Graph, _load, as_measure, check_profile
from .instances import lift, random_profile
from .trees import tree_volumes

PROFIT_TOL = 1e-8
PSI_TOL = 1e-10
NE_TOL = 1e-9
DEFAULT_GRID_STEP = Fraction(1, 8)
DEFAULT_EPSILON = 1e-3
SCAN_CAP = 10**6


@dataclass(frozen=True)
class GameAnalysis:
    costs: np.ndarray
    potential: float
    structure: RecurrentStructure
    per_class_rho: list[np.ndarray]


def _grid_steps(step) -> int:
    m = round(1 / float(step))
    if m < 1 or abs(m * float(step) - 1) > 1e-12:
        raise InputError(f"grid step {step!r} must be 1/m for a positive integer m", field="grid_step")
    return m


def simplex_grid(nbrs, n: int, step) -> list[np.ndarray]:
    """Rows on the out-neighbor simplex with coordinates in multiples of ``step``."""
    m = _grid_steps(step)
    nbrs = list(nbrs)
    d = len(nbrs)
    rows = []
    # stars and bars: positions of d-1 bars among m + d - 1 slots
    for bars in itertools.combinations(range(m + d - 1), d - 1):
        parts = np.diff((-1,) + bars + (m + d - 1,)) - 1
        row = np.zeros(n)
        row[nbrs] = parts / m
        rows.append(row)
    return rows


def deterministic_rows(nbrs, n: int) -> list[np.ndarray]:
    out = []
    for j in nbrs:
        row = np.zeros(n)
        row[j] = 1.0
        out.append(row)
    return out


@dataclass(frozen=True)
class FiniteStrategySet:
    """Admissible rows per player; ``rows[i][k]`` is the k-th option of player i."""

    rows: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        if any(len(r) == 0 for r in self.rows):
            raise InputError("every player needs at least one admissible row", field="players")

    @property
    def n(self) -> int:
        return len(self.rows)

    def size(self) -> int:
        total = 1
        for r in self.rows:
            total *= len(r)
        return total

    def profile(self, idx) -> np.ndarray:
        return np.array([self.rows[i][k] for i, k in enumerate(idx)])

    def indices(self):
        return itertools.product(*(range(len(r)) for r in self.rows))

    @classmethod
    def deterministic(cls, g: Graph) -> "FiniteStrategySet":
        return cls(tuple(tuple(deterministic_rows(nb, g.n)) for nb in g.out_neighbors))

    @classmethod
    def from_grid(cls, g: Graph, step) -> "FiniteStrategySet":
        return cls(tuple(tuple(simplex_grid(nb, g.n, step)) for nb in g.out_neighbors))

    @classmethod
    def from_rows(cls, g: Graph, rows_by_player: dict) -> "FiniteStrategySet":
        """Explicit rows; players not listed keep their deterministic rows."""
        out = []
        for i, nb in enumerate(g.out_neighbors):
            if i in rows_by_player:
                rows = [np.asarray(r, dtype=float) for r in rows_by_player[i]]
                for r in rows:
                    _check_row(g, i, r)
                out.append(tuple(rows))
            else:
                out.append(tuple(deterministic_rows(nb, g.n)))
        return cls(tuple(out))


def _check_row(g: Graph, i: int, row: np.ndarray):
    if row.shape != (g.n,):
        raise InputError(f"player {i}: row has length {row.shape}, expected {g.n}", field="rows")
    if np.any(row < 0) or abs(row.sum() - 1) > 1e-12:
        raise InputError(f"player {i}: row is not a probability vector", field="rows")
    for j in np.flatnonzero(row > 0):
        if not g.has_edge(i, int(j)):
            raise InputError(f"player {i}: mass on non-edge ({i}, {int(j)})", field="rows")


def parse_strategy_set(g: Graph, text) -> FiniteStrategySet:
    """``{"players": [{"i": int, "rows": [[...]]}]}`` or ``{"grid_step": f}``."""
    doc = _load(text)
    if not isinstance(doc, dict):
        raise InputError("strategy set must be a JSON object", field="players")
    if "grid_step" in doc:
        return FiniteStrategySet.from_grid(g, doc["grid_step"])
    players = doc.get("players")
    if not isinstance(players, list):
        raise InputError("strategy set needs 'players' or 'grid_step'", field="players")
    by = {}
    for p in players:
        if not isinstance(p, dict) or "i" not in p or "rows" not in p:
            raise InputError("each player entry needs 'i' and 'rows'", field="players")
        i = p["i"]
        if not isinstance(i, int) or not 0 <= i < g.n or i in by:
            raise InputError(f"player index {i!r} is out of range or repeated", field="players")
        by[i] = [[float(x) for x in r] for r in p["rows"]]
    return FiniteStrategySet.from_rows(g, by)


# ---------------------------------------------------------------------------
# costs and potential


def _mu_array(mu, n: int) -> np.ndarray:
    return np.array(as_measure(mu, n).as_floats())


def _analyze(pi: np.ndarray, mu_arr: np.ndarray) -> tuple[np.ndarray, RecurrentStructure, list]:
    st = recurrent_structure(pi, mu_arr.tolist())
    rhos = [class_stationary(pi, c) for c in st.classes]
    costs = np.zeros(len(pi))
    for m, rho in zip(st.class_mass, rhos):
        costs += m * rho
    return costs, st, rhos


def _potential(pi: np.ndarray, st: RecurrentStructure) -> float:
    n = len(pi)
    return float(sum(n - tree_volumes(pi, T, "determinant").omega_V for T in st.closures))


def stoch_cost_vector(g: Graph, mu, pi, allow_loops: bool = False) -> GameAnalysis:
    """Long-run holding frequencies, potential and class-wise stationary laws."""
    pi = stochastic_profile(g, pi, allow_loops=allow_loops)
    costs, st, rhos = _analyze(pi, _mu_array(mu, g.n))
    return GameAnalysis(costs, _potential(pi, st), st, rhos)


def stoch_potential(g: Graph, pi, allow_loops: bool = False) -> float:
    """``sum_l (n - Omega^l)`` over the class closures; independent of the measure."""
    pi = stochastic_profile(g, pi, allow_loops=allow_loops)
    return _potential(pi, recurrent_structure(pi))


def _potential_raw(pi: np.ndarray) -> float:
    return _potential(pi, recurrent_structure(pi))


def _player_cost(pi: np.ndarray, mu_arr: np.ndarray, i: int) -> float:
    return float(_analyze(pi, mu_arr)[0][i])


def _with_row(pi: np.ndarray, i: int, row: np.ndarray) -> np.ndarray:
    out = pi.copy()
    out[i] = row
    return out


def candidate_rows(g: Graph, i: int, grid_step=DEFAULT_GRID_STEP) -> list[np.ndarray]:
    """Deterministic rows of player ``i`` followed by the simplex grid."""
    rows = deterministic_rows(g.out_neighbors[i], g.n)
    if grid_step is not None:
        rows += simplex_grid(g.out_neighbors[i], g.n, grid_step)
    return rows


def _gain(old: float, new: float, game: str) -> float:
    return old - new if game == PASSING else new - old


def best_deviation(g: Graph, mu_arr, pi, i: int, rows, game: str = PASSING):
    """(gain, row) of the best alternative among ``rows``."""
    base = _player_cost(pi, mu_arr, i)
    best_gain, best_row = -np.inf, None
    for row in rows:
        gain = _gain(base, _player_cost(_with_row(pi, i, row), mu_arr, i), game)
        if gain > best_gain:
            best_gain, best_row = gain, row
    return best_gain, best_row


def is_stochastic_ne(g: Graph, mu, pi, grid_step=DEFAULT_GRID_STEP, game: str = PASSING, tol: float = NE_TOL) -> bool:
    """No player gains more than ``tol`` by any deterministic or grid row."""
    pi = stochastic_profile(g, pi)
    mu_arr = _mu_array(mu, g.n)
    for i in range(g.n):
        gain, _ = best_deviation(g, mu_arr, pi, i, candidate_rows(g, i, grid_step), game)
        if gain > tol:
            return False
    return True


def verify_pure_in_stochastic(g: Graph, mu, s, grid_step=DEFAULT_GRID_STEP) -> bool:
    """A pure equilibrium stays an equilibrium against randomized deviations."""
    s = check_profile(g, s)
    if not is_nash(g, mu, s):
        raise PreconditionError(f"profile {s} is not a pure Nash equilibrium")
    return is_stochastic_ne(g, mu, lift(s, g.n), grid_step)


# ---------------------------------------------------------------------------
# generalized ordinal potential check


@dataclass
class GopReport:
    game: str
    trials: int
    deviations: int = 0
    violations: list = field(default_factory=list)
    non_ordinal: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "game": self.game,
            "trials": self.trials,
            "deviations": self.deviations,
            "violations": self.violations,
            "non_ordinal": len(self.non_ordinal),
        }


def check_gop(
    g: Graph,
    mu,
    trials: int,
    seed: int,
    game: str = PASSING,
    grid_step=DEFAULT_GRID_STEP,
    rows_per_player: int | None = None,
) -> GopReport:
    """Sample profiles and confirm every profitable deviation moves the potential.

    For each trial a random profile is drawn and every player's candidate
    rows (deterministic rows plus the grid, optionally subsampled to
    ``rows_per_player``) are tried. A deviation with gain above 1e-8 must
    move the potential by more than 1e-10 in the right direction (down for
    passing, up for holding). Potential moves without any cost change are
    recorded as non-ordinal events.
    """
    if trials < 1:
        raise PreconditionError("trials must be at least 1")
    if game == HOLDING and not as_measure(mu, g.n).full_support:
        raise PreconditionError("the holding game needs a fully supported measure")
    rng = np.random.default_rng(seed)
    mu_arr = _mu_array(mu, g.n)
    sign = 1.0 if game == PASSING else -1.0
    rep = GopReport(game, trials)
    for _ in range(trials):
        pi = random_profile(g, rng)
        costs, st, _ = _analyze(pi, mu_arr)
        psi = _potential(pi, st)
        for i in range(g.n):
            rows = candidate_rows(g, i, grid_step)
            if rows_per_player is not None and len(rows) > rows_per_player:
                pick = rng.choice(len(rows), size=rows_per_player, replace=False)
                rows = [rows[k] for k in sorted(pick)]
            for row in rows:
                new_pi = _with_row(pi, i, row)
                new_costs, new_st, _ = _analyze(new_pi, mu_arr)
                gain = _gain(costs[i], new_costs[i], game)
                new_psi = _potential(new_pi, new_st)
                drop = sign * (psi - new_psi)
                if gain > PROFIT_TOL:
                    rep.deviations += 1
                    if drop <= PSI_TOL:
                        rep.violations.append(
                            {"pi": pi.tolist(), "player": i, "row": row.tolist(), "gain": gain, "psi_change": -sign * drop}
                        )
                elif abs(gain) <= PROFIT_TOL and abs(drop) > PSI_TOL:
                    rep.non_ordinal.append((i, row.tolist()))
    return rep


# ---------------------------------------------------------------------------
# dynamics on finite strategy sets


@dataclass
class EpsilonPath:
    indices: list[tuple[int, ...]]
    gains: list[float]
    final: np.ndarray

    def __len__(self):
        return len(self.gains)


def _locate(xi: FiniteStrategySet, start) -> tuple[int, ...]:
    """Accept an index tuple or a matrix whose rows all lie in ``xi``."""
    a = np.asarray(start)
    if a.ndim == 1:
        idx = tuple(int(k) for k in a)
        if len(idx) != xi.n or any(not 0 <= k < len(xi.rows[i]) for i, k in enumerate(idx)):
            raise PreconditionError("start index is out of range")
        return idx
    out = []
    for i in range(xi.n):
        hits = [k for k, r in enumerate(xi.rows[i]) if np.allclose(r, a[i], atol=1e-12)]
        if not hits:
            raise PreconditionError(f"row {i} of the start profile is not in the strategy set")
        out.append(hits[0])
    return tuple(out)


def epsilon_dynamics(
    g: Graph, mu, xi: FiniteStrategySet, epsilon: float = DEFAULT_EPSILON, start=None, max_steps: int = 100_000
) -> EpsilonPath:
    """Best-improvement moves larger than ``epsilon`` until none remains.

    Each step applies the single largest improvement (ties: smallest player,
    then smallest row index). The final profile is re-checked against every
    row of ``xi``.
    """
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    mu_arr = _mu_array(mu, g.n)
    idx = _locate(xi, start) if start is not None else tuple(0 for _ in range(xi.n))
    path = EpsilonPath([idx], [], xi.profile(idx))
    while True:
        pi = xi.profile(idx)
        base = _analyze(pi, mu_arr)[0]
        best = (epsilon, None, None)
        for i in range(g.n):
            for k, row in enumerate(xi.rows[i]):
                if k == idx[i]:
                    continue
                gain = base[i] - _player_cost(_with_row(pi, i, row), mu_arr, i)
                if gain > best[0]:
                    best = (gain, i, k)
        if best[1] is None:
            break
        if len(path) >= max_steps:
            raise ConsistencyError(f"epsilon dynamics did not stop within {max_steps} steps")
        gain, i, k = best
        idx = idx[:i] + (k,) + idx[i + 1:]
        path.indices.append(idx)
        path.gains.append(gain)
    path.final = xi.profile(idx)
    if not _is_eps_ne(g, mu_arr, xi, idx, epsilon):
        raise ConsistencyError("epsilon dynamics endpoint failed its own deviation check")
    return path


def _is_eps_ne(g, mu_arr, xi, idx, epsilon) -> bool:
    pi = xi.profile(idx)
    base = _analyze(pi, mu_arr)[0]
    for i in range(g.n):
        for row in xi.rows[i]:
            if base[i] - _player_cost(_with_row(pi, i, row), mu_arr, i) > epsilon:
                return False
    return True


def is_xi_ne(g: Graph, mu, xi: FiniteStrategySet, idx, epsilon: float = NE_TOL) -> bool:
    return _is_eps_ne(g, _mu_array(mu, g.n), xi, tuple(idx), epsilon)


def min_class_count(xi: FiniteStrategySet, cap: int = SCAN_CAP) -> tuple[int, tuple[int, ...]]:
    """Smallest number of recurrent classes over ``xi`` and a witness."""
    if xi.size() > cap:
        raise CapExceededError(f"{xi.size()} profiles exceed the scan cap {cap}")
    best = None
    for idx in xi.indices():
        r = len(recurrent_classes(xi.profile(idx)))
        if best is None or r < best[0]:
            best = (r, idx)
    return best


def potential_descent(g: Graph, xi: FiniteStrategySet, start, cap: int = SCAN_CAP) -> tuple[int, ...]:
    """Move recurrent players to the row minimizing the potential until stuck.

    ``start`` must have the fewest recurrent classes over ``xi``. Each step
    takes the argmin of the potential over all unilateral moves of players
    currently on a recurrent class (ties: smallest player, then row index).
    Class count and closures are asserted unchanged along the run.
    """
    idx = _locate(xi, start)
    r0, _ = min_class_count(xi, cap)
    pi = xi.profile(idx)
    st = recurrent_structure(pi)
    if st.r != r0:
        raise PreconditionError(f"start has {st.r} recurrent classes; the minimum over the set is {r0}")
    closures = sorted(map(sorted, st.closures))
    psi = _potential(pi, st)
    for _ in range(cap):
        best = (psi - PSI_TOL, None, None, None)
        rec = sorted(set().union(*st.classes))
        for i in rec:
            for k, row in enumerate(xi.rows[i]):
                if k == idx[i]:
                    continue
                new_pi = _with_row(pi, i, row)
                new_st = recurrent_structure(new_pi)
                val = _potential(new_pi, new_st)
                if val < best[0]:
                    best = (val, i, k, new_st)
        if best[1] is None:
            return idx
        psi, i, k, st = best
        idx = idx[:i] + (k,) + idx[i + 1:]
        pi = xi.profile(idx)
        if st.r != r0 or sorted(map(sorted, st.closures)) != closures:
            raise ConsistencyError("potential descent changed the class structure")
    raise ConsistencyError("potential descent did not terminate")
