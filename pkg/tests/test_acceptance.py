"""Acceptance suite: one test per criterion, summarized as PASS/FAIL lines.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
lists a verdict and duration per criterion.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from buckpass.chain import expected_hitting_times, recurrent_structure, stationary_distribution
from buckpass.det_game import (
    HOLDING,
    PASSING,
    det_cost_vector,
    det_potential,
    enumerate_pure_nash,
    find_prior_sensitive_equilibrium,
    is_nash,
    is_prior_free,
    longest_improvement_path,
    potential_minimizers,
    profitable_deviations,
    worstcase_path_construction,
)
from buckpass.fairness import bicycle_family, fairness_report_det, fairness_report_param
from buckpass.graph import Graph, InitialMeasure
from buckpass.holding import (
    enumerate_pagerank_equilibria,
    pagerank_equilibrium,
    pagerank_payoffs,
    pagerank_profile,
    random_pagerank_spec,
)
from buckpass.instances import (
    bicycle_graph,
    bidirectional_cycle,
    complete_graph,
    five_player_graph,
    five_player_profile,
    k3_mixed_profile,
    pivot_graph,
    random_full_support_measure,
    random_graph,
    random_irreducible_chain,
    wheel,
    wheel_hub_uniform_profile,
)
from buckpass.simulator import SimConfig, mixed_extension_check, simulate
from buckpass.stoch_game import check_gop, is_stochastic_ne, stoch_cost_vector, stoch_potential, verify_pure_in_stochastic
from buckpass.trees import expected_cycle_length, omega_spectral, stationary_via_trees, tree_volumes

from . import oracles

F = Fraction
SEED = 20240601


def _random_measure(n, rng):
    """Random rational measure; about a third of the draws have zeros."""
    w = [int(x) for x in rng.integers(0 if rng.random() < 0.35 else 1, 10, size=n)]
    if sum(w) == 0:
        w[int(rng.integers(n))] = 1
    return [F(x, sum(w)) for x in w]


def _random_pure(g, rng):
    return tuple(int(rng.choice(nbrs)) for nbrs in g.out_neighbors)


def test_criterion_01_k3_mixed_profile():
    t0 = time.perf_counter()
    g = complete_graph(3)
    pi = k3_mixed_profile()
    costs = stoch_cost_vector(g, None, pi).costs
    assert np.abs(costs - [0.4, 0.4, 0.2]).max() <= 1e-12
    trees = stationary_via_trees(pi, {0, 1, 2})
    spectral = omega_spectral(pi, {0, 1, 2})
    omega_v = tree_volumes(pi, {0, 1, 2}).omega_V
    assert np.abs(trees - costs).max() <= 1e-9
    assert abs(spectral - omega_v) <= 1e-9 * omega_v
    rep = mixed_extension_check(g)
    assert rep.mixed_cost == F(5, 12)
    assert rep.stochastic_cost == F(2, 5)
    assert time.perf_counter() - t0 < 1.0


def test_criterion_02_wheel():
    t0 = time.perf_counter()
    n = 7
    g = wheel(n)
    eqs = enumerate_pure_nash(g, None)
    assert len(eqs) == n - 1
    for s in eqs:
        assert det_cost_vector(g, None, s) == [F(1, n)] * n
    pi = wheel_hub_uniform_profile(n)
    costs = stoch_cost_vector(g, None, pi).costs
    np.testing.assert_allclose(costs, [1 / 6] * 6 + [0.0], atol=1e-12)
    assert is_stochastic_ne(g, None, pi, F(1, 8))
    hub = n - 1
    times = []
    for k in range(17):
        p = k / 16
        dev = pi.copy()
        dev[0] = 0.0
        dev[0, 1], dev[0, hub] = p, 1 - p
        e = expected_hitting_times(dev, 0)[0]
        assert e == pytest.approx(1 + 5 * p + 3.5 * (1 - p), abs=1e-9)
        times.append(e)
    assert all(a < b for a, b in zip(times, times[1:]))
    assert time.perf_counter() - t0 < 5.0


def test_criterion_03_pivot():
    rep = fairness_report_det(pivot_graph(6), None)
    assert rep.min_sc_det == F(1, 6)
    assert rep.worst_ne_sc == rep.best_ne_sc == F(1, 2)
    assert rep.pos == rep.poa == 3


def test_criterion_04_bicycle():
    g = bicycle_graph()
    rep = fairness_report_param(g, InitialMeasure.point(5, 4), bicycle_family())
    assert F(rep.grid_step) <= F(1, 16)
    assert abs(rep.min_sc_param - 0.25) <= 1e-12
    assert rep.witnesses["min_sc_param"] == ("1/2",)
    assert rep.min_sc_det == F(1, 2)
    assert rep.poa == 1
    assert abs(rep.poa_param - 2.0) <= 1e-12


def test_criterion_05_worst_case_path():
    t0 = time.perf_counter()
    for n in (4, 6, 8):
        path = worstcase_path_construction(n)
        assert len(path) == n * n // 4 - 1
        mu = InitialMeasure.uniform(n)
        g = complete_graph(n)
        for st, nxt in zip(path.steps, path.profiles[1:]):
            d = st.deviation
            moved = list(st.profile)
            moved[d.player] = d.new_target
            assert tuple(moved) == nxt
            assert g.has_edge(d.player, d.new_target)
            assert oracles.det_costs(nxt, mu)[d.player] < oracles.det_costs(st.profile, mu)[d.player]
    assert longest_improvement_path(complete_graph(4), None) == 3
    assert time.perf_counter() - t0 < 10.0


def _cofactor_sum(L):
    k = len(L)
    if k == 1:
        return 1.0
    return sum(np.linalg.det(np.delete(np.delete(L, i, 0), i, 1)) for i in range(k))


def test_criterion_06_tree_theorem():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        pi = random_irreducible_chain(n, rng)
        V = set(range(n))
        rho_lin = stationary_distribution(pi)
        rho_tree = stationary_via_trees(pi, V)
        assert np.abs(rho_lin - rho_tree).max() <= 1e-9
        omega_v = tree_volumes(pi, V, method="enumeration").omega_V
        adj = _cofactor_sum(np.eye(n) - pi)
        spec = omega_spectral(pi, V)
        ecl = expected_cycle_length(pi, V)
        for other in (adj, spec, ecl):
            assert abs(other - omega_v) <= 1e-6 * omega_v
        assert omega_v <= n + 1e-9
    assert time.perf_counter() - t0 < 60.0


def test_criterion_07_potential():
    rng = np.random.default_rng(SEED)
    counts = dict.fromkeys(("det-passing", "det-holding", "stoch-passing", "stoch-holding"), 0)
    violations = []

    # deterministic, sampled
    while counts["det-passing"] < 6000 or counts["det-holding"] < 3000:
        n = int(rng.integers(2, 7))
        g = random_graph(n, rng)
        s = _random_pure(g, rng)
        for game, sign, mu in ((PASSING, -1, _random_measure(n, rng)), (HOLDING, 1, random_full_support_measure(n, rng))):
            psi = oracles.det_potential(s)
            for i in range(n):
                for d in profitable_deviations(g, mu, s, i, game):
                    counts["det-" + game] += 1
                    moved = list(s)
                    moved[i] = d.new_target
                    if sign * (oracles.det_potential(moved) - psi) <= 0:
                        violations.append((game, g, s, d))

    # stochastic, sampled over random graphs and measures
    seed = 0
    while counts["stoch-passing"] < 2500 or counts["stoch-holding"] < 2500:
        n = int(rng.integers(2, 7))
        g = random_graph(n, rng)
        for game, mu in ((PASSING, _random_measure(n, rng)), (HOLDING, random_full_support_measure(n, rng))):
            rep = check_gop(g, mu, trials=2, seed=seed, game=game, grid_step=F(1, 4), rows_per_player=12)
            counts["stoch-" + game] += rep.deviations
            violations += rep.violations
            seed += 1

    assert sum(counts.values()) >= 10_000
    assert violations == []

    # ordinal biconditional on every digraph with n <= 4 under uniform mass
    checked = 0
    for n in range(2, 5):
        mu = InitialMeasure.uniform(n)
        options = [[S for k in range(1, n) for S in itertools.combinations([j for j in range(n) if j != i], k)] for i in range(n)]
        psi = {s: det_potential(complete_graph(n), s) for s in itertools.product(*[[j for j in range(n) if j != i] for i in range(n)])}
        for out in itertools.product(*options):
            g = Graph(n, tuple(out))
            for s in itertools.product(*out):
                for game, sign in ((PASSING, -1), (HOLDING, 1)):
                    for i in range(n):
                        prof = {d.new_target for d in profitable_deviations(g, mu, s, i, game)}
                        for t in out[i]:
                            if t == s[i]:
                                continue
                            moved = s[:i] + (t,) + s[i + 1:]
                            checked += 1
                            assert (t in prof) == (sign * (psi[moved] - psi[s]) > 0), (game, out, s, i, t)
    assert checked > 0


def test_criterion_08_five_player_potential():
    g = five_player_graph()
    grid = [k / 8 for k in range(9)]
    for p, q in itertools.product(grid, grid):
        val = stoch_potential(g, five_player_profile(p, q))
        if p == q == 0:
            assert val == pytest.approx(6.0, abs=1e-9)
        else:
            assert abs(val - (5 - 2 * (p + q - p * q))) <= 1e-9


def test_criterion_09_pure_ne_survive():
    rng = np.random.default_rng(SEED + 9)
    verified = 0
    for _ in range(25):
        n = int(rng.integers(2, 6))
        g = random_graph(n, rng)
        mu = _random_measure(n, rng)
        for s in enumerate_pure_nash(g, mu):
            assert verify_pure_in_stochastic(g, mu, s, grid_step=F(1, 8)), (g, mu, s)
            verified += 1
    assert verified > 0


def test_criterion_10_prior_free():
    rng = np.random.default_rng(SEED + 10)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        g = random_graph(n, rng)
        for s in potential_minimizers(g):
            assert is_prior_free(g, s)
    for g in (complete_graph(4), wheel(6), pivot_graph(6), bidirectional_cycle(6)):
        for s in potential_minimizers(g):
            assert is_prior_free(g, s)
    c6 = bidirectional_cycle(6)
    found = find_prior_sensitive_equilibrium(c6)
    assert found is not None
    j, s = found
    assert is_nash(c6, InitialMeasure.point(6, j), s)
    assert not is_nash(c6, InitialMeasure.uniform(6), s)


def test_criterion_11_simulation():
    t0 = time.perf_counter()
    res = simulate(complete_graph(3), None, k3_mixed_profile(), SimConfig(T=10**6, replicas=20, seed=SEED))
    target = np.array([0.4, 0.4, 0.2])
    assert np.all(np.abs(res.empirical - target) <= 3 * res.standard_error)
    assert np.all(np.abs(res.empirical - target) <= 0.005)
    assert time.perf_counter() - t0 < 30.0


def test_criterion_12_pagerank():
    rng = np.random.default_rng(SEED + 12)
    for trial in range(30):
        n = 3 if trial < 15 else int(rng.integers(2, 7))
        spec = random_pagerank_spec(n, rng, max_sets=3)
        for idx in itertools.product(*(range(len(o)) for o in spec.link_sets)):
            st = recurrent_structure(pagerank_profile(spec, idx))
            assert st.r == 1 and not st.transient
        choice = tuple(int(rng.integers(len(o))) for o in spec.link_sets)
        a = pagerank_payoffs(spec, choice, None)
        b = pagerank_payoffs(spec, choice, random_full_support_measure(n, rng))
        c = pagerank_payoffs(spec, choice, InitialMeasure.point(n, 0))
        assert np.abs(a - b).max() <= 1e-9 and np.abs(a - c).max() <= 1e-9
        idx, rank = pagerank_equilibrium(spec)
        assert rank.sum() == pytest.approx(1.0, abs=1e-12)
        if n == 3:
            assert idx in enumerate_pagerank_equilibria(spec)
