import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from buckpass.chain import recurrent_structure
from buckpass.det_game import det_cost_vector, det_potential, enumerate_pure_nash, is_nash
from buckpass.errors import InputError, PreconditionError
from buckpass.graph import InitialMeasure
from buckpass.instances import (
    complete_graph,
    five_player_graph,
    five_player_profile,
    k3_mixed_profile,
    lift,
    random_full_support_measure,
    random_graph,
    random_strongly_connected_graph,
    wheel,
    wheel_hub_uniform_profile,
)
from buckpass.stoch_game import (
    FiniteStrategySet,
    check_gop,
    epsilon_dynamics,
    is_stochastic_ne,
    is_xi_ne,
    min_class_count,
    parse_strategy_set,
    potential_descent,
    simplex_grid,
    stoch_cost_vector,
    stoch_potential,
    verify_pure_in_stochastic,
)
from buckpass.trees import tree_volumes


def test_k3_costs():
    an = stoch_cost_vector(complete_graph(3), None, k3_mixed_profile())
    assert np.abs(an.costs - [0.4, 0.4, 0.2]).max() < 1e-12
    assert an.potential == pytest.approx(0.5)


def test_wheel_center_uniform_costs():
    an = stoch_cost_vector(wheel(7), None, wheel_hub_uniform_profile(7))
    assert an.costs == pytest.approx([1 / 6] * 6 + [0.0], abs=1e-12)


def test_lift_matches_deterministic(rng):
    for _ in range(40):
        n = int(rng.integers(2, 7))
        g = random_graph(n, rng)
        mu = random_full_support_measure(n, rng) if rng.random() < 0.7 else InitialMeasure.point(n, 0)
        s = tuple(int(rng.choice(nb)) for nb in g.out_neighbors)
        an = stoch_cost_vector(g, mu, lift(s, n))
        exact = [float(c) for c in det_cost_vector(g, mu, s)]
        assert an.costs == pytest.approx(exact, abs=1e-12)
        assert an.potential == pytest.approx(det_potential(g, s), abs=1e-9)


def test_costs_sum_to_one(rng):
    for _ in range(30):
        n = int(rng.integers(2, 7))
        g = random_graph(n, rng)
        from buckpass.instances import random_profile

        an = stoch_cost_vector(g, random_full_support_measure(n, rng), random_profile(g, rng))
        assert an.costs.sum() == pytest.approx(1.0, abs=1e-9)
        assert an.costs.max() <= 0.5 + 1e-12


def test_five_player_potential():
    g = five_player_graph()
    assert stoch_potential(g, five_player_profile(0.5, 0.5)) == pytest.approx(3.5, abs=1e-9)
    assert stoch_potential(g, five_player_profile(0.0, 0.0)) == 6.0


def test_five_player_discontinuity():
    g = five_player_graph()
    near = [stoch_potential(g, five_player_profile(t, t)) for t in (1e-2, 1e-4, 1e-6)]
    assert near[-1] == pytest.approx(5.0, abs=1e-5)
    assert stoch_potential(g, five_player_profile(0.0, 0.0)) == 6.0


def test_potential_single_class_is_n_minus_volume(rng):
    from buckpass.instances import random_irreducible_chain

    for _ in range(10):
        pi = random_irreducible_chain(5, rng)
        g = complete_graph(5)
        assert stoch_potential(g, pi) == pytest.approx(5 - tree_volumes(pi, range(5)).omega_V)


def test_potential_is_measure_free(rng):
    from buckpass.instances import random_profile

    g = random_graph(5, rng)
    pi = random_profile(g, rng)
    vals = {stoch_cost_vector(g, random_full_support_measure(5, rng), pi).potential for _ in range(3)}
    assert len(vals) == 1


def test_check_gop_passing_small():
    rng = np.random.default_rng(3)
    g = random_graph(4, rng)
    rep = check_gop(g, None, trials=4, seed=1, grid_step=Fraction(1, 4))
    assert rep.deviations > 0
    assert rep.violations == []


def test_check_gop_holding_small():
    rng = np.random.default_rng(4)
    g = random_graph(4, rng)
    rep = check_gop(g, random_full_support_measure(4, rng), trials=4, seed=2, game="holding", grid_step=Fraction(1, 4))
    assert rep.deviations > 0
    assert rep.violations == []


def test_check_gop_holding_needs_full_support():
    with pytest.raises(PreconditionError):
        check_gop(complete_graph(3), InitialMeasure.point(3, 0), 1, 0, game="holding")


def test_d1_embedded_drop_equals_length_change():
    g = complete_graph(5)
    s = (1, 0, 0, 2, 3)
    s2 = (4, 0, 0, 2, 3)
    drop = stoch_potential(g, lift(s)) - stoch_potential(g, lift(s2))
    # cycle 0-1 becomes 0-4-3-2
    assert drop == pytest.approx(4 - 2)


def test_transient_player_moves_potential_without_cost_change():
    g = five_player_graph()
    pi = five_player_profile(0.5, 0.5)
    pi2 = five_player_profile(0.25, 0.5)
    mu = InitialMeasure.uniform(5)
    a, b = stoch_cost_vector(g, mu, pi), stoch_cost_vector(g, mu, pi2)
    assert a.costs[2] == b.costs[2] == 0.0
    assert a.potential != pytest.approx(b.potential)
    rep = check_gop(g, mu, trials=3, seed=0, grid_step=Fraction(1, 4))
    assert rep.violations == []
    assert rep.non_ordinal


def test_simplex_grid():
    rows = simplex_grid((0, 2, 3), 5, Fraction(1, 8))
    assert len(rows) == comb(8 + 2, 2)
    for r in rows:
        assert r.sum() == pytest.approx(1.0)
        assert r[1] == r[4] == 0.0
    with pytest.raises(InputError):
        simplex_grid((0, 1), 3, 0.3)


def test_epsilon_half_stops_immediately():
    g = complete_graph(4)
    xi = FiniteStrategySet.from_grid(g, Fraction(1, 4))
    path = epsilon_dynamics(g, None, xi, epsilon=0.5)
    assert len(path) == 0


def test_epsilon_dynamics_grid(rng):
    for _ in range(3):
        g = random_graph(4, rng, density=0.7)
        xi = FiniteStrategySet.from_grid(g, Fraction(1, 4))
        mu = random_full_support_measure(4, rng)
        start = tuple(int(rng.integers(len(r))) for r in xi.rows)
        path = epsilon_dynamics(g, mu, xi, epsilon=1e-3, start=start)
        assert is_xi_ne(g, mu, xi, path.indices[-1], 1e-3)
        assert all(gain > 1e-3 for gain in path.gains)


def test_epsilon_dynamics_deterministic_reaches_pure_nash(rng):
    for _ in range(10):
        g = random_graph(5, rng)
        mu = random_full_support_measure(5, rng)
        xi = FiniteStrategySet.deterministic(g)
        start = tuple(int(rng.integers(len(r))) for r in xi.rows)
        path = epsilon_dynamics(g, mu, xi, epsilon=1e-6, start=start)
        final = tuple(g.out_neighbors[i][k] for i, k in enumerate(path.indices[-1]))
        assert final in enumerate_pure_nash(g, mu)


def test_potential_descent_deterministic_k4():
    g = complete_graph(4)
    xi = FiniteStrategySet.deterministic(g)
    r0, start = min_class_count(xi)
    assert r0 == 1
    idx = potential_descent(g, xi, start)
    s = tuple(g.out_neighbors[i][k] for i, k in enumerate(idx))
    assert det_potential(g, s) == 0
    assert is_nash(g, None, s)


def test_potential_descent_grid(rng):
    for _ in range(2):
        g = random_strongly_connected_graph(4, rng, density=0.2)
        xi = FiniteStrategySet.from_grid(g, Fraction(1, 2))
        _, start = min_class_count(xi)
        idx = potential_descent(g, xi, start)
        for _ in range(3):
            assert is_xi_ne(g, random_full_support_measure(4, rng), xi, idx, 1e-9)


def test_potential_descent_rejects_start_outside_min_class():
    g = complete_graph(4)
    xi = FiniteStrategySet.deterministic(g)
    # two 2-cycles: (1, 0, 3, 2) -> indices into out-neighbor lists
    idx = tuple(g.out_neighbors[i].index(t) for i, t in enumerate((1, 0, 3, 2)))
    with pytest.raises(PreconditionError):
        potential_descent(g, xi, idx)


def test_verify_pure_in_stochastic_examples():
    assert verify_pure_in_stochastic(complete_graph(3), None, (1, 2, 0))
    for s in enumerate_pure_nash(wheel(7), None)[:2]:
        assert verify_pure_in_stochastic(wheel(7), None, s, grid_step=Fraction(1, 4))
    with pytest.raises(PreconditionError):
        verify_pure_in_stochastic(complete_graph(3), None, (1, 0, 0))


def test_wheel_center_uniform_is_equilibrium():
    assert is_stochastic_ne(wheel(7), None, wheel_hub_uniform_profile(7), Fraction(1, 4))


def test_pure_nash_survive_randomization(rng):
    for _ in range(4):
        n = int(rng.integers(3, 5))
        g = random_graph(n, rng)
        mu = random_full_support_measure(n, rng)
        for s in enumerate_pure_nash(g, mu)[:3]:
            assert verify_pure_in_stochastic(g, mu, s, Fraction(1, 4))


def test_parse_strategy_set_forms():
    g = complete_graph(3)
    xi = parse_strategy_set(g, '{"grid_step": 0.5}')
    assert [len(r) for r in xi.rows] == [3, 3, 3]
    doc = {"players": [{"i": 0, "rows": [[0, 0.5, 0.5], [0, 1, 0]]}]}
    xi = parse_strategy_set(g, json.dumps(doc))
    assert len(xi.rows[0]) == 2 and len(xi.rows[1]) == 2
    with pytest.raises(InputError):
        parse_strategy_set(g, '{"players": [{"i": 0, "rows": [[0.5, 0.5, 0]]}]}')
    with pytest.raises(InputError):
        parse_strategy_set(g, '{"nothing": 1}')


def test_structure_closures_preserved_by_descent_recurrent_moves():
    g = complete_graph(4)
    xi = FiniteStrategySet.from_grid(g, Fraction(1, 2))
    start = tuple(0 for _ in range(4))
    st0 = recurrent_structure(xi.profile(start))
    assert st0.r == min_class_count(xi)[0]
    idx = potential_descent(g, xi, start)
    assert recurrent_structure(xi.profile(idx)).closures == st0.closures
