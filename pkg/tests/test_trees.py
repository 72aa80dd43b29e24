import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from buckpass.chain import recurrent_structure, stationary_distribution
from buckpass.errors import ContractViolation
from buckpass.graph import Graph
from buckpass.instances import (
    five_player_profile,
    k3_mixed_profile,
    lift,
    random_irreducible_chain,
    random_profile,
)
from buckpass.trees import (
    adjugate_trace,
    edge_set_weight,
    expected_cycle_length,
    omega_spectral,
    spanning_unicycle_masses,
    stationary_via_trees,
    tree_volumes,
)


def two_cycle_pi():
    return np.array([[0.0, 1.0], [1.0, 0.0]])


def test_empty_edge_set_weighs_one():
    assert edge_set_weight(two_cycle_pi(), []) == 1.0


def test_pure_profile_weighs_one_under_own_lift():
    s = (1, 2, 0, 0)
    assert edge_set_weight(lift(s), enumerate(s)) == 1.0


def test_pure_draw_weights_sum_to_one():
    pi = k3_mixed_profile(exact=True)
    total = Fraction(0)
    for s in itertools.product(*[[j for j in range(3) if j != i] for i in range(3)]):
        total += edge_set_weight(pi, enumerate(s))
    assert total == 1


def test_two_cycle_volumes():
    tv = tree_volumes(two_cycle_pi(), {0, 1})
    assert tv.omega == (1.0, 1.0)
    assert tv.omega_V == 2.0


def test_k3_volumes_exact():
    tv = tree_volumes(k3_mixed_profile(exact=True), {0, 1, 2}, method="enumeration")
    assert tv.omega == (1, 1, Fraction(1, 2))
    assert tv.omega_V == Fraction(5, 2)


# the corner p = q = 0 has two recurrent classes and is tested separately
@pytest.mark.parametrize("p, q", [(a / 4, b / 4) for a in range(5) for b in range(5) if a or b])
def test_five_player_volumes(p, q):
    tv = tree_volumes(five_player_profile(p, q), {0, 1, 2, 3}).as_dict()
    assert tv[0] == pytest.approx(p + q - p * q, abs=1e-12)
    assert tv[1] == pytest.approx(p + q - p * q, abs=1e-12)
    assert tv[2] == pytest.approx(0.0, abs=1e-12)


def test_multi_class_rejected():
    with pytest.raises(ContractViolation):
        tree_volumes(five_player_profile(0.0, 0.0), {0, 1, 2, 3})


def test_open_closure_rejected():
    with pytest.raises(ContractViolation):
        tree_volumes(five_player_profile(0.5, 0.5), {2, 3})


def test_stationary_via_trees_examples():
    assert stationary_via_trees(k3_mixed_profile(), {0, 1, 2}) == pytest.approx([0.4, 0.4, 0.2], abs=1e-12)
    assert stationary_via_trees(two_cycle_pi(), {0, 1}) == pytest.approx([0.5, 0.5])


def test_stationary_via_trees_zero_on_transient():
    rho = stationary_via_trees(five_player_profile(0.5, 0.5), range(5))
    assert rho == pytest.approx([0.5, 0.5, 0, 0, 0], abs=1e-12)


def test_spectral_examples():
    assert omega_spectral(two_cycle_pi(), {0, 1}) == pytest.approx(2.0)
    assert omega_spectral(k3_mixed_profile(), {0, 1, 2}) == pytest.approx(2.5, rel=1e-12)


def test_spectral_multi_class_signal():
    pi = np.zeros((4, 4))
    pi[0, 1] = pi[1, 0] = pi[2, 3] = pi[3, 2] = 1.0
    with pytest.raises(ContractViolation):
        omega_spectral(pi, range(4))


def test_adjugate_trace_matches_inverse(rng):
    for k in range(2, 8):
        a = rng.normal(size=(k, k))
        expect = np.linalg.det(a) * np.trace(np.linalg.inv(a))
        assert adjugate_trace(a) == pytest.approx(expect, rel=1e-9)


def test_expected_cycle_length_lift():
    s = (1, 2, 3, 0, 0)
    assert expected_cycle_length(lift(s), range(5)) == 4.0


def test_expected_cycle_length_k3_exact():
    assert expected_cycle_length(k3_mixed_profile(exact=True), {0, 1, 2}) == Fraction(5, 2)


def test_unicycle_masses_match_volumes(rng):
    for _ in range(15):
        n = int(rng.integers(2, 7))
        pi = random_irreducible_chain(n, rng)
        tv = tree_volumes(pi, range(n)).as_dict()
        u_vertex, u_edge = spanning_unicycle_masses(pi, range(n))
        for i in range(n):
            assert u_vertex.get(i, 0.0) == pytest.approx(tv[i], rel=1e-9, abs=1e-12)
            for j in range(n):
                if i != j:
                    assert u_edge.get((i, j), 0.0) == pytest.approx(tv[i] * pi[i, j], rel=1e-9, abs=1e-12)


@st.composite
def single_class_instance(draw):
    """A random profile restricted to one recurrent class closure."""
    n = draw(st.integers(2, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        k = int(rng.integers(1, len(others) + 1))
        out.append(tuple(int(x) for x in rng.choice(others, size=k, replace=False)))
    pi = random_profile(Graph(n, tuple(out)), rng)
    st_ = recurrent_structure(pi)
    l = int(rng.integers(st_.r))
    return pi, st_.closures[l], st_.classes[l]


@settings(max_examples=120, deadline=None)
@given(single_class_instance())
def test_four_way_identity(inst):
    pi, closure, cls = inst
    tv = tree_volumes(pi, closure)
    enum_total = float(sum(tv.omega_enum))
    idx = sorted(closure)
    L = np.eye(len(idx)) - pi[np.ix_(idx, idx)]
    spec = omega_spectral(pi, closure)
    adj = adjugate_trace(L)
    ecl = expected_cycle_length(pi, closure)
    for v in (tv.omega_V, spec, adj, ecl):
        assert v == pytest.approx(enum_total, rel=1e-6)
    assert tv.omega_V <= len(cls) + 1e-9
    for v, w in tv.as_dict().items():
        assert (abs(w) <= 1e-12) == (v not in cls)


@settings(max_examples=60, deadline=None)
@given(single_class_instance())
def test_trees_match_linear_solve(inst):
    pi, closure, cls = inst
    rho = stationary_via_trees(pi, closure)
    idx = sorted(cls)
    lin = np.zeros(len(pi))
    lin[idx] = stationary_distribution(pi[np.ix_(idx, idx)])
    assert np.abs(rho - lin).max() < 1e-9
