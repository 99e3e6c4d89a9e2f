import itertools

import numpy as np
import pytest

from eigenseries import (
    AccuracyWarning,
    ModelSpec,
    confluent_divided_difference,
    evolution_coefficient,
    evolution_series,
    expm_minus_iHt,
    generate_model,
    propagate,
    split,
)


def model(family, **kw):
    return split(generate_model(ModelSpec(family, **kw)))


def brute_force_order(s, l, t):
    """Literal sum over index paths; independent of the production recursion."""
    dim = s.dim
    if l == 0:
        return np.diag(np.exp(-1j * s.levels * t)).astype(complex)
    out = np.zeros((dim, dim), dtype=complex)
    for path in itertools.product(range(dim), repeat=l + 1):
        w = 1.0 + 0j
        dead = False
        for k in range(l):
            w *= s.coupling[path[k], path[k + 1]]
            if w == 0:
                dead = True
                break
        if dead:
            continue
        nodes = s.levels[list(path)]
        out[path[0], path[-1]] += w * confluent_divided_difference(nodes, t)
    return out


def raw_distinct_node_dd(nodes, t):
    """Energy-denominator form, valid only for pairwise distinct nodes."""
    nodes = np.asarray(nodes, dtype=float)
    total = 0j
    for i, x in enumerate(nodes):
        denom = np.prod([x - y for j, y in enumerate(nodes) if j != i])
        total += np.exp(-1j * x * t) / denom
    return total


class TestConfluentDividedDifference:
    def test_single_node(self):
        assert confluent_divided_difference([0.7], 1.3) == pytest.approx(np.exp(-1j * 0.7 * 1.3), abs=1e-15)

    def test_repeated_node_is_derivative(self):
        val = confluent_divided_difference([0.7, 0.7], 1.3)
        assert val == pytest.approx(-1.3j * np.exp(-1j * 0.7 * 1.3), abs=1e-14)

    def test_two_nodes_at_pi(self):
        assert confluent_divided_difference([0.0, 1.0], np.pi) == pytest.approx(-2.0, abs=1e-12)

    def test_matches_raw_formula_on_distinct_nodes(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            n = rng.integers(2, 7)
            nodes = np.sort(rng.uniform(-2, 2, size=n))
            while np.min(np.diff(nodes)) < 0.05:
                nodes = np.sort(rng.uniform(-2, 2, size=n))
            t = rng.uniform(0.1, 2.0)
            raw = raw_distinct_node_dd(nodes, t)
            val = confluent_divided_difference(nodes, t)
            assert abs(val - raw) <= 1e-10 * max(1.0, abs(raw))

    def test_node_order_irrelevant(self):
        a = confluent_divided_difference([1.5, 0.0, 0.5, 0.5], 0.9)
        b = confluent_divided_difference([0.5, 0.5, 1.5, 0.0], 0.9)
        assert a == b

    def test_continuity_at_confluence(self):
        for t in (0.7, 3.0):
            exact = confluent_divided_difference([0.3, 0.3, 1.1], t)
            jittered = confluent_divided_difference([0.3 + 1e-7, 0.3, 1.1], t)
            assert abs(exact - jittered) <= 1e-6 * (1.0 + abs(t))

    def test_cancellation_regime_warns(self):
        with pytest.warns(AccuracyWarning):
            confluent_divided_difference([0.0, 60.0], 1.0)

    def test_empty_nodes_rejected(self):
        with pytest.raises(ValueError):
            confluent_divided_difference([], 1.0)


class TestEvolutionCoefficient:
    def test_order_zero_is_phase_diagonal(self):
        s = model("chain", dim=4, delta=1.0, lam=0.3)
        a0 = evolution_coefficient(s, 0, 0.8)
        assert np.array_equal(a0, np.diag(np.exp(-1j * s.levels * 0.8)))

    def test_two_level_first_order_at_pi(self):
        s = model("two_level", dim=2, delta=1.0, lam=1.0)
        a1 = evolution_coefficient(s, 1, np.pi)
        assert a1[0, 1] == pytest.approx(-2.0, abs=1e-12)
        assert a1[1, 0] == pytest.approx(-2.0, abs=1e-12)

    def test_small_time_dyson_slope(self):
        s = model("chain", dim=4, delta=1.0, lam=0.3)
        t = 1e-6
        a1 = evolution_coefficient(s, 1, t)
        target = -1j * t * s.coupling
        mask = s.coupling != 0
        rel = np.abs(a1[mask] - target[mask]) / np.abs(target[mask])
        assert np.max(rel) <= 1e-5

    @pytest.mark.parametrize("dim,l", [(2, 3), (3, 3), (4, 4), (3, 5)])
    def test_pathsum_matches_brute_force(self, dim, l):
        s = model("banded_random", dim=dim, lam=0.35, bandwidth=dim - 1, seed=dim + l)
        expect = brute_force_order(s, l, 0.9)
        got = evolution_coefficient(s, l, 0.9, method="pathsum")
        assert np.max(np.abs(got - expect)) <= 1e-13

    @pytest.mark.parametrize("l", [0, 1, 2, 4, 6])
    def test_jet_matches_pathsum(self, l):
        s = model("banded_random", dim=5, lam=0.3, bandwidth=3, seed=31)
        a = evolution_coefficient(s, l, 1.1, method="pathsum")
        b = evolution_coefficient(s, l, 1.1, method="jet")
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_coupling_homogeneity_exact(self):
        s = model("banded_random", dim=4, lam=0.2, bandwidth=3, seed=9)
        for l in (1, 2, 3, 4):
            a = evolution_coefficient(s, l, 0.7, method="pathsum")
            b = evolution_coefficient(s.scaled(2.0), l, 0.7, method="pathsum")
            assert np.array_equal(b, (2.0**l) * a)

    def test_pathsum_regime_enforced(self):
        s = model("chain", dim=9, delta=1.0, lam=0.1)
        with pytest.raises(ValueError):
            evolution_coefficient(s, 2, 0.5, method="pathsum")
        s4 = model("chain", dim=4, delta=1.0, lam=0.1)
        with pytest.raises(ValueError):
            evolution_coefficient(s4, 13, 0.5, method="pathsum")

    def test_auto_route_escapes_regime(self):
        s = model("chain", dim=9, delta=1.0, lam=0.1)
        a = evolution_coefficient(s, 2, 0.5)  # auto -> jet beyond dim 8
        b = brute_force_order(s, 2, 0.5)
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_negative_order_rejected(self):
        s = model("chain", dim=3, delta=1.0, lam=0.1)
        with pytest.raises(ValueError):
            evolution_coefficient(s, -1, 0.5)


class TestEvolutionSeries:
    def test_t_zero_is_identity_exactly(self):
        s = model("chain", dim=4, delta=1.0, lam=0.3)
        ser = evolution_series(s, 0.0, 8)
        assert np.array_equal(ser.assembled, np.eye(4))
        assert np.array_equal(ser.terms[0], np.eye(4))
        for term in ser.terms[1:]:
            assert not np.any(term)

    def test_matches_oracle_propagator(self):
        cases = [
            ("two_level", dict(dim=2, delta=1.0, lam=1.0), 1.0),
            ("chain", dict(dim=6, delta=1.0, lam=0.2), 0.8),
            ("banded_random", dict(dim=5, lam=0.15, seed=7), 1.0),
        ]
        for family, kw, t in cases:
            s = model(family, **kw)
            ser = evolution_series(s, t, 30)
            u = expm_minus_iHt(s.reconstruct(), t)
            assert np.linalg.norm(ser.assembled - u) <= 1e-8
            assert ser.unitarity_defect <= 1e-8
            assert ser.converged

    def test_semigroup_spot_check(self):
        s = model("two_level", dim=2, delta=1.0, lam=1.0)
        u_full = evolution_series(s, 1.0, 30).assembled
        u_half = evolution_series(s, 0.5, 30).assembled
        assert np.linalg.norm(u_full - u_half @ u_half) <= 1e-7

    def test_term_norms_descend_in_weak_coupling(self):
        s = model("chain", dim=4, delta=1.0, lam=0.1)
        ser = evolution_series(s, 0.5, 12)
        assert ser.term_norms[3] < ser.term_norms[1]
        assert ser.term_norms[-1] <= 1e-12


class TestPropagate:
    def test_t_zero_returns_state(self):
        s = model("chain", dim=3, delta=1.0, lam=0.2)
        psi0 = np.array([0.6, 0.8j, 0.0])
        res = propagate(s, psi0, 0.0, 10)
        assert np.array_equal(res.psi, psi0)
        assert not np.any(res.per_order_norms[1:])

    def test_zero_coupling_single_phase(self):
        s = model("chain", dim=3, delta=1.0, lam=0.0)
        psi0 = np.array([0.0, 1.0, 0.0])
        res = propagate(s, psi0, 2.0, 5)
        expect = np.exp(-1j * s.levels[1] * 2.0) * psi0
        assert np.allclose(res.psi, expect, atol=1e-14)

    def test_two_level_against_oracle(self):
        s = model("two_level", dim=2, delta=1.0, lam=1.0)
        res = propagate(s, [1.0, 0.0], 1.0, 30)
        u = expm_minus_iHt(s.reconstruct(), 1.0)
        assert np.linalg.norm(res.psi - u @ np.array([1.0, 0.0])) <= 1e-8
        assert res.converged

    def test_shape_and_zero_state_rejected(self):
        s = model("chain", dim=3, delta=1.0, lam=0.2)
        with pytest.raises(ValueError):
            propagate(s, [1.0, 0.0], 1.0)
        with pytest.raises(ValueError):
            propagate(s, [0.0, 0.0, 0.0], 1.0)
