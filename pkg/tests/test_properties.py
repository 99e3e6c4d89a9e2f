"""Randomized invariants under hypothesis."""

import numpy as np
from hypothesis import given, settings, strategies as st

from eigenseries import (
    HermitianMatrix,
    KernelConfig,
    SolveConfig,
    build_q,
    confluent_divided_difference,
    dense_eig,
    evolution_coefficient,
    kernel_resolvent,
    kernel_series,
    solve_level,
    solve_spectrum,
    split,
)
from eigenseries.solver import _q_series_with_info

COMMON = dict(deadline=None, max_examples=40)


@st.composite
def split_systems(draw, max_dim=6, coupling_scale=0.15):
    """Well-separated levels with coupling weak enough for the series routes."""
    dim = draw(st.integers(2, max_dim))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    gaps = 0.5 + rng.uniform(0.0, 1.0, size=dim - 1)
    base = rng.uniform(-1.0, 1.0)
    levels = base + np.concatenate(([0.0], np.cumsum(gaps)))
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    g = (g + g.conj().T) / 2
    np.fill_diagonal(g, 0.0)
    maxrow = np.max(np.sum(np.abs(g), axis=1))
    if maxrow > 0:
        g *= coupling_scale / maxrow
    h = g + np.diag(levels)
    return split(HermitianMatrix(h))


@st.composite
def hermitian_matrices(draw, max_dim=7):
    dim = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianMatrix((a + a.conj().T) / 2)


@given(hermitian_matrices())
@settings(**COMMON)
def test_split_round_trip_and_structure(h):
    s = split(h)
    assert np.array_equal(s.reconstruct().entries, h.entries)
    assert np.all(np.diag(s.coupling) == 0)
    assert np.array_equal(s.coupling, s.coupling.conj().T)
    s2 = split(s.reconstruct())
    assert np.array_equal(s.levels, s2.levels)
    assert np.array_equal(s.coupling, s2.coupling)


@given(split_systems(), st.integers(0, 10**6))
@settings(**COMMON)
def test_kernel_series_agrees_with_resolvent(s, gseed):
    gamma = gseed % s.dim
    closed = kernel_resolvent(s, gamma, 0.03)
    res = kernel_series(s, gamma, 0.03, KernelConfig(max_path_order=120))
    assert abs(res.value - closed) <= 1e-10


@given(split_systems(), st.integers(0, 10**6))
@settings(**COMMON)
def test_q_series_matches_closed_form(s, gseed):
    gamma = gseed % s.dim
    energy = solve_level(s, gamma).energy
    closed = build_q(s, gamma, energy, SolveConfig(q_form="closed"))
    series, converged, _ = _q_series_with_info(s, gamma, energy, 120, 1e-10)
    if converged:
        assert np.max(np.abs(closed - series)) <= 1e-10


@given(split_systems(max_dim=5, coupling_scale=0.3), st.integers(1, 4))
@settings(**COMMON)
def test_evolution_order_homogeneity(s, l):
    a = evolution_coefficient(s, l, 0.8, method="pathsum")
    b = evolution_coefficient(s.scaled(2.0), l, 0.8, method="pathsum")
    assert np.array_equal(b, (2.0**l) * a)


@given(split_systems(max_dim=5))
@settings(deadline=None, max_examples=25)
def test_solver_residuals_meet_oracle(s):
    res = solve_spectrum(s)
    assert not res.failures
    assert max(p.residual for p in res.pairs) <= 1e-10
    dec = dense_eig(s.reconstruct())
    assert np.max(np.abs(np.sort(res.energies) - dec.values)) <= 1e-10


@given(st.lists(st.sampled_from([0.0, 0.5, 1.25, 2.0]), min_size=1, max_size=6),
       st.floats(-2.0, 2.0))
@settings(**COMMON)
def test_divided_difference_permutation_invariance(nodes, t):
    rng = np.random.default_rng(len(nodes))
    shuffled = list(nodes)
    rng.shuffle(shuffled)
    assert confluent_divided_difference(nodes, t) == confluent_divided_difference(shuffled, t)
