import numpy as np
import pytest

from eigenseries import (
    KernelConfig,
    ModelSpec,
    PoleHit,
    generate_model,
    kernel_jet,
    kernel_resolvent,
    kernel_series,
    spectral_radius_estimate,
    split,
)
from eigenseries.kernel import kernel_resolvent_with_condition

CHAIN3_R0 = -0.18 / 1.91  # closed 2x2 resolvent of chain(3, delta=1, lam=0.3) at z=0


def model(family, **kw):
    return split(generate_model(ModelSpec(family, **kw)))


class TestKernelSeries:
    def test_two_level_exact_at_first_order(self):
        s = model("two_level", dim=2, delta=1.0, lam=0.5)
        res = kernel_series(s, 0, 0.0, KernelConfig(max_path_order=6))
        assert res.value == pytest.approx(-0.25, abs=1e-15)
        assert res.terms[0] == pytest.approx(-0.25, abs=1e-16)
        # the complement block of a two-level system has no internal coupling
        assert np.all(res.terms[1:] == 0)
        assert res.converged

    def test_chain3_matches_resolvent_oracle(self):
        s = model("chain", dim=3, delta=1.0, lam=0.3)
        res = kernel_series(s, 0, 0.0, KernelConfig(max_path_order=80))
        assert res.value == pytest.approx(CHAIN3_R0, abs=1e-12)

    def test_zero_coupling_is_zero(self):
        s = model("chain", dim=4, delta=1.0, lam=0.0)
        for z in (0.0, 0.3, -0.7 + 0.1j):
            assert kernel_series(s, 1, z).value == 0

    def test_pole_raises(self):
        s = model("chain", dim=3, delta=1.0, lam=0.3)
        with pytest.raises(PoleHit):
            kernel_series(s, 0, s.levels[0] - s.levels[1])

    def test_termwise_coupling_scaling(self):
        # order-l term carries l+1 coupling factors; doubling is exact in fp
        s = model("banded_random", dim=4, lam=0.1, seed=5)
        r1 = kernel_series(s, 2, 0.05, KernelConfig(max_path_order=12))
        r2 = kernel_series(s.scaled(2.0), 2, 0.05, KernelConfig(max_path_order=12))
        scalework = 2.0 ** (np.arange(12) + 2)
        assert np.array_equal(r2.terms, scalework * r1.terms)


class TestKernelResolvent:
    def test_two_level(self):
        s = model("two_level", dim=2, delta=1.0, lam=0.5)
        assert kernel_resolvent(s, 0, 0.0) == pytest.approx(-0.25, abs=1e-15)

    def test_chain3_hand_solve(self):
        s = model("chain", dim=3, delta=1.0, lam=0.3)
        assert kernel_resolvent(s, 0, 0.0) == pytest.approx(CHAIN3_R0, abs=1e-15)

    def test_zero_coupling(self):
        s = model("chain", dim=3, delta=1.0, lam=0.0)
        assert kernel_resolvent(s, 0, 0.2) == 0

    def test_condition_is_reported(self):
        s = model("chain", dim=4, delta=1.0, lam=0.2)
        val, cond = kernel_resolvent_with_condition(s, 0, 0.0)
        assert np.isfinite(cond) and cond >= 1.0
        assert val == pytest.approx(kernel_resolvent(s, 0, 0.0), abs=0)

    def test_series_agrees_where_convergent(self):
        cfg = KernelConfig(max_path_order=120)
        for s in (
            model("chain", dim=5, delta=1.0, lam=0.2),
            model("banded_random", dim=6, lam=0.2, seed=9),
        ):
            for gamma in range(s.dim):
                closed = kernel_resolvent(s, gamma, 0.07)
                res = kernel_series(s, gamma, 0.07, cfg)
                assert spectral_radius_estimate(s, gamma, 0.07) < 1
                assert abs(res.value - closed) < 1e-10

    def test_series_error_decays_geometrically(self):
        s = model("banded_random", dim=6, lam=0.35, bandwidth=5, seed=23)
        closed = kernel_resolvent(s, 0, 0.0)
        errs = [
            abs(kernel_series(s, 0, 0.0, KernelConfig(max_path_order=lmax)).value - closed)
            for lmax in (2, 4, 6, 8)
        ]
        ratios = [errs[i + 1] / errs[i] for i in range(3) if errs[i] > 1e-15]
        assert ratios and all(r < 0.5 for r in ratios)
        assert errs[-1] < errs[0]

    def test_real_z_gives_real_kernel(self):
        s = model("banded_random", dim=6, lam=0.3, seed=2)
        for gamma in (0, 3, 5):
            val = kernel_resolvent(s, gamma, 0.21)
            assert abs(val.imag) <= 1e-12


class TestKernelJet:
    def test_two_level_alternating_signs(self):
        # R_0(z) = 0.25/(-1-z) expands to [-0.25, +0.25, -0.25, ...]
        s = model("two_level", dim=2, delta=1.0, lam=0.5)
        jet = kernel_jet(s, 0, KernelConfig(jet_order=6))
        expected = 0.25 * (-1.0) ** (np.arange(7) + 1)
        assert np.allclose(jet.coeffs, expected, rtol=1e-13, atol=0)

    def test_zero_coupling_all_zero(self):
        s = model("chain", dim=4, delta=1.0, lam=0.0)
        assert not np.any(kernel_jet(s, 2, KernelConfig(jet_order=5)).coeffs)

    def test_constant_term_matches_resolvent(self):
        s = model("chain", dim=3, delta=1.0, lam=0.3)
        jet = kernel_jet(s, 0, KernelConfig(jet_order=3))
        assert jet[0] == pytest.approx(CHAIN3_R0, abs=1e-14)

    def test_first_derivative_against_finite_differences(self):
        # Richardson-extrapolated central differences of the closed form
        s = model("chain", dim=3, delta=1.0, lam=0.3)
        jet = kernel_jet(s, 0, KernelConfig(jet_order=1))
        h = 1e-5
        d1 = (kernel_resolvent(s, 0, h) - kernel_resolvent(s, 0, -h)) / (2 * h)
        d2 = (kernel_resolvent(s, 0, h / 2) - kernel_resolvent(s, 0, -h / 2)) / h
        fd = (4 * d2 - d1) / 3
        assert abs(jet[1] - fd) / abs(fd) < 1e-6

    def test_first_derivative_fd_across_models(self):
        rngcases = [
            model("chain", dim=4, delta=1.0, lam=0.15),
            model("banded_random", dim=5, lam=0.2, seed=13),
        ]
        for s in rngcases:
            for gamma in range(s.dim):
                jet = kernel_jet(s, gamma, KernelConfig(jet_order=1))
                h = 1e-5
                d1 = (kernel_resolvent(s, gamma, h) - kernel_resolvent(s, gamma, -h)) / (2 * h)
                d2 = (kernel_resolvent(s, gamma, h / 2) - kernel_resolvent(s, gamma, -h / 2)) / h
                fd = (4 * d2 - d1) / 3
                assert abs(jet[1] - fd) <= 1e-6 * max(1.0, abs(fd))


def test_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(max_path_order=0)
    with pytest.raises(ValueError):
        KernelConfig(conv_tol=0.0)
    with pytest.raises(ValueError):
        KernelConfig(jet_order=-1)
