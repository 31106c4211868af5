import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscnet import (
    ChiSample,
    InsufficientClosure,
    RankDeficient,
    bochner_check,
    chi_fock,
    chi_gaussian,
    coherent_state,
    estimate_temperature,
    fit_moments,
    fock_cat,
    lattice_grid,
    squeezed_state,
    star_grid,
    thermal_chi,
    thermal_state,
    two_mode_squeezed_state,
    vacuum_state,
)


def exact_samples(chi_fn, points, err=0.0):
    return [ChiSample(p, chi_fn(p), err) for p in points]


class TestChiSample:
    def test_rejects_bad_error(self):
        with pytest.raises(ValueError):
            ChiSample([0.1], 0.9, err=np.nan)


class TestFitMoments:
    def test_vacuum_is_exactly_empty(self):
        pts = star_grid(1, rings=(0.1, 0.2), angles=9)
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts))
        assert np.abs(fit.first).max() < 1e-10
        assert abs(fit.number[0, 0]) < 1e-10

    def test_coherent_amplitude(self):
        alpha = 0.3
        st = coherent_state([alpha])
        pts = star_grid(1, rings=(0.1, 0.25), angles=9)
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(st, p), pts))
        assert abs(fit.first[0] - alpha) < 1e-8
        assert abs(fit.number[0, 0] - alpha**2) < 1e-8

    def test_thermal_occupation(self):
        st = thermal_state([2.0])
        pts = star_grid(1, rings=(0.12, 0.27), angles=9)
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(st, p), pts))
        assert abs(fit.number[0, 0] - 2.0) < 1e-6
        assert abs(fit.pair[0, 0]) < 1e-8

    def test_squeezed_pair_moment(self):
        r = 0.4
        st = squeezed_state(r)  # <a^2> = -sinh(r) cosh(r) for x-squeezing
        pts = star_grid(1, rings=(0.1, 0.2, 0.3), angles=9)
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(st, p), pts))
        assert abs(fit.number[0, 0] - np.sinh(r) ** 2) < 1e-8
        assert abs(fit.pair[0, 0] + np.sinh(r) * np.cosh(r)) < 1e-8

    def test_two_mode_cross_moments(self):
        r = 0.5
        st = two_mode_squeezed_state(r)
        pts = star_grid(2, rings=(0.1, 0.2), angles=8)
        # add cross points so joint monomials are identifiable
        rng = np.random.default_rng(0)
        for _ in range(60):
            pts.append(0.25 * (rng.normal(size=2) + 1j * rng.normal(size=2)) / np.sqrt(2))
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(st, p), pts))
        assert abs(fit.number[0, 0] - np.sinh(r) ** 2) < 1e-7
        assert abs(fit.pair[0, 1] - np.sinh(r) * np.cosh(r)) < 1e-7

    def test_order_one_returns_first_moments_only(self):
        st = coherent_state([0.2 - 0.1j])
        pts = star_grid(1, rings=(0.1, 0.2), angles=9)
        fit = fit_moments(exact_samples(lambda p: chi_gaussian(st, p), pts), order=1)
        assert abs(fit.first[0] - (0.2 - 0.1j)) < 1e-8
        assert_allclose(fit.number, 0)

    def test_needs_enough_points(self):
        pts = star_grid(1, rings=(0.1,), angles=4)
        with pytest.raises(ValueError):
            fit_moments(exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts))

    def test_rank_deficient_grid(self):
        # all samples on one ray: quadratic monomials collinear
        pts = [np.array([0j])] + [np.array([complex(x, 0)]) for x in
                                  np.linspace(-0.3, 0.3, 25) if x != 0]
        with pytest.raises(RankDeficient):
            fit_moments(exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts))

    def test_weighted_fit_uses_errors(self):
        st = coherent_state([0.25])
        pts = star_grid(1, rings=(0.1, 0.2), angles=9)
        samples = [ChiSample(p, chi_gaussian(st, p), 0.01) for p in pts]
        fit = fit_moments(samples)
        assert abs(fit.first[0] - 0.25) < 1e-8  # exact values, finite errs


class TestEstimateTemperature:
    @staticmethod
    def probe_points(decomp, T):
        """Points inside the thermal Gaussian width |eta| ~ sqrt(nu/2T),
        alternating real and imaginary directions."""
        pts = []
        for k in range(decomp.N):
            for scale, phase in ((0.5, 1.0), (1.0, 1j)):
                p = np.zeros(decomp.N, dtype=complex)
                p[k] = phase * scale * np.sqrt(0.5 * decomp.nu[k] / max(T, 1.0))
                pts.append(p)
        pts.append(np.full(decomp.N, 0.3 * np.sqrt(0.5 / max(T, 1.0)), dtype=complex))
        return pts

    def make_samples(self, decomp, T, err=0.0):
        return [
            ChiSample(p, thermal_chi(p, T, decomp.nu), err)
            for p in self.probe_points(decomp, T)
        ]

    def test_recovers_chain_temperature(self, chain8):
        _, _, d = chain8
        fit = estimate_temperature(self.make_samples(d, 200.0), d.nu)
        assert abs(fit.T - 200.0) / 200.0 < 1e-3
        assert not fit.not_thermal

    def test_coherent_state_flagged(self, chain8):
        _, _, d = chain8
        st = coherent_state(np.full(8, 0.9))
        pts = [s.point for s in self.make_samples(d, 1.0)]
        samples = [ChiSample(p, chi_gaussian(st, p), 0.0) for p in pts]
        fit = estimate_temperature(samples, d.nu)
        assert fit.not_thermal

    def test_vacuum_pins_lower_bound(self, two_mode):
        _, d = two_mode
        samples = [
            ChiSample(p, chi_gaussian(vacuum_state(2), p), 0.0)
            for p in self._two_mode_points()
        ]
        fit = estimate_temperature(samples, d.nu, T_min=1e-6)
        assert fit.T < 0.05  # occupation numerically zero: vacuum limit
        assert fit.residual < 1e-12
        assert not fit.not_thermal

    def _two_mode_points(self):
        return [
            np.array([0.5, 0.0], dtype=complex),
            np.array([0.0, 0.5], dtype=complex),
            np.array([0.7, 0.3], dtype=complex),
        ]

    def test_scaling_consistency(self, two_mode):
        # estimating with scaled (T, nu) commutes with the unit rescaling
        _, d = two_mode
        c, T = 3.7, 41.0
        pts = self.probe_points(d, T)
        s1 = [ChiSample(p, thermal_chi(p, T, d.nu), 0.0) for p in pts]
        s2 = [ChiSample(p, thermal_chi(p, c * T, c * d.nu), 0.0) for p in pts]
        f1 = estimate_temperature(s1, d.nu)
        f2 = estimate_temperature(s2, c * d.nu)
        assert f2.T / f1.T == pytest.approx(c, rel=1e-4)

    def test_requires_probing_every_mode(self, two_mode):
        _, d = two_mode
        pts = [np.array([0.5, 0.0], dtype=complex), np.array([1.0, 0.0], dtype=complex)]
        samples = [ChiSample(p, thermal_chi(p, 10.0, d.nu), 0.0) for p in pts]
        with pytest.raises(ValueError):
            estimate_temperature(samples, d.nu)

    def test_noisy_samples_use_chi2_gate(self, two_mode):
        _, d = two_mode
        rng = np.random.default_rng(1)
        T = 25.0
        pts = self.probe_points(d, T) * 4
        err = 0.01
        samples = [
            ChiSample(p, thermal_chi(p, T, d.nu) + err * rng.normal(), err) for p in pts
        ]
        fit = estimate_temperature(samples, d.nu)
        assert not fit.not_thermal
        assert abs(fit.T - T) / T < 0.2


class TestBochnerCheck:
    def test_single_origin_sample(self):
        rep = bochner_check([ChiSample([0.0], 1.0 + 0j, 0.0)])
        assert rep.passed and rep.min_eigenvalue == pytest.approx(1.0)

    def test_vacuum_grid_passes(self):
        pts = lattice_grid(1, spacing=0.45, span=2)
        rep = bochner_check(exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts))
        assert rep.passed
        assert rep.min_eigenvalue >= -1e-12
        assert rep.n_anchors >= 3

    def test_forged_normalization_fails(self):
        pts = lattice_grid(1, spacing=0.45, span=2)
        samples = exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts)
        forged = [
            ChiSample(s.point, 1.5 if np.allclose(s.point, 0) else s.value, s.err)
            for s in samples
        ]
        assert not bochner_check(forged).passed

    def test_perturbed_sample_fails(self):
        pts = lattice_grid(1, spacing=0.45, span=2)
        samples = exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts)
        bad = []
        for i, s in enumerate(samples):
            v = s.value + (0.4 if i == 3 else 0.0)  # >> 10x tolerance
            bad.append(ChiSample(s.point, v, s.err))
        assert not bochner_check(bad).passed

    def test_open_set_raises(self):
        pts = [np.array([0j]), np.array([0.3 + 0j]), np.array([1.0 + 0j])]
        samples = exact_samples(lambda p: chi_gaussian(vacuum_state(1), p), pts)
        with pytest.raises(InsufficientClosure):
            bochner_check(samples)

    @pytest.mark.parametrize(
        "chi_fn,n",
        [
            (lambda p: chi_gaussian(vacuum_state(1), p), 1),
            (lambda p: chi_gaussian(coherent_state([0.4 + 0.2j]), p), 1),
            (lambda p: chi_gaussian(thermal_state([1.5]), p), 1),
            (lambda p: chi_gaussian(squeezed_state(0.5, 0.4), p), 1),
            (lambda p: chi_gaussian(two_mode_squeezed_state(0.4), p), 2),
            (lambda p: chi_fock(fock_cat(1.0, 35), p), 1),
        ],
    )
    def test_catalog_states_pass(self, chi_fn, n):
        pts = lattice_grid(n, spacing=0.5, span=2)
        rep = bochner_check(exact_samples(chi_fn, pts))
        assert rep.passed
        assert rep.min_eigenvalue >= -1e-10
