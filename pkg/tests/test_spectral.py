"""Norms, energies and state containers."""
import math

import numpy as np
import pytest

from kirchhofflab import (
    GevreyParams,
    ModeBasis,
    RangeOverflowError,
    SpectralState,
    Trajectory,
    dirichlet_energy,
    gevrey_norm,
    hamiltonian,
    same_basis,
    sobolev_norm,
    state_gevrey_norm,
)
from kirchhofflab.certificate import data_radius


def basis(n=4):
    return ModeBasis.interval_dirichlet(n)


class TestModeBasis:
    def test_eigenvalues_are_exact_squares(self):
        b = basis(16)
        assert np.array_equal(b.eigenvalues, b.frequencies**2)
        assert b.count == 16
        assert np.array_equal(b.frequencies, np.arange(1, 17))

    def test_torus_kind(self):
        b = ModeBasis.torus(3)
        assert b.kind == "torus"
        assert np.array_equal(b.frequencies, [1.0, 2.0, 3.0])

    def test_rejects_bad_frequencies(self):
        with pytest.raises(ValueError):
            ModeBasis("interval-dirichlet", [1.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            ModeBasis("interval-dirichlet", [-1.0, 2.0])
        with pytest.raises(ValueError):
            ModeBasis("unknown", [1.0])
        with pytest.raises(ValueError):
            ModeBasis.interval_dirichlet(0)

    def test_same_basis(self):
        assert same_basis(basis(4), basis(4))
        assert not same_basis(basis(4), basis(5))
        assert not same_basis(basis(4), ModeBasis.torus(4))

    def test_immutable(self):
        b = basis(4)
        with pytest.raises(ValueError):
            b.frequencies[0] = 7.0


class TestSpectralState:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            SpectralState(basis(4), [1.0, 2.0], [0.0, 0.0, 0.0, 0.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SpectralState(basis(2), [np.nan, 0.0], [0.0, 0.0])

    def test_zero_constructor(self):
        st = SpectralState.zero(basis(3))
        assert hamiltonian(st) == 0.0


class TestSobolevNorm:
    def test_zero_field(self):
        assert sobolev_norm(np.zeros(4), basis(4), 1.7) == 0.0

    def test_single_first_mode_any_sigma(self):
        # mu = 1 makes the weight 1 for every sigma
        a = -0.37
        assert sobolev_norm([a, 0, 0, 0], basis(4), 1.5) == pytest.approx(abs(a), rel=1e-15)

    def test_two_term_sum(self):
        # frozen from the two-term sum: sqrt(1^2*1 + 2^2*1)
        got = sobolev_norm([1.0, 1.0], basis(2), 1.0)
        assert got == pytest.approx(math.sqrt(5.0), rel=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            sobolev_norm([1.0, 2.0, 3.0], basis(2), 0.0)

    def test_sigma_zero_is_euclidean(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            c = rng.normal(size=6)
            assert sobolev_norm(c, basis(6), 0.0) == pytest.approx(
                float(np.linalg.norm(c)), rel=1e-14
            )


class TestGevreyNorm:
    def test_single_mode_weight(self):
        gp = GevreyParams(s=2.0, eta=2.0)
        got = gevrey_norm([1.0], ModeBasis.interval_dirichlet(1), gp)
        assert got == pytest.approx(math.e, rel=1e-14)

    def test_zero_field(self):
        gp = GevreyParams(s=2.0, eta=1.0)
        assert gevrey_norm(np.zeros(3), basis(3), gp) == 0.0

    def test_two_frequency_sum(self):
        # modes mu = 1 and mu = 4 carry weights e^1 and e^2 at eta=1, s=2
        gp = GevreyParams(s=2.0, eta=1.0)
        got = gevrey_norm([1.0, 0.0, 0.0, 1.0], basis(4), gp)
        assert got == pytest.approx(math.sqrt(math.e + math.e**2), rel=1e-14)

    def test_overflow_is_reported(self):
        gp = GevreyParams(s=2.0, eta=2000.0)
        with pytest.raises(RangeOverflowError) as err:
            gevrey_norm([1.0], ModeBasis.interval_dirichlet(1), gp)
        assert err.value.log_value == pytest.approx(1000.0)

    def test_huge_weight_with_tiny_coefficient_is_fine(self):
        # e^900 alone overflows, but the term with c = 1e-250 does not
        gp = GevreyParams(s=2.0, eta=900.0)
        got = gevrey_norm([1e-250], ModeBasis.interval_dirichlet(1), gp)
        assert math.isfinite(got) and got > 0.0

    def test_monotone_in_eta_and_dominates_sobolev(self):
        rng = np.random.default_rng(11)
        b = basis(8)
        for _ in range(20):
            c = rng.normal(size=8)
            sigma = float(rng.uniform(-1.0, 2.0))
            s = float(rng.uniform(1.1, 4.0))
            e1, e2 = sorted(rng.uniform(0.1, 3.0, size=2))
            n1 = gevrey_norm(c, b, GevreyParams(s, e1), sigma)
            n2 = gevrey_norm(c, b, GevreyParams(s, e2), sigma)
            assert n1 <= n2 * (1 + 1e-12)
            assert n1 >= sobolev_norm(c, b, sigma) * (1 - 1e-12)

    def test_homogeneity(self):
        rng = np.random.default_rng(13)
        b = basis(5)
        c = rng.normal(size=5)
        gp = GevreyParams(2.0, 1.0)
        for alpha in (-2.0, 0.5, 3.7):
            assert gevrey_norm(alpha * c, b, gp, 1.0) == pytest.approx(
                abs(alpha) * gevrey_norm(c, b, gp, 1.0), rel=1e-13
            )
            assert sobolev_norm(alpha * c, b, 1.0) == pytest.approx(
                abs(alpha) * sobolev_norm(c, b, 1.0), rel=1e-13
            )

    def test_params_validation(self):
        with pytest.raises(ValueError):
            GevreyParams(s=1.0, eta=1.0)
        with pytest.raises(ValueError):
            GevreyParams(s=2.0, eta=0.0)


class TestEnergies:
    def test_zero_state(self):
        st = SpectralState.zero(basis(4))
        assert hamiltonian(st) == 0.0
        assert dirichlet_energy(st) == 0.0

    def test_single_mode_position_only(self):
        a = 0.3
        st = SpectralState(basis(1), [a], [0.0])
        assert hamiltonian(st) == pytest.approx(a**2 / 2 + a**4 / 4, rel=1e-15)

    def test_single_mode_velocity_only(self):
        b = 0.7
        st = SpectralState(basis(1), [0.0], [b])
        assert hamiltonian(st) == pytest.approx(b**2 / 2, rel=1e-15)

    def test_dirichlet_single_mode(self):
        st = SpectralState(basis(2), [0.0, 1.0], [0.0, 0.0])
        assert dirichlet_energy(st) == pytest.approx(4.0, rel=1e-15)

    def test_dirichlet_two_modes(self):
        # mu = 1 and mu = 3: 1*4 + 9*1
        st = SpectralState(basis(3), [2.0, 0.0, 1.0], [0.0, 0.0, 0.0])
        assert dirichlet_energy(st) == pytest.approx(13.0, rel=1e-15)

    def test_hamiltonian_scaling_decomposition(self):
        rng = np.random.default_rng(3)
        b = basis(6)
        pos = rng.normal(size=6)
        vel = rng.normal(size=6)
        st = SpectralState(b, pos, vel)
        d = dirichlet_energy(st)
        v = float(np.sum(vel**2))
        for alpha in (0.5, 1.0, 2.0):
            scaled = SpectralState(b, alpha * pos, alpha * vel)
            expected = alpha**2 * 0.5 * (d + v) + alpha**4 * 0.25 * d**2
            assert hamiltonian(scaled) == pytest.approx(expected, rel=1e-13)


class TestTrajectory:
    def test_series_match_per_state_values(self):
        rng = np.random.default_rng(5)
        b = basis(3)
        times = np.linspace(0.0, 1.0, 4)
        pos = rng.normal(size=(3, 4))
        vel = rng.normal(size=(3, 4))
        traj = Trajectory(b, times, pos, vel)
        ham = traj.hamiltonian_series()
        for i in range(4):
            assert ham[i] == pytest.approx(hamiltonian(traj.state_at(i)), rel=1e-13)
        assert np.allclose(traj.induced_speed_series(), np.sqrt(1 + traj.dirichlet_series()))

    def test_state_norm_matches_data_radius(self):
        rng = np.random.default_rng(9)
        b = basis(5)
        st = SpectralState(b, rng.normal(size=5), rng.normal(size=5))
        gp = GevreyParams(2.0, 0.7)
        assert state_gevrey_norm(st, gp) == pytest.approx(
            math.sqrt(data_radius(st.position, st.velocity, b, gp)), rel=1e-13
        )
