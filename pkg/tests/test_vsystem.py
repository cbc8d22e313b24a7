"""Hamiltonian construction, propagation, and observables of the V system."""

import numpy as np
import pytest

from vnoise import (
    CarrierScheme,
    CouplingScheme,
    DriveConfig,
    NumericalGuardError,
    TimeGrid,
    VSystemParams,
    build_hamiltonian,
    coherence_fraction,
    ground_state,
    hamiltonian_path,
    propagate,
    purity,
)
from vnoise.vsystem import check_density_matrix

SYS = VSystemParams(omega_21=2.0 * np.pi / 400.0, rabi_1=0.02, rabi_2=0.015)


def reference_hamiltonian(t, sys, env1, env2, cfg, det1=0.0, det2=0.0):
    """Independent oracle: explicit-carrier Hamiltonian with absolute level
    energies, numerically transformed to the frame rotating with the levels."""
    w1 = 5.0  # arbitrary absolute energies; only differences can matter
    w2 = w1 + sys.omega_21
    if cfg.carrier is CarrierScheme.PER_TRANSITION:
        wc1, wc2 = w1 + det1, w2 + det2
    else:
        mid = 0.5 * (w1 + w2)
        wc1, wc2 = mid + det1, mid + det2
    h01 = -sys.rabi_1 * env1 * np.exp(1j * wc1 * t)
    h02 = -sys.rabi_2 * env2 * np.exp(1j * wc2 * t)
    if cfg.coupling is CouplingScheme.CROSS_COUPLED:
        h01 += -sys.rabi_2 * env2 * np.exp(1j * wc2 * t)
        h02 += -sys.rabi_1 * env1 * np.exp(1j * wc1 * t)
    h = np.array(
        [
            [0.0, h01, h02],
            [np.conj(h01), w1, 0.0],
            [np.conj(h02), 0.0, w2],
        ],
        dtype=complex,
    )
    w = np.diag([1.0, np.exp(1j * w1 * t), np.exp(1j * w2 * t)])
    w_dot = np.diag([0.0, 1j * w1, 1j * w2]) @ w
    return w @ h @ w.conj().T + 1j * w_dot @ w.conj().T


class TestBuildHamiltonian:
    def test_resonant_exclusive_is_real_constant(self):
        cfg = DriveConfig(CouplingScheme.EXCLUSIVE, CarrierScheme.PER_TRANSITION)
        h = build_hamiltonian(37.5, SYS, 1.0, 1.0, cfg)
        want = np.zeros((3, 3), dtype=complex)
        want[0, 1] = want[1, 0] = -SYS.rabi_1
        want[0, 2] = want[2, 0] = -SYS.rabi_2
        assert np.array_equal(h, want)

    def test_no_direct_excited_coupling_and_zero_diagonal(self):
        rng = np.random.default_rng(0)
        for coupling in CouplingScheme:
            for carrier in CarrierScheme:
                t = rng.uniform(0, 500)
                e1, e2 = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
                h = build_hamiltonian(t, SYS, e1, e2, DriveConfig(coupling, carrier))
                assert h[1, 2] == 0.0 and h[2, 1] == 0.0
                assert np.all(np.diag(h) == 0.0)
                assert np.max(np.abs(h - h.conj().T)) == 0.0

    @pytest.mark.parametrize("coupling", list(CouplingScheme))
    @pytest.mark.parametrize("carrier", list(CarrierScheme))
    def test_matches_frame_transformation_oracle(self, coupling, carrier):
        cfg = DriveConfig(coupling, carrier)
        rng = np.random.default_rng(7)
        for _ in range(100):
            t = rng.uniform(0.0, 1000.0)
            e1, e2 = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
            det1, det2 = rng.uniform(-0.01, 0.01, 2)
            got = build_hamiltonian(t, SYS, e1, e2, cfg, det1, det2)
            want = reference_hamiltonian(t, SYS, e1, e2, cfg, det1, det2)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_envelope_modulus_checked(self):
        cfg = DriveConfig()
        with pytest.raises(ValueError):
            build_hamiltonian(0.0, SYS, 1.1, 1.0, cfg)

    def test_param_validation(self):
        from vnoise.errors import ConfigError

        with pytest.raises(ConfigError):
            VSystemParams(-0.1, 0.01, 0.01)
        with pytest.raises(ConfigError):
            VSystemParams(0.1, -0.01, 0.01)
        assert VSystemParams.from_tau_c(400.0, 0.01, 0.01).tau_c == pytest.approx(400.0)


def random_noisy_path(grid, rng, sys=SYS, cfg=None):
    cfg = cfg or DriveConfig(CouplingScheme.CROSS_COUPLED, CarrierScheme.COMMON_CARRIER)
    mid = grid.midpoints()
    e1 = np.exp(1j * rng.uniform(0, 2 * np.pi, mid.n_samples))
    e2 = np.exp(1j * rng.uniform(0, 2 * np.pi, mid.n_samples))
    return hamiltonian_path(sys, e1, e2, mid.times(), cfg)


class TestPropagate:
    def test_free_evolution_is_identity(self):
        grid = TimeGrid.from_span(100.0, 1.0)
        h = np.zeros((grid.n_samples - 1, 3, 3), dtype=complex)
        rho0 = np.diag([0.5, 0.3, 0.2]).astype(complex)
        states = propagate(rho0, h, grid)
        assert np.max(np.abs(states - rho0)) == 0.0

    def test_two_level_rabi_oracle(self):
        # resonant constant drive on g<->1: rho_11(t) = sin^2(rabi * t)
        rabi = 0.01
        period = np.pi / rabi
        grid = TimeGrid(1001, 10.0 * period / 1000.0)
        sys = VSystemParams(0.0, rabi, 0.0)
        mid = grid.midpoints()
        ones = np.ones(mid.n_samples, dtype=complex)
        h = hamiltonian_path(sys, ones, ones, mid.times(), DriveConfig())
        states = propagate(ground_state(), h, grid)
        want = np.sin(rabi * grid.times()) ** 2
        assert np.max(np.abs(states[:, 1, 1].real - want)) < 1e-8

    def test_piecewise_exp_vs_rk4(self):
        rng = np.random.default_rng(11)
        grid = TimeGrid.from_span(400.0, 2.0)
        h = random_noisy_path(grid, rng)
        a = propagate(ground_state(), h, grid, method="piecewise_exp")
        b = propagate(ground_state(), h, grid, method="rk4", rk_substeps=10)
        assert np.max(np.abs(a - b)) < 1e-6

    def test_unitary_step_conservation(self):
        rng = np.random.default_rng(3)
        grid = TimeGrid.from_span(600.0, 2.0)
        h = random_noisy_path(grid, rng)
        rho0 = np.diag([0.6, 0.3, 0.1]).astype(complex)
        states = propagate(rho0, h, grid)
        eig0 = np.sort(np.linalg.eigvalsh(rho0))
        for rho in states[:: states.shape[0] // 20]:
            assert abs(np.trace(rho) - 1.0) < 1e-12
            assert abs(purity(rho) - purity(rho0)) < 1e-12
            assert np.max(np.abs(np.sort(np.linalg.eigvalsh(rho)) - eig0)) < 1e-12

    def test_pure_state_stays_pure(self):
        rng = np.random.default_rng(5)
        grid = TimeGrid.from_span(1000.0, 1.0)
        h = random_noisy_path(grid, rng)
        states = propagate(ground_state(), h, grid)
        assert np.max(np.abs(purity(states) - 1.0)) < 1e-10

    def test_frame_invariance_of_observables(self):
        # same trajectory in the zero-diagonal frame (detunings as coupling
        # phases) and in the static frame (detunings on the diagonal)
        sys = VSystemParams(2.0 * np.pi / 200.0, 0.02, 0.02)
        cfg = DriveConfig(CouplingScheme.EXCLUSIVE, CarrierScheme.COMMON_CARRIER)
        grid = TimeGrid.from_span(200.0, 0.05)
        mid = grid.midpoints()
        rng = np.random.default_rng(19)
        # piecewise-constant envelopes with a few phase jumps
        jumps = np.sort(rng.uniform(0, grid.span, 5))
        seg = np.searchsorted(jumps, mid.times())
        phases1 = rng.uniform(0, 2 * np.pi, 6)[seg]
        phases2 = rng.uniform(0, 2 * np.pi, 6)[seg]
        e1, e2 = np.exp(1j * phases1), np.exp(1j * phases2)

        h_rot = hamiltonian_path(sys, e1, e2, mid.times(), cfg)
        d1, d2 = 0.5 * sys.omega_21, -0.5 * sys.omega_21
        h_static = np.zeros_like(h_rot)
        h_static[:, 0, 1] = -sys.rabi_1 * e1
        h_static[:, 1, 0] = np.conj(h_static[:, 0, 1])
        h_static[:, 0, 2] = -sys.rabi_2 * e2
        h_static[:, 2, 0] = np.conj(h_static[:, 0, 2])
        h_static[:, 1, 1] = -d1
        h_static[:, 2, 2] = -d2

        a = propagate(ground_state(), h_rot, grid)
        b = propagate(ground_state(), h_static, grid)
        for i in range(3):
            assert np.max(np.abs(a[:, i, i] - b[:, i, i])) < 1e-6
        assert np.max(np.abs(np.abs(a[:, 1, 2]) - np.abs(b[:, 1, 2]))) < 1e-6
        assert np.max(np.abs(purity(a) - purity(b))) < 1e-6
        assert np.max(np.abs(coherence_fraction(a) - coherence_fraction(b))) < 1e-6
        # and the coherence phases differ exactly by the frame rotation
        phase = np.exp(1j * (d1 - d2) * grid.times())
        mask = np.abs(a[:, 1, 2]) > 1e-6
        ratio = b[mask, 1, 2] / a[mask, 1, 2]
        assert np.max(np.abs(ratio - phase[mask])) < 1e-4

    def test_two_level_reduction(self):
        sys = VSystemParams(0.05, 0.02, 0.0)
        grid = TimeGrid.from_span(500.0, 1.0)
        mid = grid.midpoints()
        rng = np.random.default_rng(23)
        e = np.exp(1j * rng.uniform(0, 2 * np.pi, mid.n_samples))
        h = hamiltonian_path(sys, e, e, mid.times(), DriveConfig())
        states = propagate(ground_state(), h, grid)
        assert np.all(states[:, 2, 2] == 0.0)
        assert np.all(states[:, 1, 2] == 0.0)
        assert np.all(states[:, 0, 2] == 0.0)

    def test_step_size_guard(self):
        grid = TimeGrid.from_span(10.0, 1.0)
        h = np.zeros((grid.n_samples - 1, 3, 3), dtype=complex)
        h[:, 0, 1] = h[:, 1, 0] = -0.6
        with pytest.raises(NumericalGuardError):
            propagate(ground_state(), h, grid)

    def test_shape_mismatch_rejected(self):
        grid = TimeGrid.from_span(10.0, 1.0)
        h = np.zeros((3, 3, 3), dtype=complex)
        with pytest.raises(ValueError):
            propagate(ground_state(), h, grid)


class TestObservables:
    def test_purity_values(self):
        assert purity(ground_state()) == pytest.approx(1.0, abs=1e-15)
        assert purity(np.eye(3, dtype=complex) / 3.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert purity(np.diag([0.5, 0.5, 0.0]).astype(complex)) == pytest.approx(0.5, abs=1e-15)

    def test_coherence_fraction_values(self):
        sym = np.zeros((3, 3), dtype=complex)
        sym[1:, 1:] = 0.5
        assert coherence_fraction(sym) == pytest.approx(0.5, abs=1e-15)
        assert coherence_fraction(ground_state()) == 0.0
        mixed = np.diag([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).astype(complex)
        assert coherence_fraction(mixed) == 0.0

    def test_coherence_fraction_bounded_for_physical_states(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            assert 0.0 <= coherence_fraction(rho) <= 0.5 + 1e-12

    def test_check_density_matrix(self):
        check_density_matrix(ground_state())
        bad_trace = np.diag([0.5, 0.3, 0.1]).astype(complex)
        with pytest.raises(ValueError):
            check_density_matrix(bad_trace)
        not_herm = ground_state()
        not_herm[0, 1] = 0.1
        with pytest.raises(ValueError):
            check_density_matrix(not_herm)
        not_psd = np.diag([1.1, 0.4, -0.5]).astype(complex)
        with pytest.raises(ValueError):
            check_density_matrix(not_psd)
        with pytest.raises(ValueError):
            check_density_matrix(np.eye(2, dtype=complex) / 2.0)
