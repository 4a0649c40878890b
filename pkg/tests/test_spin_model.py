import math

import numpy as np
import pytest

from sbskit import densmat, spin_model
from sbskit.spin_model import MacrofractionSpec, SpinParams


def random_params(rng, **over):
    kw = dict(
        alpha=rng.uniform(0, 2 * np.pi),
        beta=rng.uniform(0, np.pi),
        gamma_euler=rng.uniform(0, 2 * np.pi),
        lam=rng.uniform(0, 1),
        g=rng.uniform(0, 1),
    )
    kw.update(over)
    return SpinParams(**kw)


def evolve_oracle(p, t, sign):
    """Independent route: explicit unitary conjugation of R D R^dagger."""
    u = np.diag([np.exp(0.5j * sign * p.g * t), np.exp(-0.5j * sign * p.g * t)])
    return u @ spin_model.initial_spin_state(p) @ u.conj().T


class TestSpinParams:
    def test_range_validation(self):
        with pytest.raises(ValueError, match="beta"):
            SpinParams(0.0, 4.0, 0.0, 0.5, 1.0)
        with pytest.raises(ValueError, match="lam"):
            SpinParams(0.0, 1.0, 0.0, 1.5, 1.0)


class TestLayoutTypes:
    def test_macrofraction_nonempty(self):
        with pytest.raises(ValueError, match="at least one"):
            MacrofractionSpec(())

    def test_environment_counts(self):
        rng = np.random.default_rng(0)
        macs = tuple(
            MacrofractionSpec(tuple(random_params(rng) for _ in range(3))) for _ in range(2)
        )
        unobs = tuple(random_params(rng) for _ in range(4))
        env = spin_model.EnvironmentSpec(macs, unobs)
        assert env.n_total == 10
        assert env.n_observed == 6
        assert env.fraction_observed == pytest.approx(0.6)


class TestInitialState:
    def test_pointer_eigenstate(self):
        rho = spin_model.initial_spin_state(SpinParams(0.0, 0.0, 0.0, 1.0, 1.0))
        np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-14)

    def test_maximally_mixed_rotation_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            rho = spin_model.initial_spin_state(random_params(rng, lam=0.5))
            np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-14)

    def test_equatorial_pure_state(self):
        rho = spin_model.initial_spin_state(SpinParams(0.0, np.pi / 2, 0.0, 1.0, 1.0))
        np.testing.assert_allclose(rho, np.full((2, 2), 0.5), atol=1e-14)

    def test_spectrum_is_lambda(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = random_params(rng)
            w = np.linalg.eigvalsh(spin_model.initial_spin_state(p))
            np.testing.assert_allclose(sorted(w), sorted([p.lam, 1 - p.lam]), atol=1e-12)

    def test_third_euler_angle_is_irrelevant(self):
        # R_z(gamma) commutes with diag(lam, 1-lam), so gamma drops out
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = random_params(rng)
            q = SpinParams(p.alpha, p.beta, rng.uniform(0, 2 * np.pi), p.lam, p.g)
            np.testing.assert_allclose(
                spin_model.initial_spin_state(p), spin_model.initial_spin_state(q), atol=1e-14
            )

    def test_delta_and_pi_match_matrix_elements(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = random_params(rng)
            rho = spin_model.initial_spin_state(p)
            assert abs(spin_model.delta(p) - rho[0, 1]) < 1e-13
            assert abs(spin_model.pi_diag(p) - rho[0, 0].real) < 1e-13


class TestEvolvedBranchStates:
    def test_time_zero(self):
        rng = np.random.default_rng(4)
        p = random_params(rng)
        rho_p, rho_m = spin_model.evolved_branch_states(p, 0.0)
        ini = spin_model.initial_spin_state(p)
        np.testing.assert_allclose(rho_p, ini, atol=1e-14)
        np.testing.assert_allclose(rho_m, ini, atol=1e-14)

    def test_pointer_eigenstate_frozen(self):
        p = SpinParams(0.0, 0.0, 0.0, 1.0, 0.7)
        for t in (0.0, 1.3, 11.0):
            rho_p, rho_m = spin_model.evolved_branch_states(p, t)
            np.testing.assert_allclose(rho_p, np.diag([1.0, 0.0]), atol=1e-14)
            np.testing.assert_allclose(rho_m, np.diag([1.0, 0.0]), atol=1e-14)

    def test_matches_unitary_conjugation(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p = random_params(rng)
            t = rng.uniform(0, 10)
            rho_p, rho_m = spin_model.evolved_branch_states(p, t)
            assert np.max(np.abs(rho_p - evolve_oracle(p, t, +1))) < 1e-12
            assert np.max(np.abs(rho_m - evolve_oracle(p, t, -1))) < 1e-12

    def test_equatorial_counter_rotation(self):
        p = SpinParams(0.0, np.pi / 2, 0.0, 1.0, 1.0)
        t = 0.9
        rho_p, rho_m = spin_model.evolved_branch_states(p, t)
        assert np.max(np.abs(rho_p - evolve_oracle(p, t, +1))) < 1e-12
        assert np.max(np.abs(rho_m - evolve_oracle(p, t, -1))) < 1e-12
        # both remain pure
        for rho in (rho_p, rho_m):
            assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)

    def test_spectrum_conserved(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            p = random_params(rng)
            rho_p, _ = spin_model.evolved_branch_states(p, rng.uniform(0, 5))
            w = np.linalg.eigvalsh(rho_p)
            np.testing.assert_allclose(sorted(w), sorted([p.lam, 1 - p.lam]), atol=1e-12)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            spin_model.evolved_branch_states(SpinParams(0, 0, 0, 1, 1), -1.0)


class TestDecoherenceFactor:
    def test_time_zero(self):
        rng = np.random.default_rng(7)
        spins = [random_params(rng) for _ in range(5)]
        assert spin_model.decoherence_factor(spins, 0.0) == pytest.approx(1.0 + 0.0j)

    def test_pointer_eigenstate_pure_phase(self):
        p = SpinParams(0.0, 0.0, 0.0, 1.0, 1.0)
        for t in (0.3, 1.7, 9.2):
            val = spin_model.decoherence_factor([p], t)
            assert abs(val) == pytest.approx(1.0, abs=1e-14)
            assert val == pytest.approx(np.exp(1j * p.g * t), abs=1e-12)

    def test_single_spin_value_and_oracle(self):
        # cos(pi/4) + i (0.5)(0.5) sin(pi/4)
        p = SpinParams(0.0, np.pi / 3, 0.0, 0.75, 1.0)
        t = np.pi / 4
        got = spin_model.decoherence_factor([p], t)
        assert got == pytest.approx(0.7071067811865476 + 0.17677669529663687j, abs=1e-12)
        # oracle route: Tr[U_+ rho U_-^dagger]
        u_p = np.diag([np.exp(0.5j * p.g * t), np.exp(-0.5j * p.g * t)])
        u_m = np.diag([np.exp(-0.5j * p.g * t), np.exp(0.5j * p.g * t)])
        oracle = np.trace(u_p @ spin_model.initial_spin_state(p) @ u_m.conj().T)
        assert got == pytest.approx(oracle, abs=1e-12)

    def test_modulus_bounded(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            spins = [random_params(rng) for _ in range(7)]
            assert abs(spin_model.decoherence_factor(spins, rng.uniform(0, 20))) <= 1 + 1e-12

    def test_log_path_matches_direct(self):
        rng = np.random.default_rng(9)
        spins = [random_params(rng) for _ in range(70)]
        t = 0.4
        direct = np.prod(
            [spin_model.decoherence_factor([s], t) for s in spins]
        )
        assert spin_model.decoherence_factor(spins, t) == pytest.approx(direct, rel=1e-12)

    def test_no_underflow_at_ten_thousand_spins(self):
        rng = np.random.default_rng(10)
        spins = [random_params(rng) for _ in range(10_000)]
        val = spin_model.decoherence_factor(spins, 2.0)
        assert np.isfinite(val.real) and np.isfinite(val.imag)
        assert abs(val) <= 1.0

    def test_periodicity_single_spin(self):
        rng = np.random.default_rng(11)
        p = random_params(rng, g=0.8)
        period = 2 * np.pi / p.g
        for t in (0.3, 1.1):
            a = spin_model.decoherence_factor([p], t)
            b = spin_model.decoherence_factor([p], t + period)
            assert a == pytest.approx(b, abs=1e-10)


class TestMacrofractionFidelity:
    def test_time_zero(self):
        rng = np.random.default_rng(12)
        mac = MacrofractionSpec(tuple(random_params(rng) for _ in range(4)))
        assert spin_model.macrofraction_fidelity(mac, 0.0) == 1.0

    def test_one_shot_zero(self):
        p = SpinParams(0.0, np.pi / 2, 0.0, 1.0, 1.0)
        assert spin_model.macrofraction_fidelity(MacrofractionSpec((p,)), np.pi / 2) == 0.0

    def test_single_spin_value(self):
        # sqrt(1 - 0.25 * 0.75 * 0.5) = sqrt(0.90625)
        p = SpinParams(0.0, np.pi / 3, 0.0, 0.75, 1.0)
        got = spin_model.macrofraction_fidelity(MacrofractionSpec((p,)), np.pi / 4)
        assert got == pytest.approx(math.sqrt(0.90625), abs=1e-12)
        assert got == pytest.approx(0.9519716382329886, abs=1e-12)

    def test_three_routes_agree(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            p = random_params(rng)
            t = rng.uniform(0, 2 * np.pi)
            closed = spin_model.macrofraction_fidelity(MacrofractionSpec((p,)), t)
            trace_det = spin_model.spin_fidelity_trace_det(p, t)
            eigen = densmat.fidelity(*spin_model.evolved_branch_states(p, t))
            assert abs(closed - trace_det) < 1e-9
            assert abs(closed - eigen) < 1e-9

    def test_multiplicative_over_disjoint_unions(self):
        rng = np.random.default_rng(14)
        left = tuple(random_params(rng) for _ in range(3))
        right = tuple(random_params(rng) for _ in range(4))
        t = 0.8
        whole = spin_model.macrofraction_fidelity(MacrofractionSpec(left + right), t)
        parts = spin_model.macrofraction_fidelity(
            MacrofractionSpec(left), t
        ) * spin_model.macrofraction_fidelity(MacrofractionSpec(right), t)
        assert whole == pytest.approx(parts, abs=1e-12)

    def test_log_path_matches_direct(self):
        rng = np.random.default_rng(15)
        spins = tuple(random_params(rng) for _ in range(80))
        t = 0.3
        direct = np.prod(
            [spin_model.macrofraction_fidelity(MacrofractionSpec((s,)), t) for s in spins]
        )
        got = spin_model.macrofraction_fidelity(MacrofractionSpec(spins), t)
        assert got == pytest.approx(direct, rel=1e-10)

    def test_periodicity_single_spin(self):
        rng = np.random.default_rng(16)
        p = random_params(rng, g=0.6)
        mac = MacrofractionSpec((p,))
        period = 2 * np.pi / p.g
        for t in (0.4, 2.0):
            assert spin_model.macrofraction_fidelity(mac, t) == pytest.approx(
                spin_model.macrofraction_fidelity(mac, t + period), abs=1e-10
            )


class TestLlnExponents:
    def test_time_zero(self):
        rng = np.random.default_rng(17)
        assert spin_model.lln_exponents(random_params(rng), 0.0) == (0.0, 0.0)

    def test_maximally_mixed_never_orthogonalizes(self):
        rng = np.random.default_rng(18)
        for t in (0.4, 2.2, 7.7):
            kappa, _ = spin_model.lln_exponents(random_params(rng, lam=0.5), t)
            assert kappa == 0.0

    def test_single_value(self):
        p = SpinParams(0.0, np.pi / 3, 0.0, 0.75, 1.0)
        kappa, _ = spin_model.lln_exponents(p, np.pi / 4)
        assert kappa == pytest.approx(-math.log(0.90625), abs=1e-12)
        assert kappa == pytest.approx(0.09844007281325252, abs=1e-12)

    def test_consistency_with_fidelity_and_gamma(self):
        rng = np.random.default_rng(19)
        spins = tuple(random_params(rng) for _ in range(6))
        t = 1.1
        kappas, chis = zip(*(spin_model.lln_exponents(s, t) for s in spins))
        b = spin_model.macrofraction_fidelity(MacrofractionSpec(spins), t)
        assert math.exp(-0.5 * sum(kappas)) == pytest.approx(b, abs=1e-10)
        gam = spin_model.decoherence_factor(spins, t)
        assert math.exp(-sum(chis)) == pytest.approx(abs(gam) ** 2, abs=1e-10)

    def test_divergence_reported_as_infinity(self):
        p = SpinParams(0.0, np.pi / 2, 0.0, 1.0, 1.0)
        kappa, chi = spin_model.lln_exponents(p, np.pi / 2)
        assert kappa == math.inf
        assert chi == math.inf


class TestShortTimeExponents:
    def test_time_zero(self):
        assert spin_model.short_time_exponents(1.0, 0.0) == (0.0, 0.0)

    def test_uniform_coupling_values(self):
        kappa, chi = spin_model.short_time_exponents(1.0 / 3.0, 0.1)
        assert kappa == pytest.approx(0.4 / 3.0 * 0.01, abs=1e-15)
        assert chi == pytest.approx(0.8 / 3.0 * 0.01, abs=1e-15)


class TestTimeScales:
    def test_ratio_identity(self):
        t_b, t_d, ratio_sq = spin_model.time_scales(200, 100, 0.5, 1.0 / 3.0)
        assert ratio_sq == pytest.approx(4.0, abs=1e-14)
        assert (t_b / t_d) ** 2 == pytest.approx(ratio_sq, rel=1e-12)

    def test_broadcast_time_value(self):
        t_b, _, _ = spin_model.time_scales(200, 100, 0.5, 1.0 / 3.0)
        assert t_b == pytest.approx(math.sqrt(5.0 * math.log(100) * 3.0 / 100.0), abs=1e-14)
        assert t_b == pytest.approx(0.8311290681345551, abs=1e-12)

    def test_unobserved_count_enters_decoherence_time(self):
        _, t_d_half, _ = spin_model.time_scales(400, 100, 0.5, 1.0 / 3.0)
        _, t_d_all, _ = spin_model.time_scales(400, 100, 0.0, 1.0 / 3.0)
        # f = 0 leaves the whole environment unobserved: faster decoherence
        assert t_d_all == pytest.approx(t_d_half / math.sqrt(2.0), rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="n_mac"):
            spin_model.time_scales(10, 1, 0.0, 1.0)
        with pytest.raises(ValueError, match="f must"):
            spin_model.time_scales(10, 5, 1.0, 1.0)
