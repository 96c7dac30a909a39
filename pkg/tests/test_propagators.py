import math

import numpy as np
import pytest
import scipy.linalg

from levspin.errors import (TruncationError, UnsupportedStateError,
                            ValidationError)
from levspin.fockspace import (SPINS, basis_vector, coherent_vector,
                               initial_state, ladder_matrices, superpose)
from levspin.observables import state_fidelity, wrap_phase
from levspin.params import DimensionlessParams, eval_eta, eval_phi
from levspin.propagators import (commutator_check, evolve_analytic,
                                 evolve_oracle, evolve_unshifted_oracle,
                                 full_split_hamiltonians, sector_hamiltonian,
                                 to_unshifted_frame, unshifted_sector_matrix)

DESK = DimensionlessParams(kappa=0.1, u0=1.0, dD=0.3)


def params(**overrides):
    kwargs = dict(kappa=0.1, u0=1.0, dD=0.3, n_cutoff=64)
    kwargs.update(overrides)
    return DimensionlessParams(**kwargs)


class TestSectorHamiltonian:
    def test_hermitian(self):
        for s in SPINS:
            h = sector_hamiltonian(DESK, s).matrix.matrix
            np.testing.assert_array_equal(h, h.conj().T)

    def test_spin_only_rate(self):
        d = params(u_offset=0.05)
        assert sector_hamiltonian(d, 1).h2_rate == pytest.approx(0.25, rel=1e-15)
        assert sector_hamiltonian(d, -1).h2_rate == pytest.approx(-0.25, rel=1e-15)
        assert sector_hamiltonian(d, 0).h2_rate == 0.0

    def test_invalid_spin_rejected(self):
        with pytest.raises(ValidationError):
            sector_hamiltonian(DESK, 2)


class TestOracleAgainstScipyExpm:
    """Independent cross-check: eigendecomposition route vs scipy.linalg.expm."""

    @pytest.mark.parametrize("s", SPINS)
    def test_propagator_matrix(self, s):
        d = params(kappa=0.23, dD=0.41, n_cutoff=24)
        h = sector_hamiltonian(d, s).matrix.matrix
        t = 1.37
        u_expm = scipy.linalg.expm(-1j * h * t)
        psi0 = coherent_vector(0.4 + 0.2j, 24)
        state = initial_state(psi0, spin_weights=tuple(1.0 if q == s else 0.0 for q in SPINS))
        evolved = evolve_oracle(state, d, t).state
        expected = u_expm @ psi0.amplitudes * np.exp(-1j * sector_hamiltonian(d, s).h2_rate * t)
        np.testing.assert_allclose(evolved.sectors[s].amplitudes, expected, atol=1e-12)


class TestAnalyticSignConventions:
    """The closed-form phase was fixed against the oracle on independent
    parameter points before being trusted; these pin that calibration."""

    @pytest.mark.parametrize("kappa,dD,beta,t", [
        (0.10, 0.00, 0.0 + 0.0j, 2.0 * math.pi),
        (0.25, 0.70, 1.0 + 0.5j, 1.234),
        (0.30, 0.30, -0.8 + 1.1j, 4.5),
    ])
    def test_three_point_calibration(self, kappa, dD, beta, t):
        d = params(kappa=kappa, dD=dD)
        state = initial_state(coherent_vector(beta, 64))
        analytic = evolve_analytic(state, d, t).state
        oracle = evolve_oracle(state, d, t).state
        assert state_fidelity(analytic, oracle) >= 1.0 - 1e-10
        for s in SPINS:
            np.testing.assert_allclose(analytic.sectors[s].amplitudes,
                                       oracle.sectors[s].amplitudes, atol=1e-8)

    def test_example_phase_value(self):
        # kappa=0.1, u0=1, dD=0, beta=0, t=2pi: s=+1 phase is eta - phi/2
        d = params(dD=0.0)
        state = initial_state(coherent_vector(0.0, 64))
        evolved = evolve_analytic(state, d, 2.0 * math.pi).state
        v0 = state.sectors[1]
        vt = evolved.sectors[1]
        phase = math.atan2(v0.inner(vt).imag, v0.inner(vt).real)
        eta = eval_eta(d, 1)
        phi = eval_phi(d, 1)
        assert eta == pytest.approx(0.25132741228718347, abs=1e-12)
        assert phi == pytest.approx(2.5132741228718345, abs=1e-12)
        assert wrap_phase(phase - (eta - phi / 2.0)) == pytest.approx(0.0, abs=1e-8)
        oracle = evolve_oracle(state, d, 2.0 * math.pi).state
        assert state_fidelity(evolved, oracle) >= 1.0 - 1e-8


class TestAnalyticBasics:
    def test_bare_oscillator_rotation(self):
        # kappa=0, beta=1, t=pi -> coherent(-1) with zero phase
        d = params(kappa=0.0, dD=0.0)
        state = initial_state(coherent_vector(1.0, 64), spin_weights=(1.0, 0.0, 0.0))
        evolved = evolve_analytic(state, d, math.pi).state
        expected = coherent_vector(-1.0, 64)
        np.testing.assert_allclose(evolved.sectors[1].amplitudes,
                                   expected.amplitudes, atol=1e-10)

    def test_s0_sector_is_bare(self):
        d = params(kappa=0.4, dD=0.9)
        state = initial_state(coherent_vector(0.8, 64), spin_weights=(0.0, 1.0, 0.0))
        evolved = evolve_analytic(state, d, 1.1).state
        bare = coherent_vector(0.8 * np.exp(-1.1j), 64)
        np.testing.assert_allclose(evolved.sectors[0].amplitudes,
                                   bare.amplitudes, atol=1e-10)

    def test_superposition_input(self):
        d = params()
        cat = superpose([(1.0, 0.9), (1.0, -0.9)], 64)
        state = initial_state(cat)
        analytic = evolve_analytic(state, d, 2.3).state
        oracle = evolve_oracle(state, d, 2.3).state
        assert state_fidelity(analytic, oracle) >= 1.0 - 1e-10

    def test_unsupported_state_raises(self):
        state = initial_state(basis_vector(3, 64))
        with pytest.raises(UnsupportedStateError):
            evolve_analytic(state, params(), 1.0)

    def test_norm_conserved(self):
        d = params()
        state = initial_state(coherent_vector(1.0 + 0.3j, 64))
        for t in (0.3, 2.0, 11.7):
            out = evolve_analytic(state, d, t).state
            assert out.total_norm_sq == pytest.approx(1.0, abs=1e-10)


class TestOracleBasics:
    def test_t0_identity(self):
        d = params()
        state = initial_state(coherent_vector(0.5, 64))
        out = evolve_oracle(state, d, 0.0).state
        for s in SPINS:
            np.testing.assert_allclose(out.sectors[s].amplitudes,
                                       state.sectors[s].amplitudes, atol=1e-12)

    def test_splitting_phase_symmetric_in_spin(self):
        # kappa=0: both +-1 sectors gain e^{-i 0.6 pi}, coherence phase untouched
        d = params(kappa=0.0, u0=0.0)
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, d, 2.0 * math.pi).state
        for s in (1, -1):
            ov = state.sectors[s].inner(out.sectors[s])
            got = math.atan2(ov.imag, ov.real)
            assert wrap_phase(got - (-0.6 * math.pi)) == pytest.approx(0.0, abs=1e-10)
        coherence = np.vdot(out.sectors[-1].amplitudes, out.sectors[1].amplitudes)
        assert math.atan2(coherence.imag, coherence.real) == pytest.approx(0.0, abs=1e-10)

    def test_norm_conserved(self):
        d = params()
        state = initial_state(basis_vector(3, 64))
        for t in (0.4, 3.9):
            out = evolve_oracle(state, d, t).state
            assert out.total_norm_sq == pytest.approx(1.0, abs=1e-10)

    def test_energy_conserved(self):
        d = params(kappa=0.2, dD=0.5)
        state = initial_state(coherent_vector(1.0, 64))
        h = {s: sector_hamiltonian(d, s).matrix.matrix for s in SPINS}

        def sector_energy(st, s):
            v = st.sectors[s].amplitudes
            return np.vdot(v, h[s] @ v).real

        e0 = {s: sector_energy(state, s) for s in (1, -1)}
        for t in (0.7, 2.9, 6.4):
            out = evolve_oracle(state, d, t).state
            for s in (1, -1):
                assert sector_energy(out, s) == pytest.approx(e0[s], abs=1e-8)

    def test_corner_state_aborts(self):
        d = params()
        state = initial_state(basis_vector(63, 64))
        with pytest.raises(TruncationError):
            evolve_oracle(state, d, 1.0)

    def test_cutoff_mismatch_rejected(self):
        state = initial_state(coherent_vector(0.0, 32))
        with pytest.raises(ValidationError):
            evolve_oracle(state, params(n_cutoff=64), 1.0)


class TestPeriodReturn:
    """At t = 2 pi N every sector returns with phase N eta s^2 - (N phi / 2) s,
    independent of the initial oscillator vector."""

    @pytest.mark.parametrize("make_psi0", [
        lambda: coherent_vector(0.0, 64),
        lambda: coherent_vector(0.5, 64),
        lambda: coherent_vector(1.0 + 1.0j, 64),
        lambda: basis_vector(3, 64),
    ])
    @pytest.mark.parametrize("n_periods", [1, 3])
    def test_oracle_return(self, make_psi0, n_periods):
        d = params()
        eta = eval_eta(d, n_periods)
        phi = eval_phi(d, n_periods)
        state = initial_state(make_psi0())
        out = evolve_oracle(state, d, n_periods * 2.0 * math.pi).state
        for s in (1, -1):
            v0, vt = state.sectors[s], out.sectors[s]
            fidelity = abs(v0.inner(vt)) / v0.norm ** 2
            assert fidelity >= 1.0 - 1e-8
            got = math.atan2(v0.inner(vt).imag, v0.inner(vt).real)
            want = eta * s * s - (phi / 2.0) * s
            assert abs(wrap_phase(got - want)) < 1e-8

    def test_analytic_return(self):
        d = params()
        state = initial_state(coherent_vector(1.0 + 1.0j, 64))
        out = evolve_analytic(state, d, 2.0 * math.pi).state
        for s in (1, -1):
            v0, vt = state.sectors[s], out.sectors[s]
            assert abs(v0.inner(vt)) / v0.norm ** 2 >= 1.0 - 1e-10
            got = math.atan2(v0.inner(vt).imag, v0.inner(vt).real)
            want = eval_eta(d, 1) * s * s - (eval_phi(d, 1) / 2.0) * s
            assert abs(wrap_phase(got - want)) < 1e-10


class TestComposition:
    @pytest.mark.parametrize("evolve", [evolve_analytic, evolve_oracle])
    def test_semigroup(self, evolve):
        d = params()
        state = initial_state(coherent_vector(0.7 - 0.2j, 64))
        t1, t2 = 1.3, 2.8
        stepped = evolve(evolve(state, d, t1).state, d, t2).state
        direct = evolve(state, d, t1 + t2).state
        assert state_fidelity(stepped, direct) >= 1.0 - 1e-8
        assert stepped.time == pytest.approx(direct.time, rel=1e-15)


class TestSplitStructure:
    def test_h2_order_irrelevant(self):
        # applying the spin-only phase before or after the sector step is
        # identical to machine precision: it is a scalar per sector
        d = params()
        t = 1.9
        state = initial_state(coherent_vector(0.4, 64))
        from levspin.propagators import _sector_eigensystem, spin_rate
        for s in (1, -1):
            v = state.sectors[s].amplitudes
            w, vecs = _sector_eigensystem(d.kappa, d.dD, d.n_cutoff, s)
            phase = np.exp(-1j * spin_rate(d, s) * t)
            after = phase * (vecs @ (np.exp(-1j * w * t) * (vecs.conj().T @ v)))
            before = vecs @ (np.exp(-1j * w * t) * (vecs.conj().T @ (phase * v)))
            np.testing.assert_allclose(after, before, atol=1e-14)

    def test_commutator_exactly_zero(self):
        assert commutator_check(DESK) == 0.0

    def test_commutator_zero_for_random_parameters(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            d = DimensionlessParams(
                kappa=float(rng.uniform(-0.5, 0.5)),
                u0=float(rng.uniform(-3, 3)),
                dD=float(rng.uniform(0, 2)),
                n_cutoff=int(rng.choice([8, 16, 32])),
                u_offset=float(rng.uniform(-1, 1)),
            )
            assert commutator_check(d) == 0.0

    def test_full_blocks_are_block_diagonal(self):
        d = params(n_cutoff=8)
        h1, h2 = full_split_hamiltonians(d)
        n = 8
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert np.abs(h1[i * n:(i + 1) * n, j * n:(j + 1) * n]).max() == 0.0
                    assert np.abs(h2[i * n:(i + 1) * n, j * n:(j + 1) * n]).max() == 0.0


class TestUnshiftedFrame:
    def test_u0_zero_frames_coincide(self):
        d = params(u0=0.0)
        state = initial_state(coherent_vector(0.6, 64))
        same = to_unshifted_frame(state, d)
        out_shifted = evolve_oracle(state, d, 1.7).state
        out_unshifted = evolve_unshifted_oracle(same, d, 1.7).state
        for s in SPINS:
            np.testing.assert_allclose(out_unshifted.sectors[s].amplitudes,
                                       out_shifted.sectors[s].amplitudes, atol=1e-10)

    def test_frame_conversion_shifts_position_by_u0(self):
        d = params()
        state = initial_state(coherent_vector(0.3, 64))
        converted = to_unshifted_frame(state, d)
        quad = ladder_matrices(64).quadrature.matrix

        def mean_q(st, s):
            v = st.sectors[s].amplitudes
            return np.vdot(v, quad @ v).real / np.vdot(v, v).real

        for s in (1, -1):
            assert mean_q(converted, s) == pytest.approx(mean_q(state, s) - d.u0, abs=1e-8)

    def test_spin_observables_match_across_frames(self):
        d = params()
        state = initial_state(coherent_vector(0.0, 64))
        unshifted0 = to_unshifted_frame(state, d)
        for t in (0.9, math.pi, 2.0 * math.pi):
            a = evolve_oracle(state, d, t).state
            b = evolve_unshifted_oracle(unshifted0, d, t).state
            coh_a = np.vdot(a.sectors[-1].amplitudes, a.sectors[1].amplitudes)
            coh_b = np.vdot(b.sectors[-1].amplitudes, b.sectors[1].amplitudes)
            assert abs(coh_a - coh_b) < 1e-8

    def test_unshifted_matrix_content(self):
        d = params(n_cutoff=8)
        ops = ladder_matrices(8)
        expected = (0.3 * np.eye(8) + ops.number.matrix
                    + (0.5 - 0.2) * ops.quadrature.matrix)
        np.testing.assert_allclose(unshifted_sector_matrix(d, 1), expected, atol=1e-15)
