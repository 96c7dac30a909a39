import math

import numpy as np
import pytest

from levspin.errors import PhaseUndefinedError, ValidationError
from levspin.fockspace import (SPINS, FockVector, SpinSectorState, basis_vector,
                               coherent_vector, initial_state)
from levspin.observables import (compare_to_formulas, entanglement,
                                 entanglement_from_density, phase_extract,
                                 reduce_spin, sector_positions, state_fidelity,
                                 unwrap_by_formula, wrap_phase)
from levspin.params import (DimensionlessParams, PhysicalParams, derive_scales,
                            eval_eta, eval_phi, with_cancellation)
from levspin.propagators import evolve_oracle

DESK = DimensionlessParams(kappa=0.1, u0=1.0, dD=0.3)


def random_state(rng, n_cutoff=16) -> SpinSectorState:
    sectors = {}
    raw = {s: rng.normal(size=n_cutoff) + 1j * rng.normal(size=n_cutoff) for s in SPINS}
    total = math.sqrt(sum(float(np.vdot(v, v).real) for v in raw.values()))
    for s in SPINS:
        sectors[s] = FockVector(raw[s] / total)
    return SpinSectorState(sectors=sectors)


class TestWrapPhase:
    @pytest.mark.parametrize("x,expected", [
        (0.0, 0.0),
        (math.pi, math.pi),
        (-math.pi, math.pi),
        (3 * math.pi, math.pi),
        (2 * math.pi, 0.0),
        (-2.5132741228718345 - 2 * math.pi, -2.5132741228718345),
    ])
    def test_values(self, x, expected):
        assert wrap_phase(x) == pytest.approx(expected, abs=1e-12)

    def test_range(self):
        for x in np.linspace(-30, 30, 401):
            w = wrap_phase(float(x))
            assert -math.pi < w <= math.pi


class TestReduceSpin:
    def test_initial_product_state(self):
        state = initial_state(coherent_vector(0.0, 16))
        rho = reduce_spin(state).rho
        expected = np.array([[0.5, 0, 0.5], [0, 0, 0], [0.5, 0, 0.5]], dtype=complex)
        np.testing.assert_allclose(rho, expected, atol=1e-12)

    def test_single_sector_is_pure(self):
        state = initial_state(coherent_vector(0.4, 16), spin_weights=(1.0, 0.0, 0.0))
        rho = reduce_spin(state)
        report = entanglement_from_density(rho)
        assert report.purity == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.matrix_rank(rho.rho, tol=1e-10) == 1

    def test_period_coherence_value(self):
        # after N periods the coherence is 0.5 e^{-i N phi} for any psi0
        n_periods = 2
        for psi0 in (coherent_vector(0.7 + 0.1j, 64), basis_vector(2, 64)):
            state = initial_state(psi0)
            out = evolve_oracle(state, DESK, n_periods * 2 * math.pi).state
            coh = reduce_spin(out).coherence
            expected = 0.5 * np.exp(-1j * eval_phi(DESK, n_periods))
            assert abs(coh - expected) < 1e-8

    def test_norm_audit(self):
        v = coherent_vector(0.0, 8)
        bad = SpinSectorState.__new__(SpinSectorState)
        object.__setattr__(bad, "sectors", {1: v.scaled(0.8), 0: v.scaled(0.0), -1: v.scaled(0.5)})
        object.__setattr__(bad, "time", 0.0)
        with pytest.raises(ValidationError):
            reduce_spin(bad)

    def test_density_matrix_properties_random_states(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            rho = reduce_spin(random_state(rng)).rho
            np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.eigvalsh(rho).min() >= -1e-10

    def test_coherence_bounded_by_populations(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            rho = reduce_spin(random_state(rng)).rho
            bound = math.sqrt(rho[0, 0].real * rho[2, 2].real) + 1e-10
            assert abs(rho[0, 2]) <= bound


class TestEntanglement:
    def test_product_state(self):
        report = entanglement(initial_state(coherent_vector(0.0, 16)))
        assert report.purity == pytest.approx(1.0, abs=1e-10)
        assert report.entropy == pytest.approx(0.0, abs=1e-8)
        assert report.coherence_mag == pytest.approx(0.5, abs=1e-10)

    def test_half_period_entangles(self):
        d = DimensionlessParams(kappa=0.3, u0=0.0, dD=0.3)
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, d, math.pi).state
        report = entanglement(out)
        assert report.purity < 1.0 - 1e-4
        assert report.entropy > 1e-4

    def test_full_period_disentangles(self):
        d = DimensionlessParams(kappa=0.3, u0=1.0, dD=0.3)
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, d, 2 * math.pi).state
        report = entanglement(out)
        assert report.purity == pytest.approx(1.0, abs=1e-8)
        assert report.entropy <= 1e-7

    def test_purity_entropy_consistency(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            report = entanglement(random_state(rng))
            assert 1.0 / 3.0 - 1e-12 <= report.purity <= 1.0 + 1e-12
            if report.purity > 1.0 - 1e-10:
                assert report.entropy < 1e-8

    def test_spin_only_term_cannot_change_purity_or_visibility(self):
        # evolving with and without the uniform-field offset must leave
        # purity and |coherence| untouched: the offset only rotates phases
        base = DimensionlessParams(kappa=0.2, u0=1.0, dD=0.3)
        offset = with_cancellation(base)
        state = initial_state(coherent_vector(0.5, 64))
        for t in (0.9, math.pi, 5.1):
            a = entanglement(evolve_oracle(state, base, t).state)
            b = entanglement(evolve_oracle(state, offset, t).state)
            assert a.purity == pytest.approx(b.purity, abs=1e-12)
            assert a.coherence_mag == pytest.approx(b.coherence_mag, abs=1e-12)

    def test_period_visibility_independent_of_initial_vector(self):
        for psi0 in (coherent_vector(0.0, 64), coherent_vector(1.2 - 0.4j, 64),
                     basis_vector(3, 64)):
            out = evolve_oracle(initial_state(psi0), DESK, 2 * math.pi).state
            assert entanglement(out).coherence_mag == pytest.approx(0.5, abs=1e-8)


class TestSectorPositions:
    def test_vacuum_sits_at_shifted_origin(self):
        p = PhysicalParams(mass=6.2e-18, omega_z=1e5, b0_gradient=1e2)
        scales = derive_scales(p)
        state = initial_state(coherent_vector(0.0, 16))
        pos = sector_positions(state, scales)
        for s in (1, -1):
            assert pos.shifted[s] == pytest.approx(0.0, abs=1e-20)
            assert pos.lab[s] == pytest.approx(-scales.z0_shift, rel=1e-12)
        assert pos.shifted[0] is None and pos.lab[0] is None

    def test_orbit_average_separation(self):
        # one-period average of the +1/-1 separation equals 8 kappa exactly
        # (uniform grid sums of e^{-it} cancel)
        d = DimensionlessParams(kappa=0.2, u0=0.7, dD=0.3)
        state = initial_state(coherent_vector(0.3, 64))
        m = 32
        seps = []
        for j in range(m):
            t = 2 * math.pi * j / m
            out = evolve_oracle(state, d, t).state
            pos = sector_positions(out)
            seps.append(pos.shifted[1] - pos.shifted[-1])
        assert np.mean(seps) == pytest.approx(8 * d.kappa, abs=1e-9)

    def test_no_coupling_sectors_travel_together(self):
        d = DimensionlessParams(kappa=0.0, u0=1.0, dD=0.3)
        state = initial_state(coherent_vector(0.9, 64))
        for t in (0.5, 2.2):
            pos = sector_positions(evolve_oracle(state, d, t).state)
            assert pos.shifted[1] == pytest.approx(pos.shifted[-1], abs=1e-12)

    def test_separation_independent_of_sag(self):
        state = initial_state(coherent_vector(0.0, 64))
        t = 1.3
        seps = []
        for u0 in (0.0, 1.0, 2.5):
            d = DimensionlessParams(kappa=0.25, u0=u0, dD=0.3)
            pos = sector_positions(evolve_oracle(state, d, t).state)
            seps.append(pos.shifted[1] - pos.shifted[-1])
        assert max(seps) - min(seps) < 1e-10

    def test_unpopulated_state_rejected(self):
        zero = FockVector(np.zeros(8, dtype=complex))
        v = coherent_vector(0.0, 8)
        state = SpinSectorState(sectors={1: v.scaled(1.0), 0: zero, -1: zero.scaled(1.0)})
        pos = sector_positions(state)
        assert pos.shifted[-1] is None


class TestPhaseExtract:
    def test_zero_at_t0(self):
        state = initial_state(coherent_vector(0.0, 16))
        report = phase_extract(state, state)
        assert report.coherence_delta == 0.0

    @pytest.mark.parametrize("n_periods,expected", [
        (1, -2.5132741228718345),
        (2, 1.2566370614359172),   # -2 phi + 2 pi
    ])
    def test_period_phase_sign_convention(self, n_periods, expected):
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, DESK, n_periods * 2 * math.pi).state
        report = phase_extract(out, state)
        assert report.coherence_delta == pytest.approx(expected, abs=1e-8)

    def test_cancellation_nulls_delta(self):
        d = with_cancellation(DESK)
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, d, 2 * math.pi).state
        report = phase_extract(out, state)
        assert abs(report.coherence_delta) <= 1e-10

    def test_undefined_phase_raises(self):
        state = initial_state(coherent_vector(0.0, 16), spin_weights=(1.0, 0.0, 0.0))
        with pytest.raises(PhaseUndefinedError):
            phase_extract(state, state)

    def test_sector_phases_reported(self):
        state = initial_state(coherent_vector(0.0, 64))
        out = evolve_oracle(state, DESK, 2 * math.pi).state
        report = phase_extract(out, state)
        eta, phi = eval_eta(DESK, 1), eval_phi(DESK, 1)
        assert report.sector_phases[0] is None
        assert wrap_phase(report.sector_phases[1] - (eta - phi / 2)) == pytest.approx(0.0, abs=1e-8)
        assert wrap_phase(report.sector_phases[-1] - (eta + phi / 2)) == pytest.approx(0.0, abs=1e-8)

    def test_compare_to_formulas(self):
        state = initial_state(coherent_vector(0.0, 64))
        n = 5
        out = evolve_oracle(state, DESK, n * 2 * math.pi).state
        report = compare_to_formulas(phase_extract(out, state),
                                     eval_phi(DESK, n), eval_eta(DESK, n))
        assert report.phi_residual < 1e-8
        assert report.eta_residual < 1e-8
        assert report.winding == 2  # 5 * 0.8 pi = 4 pi unwinds twice


class TestUnwrapByFormula:
    def test_recovers_total(self):
        for n in (1, 2, 5, 9):
            total = n * eval_phi(DESK, 1)
            wrapped = wrap_phase(total)
            assert unwrap_by_formula(wrapped, total) == pytest.approx(total, abs=1e-12)


class TestStateFidelity:
    def test_self_fidelity(self):
        state = initial_state(coherent_vector(0.5, 32))
        assert state_fidelity(state, state) == pytest.approx(1.0, abs=1e-12)

    def test_detects_sector_phase_flip(self):
        state = initial_state(coherent_vector(0.0, 32))
        flipped = SpinSectorState(sectors={
            1: state.sectors[1].scaled(-1.0),
            0: state.sectors[0],
            -1: state.sectors[-1],
        })
        assert state_fidelity(state, flipped) == pytest.approx(0.0, abs=1e-12)
