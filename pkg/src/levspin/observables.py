"""Everything measurable: reduced spin state, coherence, purity, positions.

The reduced spin density matrix is the Gram matrix of the sector vectors,
rho[s, s'] = <v_s'|v_s>, indexed (+1, 0, -1). For a pure total state its
purity and entropy quantify spin-oscillator entanglement; the coherence
element rho[+1, -1] carries the interferometric signal (magnitude =
visibility, argument = measured phase).

Phases are reported wrapped to (-pi, pi]. A single coherence measurement
cannot tell phi from phi + 2 pi — exactly like the physical
interferometer — so any winding count attached to a report comes from the
formula prediction, recorded separately from the measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhaseUndefinedError, ValidationError
from .fockspace import SPINS, SpinSectorState, ladder_matrices
from .params import DerivedScales

_EIG_CLIP = 1e-15


def wrap_phase(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(x, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class SpinDensity:
    """3x3 reduced spin density matrix, rows/cols ordered (+1, 0, -1)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.complex128).copy()
        if rho.shape != (3, 3):
            raise ValidationError("rho", "must be 3x3")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def coherence(self) -> complex:
        """The (+1, -1) off-diagonal element."""
        return complex(self.rho[0, 2])


@dataclass(frozen=True)
class EntanglementReport:
    purity: float
    entropy: float
    coherence_mag: float
    coherence_phase: float


@dataclass(frozen=True)
class SectorPositions:
    """Mean positions per sector; None marks an unpopulated sector.

    ``shifted`` is measured from the sagged trap center, ``lab`` from the
    bare trap center (lab = shifted - z0). Units are meters when built
    from DerivedScales, z_zpf units otherwise.
    """

    shifted: dict[int, float | None]
    lab: dict[int, float | None]
    mean_shifted: float
    mean_lab: float


@dataclass(frozen=True)
class PhaseReport:
    """Extracted phases, optionally compared against the closed forms.

    coherence_delta   arg rho[+1,-1](t) - arg rho[+1,-1](0), wrapped
    sector_phases     arg <v_s(0)|v_s(t)> per populated sector
    phi_formula       predicted total +1/-1 relative phase (unwrapped)
    eta_formula       predicted total s^2 phase (unwrapped)
    phi_residual      |wrap(coherence_delta - (-phi_formula))|
    eta_residual      worst |wrap(sector_phase - prediction)| over sectors
    winding           formula-supplied winding count of phi (not measured)
    """

    coherence_delta: float
    sector_phases: dict[int, float | None]
    phi_formula: float | None = None
    eta_formula: float | None = None
    phi_residual: float | None = None
    eta_residual: float | None = None
    winding: int | None = None


def reduce_spin(state: SpinSectorState) -> SpinDensity:
    """Trace out the oscillator: rho[s, s'] = <v_s'|v_s>.

    The Gram matrix is Hermitian by construction up to float noise; it is
    symmetrized and trace-renormalized, with the audit rejecting states
    whose total norm drifted beyond 1e-10.
    """
    total = state.total_norm_sq
    if abs(total - 1.0) > 1e-10:
        raise ValidationError("state", f"total norm^2 = {total!r}, expected 1 +- 1e-10")
    vecs = [state.sectors[s].amplitudes for s in SPINS]
    rho = np.empty((3, 3), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            rho[i, j] = np.vdot(vecs[j], vecs[i])
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return SpinDensity(rho)


def entanglement_from_density(rho: SpinDensity) -> EntanglementReport:
    """Purity, von Neumann entropy (natural log) and coherence of a spin state."""
    r = rho.rho
    purity = float(np.vdot(r, r).real)  # Tr rho^2 for Hermitian rho
    eigs = np.clip(np.linalg.eigvalsh(r), _EIG_CLIP, None)
    entropy = float(-np.sum(eigs * np.log(eigs)))
    coh = rho.coherence
    return EntanglementReport(purity=purity, entropy=entropy,
                              coherence_mag=abs(coh),
                              coherence_phase=math.atan2(coh.imag, coh.real))


def entanglement(state: SpinSectorState) -> EntanglementReport:
    """Entanglement diagnostics of a pure total state via its reduced spin state."""
    return entanglement_from_density(reduce_spin(state))


def sector_positions(state: SpinSectorState,
                     scales: DerivedScales | None = None) -> SectorPositions:
    """Mean position per sector and the norm-weighted overall mean.

    <z~>_s = z_zpf <v_s| quadrature |v_s> / |v_s|^2 in the shifted frame;
    the lab frame subtracts the sag z0. Passing scales=None reports raw
    quadrature expectation values (z_zpf = 1, z0 = 0). Sectors with zero
    norm are reported as None and excluded from the overall mean.
    """
    z_zpf = scales.z_zpf if scales is not None else 1.0
    z0 = scales.z0_shift if scales is not None else 0.0
    quad = ladder_matrices(state.n_cutoff).quadrature.matrix
    shifted: dict[int, float | None] = {}
    lab: dict[int, float | None] = {}
    weighted = 0.0
    total_weight = 0.0
    for s in SPINS:
        v = state.sectors[s].amplitudes
        nsq = float(np.vdot(v, v).real)
        if nsq == 0.0:
            shifted[s] = None
            lab[s] = None
            continue
        mean_q = float(np.vdot(v, quad @ v).real) / nsq
        shifted[s] = z_zpf * mean_q
        lab[s] = z_zpf * mean_q - z0
        weighted += nsq * z_zpf * mean_q
        total_weight += nsq
    if total_weight == 0.0:
        raise ValidationError("state", "no populated sectors")
    mean_shifted = weighted / total_weight
    return SectorPositions(shifted=shifted, lab=lab,
                           mean_shifted=mean_shifted, mean_lab=mean_shifted - z0)


def phase_extract(state_t: SpinSectorState, state_0: SpinSectorState,
                  min_coherence: float = 1e-6) -> PhaseReport:
    """Coherence phase change and per-sector return phases between two states.

    Both states must populate the +1 and -1 sectors; a coherence smaller
    than ``min_coherence`` in either state makes the phase meaningless
    and raises instead of returning garbage.
    """
    rho_t = reduce_spin(state_t)
    rho_0 = reduce_spin(state_0)
    for tag, rho in (("state_t", rho_t), ("state_0", rho_0)):
        if abs(rho.coherence) < min_coherence:
            raise PhaseUndefinedError(
                f"{tag}: |coherence| = {abs(rho.coherence):.3e} < {min_coherence:.0e}; "
                "phase undefined")
    delta = wrap_phase(math.atan2(rho_t.coherence.imag, rho_t.coherence.real)
                       - math.atan2(rho_0.coherence.imag, rho_0.coherence.real))
    sector_phases: dict[int, float | None] = {}
    for s in SPINS:
        v0 = state_0.sectors[s]
        vt = state_t.sectors[s]
        if v0.norm == 0.0 or vt.norm == 0.0:
            sector_phases[s] = None
            continue
        ov = v0.inner(vt)
        sector_phases[s] = math.atan2(ov.imag, ov.real)
    return PhaseReport(coherence_delta=delta, sector_phases=sector_phases)


def compare_to_formulas(report: PhaseReport, phi_total: float,
                        eta_total: float) -> PhaseReport:
    """Attach formula predictions and residuals to a measured PhaseReport.

    ``phi_total`` / ``eta_total`` are the unwrapped predicted totals (for
    N periods: N * per-period values, with phi including any uniform-
    field offset). The winding count comes from the prediction, never the
    measurement.
    """
    phi_residual = abs(wrap_phase(report.coherence_delta - (-phi_total)))
    eta_residual = 0.0
    for s, measured in report.sector_phases.items():
        if measured is None:
            continue
        predicted = eta_total * s * s - (phi_total / 2.0) * s
        eta_residual = max(eta_residual, abs(wrap_phase(measured - predicted)))
    return PhaseReport(
        coherence_delta=report.coherence_delta,
        sector_phases=report.sector_phases,
        phi_formula=phi_total,
        eta_formula=eta_total,
        phi_residual=phi_residual,
        eta_residual=eta_residual,
        winding=round((phi_total - (-report.coherence_delta)) / (2.0 * math.pi)),
    )


def unwrap_by_formula(measured_wrapped: float, predicted_total: float) -> float:
    """Lift a wrapped measurement onto the branch nearest the prediction.

    Mirrors the physical limitation: the interferometer reads a phase mod
    2 pi, and the winding count must come from theory.
    """
    return measured_wrapped + 2.0 * math.pi * round(
        (predicted_total - measured_wrapped) / (2.0 * math.pi))


def state_fidelity(a: SpinSectorState, b: SpinSectorState) -> float:
    """|<a|b>|^2 across the full spin x oscillator space (normalized inputs)."""
    ov = 0.0 + 0.0j
    for s in SPINS:
        ov += complex(np.vdot(a.sectors[s].amplitudes, b.sectors[s].amplitudes))
    return abs(ov) ** 2
