"""Time evolution of the spin-oscillator model.

The dimensionless Hamiltonian splits per spin sector s in {-1, 0, +1}:

    sector block   h1_s = dD s^2 I + number - 2 kappa s quadrature
    spin-only rate h2_s = (2 kappa u0 + u_offset) s        (a scalar)

h1_s is a displaced harmonic oscillator: completing the square with the
displacement delta_s = 2 kappa s gives eigenvalues n - delta_s^2 + dD s^2
(exact in the untruncated space), so a coherent state evolves in closed
form:

    |beta>  ->  e^{i theta_s(t)} |delta_s + (beta - delta_s) e^{-i t}>
    theta_s(t) = (-dD s^2 + delta_s^2) t
                 + Im[ delta_s (beta - delta_s) (1 - e^{-i t}) ]

and the spin-only term contributes a further phase e^{-i h2_s t}. The
sign conventions above were fixed against the matrix-exponential oracle
(see tests) before being trusted: at t = 2 pi N every sector returns to
its initial vector times e^{i N eta s^2} e^{-i (N phi / 2) s} with
eta = 8 pi kappa^2 - 2 pi dD and phi = 8 pi kappa u0.

Phase bookkeeping: oscillator energies are normal ordered (no zero-point
half), so the s = 0 vacuum at kappa = dD = 0 acquires no phase; all
reported phases are relative to that reference. A phase attached to the
whole state is unobservable in spin interferometry; what is testable is
the per-sector return phase arg<v_s(0)|v_s(t)>, which is how the s^2 and
s components are extracted everywhere in this package.

The oracle route diagonalizes each Hermitian sector block once
(propagator unitary by construction, exact at any t, no step-size
tuning) and works for arbitrary vectors; the closed form requires the
coherent decomposition and refuses anything else.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import TruncationError, UnsupportedStateError, ValidationError
from .fockspace import (SPINS, CoherentTerm, FockVector, OperatorMatrix,
                        SpinSectorState, ladder_matrices)
from .params import DimensionlessParams

GLOBAL_PHASE_CONVENTION = (
    "normal-ordered oscillator energies; zero phase = s=0 vacuum at kappa=dD=0; "
    "reported phases are per-sector return phases arg<v_s(0)|v_s(t)>"
)

_ORACLE_TAIL_LEVELS = 2  # population here is the truncation-health proxy


@dataclass(frozen=True)
class SectorHamiltonian:
    """One spin sector: dense oscillator block plus the scalar spin-only rate."""

    s: int
    matrix: OperatorMatrix
    h2_rate: float


@dataclass(frozen=True)
class PropagationResult:
    state: SpinSectorState
    global_phase_convention: str
    method: str
    leakage: float


def spin_rate(d: DimensionlessParams, s: int) -> float:
    """Spin-only angular rate (2 kappa u0 + u_offset) * s."""
    return (2.0 * d.kappa * d.u0 + d.u_offset) * s


def sector_hamiltonian(d: DimensionlessParams, s: int) -> SectorHamiltonian:
    """Assemble the dense sector block and spin-only rate for sector s."""
    if s not in SPINS:
        raise ValidationError("s", f"spin projection must be one of {SPINS}")
    ops = ladder_matrices(d.n_cutoff)
    h1 = (d.dD * s * s * np.eye(d.n_cutoff)
          + ops.number.matrix
          - 2.0 * d.kappa * s * ops.quadrature.matrix)
    return SectorHamiltonian(s=s, matrix=OperatorMatrix(h1, "hamiltonian-sector"),
                             h2_rate=spin_rate(d, s))


@lru_cache(maxsize=32)
def _sector_eigensystem(kappa: float, dD: float, n_cutoff: int, s: int):
    d = DimensionlessParams(kappa=kappa, u0=0.0, dD=dD, n_cutoff=n_cutoff)
    h = sector_hamiltonian(d, s).matrix.matrix
    w, v = np.linalg.eigh(h)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@lru_cache(maxsize=32)
def _unshifted_eigensystem(kappa: float, u0: float, dD: float, n_cutoff: int, s: int):
    h = unshifted_sector_matrix(
        DimensionlessParams(kappa=kappa, u0=u0, dD=dD, n_cutoff=n_cutoff), s)
    w, v = np.linalg.eigh(h)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def unshifted_sector_matrix(d: DimensionlessParams, s: int) -> np.ndarray:
    """Sector block in the unshifted frame: gravity as a linear potential.

    dD s^2 I + number - 2 kappa s quadrature + (u0/2) quadrature, with no
    spin-only term (that term is an artifact of shifting the coordinate).
    Dropping the sag-energy constant shifts all sectors' phases equally
    and is invisible to every spin observable.
    """
    ops = ladder_matrices(d.n_cutoff)
    return (d.dD * s * s * np.eye(d.n_cutoff)
            + ops.number.matrix
            + (d.u0 / 2.0 - 2.0 * d.kappa * s) * ops.quadrature.matrix)


@lru_cache(maxsize=8)
def _frame_displacement(u0: float, n_cutoff: int) -> np.ndarray:
    """Matrix mapping shifted-frame amplitudes to unshifted-frame amplitudes.

    The frames' ladder operators differ by c_unshifted = c_shifted - u0/2,
    so representations are related by the displacement D(-u0/2).
    """
    ops = ladder_matrices(n_cutoff)
    alpha = -u0 / 2.0
    gen = alpha * ops.raising.matrix - np.conj(alpha) * ops.lowering.matrix
    mat = scipy.linalg.expm(gen)
    mat.setflags(write=False)
    return mat


def to_unshifted_frame(state: SpinSectorState, d: DimensionlessParams) -> SpinSectorState:
    """Re-express a shifted-frame state in the unshifted frame's Fock basis.

    Mean quadratures drop by exactly u0 (the two frames disagree on the
    origin by the gravity sag); sector overlaps — hence all spin
    observables — are untouched because the same unitary acts on every
    sector.
    """
    dmat = _frame_displacement(d.u0, state.n_cutoff)
    sectors = {
        s: FockVector(dmat @ v.amplitudes, terms=None, leakage=v.leakage)
        for s, v in state.sectors.items()
    }
    return SpinSectorState(sectors=sectors, time=state.time)


def _tail_weight(amps: np.ndarray) -> float:
    tail = amps[-_ORACLE_TAIL_LEVELS:]
    return float(np.sum(tail.real ** 2 + tail.imag ** 2))


def evolve_analytic(state: SpinSectorState, d: DimensionlessParams,
                    t: float) -> PropagationResult:
    """Closed-form evolution; every populated sector must carry coherent terms.

    Applies the displaced-oscillator closed form per term, then the
    spin-only phase. Output amplitudes are rebuilt from the evolved
    decomposition, so this route is exact up to truncation of the
    reconstructed coherent vectors.
    """
    if d.n_cutoff != state.n_cutoff:
        raise ValidationError("n_cutoff", "params and state disagree on the cutoff")
    rot = cmath.exp(-1j * t)
    worst_leak = 0.0
    sectors: dict[int, FockVector] = {}
    for s in SPINS:
        vec = state.sectors[s]
        if vec.terms is None:
            if vec.norm == 0.0:
                sectors[s] = FockVector(np.zeros(d.n_cutoff, np.complex128), terms=())
                continue
            raise UnsupportedStateError(
                f"sector s={s:+d} has no coherent decomposition; use evolve_oracle")
        if not vec.terms:
            sectors[s] = FockVector(np.zeros(d.n_cutoff, np.complex128), terms=())
            continue
        delta = 2.0 * d.kappa * s
        h2_phase = -spin_rate(d, s) * t
        new_terms = []
        for coeff, beta in vec.terms:
            moved = beta - delta
            theta = ((-d.dD * s * s + delta * delta) * t
                     + (delta * moved * (1.0 - rot)).imag)
            new_terms.append(CoherentTerm(coeff * cmath.exp(1j * (theta + h2_phase)),
                                          delta + moved * rot))
        labels = np.array([b for _, b in new_terms], dtype=np.complex128)
        coeffs = np.array([c for c, _ in new_terms], dtype=np.complex128)
        rows, kept = _kernels.coherent_rows(labels, d.n_cutoff)
        leak = max(0.0, float(1.0 - kept.min()))
        worst_leak = max(worst_leak, leak)
        amps = coeffs @ (rows / np.sqrt(kept)[:, None])
        sectors[s] = FockVector(amps, terms=tuple(new_terms), leakage=leak)
    new_state = SpinSectorState(sectors=sectors, time=state.time + t)
    return PropagationResult(state=new_state,
                             global_phase_convention=GLOBAL_PHASE_CONVENTION,
                             method="analytic", leakage=worst_leak)


def evolve_oracle(state: SpinSectorState, d: DimensionlessParams,
                  t: float) -> PropagationResult:
    """Matrix-exponential evolution via Hermitian eigendecomposition.

    Works for arbitrary sector vectors. Aborts when the population of the
    top Fock levels — before or after the step — exceeds the truncation
    threshold, since the truncated propagator is unreliable there.
    """
    if d.n_cutoff != state.n_cutoff:
        raise ValidationError("n_cutoff", "params and state disagree on the cutoff")
    sectors: dict[int, FockVector] = {}
    worst_tail = 0.0
    for s in SPINS:
        vec = state.sectors[s]
        if vec.norm == 0.0:
            sectors[s] = FockVector(np.zeros(d.n_cutoff, np.complex128), terms=vec.terms)
            continue
        w, v = _sector_eigensystem(d.kappa, d.dD, d.n_cutoff, s)
        amps = v @ (np.exp(-1j * w * t) * (v.conj().T @ vec.amplitudes))
        amps *= cmath.exp(-1j * spin_rate(d, s) * t)
        tail = max(_tail_weight(vec.amplitudes), _tail_weight(amps))
        worst_tail = max(worst_tail, tail)
        if tail > 1e-4:
            raise TruncationError(
                f"evolve_oracle: sector s={s:+d} holds {tail:.3e} probability in the "
                f"top {_ORACLE_TAIL_LEVELS} Fock levels; raise n_cutoff")
        sectors[s] = FockVector(amps, terms=None, leakage=tail)
    new_state = SpinSectorState(sectors=sectors, time=state.time + t)
    return PropagationResult(state=new_state,
                             global_phase_convention=GLOBAL_PHASE_CONVENTION,
                             method="matrix-exponential", leakage=worst_tail)


def evolve_unshifted_oracle(state: SpinSectorState, d: DimensionlessParams,
                            t: float) -> PropagationResult:
    """Oracle evolution in the unshifted frame (gravity as a linear potential).

    The input must already be expressed in the unshifted frame — convert
    with :func:`to_unshifted_frame`. There is no spin-only term here;
    gravity tilts the potential instead. Spin observables must agree with
    the shifted-frame route; mean quadratures differ by exactly u0.
    """
    if d.n_cutoff != state.n_cutoff:
        raise ValidationError("n_cutoff", "params and state disagree on the cutoff")
    sectors: dict[int, FockVector] = {}
    worst_tail = 0.0
    for s in SPINS:
        vec = state.sectors[s]
        if vec.norm == 0.0:
            sectors[s] = FockVector(np.zeros(d.n_cutoff, np.complex128), terms=vec.terms)
            continue
        w, v = _unshifted_eigensystem(d.kappa, d.u0, d.dD, d.n_cutoff, s)
        amps = v @ (np.exp(-1j * w * t) * (v.conj().T @ vec.amplitudes))
        tail = max(_tail_weight(vec.amplitudes), _tail_weight(amps))
        worst_tail = max(worst_tail, tail)
        if tail > 1e-4:
            raise TruncationError(
                f"evolve_unshifted_oracle: sector s={s:+d} holds {tail:.3e} probability "
                f"in the top {_ORACLE_TAIL_LEVELS} Fock levels; raise n_cutoff")
        sectors[s] = FockVector(amps, terms=None, leakage=tail)
    new_state = SpinSectorState(sectors=sectors, time=state.time + t)
    return PropagationResult(state=new_state,
                             global_phase_convention=GLOBAL_PHASE_CONVENTION,
                             method="matrix-exponential", leakage=worst_tail)


def full_split_hamiltonians(d: DimensionlessParams) -> tuple[np.ndarray, np.ndarray]:
    """Dense (3 n_cutoff)^2 blocks of the entangling and spin-only parts.

    Block order follows SPINS = (+1, 0, -1). The spin-only part is a
    scalar on each sector block, which is the structural reason the two
    pieces commute.
    """
    n = d.n_cutoff
    dim = 3 * n
    h1 = np.zeros((dim, dim), dtype=np.complex128)
    h2 = np.zeros((dim, dim), dtype=np.complex128)
    eye = np.eye(n)
    for i, s in enumerate(SPINS):
        block = slice(i * n, (i + 1) * n)
        h1[block, block] = sector_hamiltonian(d, s).matrix.matrix
        h2[block, block] = spin_rate(d, s) * eye
    return h1, h2


def commutator_check(d: DimensionlessParams) -> float:
    """Operator 2-norm of the commutator of the two Hamiltonian pieces.

    Exactly 0.0 in floating point: the spin-only piece is a scalar on
    every sector block, so both products are the identical elementwise
    scaling of the sector matrix.
    """
    h1, h2 = full_split_hamiltonians(d)
    comm = h1 @ h2 - h2 @ h1
    return float(np.linalg.norm(comm, 2))
