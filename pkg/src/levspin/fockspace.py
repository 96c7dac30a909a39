"""Truncated Fock-space linear algebra.

States are length-n_cutoff complex amplitude vectors. A vector built from
coherent states keeps its symbolic decomposition (a tuple of
(coefficient, label) terms) alongside the amplitudes so the closed-form
propagator can act on it exactly; vectors produced any other way carry no
decomposition and must go through the matrix-exponential route.

Truncation leakage — probability weight beyond the cutoff — is the
principal numerical hazard here. Every state-producing operation measures
it and applies one policy: warn above 1e-8, abort above 1e-4.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import TruncationError, TruncationWarning, ValidationError

SPINS = (1, 0, -1)
"""Spin sector order used for density-matrix indexing."""

LEAK_WARN = 1e-8
LEAK_ABORT = 1e-4

DEFAULT_SPIN_WEIGHTS = (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0))
"""Symmetric (+1, 0, -1) superposition used by the interferometric protocols."""


class CoherentTerm(NamedTuple):
    coeff: complex
    label: complex


def check_leakage(leakage: float, context: str) -> None:
    """Apply the truncation policy: warn above 1e-8, raise above 1e-4."""
    if leakage > LEAK_ABORT:
        raise TruncationError(
            f"{context}: truncation leakage {leakage:.3e} exceeds {LEAK_ABORT:.0e}; "
            "raise n_cutoff")
    if leakage > LEAK_WARN:
        warnings.warn(f"{context}: truncation leakage {leakage:.3e}",
                      TruncationWarning, stacklevel=3)


@dataclass(frozen=True)
class FockVector:
    """Immutable oscillator amplitude vector, optionally with coherent terms.

    ``terms`` records the exact decomposition sum_k coeff_k |label_k> when
    one is known (empty tuple = the zero vector in coherent form); None
    means no closed form is available. ``leakage`` is the truncation loss
    measured when the vector was produced.
    """

    amplitudes: np.ndarray
    terms: tuple[CoherentTerm, ...] | None = None
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] < 2:
            raise ValidationError("amplitudes", "need a 1-d vector of length >= 2")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValidationError("amplitudes", "must be finite")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockVector") -> complex:
        """<self|other> with self conjugated."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def scaled(self, factor: complex) -> "FockVector":
        terms = None
        if self.terms is not None:
            terms = tuple(CoherentTerm(factor * c, b) for c, b in self.terms)
        return FockVector(self.amplitudes * factor, terms=terms, leakage=self.leakage)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on the truncated space with a role tag."""

    matrix: np.ndarray
    role: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


class LadderOps(NamedTuple):
    lowering: OperatorMatrix
    raising: OperatorMatrix
    number: OperatorMatrix
    quadrature: OperatorMatrix


@lru_cache(maxsize=None)
def _ladder_arrays(n_cutoff: int):
    lowering = np.diag(np.sqrt(np.arange(1.0, n_cutoff)), 1).astype(np.complex128)
    raising = lowering.conj().T
    number = np.diag(np.arange(n_cutoff, dtype=np.float64)).astype(np.complex128)
    quadrature = lowering + raising
    for arr in (lowering, raising, number, quadrature):
        arr.setflags(write=False)
    return lowering, raising, number, quadrature


def ladder_matrices(n_cutoff: int) -> LadderOps:
    """Lowering/raising/number/quadrature matrices on the truncated space.

    lowering[n-1, n] = sqrt(n); number is the exact diagonal 0..n_cutoff-1
    (identical to raising @ lowering up to float rounding); quadrature =
    lowering + raising measures position in z_zpf units.
    """
    if int(n_cutoff) != n_cutoff or n_cutoff < 2:
        raise ValidationError("n_cutoff", "must be an integer >= 2")
    low, rai, num, quad = _ladder_arrays(int(n_cutoff))
    return LadderOps(
        OperatorMatrix(low, "lowering"),
        OperatorMatrix(rai, "raising"),
        OperatorMatrix(num, "number"),
        OperatorMatrix(quad, "quadrature"),
    )


def coherent_vector(alpha: complex, n_cutoff: int) -> FockVector:
    """Normalized truncated coherent state |alpha>.

    Amplitudes are evaluated in log space (no overflow for any alpha).
    Warns when |alpha|^2 exceeds n_cutoff/4 — the truncated representation
    degrades well before it breaks — and enforces the leakage policy.
    """
    alpha = complex(alpha)
    if int(n_cutoff) != n_cutoff or n_cutoff < 2:
        raise ValidationError("n_cutoff", "must be an integer >= 2")
    if abs(alpha) ** 2 > n_cutoff / 4.0:
        warnings.warn(
            f"coherent_vector: |alpha|^2 = {abs(alpha)**2:.2f} exceeds n_cutoff/4 = "
            f"{n_cutoff / 4.0:.2f}", TruncationWarning, stacklevel=2)
    rows, kept = _kernels.coherent_rows(np.array([alpha]), int(n_cutoff))
    leakage = max(0.0, float(1.0 - kept[0]))  # rounding can push kept past 1
    check_leakage(leakage, f"coherent_vector(alpha={alpha})")
    amps = rows[0] / math.sqrt(kept[0])
    return FockVector(amps, terms=(CoherentTerm(1.0 + 0.0j, alpha),), leakage=leakage)


def basis_vector(n: int, n_cutoff: int) -> FockVector:
    """Fock basis state |n> (no coherent decomposition)."""
    if not 0 <= n < n_cutoff:
        raise ValidationError("n", f"must lie in [0, {n_cutoff})")
    amps = np.zeros(n_cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return FockVector(amps, terms=None, leakage=0.0)


def superpose(terms: list[tuple[complex, complex]], n_cutoff: int) -> FockVector:
    """Normalized finite superposition sum_k c_k |beta_k> of coherent states."""
    if not terms:
        raise ValidationError("terms", "need at least one (coeff, label) pair")
    labels = np.array([b for _, b in terms], dtype=np.complex128)
    coeffs = np.array([c for c, _ in terms], dtype=np.complex128)
    rows, kept = _kernels.coherent_rows(labels, int(n_cutoff))
    worst = max(0.0, float(1.0 - kept.min()))
    check_leakage(worst, "superpose")
    rows = rows / np.sqrt(kept)[:, None]
    amps = coeffs @ rows
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise ValidationError("terms", "superposition has zero norm")
    sym = tuple(CoherentTerm(c / norm, b) for c, b in zip(coeffs, labels))
    return FockVector(amps / norm, terms=sym, leakage=worst)


@dataclass(frozen=True)
class SpinSectorState:
    """Full quantum state: one unnormalized oscillator vector per sector.

    The Hamiltonian commutes with S_z, so the block structure is exact —
    no operation ever mixes sectors. Total norm must be 1 to 1e-10.
    Time is dimensionless (units of 1/omega_z).
    """

    sectors: dict[int, FockVector]
    time: float = 0.0

    def __post_init__(self):
        if set(self.sectors) != set(SPINS):
            raise ValidationError("sectors", f"must map exactly the spins {SPINS}")
        sizes = {v.n_cutoff for v in self.sectors.values()}
        if len(sizes) != 1:
            raise ValidationError("sectors", "sector vectors must share n_cutoff")
        total = self.total_norm_sq
        if abs(total - 1.0) > 1e-10:
            raise ValidationError("sectors", f"total norm^2 = {total!r}, expected 1 +- 1e-10")

    @property
    def n_cutoff(self) -> int:
        return self.sectors[1].n_cutoff

    @property
    def total_norm_sq(self) -> float:
        return float(sum(v.norm ** 2 for v in self.sectors.values()))

    def sector_norms(self) -> dict[int, float]:
        return {s: self.sectors[s].norm for s in SPINS}


def initial_state(psi0: FockVector,
                  spin_weights: tuple[complex, complex, complex] = DEFAULT_SPIN_WEIGHTS,
                  ) -> SpinSectorState:
    """Product state psi0 x (weighted spin superposition) at t = 0.

    ``spin_weights`` orders the sectors (+1, 0, -1); the default is the
    symmetric (|+1> + |-1>)/sqrt(2) combination. Weights are renormalized;
    zero-norm weights or an unnormalized psi0 are rejected.
    """
    w = np.asarray(spin_weights, dtype=np.complex128)
    if w.shape != (3,):
        raise ValidationError("spin_weights", "need exactly 3 complex weights for (+1, 0, -1)")
    wnorm = np.linalg.norm(w)
    if wnorm == 0.0:
        raise ValidationError("spin_weights", "must not all vanish")
    w = w / wnorm
    if abs(psi0.norm - 1.0) > 1e-10:
        raise ValidationError("psi0", f"norm = {psi0.norm!r}, expected 1 +- 1e-10")
    zero_terms: tuple[CoherentTerm, ...] | None = () if psi0.terms is not None else None
    sectors = {}
    for s, weight in zip(SPINS, w):
        if weight == 0.0:
            amps = np.zeros(psi0.n_cutoff, dtype=np.complex128)
            sectors[s] = FockVector(amps, terms=zero_terms, leakage=0.0)
        else:
            sectors[s] = psi0.scaled(complex(weight))
    return SpinSectorState(sectors=sectors, time=0.0)


def sample_thermal_labels(n_bar: float, count: int, seed: int) -> np.ndarray:
    """Coherent labels of a thermal ensemble: circular Gaussian, E|a|^2 = n_bar.

    Counter-based and seeded — a fixed (seed, count) always yields the
    same labels, independent of evaluation order. n_bar = 0 returns exact
    zeros.
    """
    if n_bar < 0:
        raise ValidationError("n_bar", "must be >= 0")
    if count < 1:
        raise ValidationError("count", "must be >= 1")
    if seed is None:
        raise ValidationError("seed", "thermal sampling requires a seed")
    if n_bar == 0.0:
        return np.zeros(count, dtype=np.complex128)
    pairs = _kernels.gaussian_pairs(int(seed), count)
    scale = math.sqrt(n_bar / 2.0)
    return scale * (pairs[:, 0] + 1j * pairs[:, 1])


def min_cutoff_for_label(alpha_mag: float, tol: float = LEAK_ABORT) -> int:
    """Smallest cutoff keeping coherent-state leakage below tol.

    Walks the Poisson weights n -> e^{-m^2} m^{2n} / n! until the retained
    weight reaches 1 - tol. Used as the upfront thermal-run guard.
    """
    mean = alpha_mag ** 2
    if mean == 0.0:
        return 2
    log_term = -mean  # ln weight at n = 0
    acc = math.exp(log_term)
    n = 0
    while acc < 1.0 - tol:
        n += 1
        log_term += math.log(mean) - math.log(n)
        acc += math.exp(log_term)
        if n > 100000:  # pragma: no cover - pathological inputs only
            break
    return max(n + 1, 2)
