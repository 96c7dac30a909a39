"""Physical inputs, derived scales, and the dimensionless model.

SI quantities live in :class:`PhysicalParams` / :class:`DerivedScales`.
All dynamics run on :class:`DimensionlessParams`, which sets hbar and the
trap frequency to 1 so that time is measured in units of 1/omega_z (one
trap period = 2*pi) and position in units of the zero-point length
z_zpf = sqrt(hbar / (2 m omega_z)).

The mapping between the two pictures:

    kappa = lambda_coupling / (hbar * omega_z)      gradient coupling
    u0    = z0_shift / z_zpf                        gravity sag of the trap
    dD    = d_splitting / omega_z                   zero-field splitting

The spin-dependent part of the model splits into a sector Hamiltonian
(oscillator + gradient coupling, the only entangling piece) and a
spin-only rate proportional to S_z from the field value at the sagged
equilibrium. Per trap period those produce the closed-form phases

    eta = 8 pi kappa^2 - 2 pi dD        (attached to s^2)
    phi = 8 pi kappa u0                 (relative phase between s = +1, -1)

phi coincides with the gravitationally induced interferometer phase of
the underlying proposal, which is why :class:`PhaseFormulas` carries it
twice (``phi`` and its alias ``delta_phi_grav``).

Zero-field splittings are quoted in Hz in the NV literature; the
``d_splitting`` field is the corresponding angular frequency D/hbar in
rad/s (multiply a Hz figure by 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ValidationError

HBAR = 1.054571817e-34
"""Reduced Planck constant, J s."""

BOHR_MAGNETON = 9.2740100783e-24
"""Bohr magneton, J/T (default for PhysicalParams.mu_b)."""

NV_SPLITTING_ANGULAR = 2.0 * math.pi * 2.87e9
"""NV ground-state zero-field splitting D/hbar, rad/s."""

DEFAULT_GRAVITY = 9.81
"""Standard gravity, m/s^2."""


def _require_finite(field: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(field, f"must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalParams:
    """SI inputs for the trapped-nanodiamond model.

    mass          kg
    omega_z       trap angular frequency, rad/s
    b0_gradient   magnetic field gradient scale B0, T/m
    d_splitting   zero-field splitting as angular frequency D/hbar, rad/s
    theta         angle between trap axis and vertical, rad
    gravity       m/s^2
    g_nv          Lande factor (dimensionless)
    mu_b          Bohr magneton, J/T
    """

    mass: float
    omega_z: float
    b0_gradient: float = 0.0
    d_splitting: float = NV_SPLITTING_ANGULAR
    theta: float = 0.0
    gravity: float = DEFAULT_GRAVITY
    g_nv: float = 2.0
    mu_b: float = BOHR_MAGNETON

    def __post_init__(self):
        for field in ("mass", "omega_z", "b0_gradient", "d_splitting",
                      "theta", "gravity", "g_nv", "mu_b"):
            object.__setattr__(self, field, _require_finite(field, getattr(self, field)))
        if self.mass <= 0:
            raise ValidationError("mass", "must be > 0")
        if self.omega_z <= 0:
            raise ValidationError("omega_z", "must be > 0")
        if self.gravity < 0:
            raise ValidationError("gravity", "must be >= 0")
        if not 0.0 <= self.theta <= math.pi:
            raise ValidationError("theta", "must lie in [0, pi]")
        if self.g_nv <= 0:
            raise ValidationError("g_nv", "must be > 0")
        if self.mu_b <= 0:
            raise ValidationError("mu_b", "must be > 0")


@dataclass(frozen=True)
class DerivedScales:
    """Closed-form SI scales derived from PhysicalParams.

    lambda_coupling    gradient coupling energy lambda = B0 g mu_B z_zpf, J
    z_zpf              zero-point length sqrt(hbar / 2 m omega_z), m
    z0_shift           gravity sag g cos(theta) / omega_z^2, m
    e_shift            sag energy (1/2) m omega_z^2 z0^2, J
    sector_separation  equilibrium split of the s = +1 / -1 wells,
                       8 lambda z_zpf / (hbar omega_z), m
    b_cancel           uniform field 2 B0 z0 cancelling the spin-only term, T
    """

    lambda_coupling: float
    z_zpf: float
    z0_shift: float
    e_shift: float
    sector_separation: float
    b_cancel: float


@dataclass(frozen=True)
class DimensionlessParams:
    """Reduced model used by all dynamics (hbar = omega_z = 1).

    u_offset adds a uniform-field term to the spin-only rate: the per-
    sector rate becomes (2 kappa u0 + u_offset) * s. Zero means none;
    ``cancellation_offset`` returns the value that nulls the rate.
    """

    kappa: float
    u0: float
    dD: float
    n_cutoff: int = 64
    n_bar: float = 0.0
    u_offset: float = 0.0

    def __post_init__(self):
        for field in ("kappa", "u0", "dD", "n_bar", "u_offset"):
            object.__setattr__(self, field, _require_finite(field, getattr(self, field)))
        if int(self.n_cutoff) != self.n_cutoff or self.n_cutoff < 2:
            raise ValidationError("n_cutoff", "must be an integer >= 2")
        object.__setattr__(self, "n_cutoff", int(self.n_cutoff))
        if self.n_bar < 0:
            raise ValidationError("n_bar", "must be >= 0")


@dataclass(frozen=True)
class PhaseFormulas:
    """Closed-form per-period phases; delta_phi_grav is an exact alias of phi."""

    eta: float
    phi: float
    delta_phi_grav: float


def derive_scales(p: PhysicalParams) -> DerivedScales:
    """Evaluate every closed-form SI scale of the model."""
    z_zpf = math.sqrt(HBAR / (2.0 * p.mass * p.omega_z))
    lam = p.b0_gradient * p.g_nv * p.mu_b * z_zpf
    z0 = p.gravity * math.cos(p.theta) / p.omega_z ** 2
    e_shift = 0.5 * p.mass * p.omega_z ** 2 * z0 ** 2
    separation = 8.0 * lam * z_zpf / (HBAR * p.omega_z)
    return DerivedScales(
        lambda_coupling=lam,
        z_zpf=z_zpf,
        z0_shift=z0,
        e_shift=e_shift,
        sector_separation=separation,
        b_cancel=2.0 * p.b0_gradient * z0,
    )


def nondimensionalize(p: PhysicalParams, n_cutoff: int = 64,
                      n_bar: float = 0.0) -> DimensionlessParams:
    """Reduce SI inputs to the hbar = omega_z = 1 model.

    Round trip: kappa * (hbar omega_z) = lambda_coupling, u0 * z_zpf =
    z0_shift and dD * omega_z = d_splitting recover the SI quantities.
    """
    scales = derive_scales(p)
    return DimensionlessParams(
        kappa=scales.lambda_coupling / (HBAR * p.omega_z),
        u0=scales.z0_shift / scales.z_zpf,
        dD=p.d_splitting / p.omega_z,
        n_cutoff=n_cutoff,
        n_bar=n_bar,
    )


def phase_formulas(d: DimensionlessParams) -> PhaseFormulas:
    """Per-period phases for the current parameters (u_offset ignored)."""
    eta = 8.0 * math.pi * d.kappa ** 2 - 2.0 * math.pi * d.dD
    phi = 8.0 * math.pi * d.kappa * d.u0
    return PhaseFormulas(eta=eta, phi=phi, delta_phi_grav=phi)


def eval_eta(d: DimensionlessParams, n_periods: int) -> float:
    """s^2-attached phase after n_periods trap periods."""
    if n_periods < 0:
        raise ValidationError("n_periods", "must be >= 0")
    return n_periods * phase_formulas(d).eta


def eval_phi(d: DimensionlessParams, n_periods: int) -> float:
    """Relative phase between the s = +1 and -1 sectors after n_periods."""
    if n_periods < 0:
        raise ValidationError("n_periods", "must be >= 0")
    return n_periods * phase_formulas(d).phi


def effective_phi(d: DimensionlessParams, n_periods: int) -> float:
    """Like eval_phi but including any uniform-field offset.

    The spin-only rate per sector is (2 kappa u0 + u_offset) * s, so the
    accumulated +1/-1 relative phase per period is 4 pi (2 kappa u0 +
    u_offset). With the cancellation offset applied this is exactly 0.
    """
    if n_periods < 0:
        raise ValidationError("n_periods", "must be >= 0")
    return n_periods * 4.0 * math.pi * (2.0 * d.kappa * d.u0 + d.u_offset)


def cancellation_field(p: PhysicalParams) -> float:
    """Uniform field (T) that nulls the spin-only term.

    Sign convention: the model's Zeeman coupling is -g mu_B B_z S_z, under
    which the gradient profile B_z = 2 B0 z evaluated at the sagged
    equilibrium leaves a +2 lambda u0 S_z term; adding a uniform field of
    +2 B0 z0 along the same axis removes it exactly.
    """
    return derive_scales(p).b_cancel


def cancellation_offset(d: DimensionlessParams) -> float:
    """Dimensionless u_offset that nulls the spin-only rate: -2 kappa u0."""
    return -2.0 * d.kappa * d.u0


def with_cancellation(d: DimensionlessParams) -> DimensionlessParams:
    """Copy of d with the cancelling uniform-field offset applied."""
    return replace(d, u_offset=cancellation_offset(d))


# ---------------------------------------------------------------------------
# config files: flat "key = number" lines, '#' comments
# ---------------------------------------------------------------------------

SI_KEYS = ("mass", "omega_z", "b0_gradient", "d_splitting", "theta",
           "gravity", "g_nv", "mu_b")
MODEL_KEYS = ("kappa", "u0", "dD", "n_cutoff", "n_bar")
PROTOCOL_KEYS = ("periods", "samples_per_period", "thermal_count")
KNOWN_KEYS = SI_KEYS + MODEL_KEYS + PROTOCOL_KEYS

_ANGLE_KEYS = ("theta",)


def parse_config(text: str) -> dict[str, float]:
    """Parse the flat config grammar into a key -> float mapping.

    One ``key = number`` pair per line; ``#`` starts a comment; blank
    lines ignored. The angle key ``theta`` accepts a ``deg`` or ``rad``
    suffix (default rad). Unknown or duplicate keys are rejected with the
    offending key named.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in KNOWN_KEYS:
            raise ValidationError(key, f"unknown config key (line {lineno})")
        if key in values:
            raise ValidationError(key, f"duplicate config key (line {lineno})")
        tokens = rhs.split()
        unit = None
        if len(tokens) == 2 and tokens[1] in ("deg", "rad"):
            rhs, unit = tokens[0], tokens[1]
        elif len(tokens) != 1:
            raise ValidationError(key, f"malformed value {rhs!r} (line {lineno})")
        if unit is not None and key not in _ANGLE_KEYS:
            raise ValidationError(key, f"unit suffix only allowed on angle keys (line {lineno})")
        try:
            value = float(rhs)
        except ValueError:
            raise ValidationError(key, f"not a number: {rhs!r} (line {lineno})") from None
        if unit == "deg":
            value = math.radians(value)
        values[key] = value
    return values


def load_config(path: str | Path) -> dict[str, float]:
    """Read and parse a config file."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


def physical_from_config(cfg: dict[str, float]) -> PhysicalParams:
    """Build PhysicalParams from parsed config values.

    ``mass`` and ``omega_z`` have no physically sensible defaults and
    must be present; every other key falls back to the class default.
    """
    for required in ("mass", "omega_z"):
        if required not in cfg:
            raise ValidationError(required, "required for SI derivations but missing from config")
    kwargs = {k: cfg[k] for k in SI_KEYS if k in cfg}
    return PhysicalParams(**kwargs)


def dimensionless_from_config(cfg: dict[str, float]) -> DimensionlessParams:
    """Build DimensionlessParams from parsed config values.

    Explicit kappa/u0/dD keys win; otherwise they are derived from the SI
    keys when mass and omega_z are present; otherwise desk-scale defaults
    (kappa=0.1, u0=1.0, dD=0.3) apply.
    """
    n_cutoff = int(cfg.get("n_cutoff", 64))
    n_bar = cfg.get("n_bar", 0.0)
    if any(k in cfg for k in ("kappa", "u0", "dD")):
        return DimensionlessParams(
            kappa=cfg.get("kappa", 0.1),
            u0=cfg.get("u0", 1.0),
            dD=cfg.get("dD", 0.3),
            n_cutoff=n_cutoff,
            n_bar=n_bar,
        )
    if "mass" in cfg and "omega_z" in cfg:
        return nondimensionalize(physical_from_config(cfg), n_cutoff=n_cutoff, n_bar=n_bar)
    return DimensionlessParams(kappa=0.1, u0=1.0, dD=0.3, n_cutoff=n_cutoff, n_bar=n_bar)
