"""Batched numeric inner loops with optional numba acceleration.

Two interchangeable backends implement every kernel: a vectorized numpy
version and a loop version compiled with ``numba.njit``. The default is
picked once at import time — numba when importable, unless the environment
variable ``LEVSPIN_NO_NUMBA`` is set to anything but ``0`` or empty.
``BACKEND`` records the choice; every public kernel also accepts an
explicit ``backend=`` override, which is what the benchmark script uses.

Both backends run the same algorithm on the same precomputed tables, so
they agree exactly on the integer RNG stream and to a few ulp on the
float outputs. Reproducibility contracts (byte-identical CSV reruns) hold
per backend.

The seeded sampler is counter based: draw ``i`` depends only on
``(seed, i)`` through a splitmix64 mix, never on preceding draws, so
sample streams may be evaluated out of order or in parallel without
changing results.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

_U64 = np.uint64
_MASK64 = 0xFFFFFFFFFFFFFFFF
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def _pick_backend() -> str:
    flag = os.environ.get("LEVSPIN_NO_NUMBA", "0")
    if flag not in ("", "0"):
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


BACKEND = _pick_backend()


@lru_cache(maxsize=None)
def log_factorials(n_cutoff: int) -> np.ndarray:
    """Table of ln(n!) for n = 0..n_cutoff-1, shared by both backends."""
    table = np.array([math.lgamma(n + 1.0) for n in range(n_cutoff)])
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# coherent-state amplitude rows
# ---------------------------------------------------------------------------

def _coherent_rows_numpy(labels: np.ndarray, log_fact: np.ndarray):
    n_cutoff = log_fact.shape[0]
    mags = np.abs(labels)
    args = np.angle(labels)
    n = np.arange(n_cutoff, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_mag = np.where(mags > 0.0, np.log(np.where(mags > 0.0, mags, 1.0)), -np.inf)
    with np.errstate(invalid="ignore"):
        grow = n[None, :] * log_mag[:, None]
    grow[np.isnan(grow)] = 0.0  # 0 * log(0) at n = 0 for zero labels
    log_amp = grow - 0.5 * mags[:, None] ** 2 - 0.5 * log_fact[None, :]
    mag = np.exp(log_amp)
    phase = args[:, None] * n[None, :]
    amps = mag * (np.cos(phase) + 1j * np.sin(phase))
    kept = np.sum(mag * mag, axis=1)
    return amps, kept


def _coherent_rows_loops(labels, log_fact, amps, kept):  # pragma: no cover - jitted
    count = labels.shape[0]
    n_cutoff = log_fact.shape[0]
    for k in range(count):
        mag = abs(labels[k])
        arg = np.angle(labels[k])
        acc = 0.0
        for n in range(n_cutoff):
            if mag > 0.0:
                la = n * math.log(mag) - 0.5 * mag * mag - 0.5 * log_fact[n]
            elif n == 0:
                la = 0.0
            else:
                la = -math.inf
            m = math.exp(la)
            ph = arg * n
            amps[k, n] = m * (math.cos(ph) + 1j * math.sin(ph))
            acc += m * m
        kept[k] = acc


# ---------------------------------------------------------------------------
# seeded standard-normal pairs (splitmix64 counter stream + Box-Muller)
# ---------------------------------------------------------------------------

def _mix64_numpy(x: np.ndarray) -> np.ndarray:
    z = x.copy()
    z ^= z >> _U64(30)
    z *= _U64(_MIX_A)
    z ^= z >> _U64(27)
    z *= _U64(_MIX_B)
    z ^= z >> _U64(31)
    return z


def _gaussian_pairs_numpy(seed: int, count: int) -> np.ndarray:
    idx = np.arange(1, 2 * count + 1, dtype=np.uint64)
    states = _U64(seed & _MASK64) + idx * _U64(_SPLITMIX_GAMMA)
    u = (_mix64_numpy(states) >> _U64(11)).astype(np.float64) * _INV_2_53
    u1 = u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(1.0 - u1))
    out = np.empty((count, 2))
    out[:, 0] = r * np.cos(_TWO_PI * u2)
    out[:, 1] = r * np.sin(_TWO_PI * u2)
    return out


def _gaussian_pairs_loops(seed, count, out):  # pragma: no cover - jitted
    gamma = _U64(_SPLITMIX_GAMMA)
    mix_a = _U64(_MIX_A)
    mix_b = _U64(_MIX_B)
    base = _U64(seed)
    for k in range(count):
        u = np.empty(2)
        for j in range(2):
            z = base + _U64(2 * k + 1 + j) * gamma
            z ^= z >> _U64(30)
            z *= mix_a
            z ^= z >> _U64(27)
            z *= mix_b
            z ^= z >> _U64(31)
            u[j] = float(z >> _U64(11)) * _INV_2_53
        r = math.sqrt(-2.0 * math.log(1.0 - u[0]))
        out[k, 0] = r * math.cos(_TWO_PI * u[1])
        out[k, 1] = r * math.sin(_TWO_PI * u[1])


# ---------------------------------------------------------------------------
# row-wise inner products  <a_k | b_k>
# ---------------------------------------------------------------------------

def _row_overlaps_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("kn,kn->k", a.conj(), b)


def _row_overlaps_loops(a, b, out):  # pragma: no cover - jitted
    count, n_cutoff = a.shape
    for k in range(count):
        acc = 0.0 + 0.0j
        for n in range(n_cutoff):
            acc += a[k, n].conjugate() * b[k, n]
        out[k] = acc


if BACKEND == "numba":
    from numba import njit

    _coherent_rows_jit = njit(cache=True)(_coherent_rows_loops)
    _gaussian_pairs_jit = njit(cache=True)(_gaussian_pairs_loops)
    _row_overlaps_jit = njit(cache=True)(_row_overlaps_loops)
else:  # numba absent or disabled; loop variants stay plain python
    _coherent_rows_jit = None
    _gaussian_pairs_jit = None
    _row_overlaps_jit = None


def _resolve(backend: str | None) -> str:
    if backend is None:
        return BACKEND
    if backend not in ("numpy", "numba"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and _coherent_rows_jit is None:
        raise RuntimeError("numba backend requested but not available")
    return backend


def coherent_rows(labels: np.ndarray, n_cutoff: int, backend: str | None = None):
    """Fock amplitudes of coherent states, one row per label.

    Row k holds a_n = exp(-|l|^2/2) l^n / sqrt(n!) for l = labels[k],
    evaluated in log-magnitude space so large labels underflow to zero
    rather than overflow. Rows are NOT normalized; ``kept[k]`` is the
    probability weight retained inside the truncation (1 - leakage).
    """
    labels = np.ascontiguousarray(labels, dtype=np.complex128)
    log_fact = log_factorials(n_cutoff)
    if _resolve(backend) == "numpy":
        return _coherent_rows_numpy(labels, log_fact)
    amps = np.empty((labels.shape[0], n_cutoff), dtype=np.complex128)
    kept = np.empty(labels.shape[0])
    _coherent_rows_jit(labels, log_fact, amps, kept)
    return amps, kept


def gaussian_pairs(seed: int, count: int, backend: str | None = None) -> np.ndarray:
    """(count, 2) standard normals from the counter-based splitmix64 stream.

    Draw i uses counter value seed + (i+1)*0x9E3779B97F4A7C15 (mod 2^64),
    finalized with the splitmix64 mix, mapped to [0, 1) via the top 53
    bits, then Box-Muller: r = sqrt(-2 ln(1-u1)), (r cos 2pi u2, r sin 2pi u2).
    Fixed seed -> bit-identical uint64 stream on every backend.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if _resolve(backend) == "numpy":
        return _gaussian_pairs_numpy(seed, count)
    out = np.empty((count, 2))
    _gaussian_pairs_jit(_U64(seed & _MASK64), count, out)
    return out


def row_overlaps(a: np.ndarray, b: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Per-row inner products <a_k|b_k> (first argument conjugated)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError("row_overlaps requires equal shapes")
    if _resolve(backend) == "numpy":
        return _row_overlaps_numpy(a, b)
    out = np.empty(a.shape[0], dtype=np.complex128)
    _row_overlaps_jit(a, b, out)
    return out
