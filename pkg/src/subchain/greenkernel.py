"""
Pairwise coupling kernels for a linear chain of two-level atoms.

All rates are in units of the single-atom linewidth Gamma and the only
length that enters is the dimensionless lattice phase ``a = k0 * d``.
A kernel value is ``G = decay - 1j * shift``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))

# below this |x| the removable singularities switch to Taylor series
_SERIES_CUTOFF = 1e-4


def sinc(x):
    """Unnormalized sinc, ``sin(x) / x``, with ``sinc(0) = 1``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


sphbessel_j0 = sinc


def sphbessel_j1(x):
    """Spherical Bessel function of order one, ``sin x / x**2 - cos x / x``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    series = x / 3.0 - x * x2 / 30.0 + x * x2 * x2 / 840.0
    out = np.where(small, series, np.sin(safe) / safe**2 - np.cos(safe) / safe)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ComplexRate:
    """Decay and shift parts of a kernel value; scalars or equal-shape arrays."""

    decay: object
    shift: object

    @property
    def value(self):
        return np.asarray(self.decay) - 1j * np.asarray(self.shift)


@dataclass(frozen=True)
class ChainConfig:
    """Chain of ``n_atoms`` atoms at ``z_j = d (j - 1)``.

    ``delta`` is the dipole angle to the chain axis for the vectorial model;
    ``None`` selects the scalar model.
    """

    n_atoms: int
    a: float
    delta: Optional[float] = None

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        if not (self.a > 0 and np.isfinite(self.a)):
            raise ValueError(f"lattice phase a must be positive, got {self.a!r}")
        if self.delta is not None and not (0.0 <= self.delta <= np.pi / 2 + 1e-12):
            raise ValueError(f"dipole angle delta must lie in [0, pi/2], got {self.delta!r}")

    @property
    def vectorial(self) -> bool:
        return self.delta is not None

    @property
    def model_tag(self) -> str:
        return "scalar" if self.delta is None else f"vector:{self.delta:.17g}"

    def with_n(self, n_atoms: int) -> "ChainConfig":
        return ChainConfig(n_atoms, self.a, self.delta)


def parse_model(text: str, degrees: bool = False) -> Optional[float]:
    """Parse ``scalar``, ``vector:<angle>`` or ``vector:magic`` into a delta."""
    text = text.strip().lower()
    if text == "scalar":
        return None
    kind, _, arg = text.partition(":")
    if kind not in ("vector", "vectorial") or not arg:
        raise ValueError(f"unknown model {text!r}; use scalar, vector:<delta> or vector:magic")
    if arg == "magic":
        return MAGIC_ANGLE
    delta = float(arg)
    return float(np.deg2rad(delta)) if degrees else delta


def scalar_kernel(r) -> ComplexRate:
    """Scalar Green function at dimensionless separation ``r = k0 * r_jm``.

    ``r == 0`` is the diagonal element (decay 1, no shift).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("separation must be non-negative")
    zero = r == 0
    safe = np.where(zero, 1.0, r)
    decay = np.where(zero, 1.0, np.sin(safe) / safe)
    shift = np.where(zero, 0.0, np.cos(safe) / safe)
    if decay.ndim == 0:
        return ComplexRate(float(decay), float(shift))
    return ComplexRate(decay, shift)


def dipole_factors(delta: float):
    """Return ``(1.5 sin^2 delta, 3 cos^2 delta - 1)``.

    The second factor is snapped to zero within 1e-14: the magic angle is
    only representable to rounding, and the near-field terms multiply the
    residue by ``1/r^3``.
    """
    c3 = 3.0 * np.cos(delta) ** 2 - 1.0
    if abs(c3) < 1e-14:
        c3 = 0.0
    return 1.0 - 0.5 * c3, c3


def vector_kernel(r, delta: float) -> ComplexRate:
    """Off-diagonal kernel for dipoles tilted by ``delta`` from the chain axis."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("vector_kernel is off-diagonal only; separation must be > 0")
    w, c3 = dipole_factors(delta)
    decay = w * sphbessel_j0(r) + 1.5 * c3 * sphbessel_j1(r) / r
    shift = w * np.cos(r) / r + 1.5 * c3 * (np.sin(r) / r**2 + np.cos(r) / r**3)
    if np.ndim(decay) == 0:
        return ComplexRate(float(decay), float(shift))
    return ComplexRate(decay, shift)


def offset_kernel(cfg: ChainConfig, ell) -> ComplexRate:
    """Kernel at lattice offsets ``ell`` (integers >= 1) for the configured model."""
    r = cfg.a * np.asarray(ell, dtype=float)
    if cfg.delta is None:
        return scalar_kernel(r)
    return vector_kernel(r, cfg.delta)


def _toeplitz_from_offsets(n: int, diag: float, values: np.ndarray) -> np.ndarray:
    idx = np.arange(n)
    lag = np.abs(idx[:, None] - idx[None, :])
    table = np.concatenate(([diag], values))
    return table[lag]


def coupling_matrix(cfg: ChainConfig) -> np.ndarray:
    """Complex symmetric N x N matrix ``G_jm`` with unit diagonal."""
    n = cfg.n_atoms
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    k = offset_kernel(cfg, np.arange(1, n))
    return _toeplitz_from_offsets(n, 1.0, np.asarray(k.value, dtype=complex))


def decay_matrix(cfg: ChainConfig) -> np.ndarray:
    """Real part of the coupling matrix, built directly from the kernels."""
    n = cfg.n_atoms
    if n == 1:
        return np.ones((1, 1))
    k = offset_kernel(cfg, np.arange(1, n))
    return _toeplitz_from_offsets(n, 1.0, np.asarray(k.decay, dtype=float))


def dyadic_kernel(sep: np.ndarray, a: float) -> np.ndarray:
    """Full 3x3 Green tensor for separation vectors ``sep`` in units of d.

    ``sep`` has shape ``(..., 3)``; returns ``(..., 3, 3)`` complex in units
    of Gamma (the ``3/2`` factor is included).
    """
    sep = np.asarray(sep, dtype=float)
    dist = np.linalg.norm(sep, axis=-1)
    if np.any(dist == 0):
        raise ValueError("dyadic kernel is singular at zero separation")
    kr = np.asarray(a * dist)
    n = sep / dist[..., None]
    nn = n[..., :, None] * n[..., None, :]
    eye = np.eye(3)
    radial = np.asarray(1j / kr - 1.0 / kr**2)
    pref = np.asarray(1.5 * np.exp(1j * kr) / (1j * kr))
    return pref[..., None, None] * (eye - nn + (eye - 3.0 * nn) * radial[..., None, None])
