"""Projection of single-excitation states onto the generalized Dicke basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greenkernel import ChainConfig
from .spectrum import SpectralGrid


@dataclass
class DipoleState:
    """Site amplitudes ``beta_j`` of the single-excitation manifold at ``time``."""

    beta: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=complex))
        if beta.ndim != 1 or beta.size < 1:
            raise ValueError("beta must be a non-empty 1-D vector")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta contains non-finite entries")
        self.beta = beta

    @property
    def n_atoms(self) -> int:
        return self.beta.size

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.beta, self.beta).real)

    def check_chain(self, cfg: ChainConfig) -> None:
        if cfg.n_atoms != self.n_atoms:
            raise ValueError(f"state has {self.n_atoms} sites but chain has {cfg.n_atoms}")


@dataclass
class SpectralDensity:
    grid: SpectralGrid
    p: np.ndarray

    def mass(self, mask) -> float:
        """Integral of the density restricted to ``mask`` (boolean over the grid)."""
        return self.grid.integrate(np.where(mask, self.p, 0.0))


def _phases(n: int, x) -> np.ndarray:
    return np.exp(-1j * np.multiply.outer(np.asarray(x, dtype=float), np.arange(n)))


def amplitude(state: DipoleState, x):
    """``A_N(x) = sum_j exp(-i x (j-1)) beta_j`` (no 1/sqrt(N) factor)."""
    out = _phases(state.n_atoms, x) @ state.beta
    return complex(out) if np.ndim(out) == 0 else out


def partial_amplitudes(state: DipoleState, x):
    """Running sums ``A_n(x)`` for ``n = 1..N``; the last entry is ``A_N(x)``."""
    return np.cumsum(_phases(state.n_atoms, x) * state.beta, axis=-1)


def density(state: DipoleState, grid: SpectralGrid) -> SpectralDensity:
    """Probability density over the Dicke continuum, normalized on ``grid``."""
    if state.norm2 == 0:
        raise ValueError("density is undefined for the zero state")
    a2 = np.abs(amplitude(state, grid.points)) ** 2
    p = a2 / grid.integrate(a2)
    return SpectralDensity(grid, p)


def dirichlet(u, n: int):
    """``sum_{j=0}^{n-1} exp(i u j)``, i.e. the Dirichlet kernel with its phase."""
    u = np.asarray(u, dtype=float)
    half = np.sin(u / 2.0)
    near = np.abs(half) < 1e-8
    safe = np.where(near, 1.0, half)
    closed = np.sin(n * u / 2.0) / safe * np.exp(1j * u * (n - 1) / 2.0)
    if np.any(near):
        direct = np.exp(1j * np.multiply.outer(u, np.arange(n))).sum(axis=-1)
        closed = np.where(near, direct, closed)
    return complex(closed) if closed.ndim == 0 else closed


def overlap(x1, x2, cfg: ChainConfig):
    """Overlap of two Dicke states labelled by ``x = k d``; equals N at coincidence."""
    return dirichlet(np.asarray(x1) - np.asarray(x2), cfg.n_atoms)
