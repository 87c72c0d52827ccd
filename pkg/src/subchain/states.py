"""Canonical initial states of the chain."""

from __future__ import annotations

import numpy as np

from .dickespace import DipoleState
from .greenkernel import ChainConfig


def single_excited(cfg: ChainConfig, j0: int) -> DipoleState:
    """Only atom ``j0`` (1-based) excited."""
    if not 1 <= j0 <= cfg.n_atoms:
        raise IndexError(f"site index {j0} outside 1..{cfg.n_atoms}")
    beta = np.zeros(cfg.n_atoms, dtype=complex)
    beta[j0 - 1] = 1.0
    return DipoleState(beta)


def most_subradiant(cfg: ChainConfig) -> DipoleState:
    """State whose Dicke amplitude tends to the step ``1 if |x| > a else 0``.

    Centred on site N/2, so N must be even. Not normalized.
    """
    n = cfg.n_atoms
    if n % 2:
        raise ValueError(f"most_subradiant needs an even number of atoms; use N={n + 1}")
    m = np.arange(1, n + 1) - n // 2
    safe = np.where(m == 0, 1, m)
    beta = np.where(m == 0, 1.0 - cfg.a / np.pi, -np.sin(cfg.a * m) / (np.pi * safe))
    return DipoleState(beta.astype(complex))


def timed_dicke(cfg: ChainConfig) -> DipoleState:
    n = cfg.n_atoms
    return DipoleState(np.exp(1j * cfg.a * np.arange(n)) / np.sqrt(n))


def uniform(cfg: ChainConfig) -> DipoleState:
    n = cfg.n_atoms
    return DipoleState(np.full(n, 1.0 / np.sqrt(n), dtype=complex))


def zero(cfg: ChainConfig) -> DipoleState:
    return DipoleState(np.zeros(cfg.n_atoms, dtype=complex))


def subradiant_amplitude_limit(a: float, x):
    """Infinite-chain ``|A(x)|`` of the most subradiant state.

    Built from ``theta_{1,2} = arctan(cot((x +- a)/2))`` as
    ``|pi - a + theta_2 - theta_1| / pi``, which is the unit step outside
    the light line. Undefined at ``|x| = a``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(np.abs(x) - a) < 1e-12):
        raise ValueError("the limiting amplitude jumps at |x| = a")
    theta1 = np.arctan(1.0 / np.tan((x + a) / 2.0))
    theta2 = np.arctan(1.0 / np.tan((x - a) / 2.0))
    out = np.abs(np.pi - a + theta2 - theta1) / np.pi
    return float(out) if out.ndim == 0 else out
