"""
Coupled-dipole dynamics of the chain under a switchable plane-wave drive.

Time is in units of 1/Gamma. The equations of motion are

    d beta_j / dt = (i Delta0 - 1/2) beta_j - i (Omega0 / 2) e^{i a (j-1)} [t < t_off]
                    - 1/2 sum_{m != j} G(a |j - m|) beta_m
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dickespace import DipoleState, amplitude, dirichlet, partial_amplitudes
from .greenkernel import ChainConfig, coupling_matrix, decay_matrix, offset_kernel
from .spectrum import gamma_infinite, omega_infinite

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """The trajectory blew up (non-finite amplitudes)."""


@dataclass(frozen=True)
class DriveConfig:
    rabi: float = 0.0
    detuning: float = 0.0
    t_off: float = math.inf

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("Rabi frequency must be non-negative")
        if self.t_off < 0:
            raise ValueError("switch-off time must be non-negative")

    def active(self, t: float) -> bool:
        return self.rabi != 0 and t < self.t_off


@dataclass(frozen=True)
class IntegrationConfig:
    t_end: float
    dt: float = 1e-3
    snapshot_times: Sequence[float] = ()

    def __post_init__(self):
        if not 0 < self.dt <= 0.01:
            raise ValueError(f"dt must lie in (0, 0.01], got {self.dt}")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        for ts in self.snapshot_times:
            if not 0 <= ts <= self.t_end:
                raise ValueError(f"snapshot time {ts} outside [0, {self.t_end}]")


@dataclass
class Trajectory:
    cfg: ChainConfig
    drive: DriveConfig
    times: np.ndarray
    mean_excitation: np.ndarray
    snapshots: list = field(default_factory=list)
    final: Optional[DipoleState] = None
    dissipation: Optional[np.ndarray] = None


def mean_excitation(state) -> float:
    """``(1/N) sum_j |beta_j|^2``."""
    beta = state.beta if isinstance(state, DipoleState) else np.asarray(state)
    return float(np.mean(np.abs(beta) ** 2))


class CoupledDipoles:
    """Linear system ``d beta / dt = L beta + s(t)`` for one chain and drive."""

    def __init__(self, cfg: ChainConfig, drive: DriveConfig):
        self.cfg = cfg
        self.drive = drive
        n = cfg.n_atoms
        self.generator = 1j * drive.detuning * np.eye(n) - 0.5 * coupling_matrix(cfg)
        self.source = -0.5j * drive.rabi * np.exp(1j * cfg.a * np.arange(n))

    def __call__(self, t: float, beta: np.ndarray) -> np.ndarray:
        out = self.generator @ beta
        if self.drive.active(t):
            out = out + self.source
        return out

    def step(self, t: float, beta: np.ndarray, h: float) -> np.ndarray:
        k1 = self(t, beta)
        k2 = self(t + 0.5 * h, beta + 0.5 * h * k1)
        k3 = self(t + 0.5 * h, beta + 0.5 * h * k2)
        k4 = self(t + h, beta + h * k3)
        return beta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rhs(state, cfg: ChainConfig, drive: DriveConfig, t: float = 0.0) -> np.ndarray:
    """Time derivative of the site amplitudes."""
    beta = state.beta if isinstance(state, DipoleState) else np.asarray(state, dtype=complex)
    return CoupledDipoles(cfg, drive)(t, beta)


def _time_nodes(t_end: float, dt: float, t_off: float) -> np.ndarray:
    n = int(round(t_end / dt))
    nodes = dt * np.arange(n + 1)
    if nodes[-1] < t_end - 1e-12 * max(1.0, t_end):
        nodes = np.append(nodes, t_end)
    else:
        nodes[-1] = t_end
    if 0 < t_off < t_end and np.min(np.abs(nodes - t_off)) > 1e-12 * max(1.0, t_off):
        nodes = np.sort(np.append(nodes, t_off))
    return nodes


def integrate(initial: DipoleState, cfg: ChainConfig, drive: DriveConfig,
              icfg: IntegrationConfig, record_dissipation: bool = False,
              check_every: int = 100) -> Trajectory:
    """Fixed-step RK4 evolution of the coupled-dipole equations.

    A step that would straddle the drive switch-off is split there. Each
    requested snapshot is taken at the nearest node. With
    ``record_dissipation`` the photon emission rate ``beta^H Re(G) beta``
    is stored at every node for :func:`energy_balance_residual`.
    """
    initial.check_chain(cfg)
    system = CoupledDipoles(cfg, drive)
    nodes = _time_nodes(icfg.t_end, icfg.dt, drive.t_off)
    wanted = {}
    for ts in icfg.snapshot_times:
        wanted.setdefault(int(np.argmin(np.abs(nodes - ts))), []).append(ts)

    re_g = decay_matrix(cfg) if record_dissipation else None
    beta = initial.beta.copy()
    n = cfg.n_atoms
    mean_exc = np.empty(nodes.size)
    dissip = np.empty(nodes.size) if record_dissipation else None
    snapshots = []

    # overflow is caught by the finite check below, so numpy need not warn
    with np.errstate(over="ignore", invalid="ignore"):
        for i, t in enumerate(nodes):
            if i > 0:
                beta = system.step(nodes[i - 1], beta, t - nodes[i - 1])
                if i % check_every == 0 or i == nodes.size - 1:
                    if not np.all(np.isfinite(beta)):
                        raise IntegrationError(f"non-finite amplitudes at t={t:.6g} (step {i})")
            mean_exc[i] = np.vdot(beta, beta).real / n
            if dissip is not None:
                dissip[i] = np.vdot(beta, re_g @ beta).real
            if i in wanted:
                snapshots.extend(DipoleState(beta.copy(), float(t)) for _ in wanted[i])

    log.debug("integrated %d steps to t=%g", nodes.size - 1, nodes[-1])
    return Trajectory(cfg, drive, nodes, mean_exc, snapshots,
                      DipoleState(beta, float(nodes[-1])), dissip)


def energy_balance_residual(traj: Trajectory) -> float:
    """Largest mismatch between the loss of excitation and the emission rate.

    Uses centred differences of ``sum |beta|^2``, so only interior nodes of
    the drive-free part of the trajectory enter.
    """
    if traj.dissipation is None:
        raise ValueError("trajectory was integrated without record_dissipation=True")
    t = traj.times
    norm = traj.mean_excitation * traj.cfg.n_atoms
    free = t >= traj.drive.t_off if traj.drive.rabi != 0 else np.ones(t.size, bool)
    idx = np.arange(1, t.size - 1)
    idx = idx[free[idx - 1] & free[idx] & free[idx + 1]]
    if idx.size == 0:
        raise ValueError("no drive-free interior nodes in trajectory")
    deriv = (norm[idx + 1] - norm[idx - 1]) / (t[idx + 1] - t[idx - 1])
    return float(np.max(np.abs(deriv + traj.dissipation[idx])))


def spectral_rhs_check(state: DipoleState, cfg: ChainConfig, drive: DriveConfig,
                       x: float, t: float = 0.0) -> float:
    """Compare two routes to ``dA_N(x)/dt``.

    Route one projects :func:`rhs`; route two builds the derivative in
    spectral space from the partial amplitudes ``A_n(x)``. Offsets
    ``+l`` and ``-l`` pick up different partial sums,
    ``e^{-ixl} A_{N-l}`` and ``e^{ixl} (A_N - A_l)``.
    """
    n = cfg.n_atoms
    direct = amplitude(DipoleState(rhs(state, cfg, drive, t)), x)

    parts = partial_amplitudes(state, x)
    a_n = parts[-1]
    spectral = (1j * drive.detuning - 0.5) * a_n
    if drive.active(t):
        spectral += -0.5j * drive.rabi * np.conj(dirichlet(x - cfg.a, n))
    if n > 1:
        ell = np.arange(1, n)
        g = np.asarray(offset_kernel(cfg, ell).value)
        fwd = np.exp(-1j * x * ell) * parts[n - ell - 1]
        back = np.exp(1j * x * ell) * (a_n - parts[ell - 1])
        spectral += -0.5 * np.sum(g * (fwd + back))
    return float(abs(direct - spectral))


@dataclass(frozen=True)
class InfiniteDriveSolution:
    """Infinite-chain amplitude at one ``(x, t)``.

    ``regular`` is the transient ``A(x, 0) exp(lambda t)`` and
    ``delta_coefficient`` the weight of the ``delta(x - a)`` driven part.
    """

    x: float
    t: float
    regular: complex
    delta_coefficient: complex
    gamma: float
    omega: float

    def steady_weight(self, n_atoms: int, drive: DriveConfig) -> float:
        """Weight of ``delta(x - a)`` in ``|A(x, inf)|^2``."""
        return 2.0 * n_atoms * (np.pi * drive.rabi) ** 2 / (
            (2.0 * drive.detuning + self.omega) ** 2 + self.gamma**2)


def infinite_chain_solution(a: float, x: float, drive: DriveConfig, t: float,
                            initial_amplitude: complex = 1.0,
                            delta: Optional[float] = None) -> InfiniteDriveSolution:
    """Closed-form driven evolution of ``A(x, t)`` for an infinite chain."""
    if abs(abs(x) - a) < 1e-6:
        raise ValueError("infinite-chain solution is singular at |x| = a")
    gam = gamma_infinite(a, x, delta)
    om = omega_infinite(a, x, delta)
    growth = np.exp((1j * drive.detuning + 0.5j * om - 0.5 * gam) * t)
    coef = 2.0 * np.pi * drive.rabi / (2.0 * drive.detuning + om + 1j * gam) * (1.0 - growth)
    return InfiniteDriveSolution(float(x), float(t), complex(initial_amplitude * growth),
                                 complex(coef), float(gam), float(om))
