"""
Oracle and identity checks behind ``subchain validate``.

Each check returns a :class:`CheckResult` with the measured quantity and
the tolerance it was held to. Checks never raise on failure.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate as sp_integrate

from . import dickespace, dynamics, spectrum, states
from .greenkernel import MAGIC_ANGLE, ChainConfig, scalar_kernel, vector_kernel


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.name}: measured={self.measured:.3e} "
                f"tolerance={self.tolerance:.1e} {self.detail}").rstrip()

    def as_dict(self) -> dict:
        return asdict(self)


def _result(name, measured, tol, detail="", below=True):
    ok = bool(np.isfinite(measured) and (measured < tol if below else measured > tol))
    return CheckResult(name, ok, float(measured), float(tol), detail)


def check_magic_angle() -> CheckResult:
    r = np.linspace(50.0 / 1e4, 50.0, 10_000)
    s, v = scalar_kernel(r), vector_kernel(r, MAGIC_ANGLE)
    err = max(np.max(np.abs(s.decay - v.decay)), np.max(np.abs(s.shift - v.shift)))
    return _result("magic-angle kernel reduction", err, 1e-12)


def check_angular_average() -> CheckResult:
    worst = 0.0
    for r in (0.5, 1.0, 2.0, 5.0, 10.0):
        val = 0.5 * sp_integrate.quad(lambda th: np.sin(th) * np.cos(r * np.cos(th)),
                                      0.0, np.pi, epsabs=1e-13, epsrel=1e-13)[0]
        worst = max(worst, abs(val - np.sin(r) / r))
    return _result("angular average of plane waves", worst, 1e-8)


def check_plancherel(seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid = spectrum.SpectralGrid.uniform(4096)
    worst = 0.0
    for n in (1, 10, 37, 100, 256):
        st = dickespace.DipoleState(rng.normal(size=n) + 1j * rng.normal(size=n))
        a2 = np.abs(dickespace.amplitude(st, grid.points)) ** 2
        worst = max(worst, abs(grid.integrate(a2) / (2 * np.pi) - st.norm2) / st.norm2)
        worst = max(worst, abs(dickespace.density(st, grid).p.sum() * grid.step - 1.0))
    return _result("Plancherel and density normalization", worst, 1e-8)


def check_spectral_rhs(seed: int = 11, n_states: int = 10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    drives = (dynamics.DriveConfig(), dynamics.DriveConfig(0.3, 1.7))
    for k in range(n_states):
        n = int(rng.integers(1, 31))
        cfg = ChainConfig(n, float(rng.uniform(0.3, 3.0)),
                          None if k % 2 == 0 else float(rng.uniform(0, np.pi / 2)))
        st = dickespace.DipoleState(rng.normal(size=n) + 1j * rng.normal(size=n))
        for x in rng.uniform(-np.pi, np.pi, 10):
            for drv in drives:
                worst = max(worst, dynamics.spectral_rhs_check(st, cfg, drv, float(x)))
    return _result("spectral-space equation of motion", worst, 1e-10)


def _balance(cfg, beta0, dt, t_end):
    icfg = dynamics.IntegrationConfig(t_end, dt)
    traj = dynamics.integrate(dickespace.DipoleState(beta0), cfg, dynamics.DriveConfig(),
                              icfg, record_dissipation=True)
    return dynamics.energy_balance_residual(traj)


def check_energy_balance(quick: bool = False, seed: int = 3) -> CheckResult:
    """Residual must be small and shrink ~4x when dt halves."""
    rng = np.random.default_rng(seed)
    n_big = 20 if quick else 100
    cases = [
        ("N=1", ChainConfig(1, 1.0), np.array([1.0 + 0j])),
        ("N=2 symmetric", ChainConfig(2, np.pi / 2), np.array([1, 1]) / np.sqrt(2) + 0j),
        (f"N={n_big} random", ChainConfig(n_big, np.pi / 2, np.pi / 2),
         (rng.normal(size=n_big) + 1j * rng.normal(size=n_big)) / np.sqrt(2 * n_big)),
    ]
    worst_ratio = np.inf
    worst_res = 0.0
    parts = []
    for label, cfg, b0 in cases:
        r1 = _balance(cfg, b0, 1e-3, 1.0)
        r2 = _balance(cfg, b0, 5e-4, 1.0)
        ratio = r1 / r2 if r2 > 0 else np.inf
        worst_ratio = min(worst_ratio, ratio)
        worst_res = max(worst_res, r1)
        parts.append(f"{label}: {r1:.2e}->{r2:.2e}")
    ok = worst_res < 1e-5 and worst_ratio > 3.5
    return CheckResult("energy balance (dt halving)", bool(ok), float(worst_res), 1e-5,
                       f"min shrink x{worst_ratio:.2f} (need >3.5); " + "; ".join(parts))


def check_step_halving(quick: bool = False) -> CheckResult:
    n, t_end = (50, 2.0) if quick else (100, 10.0)
    cfg = ChainConfig(n, np.pi / 2, np.pi / 2)
    init = states.single_excited(cfg, n // 2)
    vals = []
    for dt in (1e-3, 5e-4):
        traj = dynamics.integrate(init, cfg, dynamics.DriveConfig(), dynamics.IntegrationConfig(t_end, dt))
        vals.append(traj.mean_excitation[-1])
    rel = abs(vals[0] - vals[1]) / abs(vals[1])
    return _result("RK4 step-halving convergence", rel, 1e-8, f"N={n}, t={t_end:g}")


def check_closed_forms() -> CheckResult:
    a = np.pi / 2
    errs = [
        abs(spectrum.gamma_infinite(a, 0.0) - 2.0),
        abs(spectrum.gamma_infinite(a, 2.0)),
        abs(spectrum.omega_infinite(a, 0.0) + 2.0 / np.pi * np.log(2.0)),
        abs(spectrum.gamma_infinite(a, 0.0, np.pi / 2) - 1.5),
    ]
    return _result("infinite-chain closed forms", max(errs), 1e-12)


def check_sinc_vs_exact(quick: bool = False) -> CheckResult:
    grid = spectrum.SpectralGrid.uniform(257)
    worst = 0.0
    models = (None, np.pi / 2) if quick else (None, 0.0, np.pi / 2)
    for delta in models:
        cfg = ChainConfig(10, np.pi / 2, delta)
        ex = spectrum.gamma_exact(cfg, grid.points)
        sa = spectrum.gamma_sinc_approx(cfg, grid.points)
        worst = max(worst, np.max(np.abs(ex - sa)) / np.max(ex))
    return _result("sinc-integral decay rate vs double sum (N=10)", worst, 0.03)


def check_polylog() -> CheckResult:
    k = np.arange(1, 2_000_001, dtype=float)
    worst = 0.0
    for th in (0.4, 1.3, np.pi, 4.4):
        z = np.exp(1j * th * k)
        # truncation leaves an O(1/K^2) tail, ~1e-13 here
        worst = max(worst, abs(spectrum.polylog_unit_circle(3, th) - np.sum(z / k**3)))
        worst = max(worst, abs(spectrum.polylog_unit_circle(2, th) - np.sum(z / k**2)))
    return _result("polylogarithms on the unit circle", worst, 1e-10)


def check_subradiant_limit() -> CheckResult:
    a = np.pi / 2
    cfg = ChainConfig(400, a)
    grid = spectrum.SpectralGrid.uniform(1024)
    x = grid.points
    keep = np.abs(np.abs(x) - a) > 0.2
    amp = np.abs(dickespace.amplitude(states.most_subradiant(cfg), x[keep]))
    step = states.subradiant_amplitude_limit(a, x[keep])
    return _result("most-subradiant amplitude vs step (N=400)", float(np.max(np.abs(amp - step))), 0.1)


QUICK = (check_magic_angle, check_angular_average, check_plancherel, check_spectral_rhs,
         check_closed_forms, check_polylog, check_subradiant_limit)


def run_all(quick: bool = False) -> list:
    checks = [(f, {}) for f in QUICK]
    checks += [(check_energy_balance, {"quick": quick}), (check_step_halving, {"quick": quick}),
               (check_sinc_vs_exact, {"quick": quick})]
    results = []
    for fn, kw in checks:
        t0 = time.perf_counter()
        try:
            res = fn(**kw)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(fn.__name__, False, float("nan"), float("nan"), f"error: {exc!r}")
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
