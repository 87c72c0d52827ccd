"""
Collective decay rate and frequency shift of generalized Dicke states.

The spectral variable is ``x = k d`` in the first Brillouin zone
``(-pi, pi]``. Finite-chain values come from the exact double sum (oracle
route) or from the sinc-squared integral form; infinite-chain values are
closed forms. Everything is in units of Gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import zeta

from .greenkernel import ChainConfig, decay_matrix, offset_kernel

LIGHT_LINE_TOL = 1e-6
POLYLOG_EDGE = 1e-6

# truncation window for the Brillouin-zone sum, in units of pi / N
_WINDOW = 40.0
# |u| beyond which sinc^2 tails go through the oscillatory (QAWO) rule
_CORE = 50.0
_QUAD_EPS = 1e-10


class LightLineError(ValueError):
    """Raised when a quantity is evaluated on its singular light line x = +-a."""


@dataclass(frozen=True)
class SpectralGrid:
    """Sorted sample points in (-pi, pi].

    Grids built with :meth:`uniform` are periodic midpoint grids; their
    trapezoid rule is the periodic one, ``h * sum(f)``.
    """

    points: np.ndarray
    periodic: bool = False

    @classmethod
    def uniform(cls, n: int = 1024) -> "SpectralGrid":
        """``n`` uniform points on (-pi, pi], offset by half a step."""
        if n < 2:
            raise ValueError("grid needs at least two points")
        h = 2.0 * np.pi / n
        pts = -np.pi + h * (np.arange(n) + 0.5)
        return cls(pts, periodic=True)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid must be a 1-D array of at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] <= -np.pi - 1e-12 or pts[-1] > np.pi + 1e-12:
            raise ValueError("grid points must lie in (-pi, pi]")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @property
    def step(self) -> float:
        return 2.0 * np.pi / self.points.size if self.periodic else float(np.mean(np.diff(self.points)))

    def edge_offset(self, a: float) -> float:
        """Smallest distance from any point to the light line ``x = +-a``."""
        return float(np.min(np.minimum(np.abs(self.points - a), np.abs(self.points + a))))

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if self.periodic:
            return float(self.step * np.sum(values))
        return float(np.trapezoid(values, self.points))


@dataclass
class SpectrumResult:
    grid: SpectralGrid
    gamma: np.ndarray
    omega: np.ndarray
    cfg: ChainConfig
    method: str
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# finite chain
# ---------------------------------------------------------------------------

def _clamp_rate(g):
    g = np.asarray(g, dtype=float)
    g = np.where((g < 0) & (g >= -1e-9), 0.0, g)
    return g[()] if g.ndim == 0 else g


def gamma_exact(cfg: ChainConfig, x):
    """Collective decay rate from the full double sum over atom pairs.

    Evaluated as the quadratic form ``v^H Re(G) v`` with
    ``v_j = exp(i x (j-1)) / sqrt(N)``; ``x`` may be an array.
    """
    x = np.asarray(x, dtype=float)
    n = cfg.n_atoms
    re_g = decay_matrix(cfg)
    j = np.arange(n)
    v = np.exp(1j * np.outer(j, np.atleast_1d(x))) / np.sqrt(n)
    quad = np.real(np.sum(np.conj(v) * (re_g @ v), axis=0))
    out = _clamp_rate(quad)
    return float(out[0]) if x.ndim == 0 else out


def omega_finite(cfg: ChainConfig, x):
    """Collective frequency shift, ``(2/N) sum_l (N-l) Omega(a l) cos(x l)``."""
    x = np.asarray(x, dtype=float)
    n = cfg.n_atoms
    if n == 1:
        return 0.0 if x.ndim == 0 else np.zeros_like(x)
    ell = np.arange(1, n)
    weights = (n - ell) * np.asarray(offset_kernel(cfg, ell).shift)
    out = (2.0 / n) * (np.cos(np.multiply.outer(x, ell)) @ weights)
    return float(out) if x.ndim == 0 else out


def _sinc2_moment(lo: float, hi: float, poly: tuple) -> float:
    """``int_lo^hi p(u) sinc(u)^2 du`` for a quadratic ``p = (c0, c1, c2)``."""
    c0, c1, c2 = poly

    def p(u):
        return c0 + u * (c1 + u * c2)

    def core(u):
        if abs(u) < 1e-4:
            s = 1.0 - u * u / 6.0
        else:
            s = np.sin(u) / u
        return p(u) * s * s

    total = 0.0
    a, b = max(lo, -_CORE), min(hi, _CORE)
    if b > a:
        total += integrate.quad(core, a, b, epsabs=_QUAD_EPS, epsrel=1e-12, limit=200)[0]
    # tails: sin^2 u / u^2 = (1 - cos 2u) / (2 u^2)
    for a, b in ((max(lo, _CORE), hi), (lo, min(hi, -_CORE))):
        if b <= a:
            continue

        def smooth(u):
            return p(u) / (2.0 * u * u)

        total += integrate.quad(smooth, a, b, epsabs=_QUAD_EPS, epsrel=1e-12, limit=200)[0]
        total -= integrate.quad(smooth, a, b, weight="cos", wvar=2.0,
                                epsabs=_QUAD_EPS, epsrel=1e-12, limit=500)[0]
    return total


def _gamma_sinc_point(n: int, a: float, delta: Optional[float], x: float) -> float:
    lo, hi = (x - a) / 2.0, (x + a) / 2.0
    width = _WINDOW * np.pi / n
    m_min = int(np.ceil((lo - width) / np.pi))
    m_max = int(np.floor((hi + width) / np.pi))
    total = 0.0
    for m in range(m_min, m_max + 1):
        ulo, uhi = n * (lo - m * np.pi), n * (hi - m * np.pi)
        if delta is None:
            poly = (1.0, 0.0, 0.0)
        else:
            # weight s2 + (1 - 3c2)/2 * ((x - 2t)^2 - a^2) / a^2 with t = m pi + u / n
            s2 = np.sin(delta) ** 2
            k = 0.5 * (1.0 - 3.0 * np.cos(delta) ** 2) / a**2
            y = x - 2.0 * m * np.pi
            poly = (s2 + k * (y * y - a * a), -4.0 * k * y / n, 4.0 * k / n**2)
        total += _sinc2_moment(ulo, uhi, poly)
    pref = 1.0 if delta is None else 1.5
    return pref * total / a


def gamma_sinc_approx(cfg: ChainConfig, x):
    """Large-N decay rate via the Brillouin-zone sum of sinc^2 integrals.

    Each integral is done by adaptive quadrature; zones whose centre
    ``m pi`` lies further than ``40 pi / N`` outside the integration
    interval are dropped.
    """
    x = np.asarray(x, dtype=float)
    vals = np.array([_gamma_sinc_point(cfg.n_atoms, cfg.a, cfg.delta, float(xi))
                     for xi in np.atleast_1d(x)])
    out = _clamp_rate(vals)
    return float(out[0]) if x.ndim == 0 else out


# ---------------------------------------------------------------------------
# infinite chain
# ---------------------------------------------------------------------------

def gamma_infinite(a: float, x, delta: Optional[float] = None, return_flag: bool = False):
    """Infinite-chain decay rate in the first Brillouin zone.

    Zero outside the light line. Exactly on ``|x| = a`` the open-interval
    value 0 is returned; ``return_flag=True`` also returns a boolean mask
    marking those points.
    """
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < a
    if delta is None:
        val = np.pi / a * np.ones_like(x)
    else:
        s2 = np.sin(delta) ** 2
        c2 = np.cos(delta) ** 2
        val = 1.5 * np.pi / a * (s2 + 0.5 * (1.0 - 3.0 * c2) * (x * x - a * a) / a**2)
    out = np.where(inside, val, 0.0)
    out = float(out) if out.ndim == 0 else out
    if return_flag:
        flag = np.abs(np.abs(x) - a) == 0
        return out, (bool(flag) if np.ndim(flag) == 0 else flag)
    return out


def _check_light_line(a: float, x: np.ndarray):
    bad = np.abs(np.abs(x) - a) < LIGHT_LINE_TOL
    if np.any(bad):
        raise LightLineError(f"frequency shift diverges on the light line |x| = a = {a}")


def omega_infinite(a: float, x, delta: Optional[float] = None):
    """Infinite-chain frequency shift (closed form).

    The scalar model diverges logarithmically at ``|x| = a`` and raises
    :class:`LightLineError` there; so does the vectorial model unless
    ``sin(delta) == 0``.
    """
    x = np.asarray(x, dtype=float)
    if delta is None:
        _check_light_line(a, x)
        out = -np.log(2.0 * np.abs(np.cos(a) - np.cos(x))) / a
        return float(out) if out.ndim == 0 else out

    s2 = np.sin(delta) ** 2
    c3 = 3.0 * np.cos(delta) ** 2 - 1.0
    tp, tm = x + a, x - a
    # Re ln(1 - e^{i t}) = ln|2 sin(t/2)|
    if s2 > 0:
        _check_light_line(a, x)
        log_part = np.log(np.abs(2.0 * np.sin(tp / 2.0))) + np.log(np.abs(2.0 * np.sin(tm / 2.0)))
    else:
        log_part = 0.0
    li2p, li2m = _li2_unit(tp), _li2_unit(tm)
    li3p, li3m = _li3_unit(tp), _li3_unit(tm)
    poly = a * (li2p.imag - li2m.imag) + li3p.real + li3m.real
    out = 1.5 / a**3 * (-a * a * s2 * log_part + c3 * poly)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# polylogarithms on the unit circle
# ---------------------------------------------------------------------------

_CL_TERMS = 30
_K = np.arange(1, _CL_TERMS + 1)
# Cl2(t) = t - t ln|t| + sum_k zeta(2k) / (k (2k+1)) t^(2k+1) / (2 pi)^(2k),  |t| < 2 pi
_CL2_COEF = zeta(2 * _K) / (_K * (2 * _K + 1)) / (2 * np.pi) ** (2 * _K)
_ZETA3 = float(zeta(3))


def _reduce(theta):
    """Map angles to (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(t == -np.pi, np.pi, t)


def clausen2(theta):
    """``sum_k sin(k theta) / k^2``."""
    t = _reduce(theta)
    at = np.abs(t)
    safe = np.where(at == 0, 1.0, at)
    powers = at[..., None] ** (2 * _K + 1)
    out = at - at * np.log(safe) + powers @ _CL2_COEF
    out = np.sign(t) * out
    return out[()] if np.ndim(out) == 0 else out


def clausen3(theta):
    """``sum_k cos(k theta) / k^3``, obtained by integrating ``-Cl2``."""
    t = np.abs(_reduce(theta))
    safe = np.where(t == 0, 1.0, t)
    t2 = t * t
    powers = t[..., None] ** (2 * _K + 2)
    out = _ZETA3 - 0.75 * t2 + 0.5 * t2 * np.log(safe) - powers @ (_CL2_COEF / (2 * _K + 2))
    return out[()] if np.ndim(out) == 0 else out


def _li2_unit(theta):
    t = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
    real = np.pi**2 / 6.0 - np.pi * t / 2.0 + t * t / 4.0
    return real + 1j * clausen2(theta)


def _li3_unit(theta):
    t = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
    imag = np.pi**2 * t / 6.0 - np.pi * t * t / 4.0 + t**3 / 12.0
    return clausen3(theta) + 1j * imag


def polylog_unit_circle(order: int, theta):
    """``Li_order(exp(i theta))`` for order 2 or 3.

    Order 2 is restricted to ``theta`` in ``(1e-6, 2 pi - 1e-6)``.
    """
    if order == 2:
        t = np.asarray(theta, dtype=float)
        if np.any((t <= POLYLOG_EDGE) | (t >= 2.0 * np.pi - POLYLOG_EDGE)):
            raise ValueError("Li2 on the unit circle is restricted to theta in (1e-6, 2pi - 1e-6)")
        out = _li2_unit(t)
    elif order == 3:
        out = _li3_unit(theta)
    else:
        raise ValueError(f"unsupported polylog order {order}")
    return complex(out) if np.ndim(out) == 0 else out


def evaluate_spectrum(cfg: ChainConfig, grid: SpectralGrid, method: str = "exact") -> SpectrumResult:
    """Sample decay rate and shift over a grid with the chosen gamma method."""
    x = grid.points
    if method == "exact":
        gamma = gamma_exact(cfg, x)
        omega = omega_finite(cfg, x)
    elif method == "sinc":
        gamma = gamma_sinc_approx(cfg, x)
        omega = omega_finite(cfg, x)
    elif method == "infinite":
        gamma = gamma_infinite(cfg.a, x, cfg.delta)
        with np.errstate(divide="ignore"):
            omega = np.array([_omega_or_nan(cfg.a, xi, cfg.delta) for xi in x])
    else:
        raise ValueError(f"unknown spectrum method {method!r}")
    return SpectrumResult(grid, np.asarray(gamma), np.asarray(omega), cfg, method)


def _omega_or_nan(a, x, delta):
    try:
        return omega_infinite(a, x, delta)
    except LightLineError:
        return float("nan")
