"""
Field radiated by the excited chain, near zone and far zone.

Positions are in units of the lattice constant d, in a frame where the
chain lies on the z axis centred at the origin. Intensities are in
arbitrary units (the physical prefactor of the field is dropped).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .dickespace import DipoleState, amplitude
from .greenkernel import ChainConfig, dyadic_kernel

MIN_DISTANCE = 1e-6
_AXES = {"x": 0, "y": 1, "z": 2}
# in-plane (u, v) axes for each plane normal
_PLANE_AXES = {"x": (1, 2), "y": (0, 2), "z": (0, 1)}


def atom_positions(cfg: ChainConfig) -> np.ndarray:
    """``(N, 3)`` atom coordinates, chain centred on the origin along z."""
    z = np.arange(cfg.n_atoms) - 0.5 * (cfg.n_atoms - 1)
    pos = np.zeros((cfg.n_atoms, 3))
    pos[:, 2] = z
    return pos


def axis_vector(axis) -> np.ndarray:
    """Unit vector from ``'x'``/``'y'``/``'z'`` or any 3-vector."""
    if isinstance(axis, str):
        v = np.zeros(3)
        v[_AXES[axis.lower()]] = 1.0
        return v
    v = np.asarray(axis, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class PlaneSpec:
    normal_axis: str = "x"
    offset: float = 5.0
    u_range: Tuple[float, float] = (-50.0, 50.0)
    v_range: Tuple[float, float] = (-50.0, 50.0)
    resolution: int = 200

    def __post_init__(self):
        if self.normal_axis not in _PLANE_AXES:
            raise ValueError(f"normal_axis must be x, y or z, got {self.normal_axis!r}")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        for lo, hi in (self.u_range, self.v_range):
            if not hi > lo:
                raise ValueError("plane ranges must be increasing")

    @property
    def u(self) -> np.ndarray:
        return np.linspace(*self.u_range, self.resolution)

    @property
    def v(self) -> np.ndarray:
        return np.linspace(*self.v_range, self.resolution)

    def points(self) -> np.ndarray:
        """Pixel centres, shape ``(res_v, res_u, 3)``; rows run along v."""
        iu, iv = _PLANE_AXES[self.normal_axis]
        uu, vv = np.meshgrid(self.u, self.v)
        pts = np.zeros(uu.shape + (3,))
        pts[..., _AXES[self.normal_axis]] = self.offset
        pts[..., iu] = uu
        pts[..., iv] = vv
        return pts

    def check_clear_of(self, positions: np.ndarray) -> None:
        iu, iv = _PLANE_AXES[self.normal_axis]
        k = _AXES[self.normal_axis]
        for p in positions:
            if (abs(p[k] - self.offset) < MIN_DISTANCE
                    and self.u_range[0] - MIN_DISTANCE <= p[iu] <= self.u_range[1] + MIN_DISTANCE
                    and self.v_range[0] - MIN_DISTANCE <= p[iv] <= self.v_range[1] + MIN_DISTANCE):
                raise ValueError(f"plane passes through the atom at {tuple(p)}")


@dataclass
class FieldMap:
    plane: PlaneSpec
    intensity: np.ndarray


def field_at_point(r, state: DipoleState, cfg: ChainConfig, dipole_axis="x") -> np.ndarray:
    """Complex field vector at ``r`` (or an array of points ``(..., 3)``)."""
    state.check_chain(cfg)
    r = np.asarray(r, dtype=float)
    sep = r[..., None, :] - atom_positions(cfg)
    if np.any(np.linalg.norm(sep, axis=-1) <= MIN_DISTANCE):
        raise ValueError("observation point coincides with an atom")
    e_hat = axis_vector(dipole_axis)
    g = dyadic_kernel(sep, cfg.a)
    return np.einsum("...jab,b,j->...a", g, e_hat, state.beta)


def intensity_map(plane: PlaneSpec, state: DipoleState, cfg: ChainConfig,
                  dipole_axis="x", chunk: int = 4096) -> FieldMap:
    """``sum_alpha |E_alpha|^2`` over every pixel of ``plane``."""
    pos = atom_positions(cfg)
    plane.check_clear_of(pos)
    pts = plane.points().reshape(-1, 3)
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], chunk):
        e = field_at_point(pts[start:start + chunk], state, cfg, dipole_axis)
        out[start:start + chunk] = np.sum(np.abs(e) ** 2, axis=-1)
    return FieldMap(plane, out.reshape(plane.resolution, plane.resolution))


def far_field_intensity(theta, state: DipoleState, cfg: ChainConfig,
                        include_polarization_factor: bool = False,
                        dipole_axis="x", phi: float = 0.0):
    """Far-zone intensity at polar angle ``theta`` from the chain axis.

    Equals ``|A_N(a cos theta)|^2``, optionally times ``|n x (n x e)|^2``
    for the direction ``n(theta, phi)``.
    """
    theta = np.asarray(theta, dtype=float)
    out = np.abs(amplitude(state, cfg.a * np.cos(theta))) ** 2
    if include_polarization_factor:
        n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
                      np.cos(theta) * np.ones_like(np.sin(phi))], axis=-1)
        proj = n @ axis_vector(dipole_axis)
        out = out * (1.0 - proj**2)
    return float(out) if np.ndim(out) == 0 else out


def evanescence_plane(cfg: ChainConfig, offset: float = 5.0, resolution: int = 200) -> PlaneSpec:
    """Default plane for :func:`evanescence_ratio`: square, twice the chain length."""
    half = max(float(cfg.n_atoms), 2.0 * offset)
    return PlaneSpec("x", offset, (-half, half), (-half, half), resolution)


def evanescence_ratio(state: DipoleState, cfg: ChainConfig, dipole_axis="x",
                      plane: PlaneSpec = None, field_map: FieldMap = None) -> float:
    """Side-to-end emission ratio in a plane parallel to the chain.

    Mean intensity over pixels alongside the chain (``|z| <= N d / 2``)
    divided by the mean over the end caps (``|z| > N d / 2``). The plane
    must have the chain axis as its v direction.
    """
    if field_map is None:
        plane = plane or evanescence_plane(cfg)
        field_map = intensity_map(plane, state, cfg, dipole_axis)
    plane = field_map.plane
    if plane.normal_axis == "z":
        raise ValueError("evanescence ratio needs a plane containing the chain direction")
    half = 0.5 * cfg.n_atoms
    z = np.abs(plane.v)
    side = z <= half
    if side.all() or not side.any():
        raise ValueError("plane must extend beyond both chain ends")
    img = field_map.intensity
    end_mean = img[~side].mean()
    side_mean = img[side].mean()
    if end_mean == 0:
        return float("nan") if side_mean == 0 else float("inf")
    return float(side_mean / end_mean)


def write_pgm(path, intensity: np.ndarray) -> None:
    """Plain (P2) PGM, 16-bit, linear from 0 to the map maximum."""
    img = np.asarray(intensity, dtype=float)
    top = img.max() if img.size else 0.0
    levels = np.zeros(img.shape, dtype=int) if top <= 0 else np.rint(img / top * 65535).astype(int)
    rows, cols = levels.shape
    lines = ["P2", f"{cols} {rows}", "65535"]
    lines += [" ".join(map(str, row)) for row in levels]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    with open(path) as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    cols, rows, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:4 + rows * cols], dtype=int).reshape(rows, cols)
