"""Fourier pseudospectral machinery on the periodic phase space.

Fields live on the unit spatial torus [0,1)^2 crossed with the heading
circle [0, 2 pi).  Physical arrays are laid out ``(x1, x2, theta)`` with
theta the fastest-varying index, so per-angle spatial slices are
contiguous.  Transforms are real-to-complex along x2 (the last spatial
axis), which halves coefficient storage; the coefficient layout is

    3-D: shape (n_x1, n_x2 // 2 + 1, n_theta),
         axis 0 = spatial mode m1 (full),  axis 1 = m2 (half),
         axis 2 = angular mode n (full);
    2-D: shape (n_x1, n_x2 // 2 + 1).

Spatial derivatives multiply by 2 pi i m, angular ones by i n.  Odd-order
derivative multipliers zero the Nyquist mode (an imaginary multiplier on
the self-conjugate mode would break the real round trip); squared
multipliers keep the full value.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

TWO_PI = 2.0 * np.pi

_MAGIC = b"ANTK"
_FORMAT_VERSION = 1


class Representation(enum.Enum):
    PHYSICAL = 0
    FOURIER = 1


@dataclass(frozen=True)
class SpectralGrid:
    """Collocation grid sizes; all even and at least 8."""

    n_x1: int
    n_x2: int
    n_theta: int

    def __post_init__(self):
        for name in ("n_x1", "n_x2", "n_theta"):
            n = getattr(self, name)
            if not isinstance(n, int) or isinstance(n, bool):
                raise ValueError(f"{name} must be an integer, got {n!r}")
            if n < 8 or n % 2:
                raise ValueError(f"{name} must be even and >= 8, got {n}")

    # collocation points
    @cached_property
    def x1(self):
        return np.arange(self.n_x1) / self.n_x1

    @cached_property
    def x2(self):
        return np.arange(self.n_x2) / self.n_x2

    @cached_property
    def theta(self):
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    # integer wavenumbers matching the coefficient layout
    @cached_property
    def m1(self):
        return np.fft.fftfreq(self.n_x1, 1.0 / self.n_x1).astype(np.int64)

    @cached_property
    def m2(self):
        return np.fft.rfftfreq(self.n_x2, 1.0 / self.n_x2).astype(np.int64)

    @cached_property
    def n_modes(self):
        return np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta).astype(np.int64)

    @property
    def shape_phys3(self):
        return (self.n_x1, self.n_x2, self.n_theta)

    @property
    def shape_four3(self):
        return (self.n_x1, self.n_x2 // 2 + 1, self.n_theta)

    @property
    def shape_phys2(self):
        return (self.n_x1, self.n_x2)

    @property
    def shape_four2(self):
        return (self.n_x1, self.n_x2 // 2 + 1)

    @property
    def cell_volume(self):
        return TWO_PI / (self.n_x1 * self.n_x2 * self.n_theta)

    @property
    def cell_area(self):
        return 1.0 / (self.n_x1 * self.n_x2)

    # derivative multipliers; odd order zeroes the Nyquist row
    def _zero_nyquist(self, modes, n):
        out = modes.astype(np.float64)
        if n % 2 == 0:
            out[np.abs(modes) == n // 2] = 0.0
        return out

    @cached_property
    def ik1_2d(self):
        m = self._zero_nyquist(self.m1, self.n_x1)
        return (2j * np.pi * m)[:, None]

    @cached_property
    def ik2_2d(self):
        m = self._zero_nyquist(self.m2, self.n_x2)
        return (2j * np.pi * m)[None, :]

    @cached_property
    def ik1_3d(self):
        return self.ik1_2d[:, :, None]

    @cached_property
    def ik2_3d(self):
        return self.ik2_2d[:, :, None]

    @cached_property
    def in_3d(self):
        n = self._zero_nyquist(self.n_modes, self.n_theta)
        return (1j * n)[None, None, :]

    # squared magnitudes, full Nyquist values
    @cached_property
    def ksq_2d(self):
        m1 = self.m1.astype(np.float64)[:, None]
        m2 = self.m2.astype(np.float64)[None, :]
        return (2.0 * np.pi) ** 2 * (m1 * m1 + m2 * m2)

    @cached_property
    def ksq_3d(self):
        return self.ksq_2d[:, :, None]

    @cached_property
    def nsq_3d(self):
        n = self.n_modes.astype(np.float64)
        return (n * n)[None, None, :]

    # Parseval weights for the half axis (axis 1)
    @cached_property
    def half_weights(self):
        w = np.full(self.n_x2 // 2 + 1, 2.0)
        w[0] = 1.0
        if self.n_x2 % 2 == 0:
            w[-1] = 1.0
        return w

    @cached_property
    def cos_theta(self):
        return np.cos(self.theta)

    @cached_property
    def sin_theta(self):
        return np.sin(self.theta)

    @cached_property
    def dealias_mask3(self):
        keep1 = np.abs(self.m1) <= self.n_x1 // 3
        keep2 = np.abs(self.m2) <= self.n_x2 // 3
        keepn = np.abs(self.n_modes) <= self.n_theta // 3
        return keep1[:, None, None] & keep2[None, :, None] & keepn[None, None, :]

    @cached_property
    def dealias_mask2(self):
        keep1 = np.abs(self.m1) <= self.n_x1 // 3
        keep2 = np.abs(self.m2) <= self.n_x2 // 3
        return keep1[:, None] & keep2[None, :]


# --- raw transforms -------------------------------------------------------------


def fft3(values):
    """Forward transform of an (x1, x2, theta) array; x2 is the half axis."""
    return _fft.rfftn(values, axes=(2, 0, 1))


def ifft3(coeffs, grid: SpectralGrid):
    return _fft.irfftn(coeffs, s=(grid.n_theta, grid.n_x1, grid.n_x2), axes=(2, 0, 1))


def fft2(values):
    return _fft.rfftn(values, axes=(0, 1))


def ifft2(coeffs, grid: SpectralGrid):
    return _fft.irfftn(coeffs, s=(grid.n_x1, grid.n_x2), axes=(0, 1))


# --- fields ---------------------------------------------------------------------


@dataclass
class SpectralField3:
    """Scalar field on the full phase space, in either representation."""

    grid: SpectralGrid
    values: np.ndarray
    representation: Representation = Representation.PHYSICAL

    def __post_init__(self):
        expected = (
            self.grid.shape_phys3
            if self.representation is Representation.PHYSICAL
            else self.grid.shape_four3
        )
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {expected} "
                f"for {self.representation.name} representation"
            )

    def to_fourier(self) -> "SpectralField3":
        if self.representation is Representation.FOURIER:
            return self
        return SpectralField3(self.grid, fft3(self.values), Representation.FOURIER)

    def to_physical(self) -> "SpectralField3":
        if self.representation is Representation.PHYSICAL:
            return self
        return SpectralField3(self.grid, ifft3(self.values, self.grid), Representation.PHYSICAL)

    def copy(self) -> "SpectralField3":
        return SpectralField3(self.grid, self.values.copy(), self.representation)


@dataclass
class SpatialField2:
    """Scalar field on the spatial torus only."""

    grid: SpectralGrid
    values: np.ndarray
    representation: Representation = Representation.PHYSICAL

    def __post_init__(self):
        expected = (
            self.grid.shape_phys2
            if self.representation is Representation.PHYSICAL
            else self.grid.shape_four2
        )
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {expected} "
                f"for {self.representation.name} representation"
            )

    def to_fourier(self) -> "SpatialField2":
        if self.representation is Representation.FOURIER:
            return self
        return SpatialField2(self.grid, fft2(self.values), Representation.FOURIER)

    def to_physical(self) -> "SpatialField2":
        if self.representation is Representation.PHYSICAL:
            return self
        return SpatialField2(self.grid, ifft2(self.values, self.grid), Representation.PHYSICAL)

    def copy(self) -> "SpatialField2":
        return SpatialField2(self.grid, self.values.copy(), self.representation)


# --- calculus -------------------------------------------------------------------


def gradient_x(c: SpatialField2) -> tuple[SpatialField2, SpatialField2]:
    """Spatial gradient (d1 c, d2 c), returned in physical space."""
    grid = c.grid
    ch = c.to_fourier().values
    g1 = ifft2(grid.ik1_2d * ch, grid)
    g2 = ifft2(grid.ik2_2d * ch, grid)
    return SpatialField2(grid, g1), SpatialField2(grid, g2)


def hessian_x(c: SpatialField2) -> tuple[SpatialField2, SpatialField2, SpatialField2]:
    """Spatial Hessian components (c11, c12, c22) in physical space.

    Even-order multipliers are real, so the full Nyquist values are kept
    and c12 == c21 exactly.
    """
    grid = c.grid
    ch = c.to_fourier().values
    m1 = (2.0 * np.pi * grid.m1.astype(np.float64))[:, None]
    m2 = (2.0 * np.pi * grid.m2.astype(np.float64))[None, :]
    c11 = ifft2(-(m1 * m1) * ch, grid)
    c12 = ifft2(-(m1 * m2) * ch, grid)
    c22 = ifft2(-(m2 * m2) * ch, grid)
    return (
        SpatialField2(grid, c11),
        SpatialField2(grid, c12),
        SpatialField2(grid, c22),
    )


def d_theta(f: SpectralField3) -> SpectralField3:
    """Angular derivative, returned in the representation of the input."""
    grid = f.grid
    fh = f.to_fourier().values
    out = grid.in_3d * fh
    if f.representation is Representation.PHYSICAL:
        return SpectralField3(grid, ifft3(out, grid))
    return SpectralField3(grid, out, Representation.FOURIER)


def dealias(f: SpectralField3) -> SpectralField3:
    """Two-thirds-rule truncation in all three directions (idempotent)."""
    grid = f.grid
    fh = f.to_fourier().values * grid.dealias_mask3
    if f.representation is Representation.PHYSICAL:
        return SpectralField3(grid, ifft3(fh, grid))
    return SpectralField3(grid, fh, Representation.FOURIER)


def turning_bias_parts(c: SpatialField2, tau: float):
    """The four spatial fields that generate the turning bias.

    B(x, theta) = -sin(theta) g1 + cos(theta) g2 + sin(2 theta) s + cos(2 theta) r
    with g = grad c, s = tau (c22 - c11) / 2, r = tau c12.  Only angular
    modes +-1 and +-2 ever appear.
    """
    g1, g2 = gradient_x(c)
    if tau == 0.0:
        zero = np.zeros(c.grid.shape_phys2)
        return g1.values, g2.values, zero, zero
    c11, c12, c22 = hessian_x(c)
    s = 0.5 * tau * (c22.values - c11.values)
    r = tau * c12.values
    return g1.values, g2.values, s, r


def turning_bias(c: SpatialField2, tau: float) -> SpectralField3:
    """Expanded turning bias on the full phase-space grid (physical)."""
    grid = c.grid
    g1, g2, s, r = turning_bias_parts(c, tau)
    th = grid.theta
    values = (
        -np.sin(th)[None, None, :] * g1[:, :, None]
        + np.cos(th)[None, None, :] * g2[:, :, None]
        + np.sin(2.0 * th)[None, None, :] * s[:, :, None]
        + np.cos(2.0 * th)[None, None, :] * r[:, :, None]
    )
    return SpectralField3(grid, values)


def turning_bias_dtheta(c: SpatialField2, tau: float) -> SpectralField3:
    """Angular derivative of the turning bias, expanded analytically."""
    grid = c.grid
    g1, g2, s, r = turning_bias_parts(c, tau)
    th = grid.theta
    values = (
        -np.cos(th)[None, None, :] * g1[:, :, None]
        - np.sin(th)[None, None, :] * g2[:, :, None]
        + 2.0 * np.cos(2.0 * th)[None, None, :] * s[:, :, None]
        - 2.0 * np.sin(2.0 * th)[None, None, :] * r[:, :, None]
    )
    return SpectralField3(grid, values)


# --- norms ----------------------------------------------------------------------


def l2_norm3_hat(f_hat, grid: SpectralGrid) -> float:
    """L^2(x, theta) norm from 3-D coefficients (Parseval, half axis weighted)."""
    n_tot = grid.n_x1 * grid.n_x2 * grid.n_theta
    s = np.sum(grid.half_weights[None, :, None] * np.abs(f_hat) ** 2)
    return float(np.sqrt(TWO_PI * s) / n_tot)


def l2_norm2_hat(c_hat, grid: SpectralGrid) -> float:
    n_tot = grid.n_x1 * grid.n_x2
    s = np.sum(grid.half_weights[None, :] * np.abs(c_hat) ** 2)
    return float(np.sqrt(s) / n_tot)


def lp_norm_phys(values, p: float, cell_measure: float) -> float:
    """Collocation L^p norm with the given cell measure."""
    return float((np.sum(np.abs(values) ** p) * cell_measure) ** (1.0 / p))


# --- serialization --------------------------------------------------------------


def _header(n_x1: int, n_x2: int, n_theta: int, representation: Representation) -> bytes:
    return _MAGIC + struct.pack(
        "<5I", _FORMAT_VERSION, n_x1, n_x2, n_theta, representation.value
    )


def write_field(path, field) -> None:
    """Serialize a field (header + row-major little-endian payload).

    Physical data is stored as float64, Fourier data as interleaved
    (re, im) float64 pairs.  A 2-D spatial field is marked by n_theta = 0
    in the header.
    """
    grid = field.grid
    n_theta = 0 if isinstance(field, SpatialField2) else grid.n_theta
    values = np.ascontiguousarray(field.values)
    if field.representation is Representation.PHYSICAL:
        payload = values.astype("<f8", copy=False).tobytes()
    else:
        payload = values.astype("<c16", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(_header(grid.n_x1, grid.n_x2, n_theta, field.representation))
        fh.write(payload)


def read_field(path, grid: SpectralGrid | None = None):
    """Read a serialized field; validates magic, version, and payload size."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    version, n_x1, n_x2, n_theta, rep_flag = struct.unpack("<5I", raw[4:24])
    if version != _FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    try:
        representation = Representation(rep_flag)
    except ValueError:
        raise ValueError(f"{path}: unknown representation flag {rep_flag}") from None
    if grid is None:
        grid = SpectralGrid(n_x1, n_x2, n_theta if n_theta else 8)
    elif (grid.n_x1, grid.n_x2) != (n_x1, n_x2) or (n_theta and grid.n_theta != n_theta):
        raise ValueError(
            f"{path}: stored grid ({n_x1}, {n_x2}, {n_theta}) does not match "
            f"({grid.n_x1}, {grid.n_x2}, {grid.n_theta})"
        )
    if n_theta == 0:
        shape = (
            grid.shape_phys2
            if representation is Representation.PHYSICAL
            else grid.shape_four2
        )
        cls = SpatialField2
    else:
        shape = (
            grid.shape_phys3
            if representation is Representation.PHYSICAL
            else grid.shape_four3
        )
        cls = SpectralField3
    dtype = "<f8" if representation is Representation.PHYSICAL else "<c16"
    payload = np.frombuffer(raw[24:], dtype=dtype)
    if payload.size != int(np.prod(shape)):
        raise ValueError(
            f"{path}: payload has {payload.size} entries, expected {int(np.prod(shape))}"
        )
    values = payload.reshape(shape).copy()
    return cls(grid, values, representation)
