"""Periodic-box pseudospectral machinery for u_tt - Lap u + u_t = f.

Fields live on ``[-L, L)^n`` sampled at ``N`` points per axis.  Spectral
arrays are plain unnormalized ``fftn`` coefficients, so the continuous
transform at mode ``xi_k`` is ``dx**n * (-1)**k * fftn(u)[k]``.

The linear solution operator is diagonal in Fourier space.  For a single
mode the function ``B(t) = K_hat(t, |xi|)`` solves ``B'' + B' + |xi|^2 B = 0``
with ``B(0) = 0``, ``B'(0) = 1``, and

    (u, u_t)(t) = [[K + K_t, K], [-|xi|^2 K, K_t]] (u, u_t)(0).
"""
from dataclasses import dataclass
from functools import cached_property
import math
import struct

import numpy as np
import scipy.fft as sfft

from .errors import InvalidArg, SizeMismatch
from .moduli import nonlinear_term

SEAM_HALF_WIDTH = 1e-4
_SEAM_TERMS = 18
_MAX_MODES = 2**24
_MAX_DXI = 0.1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box ``[-L, L)^n``."""
    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3, 4):
            raise InvalidArg(f"dimension must be 1..4, got {self.n}")
        if self.N < 2 or self.N & (self.N - 1):
            raise InvalidArg(f"points per axis must be a power of two, got {self.N}")
        if not self.L > 0:
            raise InvalidArg(f"half length must be positive, got {self.L}")
        if math.pi / self.L > _MAX_DXI * (1 + 1e-12):
            raise InvalidArg(f"frequency spacing pi/L = {math.pi / self.L:.4g} exceeds "
                             f"{_MAX_DXI}; use L >= {math.pi / _MAX_DXI:.4g}")
        if self.N**self.n > _MAX_MODES:
            raise InvalidArg(f"N^n = {self.N**self.n} exceeds {_MAX_MODES}")

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def dxi(self):
        return math.pi / self.L

    @property
    def cell_volume(self):
        return self.dx**self.n

    @property
    def volume(self):
        return (2.0 * self.L) ** self.n

    @cached_property
    def x(self):
        """1-D coordinates along one axis."""
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def xi(self):
        """1-D mode frequencies along one axis, in fft order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    @cached_property
    def r2(self):
        """|x|^2 on the full grid."""
        return _radial_sq(self.x, self.n)

    @cached_property
    def xi2(self):
        """|xi|^2 on the full grid."""
        return _radial_sq(self.xi, self.n)

    @cached_property
    def xi_norm(self):
        return np.sqrt(self.xi2)

    @cached_property
    def shift_phase(self):
        """(-1)^(k_1+...+k_n): moves the origin from the box corner to x = 0."""
        # N is even, so (-1)^k agrees for the signed and the fft-order index
        s = (-1.0) ** np.arange(self.N)
        out = s
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, s)
        return out

    @cached_property
    def dealias_mask(self):
        """True on modes kept by the 2/3 rule."""
        k = np.abs(np.fft.fftfreq(self.N) * self.N)
        keep = k <= self.N / 3.0
        out = keep
        for _ in range(self.n - 1):
            out = np.logical_and.outer(out, keep)
        return out

    def to_dict(self):
        return {"n": self.n, "N": self.N, "L": self.L}


def _radial_sq(v, n):
    v2 = v * v
    out = v2
    for _ in range(n - 1):
        out = np.add.outer(out, v2)
    return out


@dataclass
class State:
    """Spectral pair (u_hat, ut_hat) at time t."""
    t: float
    u_hat: np.ndarray
    ut_hat: np.ndarray

    def __post_init__(self):
        if self.u_hat.shape != self.ut_hat.shape:
            raise SizeMismatch("u_hat and ut_hat must share one grid")
        if self.t < 0:
            raise InvalidArg("state time must be non-negative")

    def copy(self):
        return State(self.t, self.u_hat.copy(), self.ut_hat.copy())


def _check_shape(a, grid):
    if a.shape != grid.shape:
        raise SizeMismatch(f"array of shape {a.shape} on grid of shape {grid.shape}")


def forward_transform(f, grid):
    f = np.asarray(f)
    _check_shape(f, grid)
    return sfft.fftn(f)


def inverse_transform(g, grid):
    g = np.asarray(g)
    _check_shape(g, grid)
    return sfft.ifftn(g).real


def state_from_physical(grid, u, ut, t=0.0):
    return State(t, forward_transform(u, grid), forward_transform(ut, grid))


# --- kernel symbols -------------------------------------------------------

def _series(z, odd):
    # sum_k z^k / (2k+1)!  (odd)  or  sum_k z^k / (2k)!  (even), via Horner
    out = np.zeros_like(z)
    for k in range(_SEAM_TERMS - 1, -1, -1):
        d = (2 * k + 2) * (2 * k + 3) if odd else (2 * k + 1) * (2 * k + 2)
        out = 1.0 + z * out / d
    return out


def kernel_pair(t, xi_norm):
    """Return (K_hat, dK_hat/dt) at time ``t`` for frequencies ``|xi|``.

    Broadcasts over ``t`` and ``xi_norm``.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(xi_norm, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    K = np.empty(t.shape)
    Kt = np.empty(t.shape)
    w2 = 0.25 - r * r
    z = t * t * w2
    seam = (np.abs(r - 0.5) <= SEAM_HALF_WIDTH) & (np.abs(z) <= 1.0)
    lo = (r < 0.5) & ~seam
    hi = (r >= 0.5) & ~seam

    if seam.any():
        ts, zs = t[seam], z[seam]
        damp = np.exp(-0.5 * ts)
        S = _series(zs, odd=True)
        K[seam] = damp * ts * S
        Kt[seam] = damp * (_series(zs, odd=False) - 0.5 * ts * S)

    if lo.any():
        tl, rl = t[lo], r[lo]
        om = np.sqrt(w2[lo])
        a = rl * rl / (0.5 + om)   # = 1/2 - omega, without cancellation
        b = 0.5 + om
        ea = np.exp(-tl * a)
        eb = np.exp(-tl * b)
        K[lo] = -ea * np.expm1(-2.0 * tl * om) / (2.0 * om)
        Kt[lo] = (b * eb - a * ea) / (2.0 * om)

    if hi.any():
        th = t[hi]
        om = np.sqrt(-w2[hi])
        damp = np.exp(-0.5 * th)
        s = np.sin(th * om)
        K[hi] = damp * s / om
        Kt[hi] = damp * (np.cos(th * om) - 0.5 * s / om)

    if K.ndim == 0:
        return float(K), float(Kt)
    return K, Kt


def kernel_symbol(t, xi_norm):
    """K_hat(t, |xi|): the mode response to a unit initial velocity."""
    return kernel_pair(t, xi_norm)[0]


def kernel_dt_symbol(t, xi_norm):
    """Time derivative of :func:`kernel_symbol`."""
    return kernel_pair(t, xi_norm)[1]


def propagator_matrix(t, xi_norm):
    """Entries (a11, a12, a21, a22) of the per-mode linear solution matrix."""
    K, Kt = kernel_pair(t, xi_norm)
    xi2 = np.asarray(xi_norm, dtype=float) ** 2
    return K + Kt, K, -xi2 * K, Kt


def linear_propagate(s, dt, grid):
    """Advance a state by ``dt`` with the exact linear solution operator."""
    if not dt > 0:
        raise InvalidArg(f"dt must be positive, got {dt}")
    _check_shape(s.u_hat, grid)
    a11, a12, a21, a22 = propagator_matrix(dt, grid.xi_norm)
    return State(s.t + dt,
                 a11 * s.u_hat + a12 * s.ut_hat,
                 a21 * s.u_hat + a22 * s.ut_hat)


# --- Gauss kernel -----------------------------------------------------------

def gauss_symbol(t, xi_norm):
    """exp(-|xi|^2 t)."""
    if not np.all(np.asarray(t) > 0):
        raise InvalidArg("gauss_symbol needs t > 0")
    return np.exp(-np.asarray(xi_norm, dtype=float) ** 2 * t)


def gauss_hat(grid, t, M=1.0):
    """Spectral coefficients of M times the (periodized) heat kernel at time t."""
    return (M / grid.cell_volume) * grid.shift_phase * gauss_symbol(t, grid.xi_norm)


def gauss_field(grid, t, M=1.0):
    """M * G(t, .) on the grid, realized through its Fourier symbol."""
    return inverse_transform(gauss_hat(grid, t, M), grid)


# --- nonlinearity ---------------------------------------------------------

def apply_nonlinearity(u, spec, n, dealias=False, grid=None):
    """Pointwise |u|^(1+2/n) mu(|u|), optionally truncated by the 2/3 rule."""
    v = nonlinear_term(u, spec, n)
    if dealias:
        if grid is None:
            raise InvalidArg("dealiasing needs the grid")
        v = inverse_transform(forward_transform(v, grid) * grid.dealias_mask, grid)
    return v


# --- field snapshots ------------------------------------------------------

_HEADER = struct.Struct("<4sIQdd")
_MAGIC = b"DWLF"


def save_field(path, grid, t, values):
    """Write a physical field: 32-byte header then little-endian float64 data.

    Header layout: magic ``DWLF``, uint32 n, uint64 N, float64 t, float64 L.
    """
    values = np.asarray(values, dtype="<f8")
    _check_shape(values, grid)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, grid.n, grid.N, float(t), float(grid.L)))
        fh.write(np.ascontiguousarray(values).tobytes())


def load_field(path):
    """Read a snapshot written by :func:`save_field`; returns (grid, t, values)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, n, N, t, L = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise InvalidArg(f"{path}: bad magic {magic!r}")
    grid = Grid(n, N, L)
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != N**n:
        raise SizeMismatch(f"{path}: expected {N**n} values, found {data.size}")
    return grid, t, data.reshape(grid.shape).astype(float)
