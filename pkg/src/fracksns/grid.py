"""Periodic box spectral operators.

Fields are plain numpy arrays: a scalar field has shape ``(N,) * d`` and a
vector field ``(d,) + (N,) * d``.  The forward transform divides by N**d so
the zero coefficient is the mean and the mass is ``volume * coeff[0]``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class FracParams:
    """Fractional orders: space alpha, time beta, attractant decay gamma."""

    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.gamma >= 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with ``n`` points per axis on the box [0, length)^d."""

    d: int
    n: int
    length: float = 2 * math.pi

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def volume(self) -> float:
        return self.length ** self.d

    @property
    def cell_volume(self) -> float:
        return (self.length / self.n) ** self.d

    @cached_property
    def k_int(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers per axis, broadcastable against the field shape."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        out = []
        for ax in range(self.d):
            sh = [1] * self.d
            sh[ax] = self.n
            out.append(k.reshape(sh))
        return tuple(out)

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers 2 pi k / L, Nyquist included."""
        return tuple(2 * np.pi / self.length * k for k in self.k_int)

    @cached_property
    def xi_deriv(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers used by derivative multipliers (Nyquist mode zeroed)."""
        return tuple(np.where(k == -self.n // 2, 0.0, x) for k, x in zip(self.k_int, self.xi))

    @cached_property
    def xi_abs(self) -> np.ndarray:
        sq = sum(x ** 2 for x in self.xi)
        out = np.sqrt(np.broadcast_to(sq, self.shape)).copy()
        out.flags.writeable = False
        return out

    def xi_pow(self, alpha: float) -> np.ndarray:
        """|xi|^alpha with the zero mode set to 0."""
        return np.where(self.xi_abs > 0, self.xi_abs, 1.0) ** alpha * (self.xi_abs > 0)

    def coords(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * (self.length / self.n)
        return tuple(np.meshgrid(*([x] * self.d), indexing="ij"))

    def dealias_mask(self, fraction: float = 2 / 3) -> np.ndarray:
        """Keep modes with |k_i| <= fraction * N / 2 on every axis."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"dealias fraction must lie in (0, 1], got {fraction}")
        cut = fraction * self.n / 2
        mask = np.ones(self.shape, dtype=bool)
        for k in self.k_int:
            mask = mask & (np.abs(k) <= cut)
        return mask


def _check(grid: TorusGrid, f: np.ndarray, vector: bool = False):
    want = ((grid.d,) if vector else ()) + grid.shape
    if f.shape != want:
        raise ValueError(f"field shape {f.shape} does not match grid shape {want}")


def transform(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check(grid, f)
    return np.fft.fftn(f, norm="forward")


def inverse_transform(grid: TorusGrid, fh: np.ndarray) -> np.ndarray:
    _check(grid, fh)
    return np.fft.ifftn(fh, norm="forward").real


def transform_vec(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    _check(grid, v, vector=True)
    return np.fft.fftn(v, axes=tuple(range(1, grid.d + 1)), norm="forward")


def inverse_transform_vec(grid: TorusGrid, vh: np.ndarray) -> np.ndarray:
    _check(grid, vh, vector=True)
    return np.fft.ifftn(vh, axes=tuple(range(1, grid.d + 1)), norm="forward").real


def frac_laplacian(grid: TorusGrid, f: np.ndarray, alpha: float) -> np.ndarray:
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    return inverse_transform(grid, grid.xi_pow(alpha) * transform(grid, f))


def gradient_hat(grid: TorusGrid, fh: np.ndarray) -> np.ndarray:
    return np.stack([1j * x * fh for x in grid.xi_deriv])


def divergence_hat(grid: TorusGrid, vh: np.ndarray) -> np.ndarray:
    return sum(1j * x * c for x, c in zip(grid.xi_deriv, vh))


def gradient(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    return inverse_transform_vec(grid, gradient_hat(grid, transform(grid, f)))


def divergence(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    return inverse_transform(grid, divergence_hat(grid, transform_vec(grid, v)))


def leray_hat(grid: TorusGrid, vh: np.ndarray) -> np.ndarray:
    """Apply delta_jk - xi_j xi_k / |xi|^2 with the derivative wavenumbers."""
    xs = grid.xi_deriv
    sq = sum(np.broadcast_to(x ** 2, grid.shape) for x in xs)
    inv = np.divide(1.0, sq, out=np.zeros(grid.shape), where=sq > 0)
    proj = sum(x * c for x, c in zip(xs, vh)) * inv
    return np.stack([c - x * proj for x, c in zip(xs, vh)])


def leray_project(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    return inverse_transform_vec(grid, leray_hat(grid, transform_vec(grid, v)))


def divergence_residual(grid: TorusGrid, vh: np.ndarray) -> float:
    """max |div v| / max |v| computed from spectral coefficients."""
    v = inverse_transform_vec(grid, vh)
    scale = np.max(np.abs(v))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(inverse_transform(grid, divergence_hat(grid, vh)))) / scale)


def lp_norm(grid: TorusGrid, f: np.ndarray, p: float) -> float:
    """L^p norm by the rectangle rule; vector fields use the pointwise Euclidean norm."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f) if f.shape == grid.shape else np.sqrt(np.sum(f ** 2, axis=0))
    if math.isinf(p):
        return float(np.max(a))
    amax = np.max(a)
    if amax == 0:
        return 0.0
    # scale out the maximum to avoid overflow for large p
    return float(amax * (grid.cell_volume * np.sum((a / amax) ** p)) ** (1.0 / p))


def sobolev_norm(grid: TorusGrid, f: np.ndarray, mu: float, p: float) -> float:
    """Homogeneous norm ||(-Delta)^{mu/2} f||_p."""
    if not mu >= 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if mu == 0:
        return lp_norm(grid, f, p)
    if f.shape == grid.shape:
        g = inverse_transform(grid, grid.xi_pow(mu) * transform(grid, f))
    else:
        g = inverse_transform_vec(grid, grid.xi_pow(mu) * transform_vec(grid, f))
    return lp_norm(grid, g, p)


# ---------------------------------------------------------------------------
# snapshot files

MAGIC = b"FKSS"
VERSION = 1
_HEADER = struct.Struct("<4sHHIdB")


def encode_snapshot(grid: TorusGrid, field: np.ndarray) -> bytes:
    vector = field.shape == (grid.d,) + grid.shape
    if not vector:
        _check(grid, field)
    head = _HEADER.pack(MAGIC, VERSION, grid.d, grid.n, float(grid.length), int(vector))
    return head + np.ascontiguousarray(field, dtype="<f8").tobytes()


def decode_snapshot(data: bytes) -> tuple[TorusGrid, np.ndarray]:
    if len(data) < _HEADER.size:
        raise ValueError("snapshot too short")
    magic, version, d, n, length, kind = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    if kind not in (0, 1):
        raise ValueError(f"bad field kind {kind}")
    grid = TorusGrid(d, n, length)
    shape = ((d,) if kind else ()) + grid.shape
    body = data[_HEADER.size:]
    count = int(np.prod(shape))
    if len(body) != 8 * count:
        raise ValueError(f"expected {8 * count} sample bytes, got {len(body)}")
    return grid, np.frombuffer(body, dtype="<f8").reshape(shape).astype(float)


def write_snapshot(path: str | Path, grid: TorusGrid, field: np.ndarray) -> None:
    Path(path).write_bytes(encode_snapshot(grid, field))


def read_snapshot(path: str | Path) -> tuple[TorusGrid, np.ndarray]:
    return decode_snapshot(Path(path).read_bytes())
