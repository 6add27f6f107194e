"""Equiangular spherical sampling and its torus extension.

The sampling is an n x n grid (colatitude x longitude) with pole-free
colatitudes theta_j = pi*(2j+1)/(2n) and uniform longitudes
phi_k = 2*pi*k/n.  Signals are extended to the torus by mirroring the
colatitude axis with a spin-dependent parity, after which ordinary 2D
Fourier analysis computes exact spherical inner products for
band-limited integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .signal import SpinSignal

# Test-only fault-injection hook: when not None, multiplies the
# (-1)**spin parity used by the torus extension (set to -1.0 to flip it).
_PARITY_OVERRIDE: float | None = None


@dataclass(frozen=True)
class SphericalGrid:
    """Equiangular n x n sampling of the sphere with band limit L = n/2."""

    n: int
    colatitudes: np.ndarray
    longitudes: np.ndarray
    band_limit: int

    def __post_init__(self):
        self.colatitudes.flags.writeable = False
        self.longitudes.flags.writeable = False

    def unit_vectors(self) -> np.ndarray:
        """Cartesian unit vectors of all grid points, shape (n, n, 3)."""
        th = self.colatitudes[:, None]
        ph = self.longitudes[None, :]
        return np.stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.broadcast_to(np.cos(th), (self.n, self.n))],
            axis=-1,
        )


def make_grid(n: int) -> SphericalGrid:
    """Build the equiangular grid for an even resolution n >= 2."""
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2 != 0:
        raise ValueError(f"grid resolution must be a positive even integer, got {n!r}")
    n = int(n)
    j = np.arange(n)
    colatitudes = np.pi * (2 * j + 1) / (2 * n)
    longitudes = 2 * np.pi * j / n
    return SphericalGrid(n=n, colatitudes=colatitudes, longitudes=longitudes, band_limit=n // 2)


def parity_sign(spin: int) -> float:
    sign = -1.0 if spin % 2 else 1.0
    if _PARITY_OVERRIDE is not None:
        sign *= _PARITY_OVERRIDE
    return sign


@dataclass(frozen=True)
class TorusExtension:
    """Row bookkeeping of the torus extension of a grid.

    extended_rows[j] is the source colatitude row sampled by extension
    row j (rows >= n mirror the sphere); the longitude axis of mirrored
    rows is rolled by n/2 and scaled by the spin parity.
    """

    source: SphericalGrid
    extended_rows: np.ndarray

    def __post_init__(self):
        self.extended_rows.flags.writeable = False

    @staticmethod
    def for_grid(grid: SphericalGrid) -> "TorusExtension":
        n = grid.n
        rows = np.concatenate([np.arange(n), np.arange(2 * n - 1, n - 1, -1) - n])
        return TorusExtension(source=grid, extended_rows=rows)

    @staticmethod
    def parity(order: int, spin: int) -> float:
        """Sign picked up by longitude frequency `order` of a spin-`spin` signal.

        The phi -> phi + pi shift contributes (-1)**order on top of the
        spin parity; this is the sign that folds I and G across m' = 0.
        """
        return -1.0 if (order + spin) % 2 else 1.0


def extend_samples(samples: np.ndarray, spin: int, n: int) -> np.ndarray:
    """Extend samples (..., n, n) to the torus (..., 2n, n).

    The appended rows satisfy f(2*pi - theta, phi + pi) = (-1)**spin * f(theta, phi).
    Row j of the extension mirrors row 2n-1-j of the input with the
    longitude axis rolled by n/2 (exact because n is even).
    """
    if samples.shape[-2:] != (n, n):
        raise ValueError(f"expected trailing sample shape ({n}, {n}), got {samples.shape[-2:]}")
    mirrored = np.roll(samples[..., ::-1, :], n // 2, axis=-1) * parity_sign(spin)
    return np.concatenate([samples, mirrored], axis=-2)


def extend_to_torus(signal: "SpinSignal", grid: SphericalGrid) -> np.ndarray:
    """Torus extension of every channel of a signal, shape (B, C, 2n, n)."""
    if signal.grid.n != grid.n:
        raise ValueError(f"signal grid n={signal.grid.n} does not match grid n={grid.n}")
    n = grid.n
    out = np.empty(signal.samples.shape[:-2] + (2 * n, n), dtype=complex)
    for spin in np.unique(signal.spins):
        sel = signal.spins == spin
        out[:, sel] = extend_samples(signal.samples[:, sel], int(spin), n)
    return out


@lru_cache(maxsize=None)
def frequency_weights(n: int) -> np.ndarray:
    """Colatitude-frequency quadrature weights w(k) = int_0^pi e^{ik theta} sin(theta) dtheta.

    Returned for k = -(2L-2) .. 2L-2 with L = n/2 (index k + 2L - 2).
    These realize the sin(theta) measure exactly for band-limited
    integrands once the signal has been extended to the torus.
    """
    L = n // 2
    k = np.arange(-(2 * L - 2), 2 * L - 1)
    w = np.zeros(k.shape, dtype=complex)
    even = k % 2 == 0
    w[even] = 2.0 / (1.0 - k[even].astype(float) ** 2)
    w[k == 1] = 1j * np.pi / 2
    w[k == -1] = -1j * np.pi / 2
    w.flags.writeable = False
    return w


def quadrature_weights(grid: SphericalGrid) -> np.ndarray:
    """Per-colatitude-frequency weight array for this grid (pure function of n)."""
    return frequency_weights(grid.n)


@lru_cache(maxsize=None)
def weight_matrix(n: int) -> np.ndarray:
    """Toeplitz application of the frequency weights.

    W[p, q] = 2*pi*w(q - p) for m' (rows) and m'' (columns) in
    [-(L-1), L-1]; the torus inner products are I = W @ F.
    """
    L = n // 2
    w = frequency_weights(n)
    c = 2 * L - 2
    idx = np.arange(-(L - 1), L)
    W = 2 * np.pi * w[(idx[None, :] - idx[:, None]) + c]
    W.flags.writeable = False
    return W


@lru_cache(maxsize=None)
def colatitude_weights(n: int) -> np.ndarray:
    """Spatial per-row weights for spin-0 spherical integration.

    lambda_j = (2*pi/n**2) * sum_k w(k) cos(k*theta_j); the integral of a
    band-limited f is sum_j lambda_j sum_k f[j, k].
    """
    L = n // 2
    k = np.arange(-(L - 1), L)
    w = frequency_weights(n)[(k + 2 * L - 2)]
    theta = np.pi * (2 * np.arange(n) + 1) / (2 * n)
    lam = (2 * np.pi / n**2) * (w[None, :] * np.cos(k[None, :] * theta[:, None])).sum(axis=1).real
    lam.flags.writeable = False
    return lam


def spherical_integral(samples: np.ndarray, grid: SphericalGrid) -> np.ndarray:
    """Integral over the sphere of samples (..., n, n), exact for band-limited input."""
    lam = colatitude_weights(grid.n)
    return np.einsum("...jk,j->...", samples, lam)


def spherical_mean(samples: np.ndarray, grid: SphericalGrid) -> np.ndarray:
    """Mean over the sphere (integral divided by 4*pi)."""
    return spherical_integral(samples, grid) / (4 * np.pi)
