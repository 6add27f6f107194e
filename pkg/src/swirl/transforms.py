"""Forward and inverse spin-weighted spherical Fourier transforms.

The forward transform extends the signal to the torus, runs a 2D Fourier
analysis (FFT or explicit DFT-matrix products), applies the
colatitude-frequency quadrature weights, and contracts with the Delta
tables:

    coeff(l, m) = (-1)^s i^(m+s) sqrt((2l+1)/(4pi))
                  * sum_{m'} Delta^l_{m',m} Delta^l_{m',-s} I_{m',m}

The inverse assembles the G matrix

    G_{m',m} = (-1)^s i^(m+s) sum_l sqrt((2l+1)/(4pi))
               * Delta^l_{-m',-s} Delta^l_{-m',m} coeff(l, m)

and synthesizes samples with a 2D Fourier synthesis.  In the reduced
symmetry path only half of the m' range is computed; the other half
follows from the Delta symmetries (J fold in analysis, G fold in
synthesis).  All four backend/path combinations are numerically
equivalent; they differ only in speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import grid as grid_mod
from .grid import SphericalGrid, weight_matrix
from .signal import SpinCoefficients, SpinSignal, degree_slice, num_coefficients
from .wigner import WignerTables, _I_POW

FOURIER_BACKENDS = ("dft_matrix", "fft")
SYMMETRY_PATHS = ("reduced", "full")


@dataclass(frozen=True)
class TransformConfig:
    """Computation-path selection; every combination gives identical results."""

    fourier_backend: str = "dft_matrix"
    symmetry_path: str = "full"

    def __post_init__(self):
        if self.fourier_backend not in FOURIER_BACKENDS:
            raise ValueError(f"fourier_backend must be one of {FOURIER_BACKENDS}, got {self.fourier_backend!r}")
        if self.symmetry_path not in SYMMETRY_PATHS:
            raise ValueError(f"symmetry_path must be one of {SYMMETRY_PATHS}, got {self.symmetry_path!r}")


DEFAULT_CONFIG = TransformConfig()


@lru_cache(maxsize=32)
def _dft_matrix(n: int) -> np.ndarray:
    q = np.arange(n)
    E = np.exp(-2j * np.pi * np.outer(q, q) / n)
    E.flags.writeable = False
    return E


def fourier_2d(values: np.ndarray, direction: str, backend: str = "fft") -> np.ndarray:
    """Standard 2D DFT over the trailing two axes.

    'analysis' is the unnormalized forward DFT, 'synthesis' the
    1/N-normalized inverse; the two backends agree to rounding.
    """
    if direction not in ("analysis", "synthesis"):
        raise ValueError(f"direction must be 'analysis' or 'synthesis', got {direction!r}")
    if backend not in FOURIER_BACKENDS:
        raise ValueError(f"backend must be one of {FOURIER_BACKENDS}, got {backend!r}")
    if backend == "fft":
        if direction == "analysis":
            return np.fft.fft2(values)
        return np.fft.ifft2(values)
    rows, cols = values.shape[-2:]
    Er, Ec = _dft_matrix(rows), _dft_matrix(cols)
    if direction == "analysis":
        return np.matmul(np.matmul(Er, values), Ec.T)
    return np.matmul(np.matmul(Er.conj(), values), Ec.T.conj()) / (rows * cols)


def _phase_vector(L: int, spin: int) -> np.ndarray:
    # (-1)^s * i^(m+s) for m = -(L-1) .. L-1
    m = np.arange(-(L - 1), L)
    return (-1.0) ** spin * _I_POW[(m + spin) % 4]


def _parity_signs(L: int, spin: int) -> np.ndarray:
    m = np.arange(-(L - 1), L)
    return np.where((m + spin) % 2 == 0, 1.0, -1.0)


def inner_products(samples: np.ndarray, spin: int, grid: SphericalGrid, backend: str = "fft") -> np.ndarray:
    """Torus-pipeline inner products I_{m',m} of samples (..., n, n).

    I_{m',m} = integral of f(theta, phi) e^{-i m' theta} e^{-i m phi}
    over the sphere, exact for band-limited f; m', m in [-(L-1), L-1].
    """
    n = grid.n
    L = grid.band_limit
    ext = grid_mod.extend_samples(np.asarray(samples, dtype=complex), spin, n)
    spec = fourier_2d(ext, "analysis", backend) / (2 * n * n)
    t_idx = np.arange(-(L - 1), L) % (2 * n)
    p_idx = np.arange(-(L - 1), L) % n
    F = spec[..., t_idx[:, None], p_idx[None, :]]
    offset = np.exp(-1j * np.arange(-(L - 1), L) * np.pi / (2 * n))
    F = F * offset[:, None]
    return weight_matrix(n) @ F


def _check_tables(band_limit: int, tables: WignerTables):
    if tables.band_limit < band_limit:
        raise ValueError(f"tables band limit {tables.band_limit} is smaller than required {band_limit}")


def forward(signal: SpinSignal, tables: WignerTables, config: TransformConfig = DEFAULT_CONFIG) -> SpinCoefficients:
    """Forward transform of every channel of a signal."""
    L = signal.grid.band_limit
    _check_tables(L, tables)
    out = np.zeros(signal.samples.shape[:2] + (num_coefficients(L),), dtype=complex)
    for spin in np.unique(signal.spins):
        sel = signal.spins == spin
        out[:, sel] = _forward_block(signal.samples[:, sel], int(spin), signal.grid, tables, config)
    return SpinCoefficients(out, signal.spins.copy(), L)


def _forward_block(samples, spin, grid, tables, config):
    L = grid.band_limit
    I = inner_products(samples, spin, grid, config.fourier_backend)
    c = L - 1
    reduced = config.symmetry_path == "reduced"
    if reduced:
        J = I[..., c:, :].copy()
        if L > 1:
            J[..., 1:, :] += _parity_signs(L, spin) * I[..., c - 1 :: -1, :]
    out = np.zeros(samples.shape[:-2] + (num_coefficients(L),), dtype=complex)
    phases = _phase_vector(L, spin)
    for l in range(abs(spin), L):
        D = tables[l]
        col = D[:, l - spin]  # Delta^l_{m', -s}
        if reduced:
            block = np.einsum("pm,p,...pm->...m", D[l:, :], col[l:], J[..., : l + 1, c - l : c + l + 1])
        else:
            block = np.einsum("pm,p,...pm->...m", D, col, I[..., c - l : c + l + 1, c - l : c + l + 1])
        alpha = np.sqrt((2 * l + 1) / (4 * np.pi))
        out[..., degree_slice(l)] = phases[c - l : c + l + 1] * alpha * block
    return out


def g_matrix(coeffs: SpinCoefficients, tables: WignerTables, config: TransformConfig = DEFAULT_CONFIG) -> np.ndarray:
    """The synthesis G matrix, shape (batch, channels, 2L-1, 2L-1).

    Satisfies G_{m',m} = (-1)^(m+s) G_{-m',m}; in the reduced path only
    m' >= 0 is computed and the negative rows are filled by that symmetry.
    """
    L = coeffs.band_limit
    _check_tables(L, tables)
    out = np.zeros(coeffs.coeffs.shape[:2] + (2 * L - 1, 2 * L - 1), dtype=complex)
    for spin in np.unique(coeffs.spins):
        sel = coeffs.spins == spin
        out[:, sel] = _g_block(coeffs.coeffs[:, sel], int(spin), L, tables, config)
    return out


def _g_block(flat, spin, L, tables, config):
    c = L - 1
    reduced = config.symmetry_path == "reduced"
    G = np.zeros(flat.shape[:-1] + (2 * L - 1, 2 * L - 1), dtype=complex)
    phases = _phase_vector(L, spin)
    for l in range(abs(spin), L):
        Drev = tables[l][::-1]  # row index maps m' -> -m'
        col = Drev[:, l - spin]  # Delta^l_{-m', -s}
        alpha = np.sqrt((2 * l + 1) / (4 * np.pi))
        cl = (phases[c - l : c + l + 1] * alpha) * flat[..., degree_slice(l)]
        if reduced:
            G[..., c : c + l + 1, c - l : c + l + 1] += np.einsum("p,pm,...m->...pm", col[l:], Drev[l:], cl)
        else:
            G[..., c - l : c + l + 1, c - l : c + l + 1] += np.einsum("p,pm,...m->...pm", col, Drev, cl)
    if reduced and L > 1:
        G[..., :c, :] = _parity_signs(L, spin) * G[..., 2 * c : c : -1, :]
    return G


def inverse(coeffs: SpinCoefficients, tables: WignerTables, config: TransformConfig = DEFAULT_CONFIG) -> SpinSignal:
    """Inverse transform, synthesizing samples on the implied n = 2L grid."""
    L = coeffs.band_limit
    _check_tables(L, tables)
    grid = coeffs.grid()
    out = np.empty(coeffs.coeffs.shape[:2] + (grid.n, grid.n), dtype=complex)
    for spin in np.unique(coeffs.spins):
        sel = coeffs.spins == spin
        G = _g_block(coeffs.coeffs[:, sel], int(spin), L, tables, config)
        out[:, sel] = _synthesize(G, L, config)
    return SpinSignal(out, coeffs.spins.copy(), grid)


def _synthesize(G, L, config):
    n = 2 * L
    offset = np.exp(1j * np.arange(-(L - 1), L) * np.pi / (2 * n))
    G = G * offset[:, None]
    S = np.zeros(G.shape[:-2] + (2 * n, n), dtype=complex)
    t_idx = np.arange(-(L - 1), L) % (2 * n)
    p_idx = np.arange(-(L - 1), L) % n
    S[..., t_idx[:, None], p_idx[None, :]] = G
    f = fourier_2d(S, "synthesis", config.fourier_backend) * (2 * n * n)
    return f[..., :n, :]
