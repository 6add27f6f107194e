"""Spectral neural-network layers.

All layers act on harmonic coefficients except the phase collapse, which
is a pointwise spatial activation.  Channel layout convention: a
coefficient or signal object processed by these layers carries channels
grouped by spin, i.e. spins = repeat(spin_set, channels_per_spin).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .signal import (
    SpinCoefficients,
    SpinSignal,
    degree_of_index,
    num_coefficients,
)
from .transforms import DEFAULT_CONFIG, TransformConfig, forward, inverse
from .wigner import compute_delta


def _grouped_spins(spin_set, channels: int) -> np.ndarray:
    return np.repeat(np.asarray(spin_set, dtype=int), channels)


@dataclass(frozen=True)
class FilterBank:
    """Per-degree spectral filter taps indexed by (spin_in, spin_out, c_in, c_out, l).

    Taps multiply coefficients degree-wise; there is no mixing across
    (l, m), which is what makes the convolution exactly equivariant.
    """

    weights: dict
    spins_in: tuple
    spins_out: tuple

    def __post_init__(self):
        spins_in = tuple(int(s) for s in self.spins_in)
        spins_out = tuple(int(s) for s in self.spins_out)
        object.__setattr__(self, "spins_in", spins_in)
        object.__setattr__(self, "spins_out", spins_out)
        weights = {}
        shape = None
        for si in spins_in:
            for so in spins_out:
                key = (si, so)
                if key not in self.weights:
                    raise ValueError(f"missing taps for spin pair {key}")
                w = np.array(self.weights[key], dtype=complex)
                if shape is None:
                    shape = w.shape
                if w.ndim != 3 or w.shape != shape:
                    raise ValueError(f"taps for {key} have shape {w.shape}, expected {shape}")
                w[..., : max(abs(si), abs(so))] = 0.0
                w.flags.writeable = False
                weights[key] = w
        object.__setattr__(self, "weights", weights)

    @property
    def channels_in(self) -> int:
        return next(iter(self.weights.values())).shape[0]

    @property
    def channels_out(self) -> int:
        return next(iter(self.weights.values())).shape[1]

    @property
    def band_limit(self) -> int:
        return next(iter(self.weights.values())).shape[2]

    @classmethod
    def identity(cls, spins, channels: int, band_limit: int) -> "FilterBank":
        """Spin- and channel-diagonal bank with unit taps (a no-op)."""
        spins = tuple(int(s) for s in spins)
        eye = np.eye(channels, dtype=complex)[:, :, None] * np.ones(band_limit)
        weights = {}
        for si in spins:
            for so in spins:
                weights[(si, so)] = eye if si == so else np.zeros_like(eye)
        return cls(weights, spins, spins)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        spins_in,
        spins_out,
        channels_in: int,
        channels_out: int,
        band_limit: int,
        real: bool = False,
        spin_diagonal: bool = False,
        per_degree: bool = True,
    ) -> "FilterBank":
        """Unit-variance complex Gaussian taps scaled by 1/sqrt(fan_in * L).

        With per_degree=False the taps are constant across degree (the
        spectral analogue of a 1x1 convolution, used for skip projections).
        """
        spins_in = tuple(int(s) for s in spins_in)
        spins_out = tuple(int(s) for s in spins_out)
        fan_in = len(spins_in) * channels_in
        scale = 1.0 / np.sqrt(fan_in * band_limit)
        weights = {}
        for si in spins_in:
            for so in spins_out:
                deg = band_limit if per_degree else 1
                w = rng.normal(size=(channels_in, channels_out, deg)) * scale
                if not real:
                    w = w + 1j * rng.normal(size=w.shape) * scale
                if not per_degree:
                    w = np.broadcast_to(w, (channels_in, channels_out, band_limit)).copy()
                if spin_diagonal and si != so:
                    w = np.zeros((channels_in, channels_out, band_limit), dtype=complex)
                weights[(si, so)] = w
        return cls(weights, spins_in, spins_out)

    @classmethod
    def projection(cls, rng, spins, channels_in, channels_out, band_limit, real=False) -> "FilterBank":
        """1-tap (degree-constant) spin-diagonal bank for skip-path channel projection."""
        return cls.random(
            rng, spins, spins, channels_in, channels_out, band_limit,
            real=real, spin_diagonal=True, per_degree=False,
        )


def spectral_conv(coeffs: SpinCoefficients, bank: FilterBank) -> SpinCoefficients:
    """Spherical convolution as per-degree products of coefficients and taps."""
    L = coeffs.band_limit
    if bank.band_limit != L:
        raise ValueError(f"bank band limit {bank.band_limit} does not match coefficients ({L})")
    expected = _grouped_spins(bank.spins_in, bank.channels_in)
    if not np.array_equal(coeffs.spins, expected):
        raise ValueError(f"coefficient spins {coeffs.spins} do not match bank input signature {expected}")
    deg = degree_of_index(L)
    cin, cout = bank.channels_in, bank.channels_out
    out = np.zeros((coeffs.batch, len(bank.spins_out) * cout, num_coefficients(L)), dtype=complex)
    for gi, si in enumerate(bank.spins_in):
        block = coeffs.coeffs[:, gi * cin : (gi + 1) * cin]
        for go, so in enumerate(bank.spins_out):
            taps = bank.weights[(si, so)][..., deg]
            out[:, go * cout : (go + 1) * cout] += np.einsum("bix,iox->box", block, taps)
    return SpinCoefficients(out, _grouped_spins(bank.spins_out, cout), L)


@dataclass(frozen=True)
class PhaseCollapseParams:
    """Parameters of the phase collapse activation x0 <- W1 x0 + W2 |x| + b."""

    w1: np.ndarray
    w2: np.ndarray
    bias: np.ndarray

    @classmethod
    def identity(cls, spin_zero_channels: int, total_channels: int) -> "PhaseCollapseParams":
        return cls(
            np.eye(spin_zero_channels, dtype=complex),
            np.zeros((spin_zero_channels, total_channels)),
            np.zeros(spin_zero_channels, dtype=complex),
        )

    @classmethod
    def random(cls, rng, spin_zero_channels, total_channels, modulus_scale=1.0) -> "PhaseCollapseParams":
        c0, ct = spin_zero_channels, total_channels
        w1 = (rng.normal(size=(c0, c0)) + 1j * rng.normal(size=(c0, c0))) / np.sqrt(2 * c0)
        w2 = rng.normal(size=(c0, ct)) * modulus_scale / np.sqrt(ct)
        bias = rng.normal(size=c0) + 1j * rng.normal(size=c0)
        return cls(w1, w2, bias)


def phase_collapse(signal: SpinSignal, w1: np.ndarray, w2: np.ndarray, bias: np.ndarray) -> SpinSignal:
    """Replace the spin-0 channel stack by W1 x0 + W2 |x| + b at every sample.

    Nonzero-spin channels pass through unchanged; the modulus |x| is taken
    over all channels (all spins, including zero), which discards the
    rotation-induced phases of the nonzero-spin features.
    """
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2)
    bias = np.asarray(bias, dtype=complex)
    if np.iscomplexobj(w2):
        raise ValueError("w2 multiplies moduli and must be real-valued")
    zero = signal.spins == 0
    c0 = int(zero.sum())
    ct = signal.channels
    if w1.shape != (c0, c0) or w2.shape != (c0, ct) or bias.shape != (c0,):
        raise ValueError(
            f"parameter shapes {w1.shape}, {w2.shape}, {bias.shape} do not match "
            f"(C0={c0}, C={ct}) signal layout"
        )
    out = signal.samples.copy()
    x0 = signal.samples[:, zero]
    mod = np.abs(signal.samples)
    out[:, zero] = (
        np.einsum("ij,bjxy->bixy", w1, x0)
        + np.einsum("ij,bjxy->bixy", w2, mod)
        + bias[None, :, None, None]
    )
    return SpinSignal(out, signal.spins.copy(), signal.grid)


def apply_phase_collapse(signal: SpinSignal, params: PhaseCollapseParams) -> SpinSignal:
    return phase_collapse(signal, params.w1, params.w2, params.bias)


@dataclass(frozen=True)
class BatchNormState:
    """Spectral batch-norm parameters and running statistics (one entry per channel)."""

    scale: np.ndarray
    bias: np.ndarray
    running_variance: np.ndarray | None
    momentum: float = 0.1
    epsilon: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.momentum < 1.0:
            raise ValueError(f"momentum must be in (0, 1), got {self.momentum}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.running_variance is not None and np.any(np.asarray(self.running_variance) < 0):
            raise ValueError("running variance must be nonnegative")

    @classmethod
    def initialize(cls, channels: int, momentum: float = 0.1, epsilon: float = 1e-5) -> "BatchNormState":
        return cls(
            scale=np.ones(channels),
            bias=np.zeros(channels, dtype=complex),
            running_variance=None,
            momentum=momentum,
            epsilon=epsilon,
        )


def spectral_variance(coeffs: SpinCoefficients) -> np.ndarray:
    """Per-sample spectral variance, shape (batch, channels).

    Equals the spatial variance of the synthesized function by Parseval:
    the (0,0) coefficient is the mean slot and the remaining energy,
    normalized by 4*pi, is the variance.
    """
    energy = np.abs(coeffs.coeffs) ** 2
    zero = coeffs.spins == 0
    total = energy.sum(axis=-1)
    total[:, zero] -= energy[:, zero, 0]
    return total / (4 * np.pi)


def spectral_batch_norm(
    coeffs: SpinCoefficients, state: BatchNormState, mode: str = "train"
) -> tuple[SpinCoefficients, BatchNormState]:
    """Normalize coefficients to unit spectral variance per channel.

    The spin-0 mean slot is zeroed and then set to the learnable bias;
    every coefficient is divided by sqrt(variance + epsilon) and
    multiplied by the learnable scale.  Train mode uses (and accumulates
    into the running estimate) the batch variance; eval mode uses the
    running estimate.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    channels = coeffs.channels
    if state.scale.shape != (channels,) or state.bias.shape != (channels,):
        raise ValueError(f"state is sized for {state.scale.shape[0]} channels, coefficients have {channels}")
    work = coeffs.coeffs.copy()
    zero = coeffs.spins == 0
    work[:, zero, 0] = 0.0
    if mode == "train":
        if coeffs.batch < 1:
            raise ValueError("train mode requires batch >= 1")
        var = (np.abs(work) ** 2).sum(axis=-1).mean(axis=0) / (4 * np.pi)
        if state.running_variance is None:
            running = var
        else:
            running = (1.0 - state.momentum) * state.running_variance + state.momentum * var
        new_state = replace(state, running_variance=running)
    else:
        if state.running_variance is None:
            raise ValueError("eval mode requires initialized running statistics")
        var = state.running_variance
        new_state = state
    work *= (state.scale / np.sqrt(var + state.epsilon))[None, :, None]
    work[:, zero, 0] = state.bias[zero]
    return SpinCoefficients(work, coeffs.spins.copy(), coeffs.band_limit), new_state


def spectral_pool(coeffs: SpinCoefficients, new_band_limit: int) -> SpinCoefficients:
    """Low-pass pooling: keep degrees below the new band limit (implied grid n = 2*new_L)."""
    L = coeffs.band_limit
    if new_band_limit > L:
        raise ValueError(f"pooling target {new_band_limit} exceeds current band limit {L}")
    if np.any(np.abs(coeffs.spins) >= new_band_limit):
        raise ValueError(f"pooling target {new_band_limit} is not above all channel spins {coeffs.spins}")
    if new_band_limit == L:
        return coeffs
    return SpinCoefficients(
        coeffs.coeffs[..., : num_coefficients(new_band_limit)].copy(), coeffs.spins.copy(), new_band_limit
    )


def spectral_unpool(coeffs: SpinCoefficients, new_band_limit: int) -> SpinCoefficients:
    """Zero-pad degrees above the current band limit."""
    L = coeffs.band_limit
    if new_band_limit < L:
        raise ValueError(f"unpooling target {new_band_limit} is below current band limit {L}")
    if new_band_limit == L:
        return coeffs
    padded = np.zeros(coeffs.coeffs.shape[:2] + (num_coefficients(new_band_limit),), dtype=complex)
    padded[..., : num_coefficients(L)] = coeffs.coeffs
    return SpinCoefficients(padded, coeffs.spins.copy(), new_band_limit)


@dataclass(frozen=True)
class ResidualBlockParams:
    """Parameters of the spectral residual block.

    bank1/collapse1 sit between the first transform and the middle
    activation, bank2/collapse2 before the output activation.  When the
    input and output signatures differ or pooling is active, the skip
    path applies pooling and the 1-tap projection bank before the
    spectral add.
    """

    bank1: FilterBank
    bn1: BatchNormState
    collapse1: PhaseCollapseParams
    bank2: FilterBank
    bn2: BatchNormState
    collapse2: PhaseCollapseParams
    pool_to: int | None = None
    projection: FilterBank | None = None


def _needs_projection(params: ResidualBlockParams) -> bool:
    return (
        params.bank1.spins_in != params.bank2.spins_out
        or params.bank1.channels_in != params.bank2.channels_out
    )


def residual_block(
    x,
    params: ResidualBlockParams,
    config: TransformConfig = DEFAULT_CONFIG,
    mode: str = "eval",
):
    """The spectral residual block; input and output are the same kind.

    Signal path: FT -> (pool) -> *K -> BN -> IFT -> sigma -> FT -> *K ->
    BN -> add skip (in Fourier space) -> IFT -> sigma.  Coefficient input
    is treated as the first FT's output, and the result is transformed
    back to coefficients after the final activation.
    """
    out, _ = _residual_impl(x, params, config, mode)
    return out


def residual_block_train(x, params: ResidualBlockParams, config: TransformConfig = DEFAULT_CONFIG):
    """Train-mode residual block; returns (output, params with updated BN statistics)."""
    return _residual_impl(x, params, config, "train")


def _residual_impl(x, params, config, mode):
    is_signal = isinstance(x, SpinSignal)
    c_in = forward(x, compute_delta(x.grid.band_limit), config) if is_signal else x
    if _needs_projection(params) and params.projection is None:
        raise ValueError("input and output signatures differ: a skip projection bank is required")

    h = spectral_pool(c_in, params.pool_to) if params.pool_to is not None else c_in
    L = h.band_limit
    tables = compute_delta(L)

    h = spectral_conv(h, params.bank1)
    h, bn1 = spectral_batch_norm(h, params.bn1, mode)
    mid = apply_phase_collapse(inverse(h, tables, config), params.collapse1)

    h = forward(mid, tables, config)
    h = spectral_conv(h, params.bank2)
    h, bn2 = spectral_batch_norm(h, params.bn2, mode)

    skip = spectral_pool(c_in, params.pool_to) if params.pool_to is not None else c_in
    if params.projection is not None:
        skip = spectral_conv(skip, params.projection)
    if not np.array_equal(skip.spins, h.spins):
        raise ValueError("skip path signature does not match main path output")
    total = SpinCoefficients(h.coeffs + skip.coeffs, h.spins.copy(), L)

    out = apply_phase_collapse(inverse(total, tables, config), params.collapse2)
    if not is_signal:
        out = forward(out, tables, config)
    return out, replace(params, bn1=bn1, bn2=bn2)
