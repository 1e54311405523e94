"""Rayleigh block fading, noise, oscillator offset, and sampling skew."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelState",
    "apply_block_fading",
    "apply_cfo",
    "awgn",
    "block_fading",
    "fractional_chip_offset",
]


@dataclass(frozen=True)
class ChannelState:
    """Realized channel parameters for one transmission.

    h holds the per-block fading coefficients; noise_variance is the
    per-sample complex noise power; cfo and delay_chips record any
    oscillator offset and sampling skew applied alongside the fading.
    """

    h: np.ndarray
    noise_variance: float
    cfo: float = 0.0
    delay_chips: float = 0.0


def block_fading(n: int, rng):
    """n i.i.d. Rayleigh coefficients h ~ CN(0, 1), one per coherence block."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def awgn(shape, sigma2: float, rng):
    """Circular complex Gaussian noise with per-sample variance sigma2."""
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return w * np.sqrt(sigma2 / 2.0)


def apply_block_fading(tx, block_len: int, snr_db: float, rng, h=None):
    """Pass a stream through Rayleigh block fading plus AWGN.

    tx is split into consecutive blocks of block_len samples; each block
    is scaled by one fading coefficient (drawn CN(0, 1) unless `h` is
    supplied) and unit-power noise at 10^(-snr_db/10) per sample is
    added. snr_db = inf gives a noiseless pass. Returns (rx, state).
    """
    tx = np.asarray(tx)
    if block_len < 1:
        raise ValueError("block_len must be positive")
    if tx.size % block_len != 0:
        raise ValueError(
            f"stream length {tx.size} is not a multiple of block_len {block_len}"
        )
    n_blocks = tx.size // block_len
    if h is None:
        h = block_fading(n_blocks, rng)
    else:
        h = np.asarray(h, dtype=np.complex128)
        if h.size != n_blocks:
            raise ValueError(f"expected {n_blocks} coefficients, got {h.size}")
    sigma2 = 0.0 if np.isinf(snr_db) else float(10.0 ** (-snr_db / 10.0))
    rx = tx * np.repeat(h, block_len)
    if sigma2 > 0.0:
        rx = rx + awgn(tx.size, sigma2, rng)
    return rx, ChannelState(h=h, noise_variance=sigma2)


def apply_cfo(samples, cfo: float, start: int = 0):
    """Rotate samples by a residual carrier offset of `cfo` cycles/sample."""
    samples = np.asarray(samples)
    n = samples.shape[-1]
    ramp = np.exp(2j * np.pi * cfo * (start + np.arange(n)))
    return samples * ramp


def fractional_chip_offset(chips, tau: float):
    """Resample one chip stream at a constant sub-chip skew tau in [0, 1).

    Models a receiver whose sampling instants fall a fraction tau of a
    chip late: each output is the linear interpolation
    (1 - tau) * c[m] + tau * c[m+1], renormalized to unit average power
    for uncorrelated chips. For tau > 0 the output is one sample shorter
    than the input; tau = 0 is an exact copy.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must be in [0, 1)")
    chips = np.asarray(chips)
    if tau == 0.0:
        return chips.copy()
    z = (1.0 - tau) * chips[..., :-1] + tau * chips[..., 1:]
    return z / np.sqrt((1.0 - tau) ** 2 + tau**2)
