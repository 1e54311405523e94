"""Spreading, pulse shaping, and frame construction.

Symbols are spread by a 31-chip maximal-length sequence with the
energy-preserving convention chips = symbol * pn / sqrt(N), so
despreading is the exact adjoint and the chip-rate SNR sits
10*log10(31) = 14.9 dB below the symbol-rate SNR. Frames carry one
coherence block of T symbols; every scheme delivers 6 bits per block
at T = 4 (noncoherent: a 64-word codebook; QPSK: 1 pilot + 3 Gray
symbols; 64-QAM: 3 pilots + 1 symbol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameSpec",
    "TimingEstimate",
    "acquire_timing",
    "bits_to_index",
    "despread",
    "index_to_bits",
    "matched_filter",
    "msequence",
    "nc_blocks",
    "pulse_shape",
    "qam64_blocks",
    "qam64_map",
    "qpsk_blocks",
    "qpsk_map",
    "rotate",
    "rrc_taps",
    "spread",
]


def msequence(taps=(5, 2), state=0b00001):
    """Maximal-length LFSR sequence as +-1 chips.

    `taps` lists the exponents of the feedback polynomial (the implicit
    +1 term excluded), so the default (5, 2) is x^5 + x^2 + 1 and yields
    the 31-chip m-sequence. `state` seeds the register; it must be
    nonzero. Bit 0 maps to +1 and bit 1 to -1, giving the two-valued
    periodic autocorrelation N at zero lag and -1 elsewhere.
    """
    m = max(taps)
    if state == 0:
        raise ValueError("LFSR state must be nonzero")
    if state >= (1 << m):
        raise ValueError(f"state needs at most {m} bits")
    n = (1 << m) - 1
    reg = [(state >> (m - 1 - i)) & 1 for i in range(m)]
    bits = np.empty(n, dtype=np.int8)
    for i in range(n):
        bits[i] = reg[-1]
        fb = 0
        for t in taps:
            fb ^= reg[t - 1]
        reg = [fb] + reg[:-1]
    return (1.0 - 2.0 * bits).astype(np.float64)


def spread(symbols, pn):
    """Spread symbols: each symbol becomes symbol * pn / sqrt(N).

    The last axis grows by the factor N = len(pn); total energy is
    preserved, so spread and despread form a unitary pair.
    """
    symbols = np.asarray(symbols)
    pn = np.asarray(pn, dtype=np.float64)
    n = pn.size
    out = symbols[..., None] * (pn / np.sqrt(n))
    return out.reshape(*symbols.shape[:-1], symbols.shape[-1] * n)


def despread(chips, pn):
    """Adjoint of spread: correlate each N-chip span against pn / sqrt(N)."""
    chips = np.asarray(chips)
    pn = np.asarray(pn, dtype=np.float64)
    n = pn.size
    if chips.shape[-1] % n:
        raise ValueError(f"chip count {chips.shape[-1]} not a multiple of {n}")
    blocks = chips.reshape(*chips.shape[:-1], chips.shape[-1] // n, n)
    return blocks @ (pn / np.sqrt(n))


def index_to_bits(idx, width):
    """Natural binary bits of idx, most significant first, shape (..., width)."""
    idx = np.asarray(idx)
    shifts = np.arange(width - 1, -1, -1)
    return ((idx[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_index(bits):
    """Inverse of index_to_bits over the last axis."""
    bits = np.asarray(bits)
    width = bits.shape[-1]
    weights = 1 << np.arange(width - 1, -1, -1)
    return (bits * weights).sum(axis=-1)


def rotate(x, theta):
    """Phase-rotate a codeword: x * e^(j*theta), the same Grassmann point."""
    return np.asarray(x) * np.exp(1j * theta)


def qpsk_map(bits):
    """Gray-mapped QPSK: bit pairs (..., 2) to unit-power symbols."""
    bits = np.asarray(bits)
    return ((1.0 - 2.0 * bits[..., 0]) + 1j * (1.0 - 2.0 * bits[..., 1])) / np.sqrt(2.0)


def _gray_to_level(g):
    # 3-bit Gray code to 8-PAM level in {-7, -5, ..., 7}
    b = g ^ (g >> 1)
    b ^= b >> 2
    return 2 * b - 7


def _level_to_gray(n):
    return n ^ (n >> 1)


def qam64_map(bits):
    """Gray-mapped square 64-QAM, unit average power.

    Bits (..., 6) split as 3 for the in-phase level and 3 for the
    quadrature level; levels are odd integers in [-7, 7] scaled by
    1/sqrt(42).
    """
    bits = np.asarray(bits).astype(np.int64)
    gi = (bits[..., 0] << 2) | (bits[..., 1] << 1) | bits[..., 2]
    gq = (bits[..., 3] << 2) | (bits[..., 4] << 1) | bits[..., 5]
    return (_gray_to_level(gi) + 1j * _gray_to_level(gq)) / np.sqrt(42.0)


@dataclass(frozen=True)
class FrameSpec:
    """Layout of one coherence block: which slots are pilots, which carry data."""

    scheme: str
    T: int
    pilot_values: tuple
    bits_per_block: int

    @staticmethod
    def for_scheme(scheme: str, T: int = 4) -> "FrameSpec":
        if scheme == "nc":
            return FrameSpec("nc", T, (), int(np.log2(2 ** int(1.5 * T))))
        if scheme == "qpsk":
            # 1 pilot, T-1 Gray QPSK symbols
            return FrameSpec("qpsk", T, (1.0 + 0.0j,), 2 * (T - 1))
        if scheme == "qam64":
            # T-1 pilots, one 64-QAM symbol
            pilots = tuple((1j) ** k for k in range(T - 1))
            return FrameSpec("qam64", T, pilots, 6)
        raise ValueError(f"unknown scheme {scheme!r}")

    @property
    def n_pilots(self) -> int:
        return len(self.pilot_values)

    @property
    def n_data(self) -> int:
        return self.T - self.n_pilots


def nc_blocks(codebook, indices, phases):
    """Noncoherent blocks: codewords scaled by sqrt(T), phase rotated.

    indices (n,) selects rows of the codebook, phases (n,) applies the
    transmit-side rotation; the output (n, T) has unit average power per
    symbol slot.
    """
    X = codebook.points if hasattr(codebook, "points") else np.asarray(codebook)
    T = X.shape[1]
    return X[np.asarray(indices)] * np.exp(1j * np.asarray(phases))[:, None] * np.sqrt(T)


def qpsk_blocks(bits, spec: FrameSpec):
    """Pilot-led QPSK blocks from bits (n, 2*(T-1))."""
    bits = np.asarray(bits)
    n = bits.shape[0]
    data = qpsk_map(bits.reshape(n, spec.n_data, 2))
    out = np.empty((n, spec.T), dtype=np.complex128)
    out[:, : spec.n_pilots] = np.asarray(spec.pilot_values)
    out[:, spec.n_pilots :] = data
    return out


def qam64_blocks(bits, spec: FrameSpec):
    """Pilot-led 64-QAM blocks from bits (n, 6)."""
    bits = np.asarray(bits)
    n = bits.shape[0]
    out = np.empty((n, spec.T), dtype=np.complex128)
    out[:, : spec.n_pilots] = np.asarray(spec.pilot_values)
    out[:, spec.n_pilots] = qam64_map(bits)
    return out


def rrc_taps(beta: float, span: int, sps: int):
    """Root-raised-cosine filter taps, unit energy.

    beta is the roll-off in (0, 1], span the one-sided extent in chips,
    sps samples per chip. The singular points t = 0 and |t| = 1/(4 beta)
    use the analytic limits.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("roll-off must be in (0, 1]")
    t = np.arange(-span * sps, span * sps + 1, dtype=np.float64) / sps
    h = np.empty_like(t)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 - beta + 4.0 * beta / np.pi
        elif abs(abs(ti) - 1.0 / (4.0 * beta)) < 1e-12:
            h[i] = (beta / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - beta)) + 4.0 * beta * ti * np.cos(
                np.pi * ti * (1.0 + beta)
            )
            den = np.pi * ti * (1.0 - (4.0 * beta * ti) ** 2)
            h[i] = num / den
    return h / np.linalg.norm(h)


def pulse_shape(chips, samples_per_chip: int, rolloff: float = 0.25, span: int = 12):
    """Upsample chips and apply root-raised-cosine shaping.

    samples_per_chip = 1 is a bit-exact pass-through: the chip-rate
    simulation path never touches the filter. For higher rates the
    output carries the filter's leading and trailing transients.
    """
    chips = np.asarray(chips)
    if samples_per_chip == 1:
        return chips.copy()
    taps = rrc_taps(rolloff, span, samples_per_chip)
    up = np.zeros(chips.size * samples_per_chip, dtype=np.complex128)
    up[::samples_per_chip] = chips
    return np.convolve(up, taps)


def matched_filter(stream, samples_per_chip: int, rolloff: float = 0.25, span: int = 12):
    """Matched filter plus decimation back to chip rate.

    Inverts pulse_shape up to truncation-level ISI: index k of the output
    corresponds to the k-th transmitted chip (cascade group delay removed).
    samples_per_chip = 1 is a bit-exact pass-through. The default span
    truncates near a tail null, keeping the cascade's worst off-peak
    chip-lag response below 1e-3.
    """
    stream = np.asarray(stream)
    if samples_per_chip == 1:
        return stream.copy()
    taps = rrc_taps(rolloff, span, samples_per_chip)
    y = np.convolve(stream, np.conj(taps[::-1]))
    delay = len(taps) - 1
    return y[delay::samples_per_chip]


@dataclass(frozen=True)
class TimingEstimate:
    """Result of a PN timing search."""

    delay: int
    ambiguous: bool
    metric: float


def acquire_timing(samples, pn, max_delay: int) -> TimingEstimate:
    """Integer-chip timing search by PN correlation.

    Correlates every candidate delay in [0, max_delay] against as many
    whole PN periods as fit, combining periods noncoherently (unknown
    phase per fade). The estimate is flagged ambiguous when a second
    delay scores within 1% of the peak metric.
    """
    samples = np.asarray(samples)
    pn = np.asarray(pn, dtype=np.float64)
    n = pn.size
    metrics = []
    for d in range(max_delay + 1):
        avail = (samples.size - d) // n
        if avail < 1:
            break
        seg = samples[d : d + avail * n].reshape(avail, n)
        metrics.append(float((np.abs(seg @ pn) ** 2).sum()) / avail)
    if not metrics:
        raise ValueError("sample record shorter than one PN period past max_delay")
    metrics = np.asarray(metrics)
    best_d = int(np.argmax(metrics))
    runner_up = np.partition(metrics, -2)[-2] if metrics.size > 1 else -np.inf
    ambiguous = bool(runner_up >= 0.99 * metrics[best_d])
    return TimingEstimate(best_d, ambiguous, float(metrics[best_d]))
