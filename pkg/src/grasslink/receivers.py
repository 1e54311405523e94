"""Detection and equalization at the intended receiver.

The noncoherent path needs no channel knowledge: it picks the codebook
line with the largest projection energy, a rule invariant to the
unknown complex fade. The coherent path estimates the fade from pilot
slots and equalizes before slicing.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "equalize_lmmse",
    "ls_channel_estimate",
    "noncoherent_ml",
    "slice_qam64",
    "slice_qpsk",
]

_CHUNK = 16384


def noncoherent_ml(Y, codebook):
    """Max-projection detection: argmax_k |y^H x_k|^2 for each row of Y.

    Invariant to any nonzero complex scaling of y, which is what makes
    the rule noncoherent. Processes rows in chunks to bound memory.
    """
    X = codebook.points if hasattr(codebook, "points") else np.asarray(codebook)
    Y = np.asarray(Y)
    single = Y.ndim == 1
    if single:
        Y = Y[None, :]
    out = np.empty(Y.shape[0], dtype=np.int64)
    Xh = X.conj().T
    for i in range(0, Y.shape[0], _CHUNK):
        block = Y[i : i + _CHUNK]
        out[i : i + _CHUNK] = np.argmax(np.abs(block @ Xh) ** 2, axis=1)
    return int(out[0]) if single else out


def ls_channel_estimate(y_pilots, pilot_values):
    """Least-squares fade estimate from pilot slots.

    y_pilots (..., P) are the received pilot observations, pilot_values
    either one shared pilot vector (P,) or per-frame pilots matching
    y_pilots row for row. Returns hhat with the trailing axis reduced.
    """
    p = np.asarray(pilot_values)
    y = np.asarray(y_pilots)
    energy = np.real(np.sum(p * p.conj(), axis=-1))
    if np.any(energy == 0.0):
        raise ValueError("pilot vector has zero energy")
    if p.ndim == 1:
        return (y @ p.conj()) / energy
    return np.sum(y * p.conj(), axis=-1) / energy


def equalize_lmmse(y, hhat, sigma2: float, power: float = 1.0):
    """Scalar LMMSE symbol estimate hhat^* y / (|hhat|^2 + sigma2/power).

    A degenerate denominator (zero fade estimate with zero noise) yields
    a zero symbol estimate rather than a division error.
    """
    hhat = np.asarray(hhat)
    den = np.abs(hhat) ** 2 + sigma2 / power
    num = np.conj(hhat) * np.asarray(y)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)


def slice_qpsk(z):
    """Hard QPSK decisions back to Gray bit pairs (..., 2)."""
    z = np.asarray(z)
    return np.stack([(z.real < 0), (z.imag < 0)], axis=-1).astype(np.uint8)


def slice_qam64(z):
    """Hard 64-QAM decisions back to 6 Gray bits (..., 6).

    Expects an unbiased symbol estimate (unit-power constellation). The
    LMMSE output can be fed through after dividing out its shrinkage
    |h|^2 / (|h|^2 + sigma2/power), or use hhat^* y / |hhat|^2 directly.
    """
    z = np.asarray(z) * np.sqrt(42.0)
    out = np.empty(z.shape + (6,), dtype=np.uint8)
    for axis, v in ((0, z.real), (3, z.imag)):
        idx = np.clip(np.floor((v + 8.0) / 2.0).astype(np.int64), 0, 7)
        g = idx ^ (idx >> 1)
        out[..., axis + 0] = (g >> 2) & 1
        out[..., axis + 1] = (g >> 1) & 1
        out[..., axis + 2] = g & 1
    return out
