"""Statistical tests run by the warden.

The warden observes a window of chip-rate samples and decides between
noise only and signal present. Two detectors are provided: a
Jarque-Bera normality test on the pooled real and imaginary parts
(sensitive to the non-Gaussian shape of spread constellations), and a
radiometer (sensitive to excess energy, here defeated by the power
constraint so it serves as a baseline). Thresholds for the JB test are
calibrated empirically and can be cached on disk keyed by the
calibration parameters.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "CalibratedThreshold",
    "DetectionOutcome",
    "calibrate_jb_threshold",
    "calibrate_threshold",
    "complexify",
    "detect_frame",
    "jarque_bera",
    "jb_detect",
    "load_threshold",
    "radiometer",
    "radiometer_detect",
    "radiometer_threshold",
    "sample_moments",
    "save_threshold",
]


@dataclass(frozen=True)
class DetectionOutcome:
    test: str
    statistic: float
    threshold: float
    detected: bool
    sample_count: int = 0

    @property
    def decision(self) -> str:
        return "D1" if self.detected else "D0"


@dataclass(frozen=True)
class CalibratedThreshold:
    """A detection threshold tied to its calibration parameters."""

    test: str
    sample_count: int
    target_pfa: float
    trials: int
    seed: int
    value: float


def complexify(samples):
    """Flatten a complex record into reals: all real parts, then all
    imaginary parts. Real input gets a zero imaginary half, doubling its
    length either way."""
    x = np.asarray(samples, dtype=np.complex128)
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def _pool_real(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return np.concatenate([x.real.ravel(), x.imag.ravel()])
    return x.ravel().astype(np.float64)


def sample_moments(x):
    """Skewness and kurtosis of the pooled real samples of x.

    Complex inputs contribute their real and imaginary parts as separate
    observations. Returns (skewness, kurtosis); a Gaussian sample gives
    (0, 3) in expectation.
    """
    v = _pool_real(x)
    v = v - v.mean()
    m2 = np.mean(v**2)
    if m2 == 0.0:
        raise ValueError("sample variance is zero")
    m3 = np.mean(v**3)
    m4 = np.mean(v**4)
    return float(m3 / m2**1.5), float(m4 / m2**2)


def jarque_bera(x) -> float:
    """JB statistic N/6 * (S^2 + (K - 3)^2 / 4) over the pooled reals."""
    v = _pool_real(x)
    s, k = sample_moments(v)
    return float(len(v) / 6.0 * (s**2 + (k - 3.0) ** 2 / 4.0))


def _jb_batch(V):
    # rows are windows of pooled reals; one pass per moment, no copies kept
    n = V.shape[1]
    mu = V.mean(axis=1, keepdims=True)
    D = V - mu
    m2 = np.einsum("ij,ij->i", D, D) / n
    D3 = D * D * D
    m3 = np.einsum("ij->i", D3) / n
    m4 = np.einsum("ij,ij->i", D, D3) / n
    del D, D3
    s2 = m3**2 / m2**3
    k = m4 / m2**2
    return n / 6.0 * (s2 + (k - 3.0) ** 2 / 4.0)


def calibrate_jb_threshold(
    n: int,
    target_pfa: float = 0.05,
    trials: int = 4000,
    seed: int = 20240,
    batch: int = 64,
) -> float:
    """Empirical JB threshold for noise-only windows of n complex samples.

    Draws `trials` CN(0, 1) windows, computes the JB statistic of each
    (pooled reals, so 2n observations per window), and returns the
    (1 - target_pfa) quantile. The asymptotic chi-square(2) quantile is
    close but measurably off at these window sizes, hence the
    calibration.
    """
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    rng = np.random.default_rng(seed)
    stats = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        W = rng.standard_normal((b, 2 * n))
        stats[done : done + b] = _jb_batch(W)
        done += b
    return float(np.quantile(stats, 1.0 - target_pfa))


def calibrate_threshold(
    test: str,
    n: int,
    target_pfa: float = 0.05,
    trials: int = 4000,
    seed: int = 20240,
) -> CalibratedThreshold:
    """Calibrate a named Gaussianity test on noise-only windows.

    Thin typed front end over the per-test calibrators; currently the
    Jarque-Bera test is the only registered statistic. Requires
    trials >= 1000 so the quantile estimate is stable enough to reuse.
    """
    if test != "jarque_bera":
        raise ValueError(f"no calibrator registered for test {test!r}")
    if trials < 1000:
        raise ValueError("threshold calibration needs at least 1000 trials")
    value = calibrate_jb_threshold(n, target_pfa, trials, seed)
    return CalibratedThreshold(test, n, target_pfa, trials, seed, value)


def _key(test: str, n: int, target_pfa: float, trials: int, seed: int) -> str:
    return f"{test}:n={n}:pfa={target_pfa:g}:trials={trials}:seed={seed}"


def save_threshold(path, test, n, target_pfa, trials, seed, value) -> None:
    """Record a calibrated threshold in a small JSON cache file."""
    data = {}
    if os.path.exists(path):
        with open(path) as f:
            data = json.load(f)
    data[_key(test, n, target_pfa, trials, seed)] = value
    with open(path, "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
        f.write("\n")


def load_threshold(path, test, n, target_pfa, trials, seed):
    """Look up a cached threshold; None when absent."""
    if not os.path.exists(path):
        return None
    with open(path) as f:
        data = json.load(f)
    return data.get(_key(test, n, target_pfa, trials, seed))


def jb_detect(x, threshold: float) -> DetectionOutcome:
    stat = jarque_bera(x)
    return DetectionOutcome(
        "jarque_bera", stat, threshold, stat > threshold, np.asarray(x).size
    )


def detect_frame(rx, threshold: CalibratedThreshold) -> DetectionOutcome:
    """Run a calibrated test on one observation window.

    The window length must match the calibration's sample count; a
    silent mismatch would invalidate the false-alarm guarantee.
    """
    rx = np.asarray(rx)
    if rx.size != threshold.sample_count:
        raise ValueError(
            f"window of {rx.size} samples, threshold calibrated for "
            f"{threshold.sample_count}"
        )
    stat = jarque_bera(rx)
    return DetectionOutcome(
        threshold.test, stat, threshold.value, stat > threshold.value, rx.size
    )


def radiometer_threshold(n: int, sigma2: float, target_pfa: float = 0.05) -> float:
    """Gaussian-approximation threshold for the average-power detector.

    Under noise only the per-sample power is exponential with mean
    sigma2, so the window average is approximately normal with standard
    deviation sigma2/sqrt(n). Requires n >= 100 for the approximation
    to hold.
    """
    if n < 100:
        raise ValueError("radiometer threshold approximation needs n >= 100")
    return sigma2 * (1.0 + ndtri(1.0 - target_pfa) / np.sqrt(n))


def radiometer_detect(x, threshold: float) -> DetectionOutcome:
    x = np.asarray(x)
    stat = float(np.mean(np.abs(x) ** 2))
    return DetectionOutcome("radiometer", stat, threshold, stat > threshold, x.size)


def radiometer(samples, noise_variance: float, target_pfa: float = 0.05) -> DetectionOutcome:
    """Average-power detection against the analytic noise-only threshold."""
    samples = np.asarray(samples)
    thr = radiometer_threshold(samples.size, noise_variance, target_pfa)
    return radiometer_detect(samples, thr)
