"""Grassmannian line packings for noncoherent signaling.

A codebook is a set of K unit vectors in C^T, each representing a line
(one-dimensional subspace), so a codeword and any phase rotation of it
carry the same message. Packing quality is measured by the minimum
pairwise chordal distance sqrt(1 - |a^H b|^2); design maximizes it by
Riemannian descent on a log-sum-exp relaxation of the worst coherence.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Codebook",
    "chordal_distance",
    "design_codebook",
    "load_codebook",
    "min_distance",
    "packaged_codebook",
    "random_codebook",
    "save_codebook",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Codebook:
    """K unit-norm codewords in C^T, stored as rows of `points`."""

    points: np.ndarray
    design_seed: int | None = None
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        if pts.ndim != 2:
            raise ValueError("codebook points must be a (K, T) array")
        norms = np.linalg.norm(pts, axis=1)
        if not np.allclose(norms, 1.0, atol=_NORM_TOL):
            raise ValueError("codewords must have unit norm")
        object.__setattr__(self, "points", pts)

    @property
    def K(self) -> int:
        return self.points.shape[0]

    @property
    def T(self) -> int:
        return self.points.shape[1]

    @property
    def bits_per_codeword(self) -> int:
        return int(np.log2(self.K))

    def min_distance(self) -> float:
        return min_distance(self.points)


def chordal_distance(a, b) -> float:
    """Distance between the lines spanned by unit vectors a and b.

    Zero for identical lines (any relative phase), one for orthogonal
    lines. Clipped at zero to absorb rounding on near-identical inputs.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    c = abs(np.vdot(a, b)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - c)))


def _coherence_sq(X):
    G = X @ X.conj().T
    C = np.abs(G) ** 2
    np.fill_diagonal(C, 0.0)
    return G, C


def min_distance(X) -> float:
    """Minimum pairwise chordal distance over the rows of X."""
    X = np.asarray(X, dtype=np.complex128)
    if X.shape[0] < 2:
        raise ValueError("need at least two codewords")
    _, C = _coherence_sq(X)
    iu = np.triu_indices(X.shape[0], 1)
    return float(np.sqrt(max(0.0, 1.0 - C[iu].max())))


def random_codebook(T: int, K: int, rng) -> np.ndarray:
    """K independent uniform lines in C^T (normalized complex Gaussians)."""
    X = rng.standard_normal((K, T)) + 1j * rng.standard_normal((K, T))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return X


def _lse_objective(X, beta):
    # smooth stand-in for max coherence; beta -> inf recovers the max
    _, C = _coherence_sq(X)
    iu = np.triu_indices(X.shape[0], 1)
    c = C[iu]
    cmax = c.max()
    return cmax + np.log(np.exp(beta * (c - cmax)).sum()) / beta


def design_codebook(
    T: int,
    K: int,
    iterations: int = 3000,
    seed: int = 0,
    beta0: float = 50.0,
    beta_doubling: int = 200,
    step0: float = 0.1,
) -> Codebook:
    """Pack K lines in C^T by soft-max coherence descent.

    Starts from a random codebook drawn with `seed`, repeatedly takes a
    Riemannian gradient step on the log-sum-exp surrogate of the largest
    pairwise coherence, with backtracking line search and geometric
    sharpening of beta. Deterministic for fixed arguments.
    """
    if K < 2 or T < 1:
        raise ValueError("need K >= 2 codewords and T >= 1")
    rng = np.random.default_rng(seed)
    X = random_codebook(T, K, rng)
    beta = float(beta0)
    step = float(step0)
    trace = []
    for it in range(iterations):
        if it > 0 and it % beta_doubling == 0:
            beta *= 2.0
        G, C = _coherence_sq(X)
        cmax = C.max()
        W = np.exp(beta * (C - cmax))
        np.fill_diagonal(W, 0.0)
        W /= W.sum()
        # gradient wrt conj(x_i) of sum_ij w_ij |G_ij|^2 (W symmetric)
        E = (W * G) @ X
        # tangent component: remove the radial part row by row
        inner = np.sum(X.conj() * E, axis=1, keepdims=True)
        R = E - inner * X
        f0 = _lse_objective(X, beta)
        s = step
        accepted = False
        for _ in range(30):
            Xn = X - s * R
            Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
            fn = _lse_objective(Xn, beta)
            if fn < f0:
                X = Xn
                step = s * 1.5
                accepted = True
                trace.append((it, beta, fn))
                break
            s *= 0.5
        if not accepted:
            step = float(step0)
    meta = {"objective_trace": trace}
    return Codebook(points=X, design_seed=seed, iterations=iterations, meta=meta)


def save_codebook(path, cb: Codebook) -> None:
    """Write a codebook as text: a 'T K' header line, then one row per
    codeword holding 2T floats (real and imaginary parts interleaved).
    Lines starting with '#' are comments."""
    X = cb.points
    with open(path, "w") as f:
        f.write(f"# min chordal distance {cb.min_distance():.6f}\n")
        if cb.design_seed is not None:
            f.write(f"# design seed {cb.design_seed}, iterations {cb.iterations}\n")
        f.write(f"{cb.T} {cb.K}\n")
        for row in X:
            parts = []
            for z in row:
                parts.append(f"{z.real:.17g}")
                parts.append(f"{z.imag:.17g}")
            f.write(" ".join(parts) + "\n")


def _parse_codebook_text(lines) -> Codebook:
    rows = []
    header = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: codebook header must be 'T K'")
            header = (int(fields[0]), int(fields[1]))
            continue
        try:
            vals = np.array([float(v) for v in line.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if vals.size != 2 * header[0]:
            raise ValueError(
                f"line {lineno}: codeword row has {vals.size} values, "
                f"expected {2 * header[0]}"
            )
        rows.append(vals[0::2] + 1j * vals[1::2])
    if header is None:
        raise ValueError("empty codebook file")
    T, K = header
    if len(rows) != K:
        raise ValueError(f"codebook has {len(rows)} rows, header says {K}")
    return Codebook(points=np.array(rows))


def load_codebook(path) -> Codebook:
    """Read a codebook written by save_codebook."""
    with open(path) as f:
        return _parse_codebook_text(f)


def packaged_codebook(T: int, K: int) -> Codebook:
    """Load one of the pre-designed codebooks shipped with the package.

    Available sizes cover the spectral-efficiency-1.5 family
    (T, K) in {(2, 8), (4, 64), (6, 512), (8, 4096)} plus (2, 2).
    """
    name = f"T{T}K{K}.txt"
    ref = importlib.resources.files("grasslink.data").joinpath(name)
    if not ref.is_file():
        raise FileNotFoundError(f"no packaged codebook {name}")
    return _parse_codebook_text(ref.read_text().splitlines())
