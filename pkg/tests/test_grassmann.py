import numpy as np
import pytest

from grasslink.grassmann import (
    Codebook,
    chordal_distance,
    design_codebook,
    load_codebook,
    min_distance,
    packaged_codebook,
    random_codebook,
    save_codebook,
)

# minimum chordal distances of the data files shipped with the package
_PACKAGED_DMIN = {
    (2, 2): 1.0,
    (2, 8): 0.607756,
    (4, 4): 1.0,
    (4, 16): 0.894427,
    (4, 64): 0.721727,
    (4, 256): 0.585750,
    (6, 512): 0.719832,
    (8, 4096): 0.701444,
}


def test_chordal_distance_identical_line():
    a = np.array([1.0, 0.0, 0.0, 0.0])
    assert chordal_distance(a, a) == 0.0


def test_chordal_distance_orthogonal_lines():
    assert chordal_distance([1.0, 0.0], [0.0, 1.0]) == 1.0


def test_chordal_distance_forced_value():
    b = np.array([1.0, 1.0]) / np.sqrt(2.0)
    d = chordal_distance([1.0, 0.0], b)
    assert abs(d - np.sqrt(0.5)) < 1e-12


def test_chordal_distance_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        chordal_distance([1.0, 0.0], [1.0, 0.0, 0.0])


def test_chordal_distance_phase_invariant(rng):
    for _ in range(20):
        a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        theta, phi = 2 * np.pi * rng.random(2)
        d0 = chordal_distance(a, b)
        d1 = chordal_distance(a * np.exp(1j * theta), b * np.exp(1j * phi))
        assert abs(d0 - d1) < 1e-12


def test_min_distance_orthogonal_pair():
    X = np.eye(2, dtype=complex)
    assert min_distance(X) == 1.0


def test_min_distance_duplicate_row():
    x = np.array([0.6, 0.8j])
    X = np.stack([x, np.array([1.0, 0.0]), x])
    assert min_distance(X) < 1e-7


def test_min_distance_matches_pairwise_loop(rng):
    X = random_codebook(4, 16, rng)
    expected = min(
        chordal_distance(X[i], X[j])
        for i in range(16)
        for j in range(i + 1, 16)
    )
    assert abs(min_distance(X) - expected) < 1e-12


def test_min_distance_needs_two_codewords():
    with pytest.raises(ValueError):
        min_distance(np.array([[1.0, 0.0]]))


def test_codebook_rejects_non_unit_rows():
    with pytest.raises(ValueError, match="unit norm"):
        Codebook(points=np.array([[1.0, 0.0], [0.5, 0.0]]))


def test_design_two_lines_reach_orthogonal():
    cb = design_codebook(2, 2, iterations=300, seed=0)
    assert cb.min_distance() >= 0.999


def test_design_beats_random_packing(rng):
    cb = design_codebook(4, 16, iterations=400, seed=3)
    best_random = max(
        min_distance(random_codebook(4, 16, np.random.default_rng(s)))
        for s in range(20)
    )
    assert cb.min_distance() > best_random


def test_design_deterministic():
    a = design_codebook(3, 8, iterations=150, seed=7)
    b = design_codebook(3, 8, iterations=150, seed=7)
    assert np.array_equal(a.points, b.points)


def test_design_rows_stay_unit_norm():
    cb = design_codebook(4, 32, iterations=200, seed=1)
    norms = np.linalg.norm(cb.points, axis=1)
    assert np.abs(norms - 1.0).max() <= 1e-9


def test_design_surrogate_monotone_within_beta_stage():
    cb = design_codebook(2, 4, iterations=250, seed=2)
    trace = cb.meta["objective_trace"]
    assert len(trace) > 10
    for (_, b0, f0), (_, b1, f1) in zip(trace, trace[1:]):
        if b0 == b1:
            assert f1 < f0


def test_design_spectral_efficiency():
    cb = packaged_codebook(4, 64)
    assert cb.bits_per_codeword / cb.T == 1.5


def test_save_load_roundtrip(tmp_path, rng):
    cb = Codebook(points=random_codebook(4, 8, rng))
    path = tmp_path / "cb.txt"
    save_codebook(path, cb)
    back = load_codebook(path)
    assert back.T == 4 and back.K == 8
    assert np.abs(back.points - cb.points).max() <= 1e-12


def test_load_wrong_column_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 0 0 0\n1 0\n")
    with pytest.raises(ValueError, match="line 3"):
        load_codebook(path)


def test_load_non_numeric_row(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 1\n1 0 zero 0\n")
    with pytest.raises(ValueError, match="line 2"):
        load_codebook(path)


def test_load_zero_row_fails_validation(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 0 0 0\n0 0 0 0\n")
    with pytest.raises(ValueError, match="unit norm"):
        load_codebook(path)


def test_load_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2 9\n")
    with pytest.raises(ValueError, match="header"):
        load_codebook(path)


def test_load_row_count_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 3\n1 0 0 0\n0 0 1 0\n")
    with pytest.raises(ValueError, match="rows"):
        load_codebook(path)


def test_packaged_codebooks_load_and_match_metadata():
    for (T, K), dmin in _PACKAGED_DMIN.items():
        cb = packaged_codebook(T, K)
        assert (cb.T, cb.K) == (T, K)
        norms = np.linalg.norm(cb.points, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-9
        assert abs(cb.min_distance() - dmin) < 5e-7


def test_packaged_codebook_missing_size():
    with pytest.raises(FileNotFoundError):
        packaged_codebook(3, 7)
