import numpy as np
import pytest
from scipy import stats

from grasslink.modem import (
    FrameSpec,
    acquire_timing,
    bits_to_index,
    despread,
    index_to_bits,
    matched_filter,
    msequence,
    nc_blocks,
    pulse_shape,
    qam64_blocks,
    qam64_map,
    qpsk_blocks,
    qpsk_map,
    rotate,
    rrc_taps,
    spread,
)


@pytest.fixture(scope="module")
def pn():
    return msequence()


class TestMSequence:
    def test_length_and_alphabet(self, pn):
        assert pn.size == 31
        assert set(np.unique(pn)) == {-1.0, 1.0}

    def test_balance(self, pn):
        assert pn.sum() == -1.0

    def test_two_valued_autocorrelation(self, pn):
        for lag in range(1, 31):
            assert np.roll(pn, lag) @ pn == -1.0
        assert pn @ pn == 31.0

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            msequence(state=0)

    def test_state_must_fit_register(self):
        with pytest.raises(ValueError, match="bits"):
            msequence(state=1 << 5)


class TestBitMapping:
    def test_all_zero_bits(self):
        assert bits_to_index(np.zeros(6, dtype=np.uint8)) == 0

    def test_bijection_over_64(self):
        idx = np.arange(64)
        bits = index_to_bits(idx, 6)
        assert bits.shape == (64, 6)
        assert np.array_equal(bits_to_index(bits), idx)
        assert len({tuple(row) for row in bits}) == 64

    def test_msb_first(self):
        assert np.array_equal(index_to_bits(32, 6), [1, 0, 0, 0, 0, 0])


class TestRotate:
    def test_zero_angle_identity(self, rng):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert np.array_equal(rotate(x, 0.0), x)

    def test_projection_magnitude_invariant(self, rng):
        for _ in range(50):
            x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            theta = 2 * np.pi * rng.random()
            before = abs(np.vdot(y, x)) ** 2
            after = abs(np.vdot(y, rotate(x, theta))) ** 2
            assert abs(before - after) < 1e-10

    def test_uniform_phase_stays_uniform(self, rng):
        n = 100_000
        theta = 2 * np.pi * rng.random(n)
        phases = np.angle(rotate(np.ones(n), theta))
        counts, _ = np.histogram(phases, bins=20, range=(-np.pi, np.pi))
        expected = n / 20
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < stats.chi2.ppf(0.99, df=19)


class TestSpreadDespread:
    def test_unit_symbol_chip_magnitude(self, pn):
        chips = spread(np.array([1.0 + 0.0j]), pn)
        assert chips.size == 31
        assert np.abs(np.abs(chips) - 1 / np.sqrt(31)).max() < 1e-15

    def test_roundtrip_exact(self, pn, rng):
        s = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        back = despread(spread(s, pn), pn)
        assert np.abs(back - s).max() <= 1e-12

    def test_chip_snr_offset(self, pn, rng):
        n_sym = 32259  # just over 1e6 chips
        s = np.exp(2j * np.pi * rng.random(n_sym))
        chips = spread(s, pn)
        sigma2 = 1.0  # 0 dB at symbol level
        chip_snr_db = 10 * np.log10(np.mean(np.abs(chips) ** 2) / sigma2)
        assert abs(chip_snr_db - (-10 * np.log10(31))) < 0.05
        assert abs(chip_snr_db - (-14.91)) < 0.05

    def test_despread_passes_noise_variance(self, pn, rng):
        n = 100_000
        sigma2 = 2.0
        noise = np.sqrt(sigma2 / 2) * (
            rng.standard_normal(n * 31) + 1j * rng.standard_normal(n * 31)
        )
        out = despread(noise, pn)
        var = np.mean(np.abs(out) ** 2)
        assert abs(var - sigma2) / sigma2 < 0.03

    def test_despread_whitens(self, pn, rng):
        n = 10_000
        noise = (rng.standard_normal((n, 4 * 31)) + 1j * rng.standard_normal((n, 4 * 31))) / np.sqrt(2)
        Y = despread(noise, pn)
        C = Y.conj().T @ Y / n
        assert np.abs(C - np.eye(4)).max() < 0.05

    def test_one_chip_misalignment_collapses(self, pn):
        chips = spread(np.array([1.0 + 0.0j]), pn)
        out = despread(np.roll(chips, 1), pn)
        assert abs(out[0] - (-1 / 31)) <= 1e-12

    def test_partial_block_rejected(self, pn):
        with pytest.raises(ValueError, match="multiple"):
            despread(np.zeros(30), pn)


class TestConstellations:
    def test_qpsk_gray_corners(self):
        s = qpsk_map(np.array([0, 0]))
        assert abs(s - (1 + 1j) / np.sqrt(2)) < 1e-15

    def test_qpsk_unit_power(self):
        bits = index_to_bits(np.arange(4), 2)
        assert np.abs(np.abs(qpsk_map(bits)) - 1.0).max() < 1e-15

    def test_qam64_unit_average_power(self):
        bits = index_to_bits(np.arange(64), 6)
        s = qam64_map(bits)
        assert abs(np.mean(np.abs(s) ** 2) - 1.0) < 1e-12
        assert len(np.unique(np.round(s, 9))) == 64


class TestFraming:
    def test_bits_per_block_matches_across_schemes(self):
        for scheme in ("nc", "qpsk", "qam64"):
            assert FrameSpec.for_scheme(scheme, T=4).bits_per_block == 6

    def test_qam64_pilot_layout(self):
        spec = FrameSpec.for_scheme("qam64", T=4)
        assert spec.pilot_values == (1, 1j, -1)
        assert spec.n_data == 1

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="scheme"):
            FrameSpec.for_scheme("bpsk")

    def test_per_slot_power_balanced(self, t4k64, rng):
        n = 20_000
        blocks = {
            "nc": nc_blocks(t4k64, rng.integers(64, size=n), 2 * np.pi * rng.random(n)),
            "qpsk": qpsk_blocks(rng.integers(2, size=(n, 6)), FrameSpec.for_scheme("qpsk")),
            "qam64": qam64_blocks(rng.integers(2, size=(n, 6)), FrameSpec.for_scheme("qam64")),
        }
        for name, S in blocks.items():
            power = np.mean(np.abs(S) ** 2)
            assert abs(power - 1.0) < 0.005, name


class TestPulseShaping:
    def test_rrc_taps_unit_energy(self):
        taps = rrc_taps(0.25, span=12, sps=8)
        assert abs((taps**2).sum() - 1.0) < 1e-12

    def test_rolloff_bounds(self):
        for beta in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                rrc_taps(beta, span=10, sps=8)
        with pytest.raises(ValueError):
            pulse_shape(np.ones(4), 8, rolloff=1.5)

    def test_chip_rate_passthrough(self, rng):
        chips = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        assert np.array_equal(pulse_shape(chips, 1), chips)
        assert np.array_equal(matched_filter(chips, 1), chips)

    def test_cascade_impulse_ici(self):
        chips = np.zeros(41, dtype=np.complex128)
        chips[20] = 1.0
        y = matched_filter(pulse_shape(chips, 8), 8)[:41]
        assert abs(y[20] - 1.0) < 1e-3
        off = np.delete(np.abs(y), 20)
        assert off.max() <= 1e-3

    def test_matched_filter_power(self, rng):
        chips = np.exp(2j * np.pi * rng.random(2000))
        y = matched_filter(pulse_shape(chips, 8), 8)[:2000]
        core = y[50:-50]
        ratio = np.mean(np.abs(core) ** 2)
        assert abs(ratio - 1.0) < 0.02


class TestTimingAcquisition:
    def test_zero_delay(self, pn):
        est = acquire_timing(np.tile(pn, 4).astype(complex), pn, max_delay=10)
        assert est.delay == 0
        assert not est.ambiguous

    def test_known_delay_noiseless(self, pn):
        record = np.concatenate([np.zeros(7), np.tile(pn, 4)]).astype(complex)
        est = acquire_timing(record, pn, max_delay=30)
        assert est.delay == 7
        assert not est.ambiguous

    def test_period_aliasing_flagged(self, pn):
        record = np.tile(pn, 6).astype(complex)
        est = acquire_timing(record, pn, max_delay=31)
        assert est.delay == 0
        assert est.ambiguous

    def test_record_too_short(self, pn):
        with pytest.raises(ValueError, match="shorter"):
            acquire_timing(np.zeros(20), pn, max_delay=5)

    def test_acquisition_rate_at_zero_db(self, pn):
        rng = np.random.default_rng(77)
        trials, hits, delay = 1000, 0, 7
        for _ in range(trials):
            s = np.exp(2j * np.pi * rng.random(100))
            chips = spread(s, pn)
            record = np.concatenate([np.zeros(delay, dtype=complex), chips])
            record = record + np.sqrt(0.5) * (
                rng.standard_normal(record.size) + 1j * rng.standard_normal(record.size)
            )
            if acquire_timing(record, pn, max_delay=30).delay == delay:
                hits += 1
        assert hits / trials >= 0.99
