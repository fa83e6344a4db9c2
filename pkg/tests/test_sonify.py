import numpy as np
import pytest

from vqh.quantum import SampleDistribution, argmax_state, marginals, sample
from vqh.qubo import HamiltonianSequence, chord_qubo
from vqh.sonify import (
    AudioBuffer,
    ControlStreams,
    MappingConfig,
    StreamingAdditive,
    arpeggio_schedule,
    basis_protocol,
    default_note_table,
    freq_map,
    map_additive,
    map_arpeggio,
    map_fm,
    map_fm_inharmonic,
    map_pan,
    map_subtractive,
    pan_gains,
    render,
)
from vqh.vqe import IterationRecord, VqeConfig, run_sequence


def make_streams(c, e=None, c_range=None, e_range=None):
    c = np.atleast_2d(np.asarray(c, dtype=float))
    e = np.zeros(c.shape[0]) if e is None else np.asarray(e, dtype=float)
    states = ["0" * c.shape[1]] * c.shape[0]
    streams = ControlStreams.from_arrays(c, e, states)
    if c_range is not None:
        streams.c_min, streams.c_max = c_range
    if e_range is not None:
        streams.e_min, streams.e_max = e_range
    return streams


def spectrum(buf: AudioBuffer, channel=0):
    x = buf.samples[:, channel]
    window = np.hanning(len(x))
    mag = np.abs(np.fft.rfft(x * window))
    freqs = np.fft.rfftfreq(len(x), 1.0 / buf.sample_rate)
    return freqs, mag


def band_power(freqs, mag, center, width=5.0):
    mask = np.abs(freqs - center) <= width
    return float(np.sum(mag[mask] ** 2))


def peak_frequency(freqs, mag, center, width=20.0):
    mask = np.abs(freqs - center) <= width
    idx = np.flatnonzero(mask)[np.argmax(mag[mask])]
    if 0 < idx < len(mag) - 1:  # parabolic refinement
        a, b, c = mag[idx - 1], mag[idx], mag[idx + 1]
        shift = 0.5 * (a - c) / (a - 2 * b + c)
        return freqs[idx] + shift * (freqs[1] - freqs[0])
    return freqs[idx]


class TestBasisProtocol:
    def test_single_record_row(self, three_qubit_state):
        dist = sample(three_qubit_state, 0)
        record = IterationRecord(
            index=0, params=np.zeros(2), energy=-1.0,
            distribution=dist, marginals=marginals(dist), argmax=argmax_state(dist),
        )
        result = _tiny_result([record])
        streams = basis_protocol(result)
        np.testing.assert_allclose(streams.c, [[13 / 16, 3 / 16, 1 / 4]], atol=1e-12)
        assert streams.states == ["100"]

    def test_constant_records_hit_degenerate_rule(self):
        streams = make_streams([[0.5, 0.5], [0.5, 0.5]])
        assert streams.c_min == streams.c_max
        assert np.all(streams.normalized_c() == 0.5)
        assert np.all(streams.normalized_e() == 0.5)

    def test_cmaj_run_shape(self):
        seq = HamiltonianSequence([chord_qubo([f"v{i}" for i in range(6)], {0, 3}, "linear")])
        # 151 = 1 + 50·3 closes the run on an on-path record
        cfg = VqeConfig(size=6, iterations=[151], optimizer_name="nft", sequence_length=1)
        streams = basis_protocol(run_sequence(seq, cfg))
        assert streams.c.shape == (151, 6)
        assert streams.length == 151
        # converged: chord columns bright, others dark
        assert streams.c[-1, [0, 3]].min() > 0.9
        assert streams.c[-1, [1, 2, 4, 5]].max() < 0.1


def _tiny_result(records):
    from vqh.qubo import QuboProblem
    from vqh.vqe import ExperimentResult

    problem = QuboProblem(["a", "b", "c"], np.zeros(3), np.zeros((3, 3)))
    return ExperimentResult(
        config=VqeConfig(size=3, sequence_length=1),
        sequence=HamiltonianSequence([problem]),
        operators=["(+1)*III"],
        records=records,
        final_params=np.zeros(2),
        segment_boundaries=[0],
    )


class TestFreqMap:
    CFG = dict(c_min=0.0, c_max=1.0, f_min=200.0, f_max=800.0)

    def test_endpoints(self):
        for mode in ("linear", "log"):
            assert freq_map(0.0, mode, **self.CFG) == pytest.approx(200.0, abs=1e-9)
            assert freq_map(1.0, mode, **self.CFG) == pytest.approx(800.0, abs=1e-9)

    def test_midpoints(self):
        assert freq_map(0.5, "linear", **self.CFG) == pytest.approx(500.0, abs=1e-9)
        assert freq_map(0.5, "log", **self.CFG) == pytest.approx(
            np.sqrt(200.0 * 800.0), abs=1e-9
        )

    def test_degenerate_range_rule(self):
        got = freq_map(0.3, "linear", c_min=0.3, c_max=0.3, f_min=200.0, f_max=800.0)
        assert got == pytest.approx(500.0, abs=1e-9)


class TestAdditive:
    def test_one_hot_spectral_peak(self):
        n = 6
        cfg = MappingConfig(sample_rate=22050, iteration_rate=10.0)
        table = cfg.note_table(n)
        target = 2
        c = np.zeros((20, n))
        c[:, target] = 1.0
        buf = map_additive(make_streams(c), cfg)
        freqs, mag = spectrum(buf)
        peak_bin = int(np.argmin(np.abs(freqs - table[target])))
        got_peak = int(np.argmax(mag))
        assert abs(got_peak - peak_bin) <= 1
        peak_level = mag[got_peak]
        for k in range(n):
            if k == target:
                continue
            other = mag[int(np.argmin(np.abs(freqs - table[k])))]
            assert 20 * np.log10(other / peak_level) <= -40.0

    def test_silence_stays_silent(self):
        buf = map_additive(make_streams(np.zeros((10, 3))), MappingConfig(sample_rate=8000))
        assert np.max(np.abs(buf.samples)) < 1e-9

    def test_parseval_amplitude_ratio(self):
        cfg = MappingConfig(sample_rate=22050)
        c = np.tile([0.5, 1.0], (30, 1))
        buf = map_additive(make_streams(c), cfg)
        freqs, mag = spectrum(buf)
        table = cfg.note_table(2)
        ratio = band_power(freqs, mag, table[0]) / band_power(freqs, mag, table[1])
        assert ratio == pytest.approx(0.25, rel=0.05)

    def test_normalized_to_minus_one_dbfs(self):
        buf = map_additive(make_streams(np.full((10, 2), 0.7)), MappingConfig(sample_rate=8000))
        assert np.max(np.abs(buf.samples)) == pytest.approx(10 ** (-1 / 20), abs=1e-6)


class TestInharmonic:
    def test_zero_shift_gives_harmonic_series(self):
        cfg = MappingConfig(sample_rate=22050, f0=100.0, iteration_rate=10.0)
        streams = make_streams(np.zeros((40, 4)), c_range=(0.0, 1.0))
        buf = map_fm_inharmonic(streams, cfg)
        freqs, mag = spectrum(buf)
        for k in range(1, 5):
            assert peak_frequency(freqs, mag, 100.0 * k) == pytest.approx(
                100.0 * k, abs=0.5
            )

    def test_full_shift_drops_one_harmonic(self):
        cfg = MappingConfig(sample_rate=22050, f0=100.0)
        streams = make_streams(np.ones((40, 4)), c_range=(0.0, 1.0))
        buf = map_fm_inharmonic(streams, cfg)
        freqs, mag = spectrum(buf)
        for k in (2, 3, 4):
            assert peak_frequency(freqs, mag, 100.0 * (k - 1)) == pytest.approx(
                100.0 * (k - 1), abs=0.5
            )

    def test_mid_run_partials_match_formula(self):
        cfg = MappingConfig(sample_rate=22050, f0=100.0)
        value = 0.3
        streams = make_streams(np.full((40, 3), value), c_range=(0.0, 1.0))
        buf = map_fm_inharmonic(streams, cfg)
        freqs, mag = spectrum(buf)
        for k in (1, 2, 3):
            expected = (k - value) * 100.0
            assert peak_frequency(freqs, mag, expected) == pytest.approx(
                expected, abs=0.5
            )


class TestFmMaps:
    def test_constant_coefficient_lands_on_mapped_frequency(self):
        cfg = MappingConfig(sample_rate=22050, f_min=200.0, f_max=800.0)
        streams = make_streams(np.full((40, 1), 0.5), c_range=(0.0, 1.0))
        lin = map_fm(streams, cfg, "linear")
        freqs, mag = spectrum(lin)
        assert peak_frequency(freqs, mag, 500.0) == pytest.approx(500.0, abs=1.0)
        log = map_fm(streams, cfg, "log")
        freqs, mag = spectrum(log)
        assert peak_frequency(freqs, mag, 400.0) == pytest.approx(
            np.sqrt(200.0 * 800.0), abs=1.0
        )


class TestSubtractive:
    def make(self, e_value, rotary=False, seconds=8.0):
        cfg = MappingConfig(sample_rate=22050, iteration_rate=10.0, freqs=np.array([440.0]))
        rows = int(seconds * cfg.iteration_rate)
        streams = make_streams(
            np.ones((rows, 1)), e=np.full(rows, e_value), e_range=(0.0, 1.0)
        )
        return map_subtractive(streams, cfg, rotary=rotary), cfg

    @staticmethod
    def minus_3db_width(buf):
        from scipy.signal import welch

        f, psd = welch(buf.samples[:, 0], fs=buf.sample_rate, nperseg=32768)
        smooth = np.convolve(psd, np.full(5, 0.2), mode="same")
        peak = int(np.argmax(smooth))
        # equivalent width: bins above half power (robust to estimator jitter)
        width = float(np.count_nonzero(smooth >= smooth[peak] / 2) * (f[1] - f[0]))
        return f[peak], width

    def test_low_energy_is_narrow_resonance(self):
        buf, cfg = self.make(0.0)
        center, width = self.minus_3db_width(buf)
        assert center == pytest.approx(440.0, abs=10.0)
        assert width < 3 * 440.0 / cfg.q_max + 2.0

    def test_high_energy_is_wide_band(self):
        narrow, _ = self.make(0.0)
        wide, _ = self.make(1.0)
        _, w_narrow = self.minus_3db_width(narrow)
        _, w_wide = self.minus_3db_width(wide)
        assert w_wide > 10 * w_narrow

    def test_zero_gains_silence(self):
        cfg = MappingConfig(sample_rate=8000, freqs=np.array([440.0]))
        streams = make_streams(np.zeros((10, 1)), e=np.zeros(10))
        buf = map_subtractive(streams, cfg)
        assert np.max(np.abs(buf.samples)) < 1e-9

    def test_rotary_shifts_center_frequency(self):
        low, _ = self.make(0.0, rotary=True)
        high, _ = self.make(1.0, rotary=True)
        c_low, _ = self.minus_3db_width(low)
        c_high, _ = self.minus_3db_width(high)
        assert c_low == pytest.approx(220.0, rel=0.1)
        assert c_high == pytest.approx(880.0, rel=0.1)


class TestArpeggio:
    CFG = MappingConfig(sample_rate=10000, iteration_rate=2.0, arp_gap=0.1)

    def test_ascending_amplitude_order(self):
        streams = make_streams([[0.1, 0.9, 0.5]], e=[1.0], e_range=(0.0, 1.0))
        plan = arpeggio_schedule(streams, self.CFG)
        assert [note for _, note, _ in plan] == [0, 2, 1]
        onsets = [frame for frame, _, _ in plan]
        assert onsets == [0, 1000, 2000]

    def test_zero_gap_at_ground_energy(self):
        streams = make_streams([[0.2, 0.8]], e=[0.0], e_range=(0.0, 1.0))
        plan = arpeggio_schedule(streams, self.CFG)
        assert [frame for frame, _, _ in plan] == [0, 0]

    def test_tie_preserves_note_index_order(self):
        streams = make_streams([[0.4, 0.4, 0.4]], e=[1.0], e_range=(0.0, 1.0))
        plan = arpeggio_schedule(streams, self.CFG)
        assert [note for _, note, _ in plan] == [0, 1, 2]

    def test_render_is_finite_and_audible(self):
        streams = make_streams([[0.1, 0.9, 0.5], [0.3, 0.2, 0.7]], e=[1.0, 0.5],
                               e_range=(0.0, 1.0))
        buf = map_arpeggio(streams, self.CFG)
        assert np.all(np.isfinite(buf.samples))
        assert np.max(np.abs(buf.samples)) > 0.1


class TestPan:
    def test_constant_power_over_random_azimuths(self):
        azimuths = np.random.default_rng(0).uniform(0, 2 * np.pi, 10**4)
        for channels in (2, 4, 8):
            gains = pan_gains(azimuths, channels)
            np.testing.assert_allclose(np.sum(gains**2, axis=1), 1.0, atol=1e-6)

    def test_minimum_points_at_channel_zero(self):
        gains = pan_gains(np.array([0.0]), 4)
        np.testing.assert_allclose(gains, [[1.0, 0.0, 0.0, 0.0]], atol=1e-12)

    def test_midpoint_is_opposite_point(self):
        cfg = MappingConfig(sample_rate=8000, channels=4)
        streams = make_streams(np.full((10, 1), 0.5), c_range=(0.0, 1.0))
        buf = map_pan(streams, cfg)
        # azimuth pi lands exactly on the opposite ring position (channel 2)
        energy = np.sum(buf.samples**2, axis=0)
        assert energy[2] > 0
        np.testing.assert_allclose(energy[[0, 1, 3]], 0.0, atol=1e-12)

    def test_channel_count_guard(self):
        with pytest.raises(ValueError):
            pan_gains(np.array([0.0]), 1)

    def test_spectral_diffusion_accepts_source_buffer(self):
        cfg = MappingConfig(sample_rate=8000, channels=4)
        streams = make_streams(np.full((5, 2), 0.25), c_range=(0.0, 1.0))
        source = AudioBuffer(8000, np.random.default_rng(1).standard_normal((4000, 1)))
        buf = map_pan(streams, cfg, source=source)
        assert buf.channels == 4
        assert np.all(np.isfinite(buf.samples))


class TestStreamingAdditive:
    def test_incremental_equals_offline_exactly(self):
        rng = np.random.default_rng(12)
        c = rng.uniform(0, 1, (9, 4))
        cfg = MappingConfig(sample_rate=8000, iteration_rate=10.0)
        streamer = StreamingAdditive(4, cfg)
        blocks = [streamer.push(row) for row in c]
        blocks.append(streamer.finish())
        live = np.concatenate(blocks)
        offline = map_additive(make_streams(c), cfg)
        # undo the offline master normalization to compare raw samples
        raw = np.zeros(live.shape[0])
        t = np.arange(raw.shape[0]) / cfg.sample_rate
        ticks = np.arange(9) / cfg.iteration_rate
        for k in range(4):
            raw += np.interp(t, ticks, c[:, k]) * np.sin(
                2.0 * np.pi * cfg.note_table(4)[k] * t
            )
        np.testing.assert_array_equal(live, raw)
        scale = np.max(np.abs(offline.samples)) / np.max(np.abs(raw))
        np.testing.assert_allclose(live * scale, offline.samples[:, 0], atol=1e-12)

    def test_row_size_enforced(self):
        streamer = StreamingAdditive(3, MappingConfig(sample_rate=8000))
        with pytest.raises(ValueError):
            streamer.push([0.5, 0.5])

    def test_empty_stream_finishes_silently(self):
        streamer = StreamingAdditive(2, MappingConfig(sample_rate=8000))
        assert streamer.finish().shape == (0,)


class TestRenderDispatch:
    @pytest.mark.parametrize(
        "kind", ["additive", "fmlin", "fmlog", "inharm", "sub", "rotary", "arp", "pan"]
    )
    @pytest.mark.parametrize("seed", [5, 17, 23])
    def test_every_mapping_renders_finite_audio(self, kind, seed):
        rng = np.random.default_rng(seed)
        rows = int(rng.integers(2, 12))
        notes = int(rng.integers(1, 6))
        streams = make_streams(
            rng.uniform(0, 1, (rows, notes)), e=rng.uniform(-3, 1, rows)
        )
        cfg = MappingConfig(sample_rate=8000, iteration_rate=8.0)
        buf = render(streams, kind, cfg)
        assert np.all(np.isfinite(buf.samples))
        assert np.max(np.abs(buf.samples)) <= 1.0 + 1e-12

    def test_unknown_mapping_rejected(self):
        with pytest.raises(ValueError, match="unknown mapping"):
            render(make_streams([[0.5]]), "granular")

    def test_deterministic_rendering(self):
        rng = np.random.default_rng(8)
        streams = make_streams(rng.uniform(0, 1, (6, 2)), e=rng.uniform(-1, 1, 6))
        cfg = MappingConfig(sample_rate=8000)
        one = render(streams, "sub", cfg)
        two = render(streams, "sub", cfg)
        np.testing.assert_array_equal(one.samples, two.samples)

    def test_default_note_table_is_chromatic_from_c4(self):
        table = default_note_table(12)
        assert table[0] == pytest.approx(261.63)
        assert table[-1] / table[0] == pytest.approx(2 ** (11 / 12))
