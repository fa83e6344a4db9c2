import struct

import numpy as np
import pytest

from vqh.sonify import AudioBuffer
from vqh.wav import HEADER_BYTES, read_wav, write_wav


class TestLayout:
    def test_single_frame_mono_layout(self, tmp_path):
        path = tmp_path / "one.wav"
        write_wav(AudioBuffer(44100, np.array([[0.5]])), path)
        raw = path.read_bytes()
        assert len(raw) == HEADER_BYTES + 4
        assert raw[:4] == b"RIFF"
        assert raw[8:12] == b"WAVE"
        assert raw[12:16] == b"fmt "
        assert struct.unpack("<I", raw[16:20])[0] == 18
        assert struct.unpack("<H", raw[20:22])[0] == 3  # IEEE float
        assert raw[38:42] == b"fact"
        assert raw[50:54] == b"data"
        assert struct.unpack("<I", raw[54:58])[0] == 4
        assert struct.unpack("<f", raw[58:62])[0] == 0.5

    def test_ten_second_stereo_size(self, tmp_path):
        frames = 10 * 44100
        buf = AudioBuffer(44100, np.zeros((frames, 2), dtype=np.float32))
        path = tmp_path / "ten.wav"
        write_wav(buf, path)
        assert path.stat().st_size == HEADER_BYTES + frames * 2 * 4 == 3_528_058

    def test_sample_rate_fields(self, tmp_path):
        path = tmp_path / "sr.wav"
        write_wav(AudioBuffer(22050, np.zeros((8, 2))), path)
        raw = path.read_bytes()
        _, channels, rate, byte_rate, block_align, bits = struct.unpack(
            "<HHIIHH", raw[20:36]
        )
        assert (channels, rate, byte_rate, block_align, bits) == (
            2, 22050, 22050 * 8, 8, 32,
        )


class TestRoundTrip:
    def test_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        samples = rng.uniform(-1, 1, (1000, 2)).astype(np.float32)
        path = tmp_path / "rt.wav"
        write_wav(AudioBuffer(48000, samples), path)
        back = read_wav(path)
        assert back.sample_rate == 48000
        np.testing.assert_array_equal(back.samples, samples)

    def test_write_read_write_is_stable(self, tmp_path):
        samples = np.random.default_rng(4).uniform(-1, 1, (64, 1))
        first = tmp_path / "a.wav"
        second = tmp_path / "b.wav"
        write_wav(AudioBuffer(44100, samples), first)
        write_wav(read_wav(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_rejects_non_wav(self, tmp_path):
        path = tmp_path / "bogus.wav"
        path.write_bytes(b"MThd" + b"\x00" * 60)
        with pytest.raises(ValueError):
            read_wav(path)
