"""WAV file I/O: IEEE float32, little-endian, interleaved.

Header layout (58 bytes before the sample data):

    offset  size  field
    0       12    "RIFF" <riff size> "WAVE"
    12      8     "fmt " chunk header, body size 18
    20      18    format 3 (IEEE float), channels, rates, 32 bits, cbSize 0
    38      12    "fact" chunk: frame count
    50      8     "data" chunk header
    58      -     float32 LE frames, channels interleaved

Samples are cast to float32 on write; a written file reads back bit-exactly.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .sonify import AudioBuffer

HEADER_BYTES = 58


def write_wav(buf: AudioBuffer, path) -> None:
    data = buf.samples.astype("<f4").tobytes()
    channels = buf.channels
    byte_rate = buf.sample_rate * channels * 4
    riff_size = 4 + (8 + 18) + (8 + 4) + (8 + len(data))
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", riff_size),
            b"WAVE",
            b"fmt ",
            struct.pack(
                "<IHHIIHHH",
                18,  # fmt body size (with the empty extension field)
                3,  # IEEE float
                channels,
                buf.sample_rate,
                byte_rate,
                channels * 4,
                32,
                0,
            ),
            b"fact",
            struct.pack("<II", 4, buf.frames),
            b"data",
            struct.pack("<I", len(data)),
        ]
    )
    Path(path).write_bytes(header + data)


def read_wav(path) -> AudioBuffer:
    raw = Path(path).read_bytes()
    if raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(raw):
        tag = raw[pos : pos + 4]
        size = struct.unpack("<I", raw[pos + 4 : pos + 8])[0]
        body = raw[pos + 8 : pos + 8 + size]
        if tag == b"fmt ":
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif tag == b"data":
            data = body
        pos += 8 + size + (size & 1)
    if fmt is None or data is None:
        raise ValueError(f"{path}: missing fmt or data chunk")
    format_tag, channels, sample_rate, _, _, bits = fmt
    if format_tag != 3 or bits != 32:
        raise ValueError(f"{path}: only float32 WAV is supported")
    samples = np.frombuffer(data, dtype="<f4").reshape(-1, channels)
    return AudioBuffer(sample_rate, samples.copy())
