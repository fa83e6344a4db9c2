"""Map record streams onto audio: the mapping catalog and its render engine.

Every renderer is a pure function of (ControlStreams, MappingConfig, seed):
identical inputs give bit-identical buffers.  Iteration snapshots become
continuous controls by linear interpolation at the configured iteration rate;
when a dataset extreme collapses (c_max == c_min or e_max == e_min) the
normalized value is defined as 0.5.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .vqe import ExperimentResult

C4_HZ = 261.63
PEAK_DBFS = -1.0  # master normalization target
SILENCE_PEAK = 1e-9
MIN_PARTIAL_HZ = 1.0  # inharmonic partials are clamped above this

MAPPING_NAMES = ("additive", "fmlin", "fmlog", "inharm", "sub", "rotary", "arp", "pan")


def default_note_table(n: int, base: float = C4_HZ) -> np.ndarray:
    """12-TET chromatic frequencies starting at the base pitch."""
    return base * 2.0 ** (np.arange(n) / 12.0)


@dataclass
class ControlStreams:
    """The decoded time series feeding every mapping: c_n(t), E(t), argmax(t)."""

    c: np.ndarray  # [T, n] marginal coefficients in [0, 1]
    e: np.ndarray  # [T] energies
    states: list[str]
    c_min: float
    c_max: float
    e_min: float
    e_max: float

    @classmethod
    def from_arrays(cls, c, e, states) -> "ControlStreams":
        c = np.asarray(c, dtype=float)
        e = np.asarray(e, dtype=float)
        if c.ndim != 2 or e.shape != (c.shape[0],) or len(states) != c.shape[0]:
            raise ValueError("inconsistent stream shapes")
        return cls(
            c=c,
            e=e,
            states=list(states),
            c_min=float(c.min()),
            c_max=float(c.max()),
            e_min=float(e.min()),
            e_max=float(e.max()),
        )

    @property
    def n(self) -> int:
        return self.c.shape[1]

    @property
    def length(self) -> int:
        return self.c.shape[0]

    def normalized_c(self) -> np.ndarray:
        return _normalize_range(self.c, self.c_min, self.c_max)

    def normalized_e(self) -> np.ndarray:
        return _normalize_range(self.e, self.e_min, self.e_max)


def _normalize_range(values, lo: float, hi: float):
    if hi <= lo:
        return np.full_like(np.asarray(values, dtype=float), 0.5)
    return (np.asarray(values, dtype=float) - lo) / (hi - lo)


def basis_protocol(result: ExperimentResult) -> ControlStreams:
    """Stack per-record marginals, energies and argmax states."""
    if not result.records:
        raise ValueError("empty experiment result")
    return ControlStreams.from_arrays(
        np.array([r.marginals for r in result.records]),
        np.array([r.energy for r in result.records]),
        [r.argmax for r in result.records],
    )


@dataclass
class MappingConfig:
    """Knobs shared by the mapping catalog; defaults are desk-scale sane."""

    freqs: np.ndarray | None = None  # note table; default 12-TET from C4
    f_min: float = 110.0
    f_max: float = 880.0
    f0: float = 110.0  # inharmonic fundamental
    iteration_rate: float = 10.0  # iterations per second
    sample_rate: int = 44100
    channels: int = 2  # ring size for panning
    q_min: float = 1.0
    q_max: float = 200.0
    rotary_q: float = 30.0
    noise_seed: int = 0
    arp_gap: float = 0.025  # base inter-onset gap (s) at full energy
    arp_decay: float = 0.150  # 60 dB percussive decay (s)

    def __post_init__(self):
        if self.f_min >= self.f_max:
            raise ValueError("f_min must be below f_max")
        if self.iteration_rate <= 0:
            raise ValueError("iteration_rate must be positive")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")

    def note_table(self, n: int) -> np.ndarray:
        if self.freqs is None:
            return default_note_table(n)
        freqs = np.asarray(self.freqs, dtype=float)
        if freqs.shape != (n,):
            raise ValueError(f"note table has {freqs.shape[0]} entries, need {n}")
        return freqs


@dataclass
class AudioBuffer:
    """Interleaved float frames; after normalization the peak sits at -1 dBFS."""

    sample_rate: int
    samples: np.ndarray  # [frames, channels]

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples))
        if self.samples.ndim != 2:
            raise ValueError("samples must be [frames, channels]")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite samples")

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def frames(self) -> int:
        return self.samples.shape[0]


def _master_normalize(samples: np.ndarray) -> np.ndarray:
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak < SILENCE_PEAK:
        return samples
    return samples * (10.0 ** (PEAK_DBFS / 20.0) / peak)


def _timeline(streams: ControlStreams, cfg: MappingConfig) -> tuple[np.ndarray, np.ndarray]:
    """Sample times and iteration timestamps for a render."""
    frames = int(round(streams.length / cfg.iteration_rate * cfg.sample_rate))
    t = np.arange(frames) / cfg.sample_rate
    ticks = np.arange(streams.length) / cfg.iteration_rate
    return t, ticks


def _interp(t: np.ndarray, ticks: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.interp(t, ticks, values)


def freq_map(c, mode: str, c_min: float, c_max: float, f_min: float, f_max: float):
    """Linear or logarithmic map from coefficient range to frequency range."""
    u = _normalize_range(c, c_min, c_max)
    if mode == "linear":
        return f_min + (f_max - f_min) * u
    if mode == "log":
        return f_min * (f_max / f_min) ** u
    raise ValueError(f"unknown frequency map mode {mode!r}")


def map_additive(streams: ControlStreams, cfg: MappingConfig) -> AudioBuffer:
    """One sine per note at its table frequency, amplitude driven by c_n(t)."""
    freqs = cfg.note_table(streams.n)
    t, ticks = _timeline(streams, cfg)
    out = np.zeros_like(t)
    for k in range(streams.n):
        amp = _interp(t, ticks, streams.c[:, k])
        out += amp * np.sin(2.0 * np.pi * freqs[k] * t)
    return AudioBuffer(cfg.sample_rate, _master_normalize(out)[:, None])


def _phase_accumulate(freq: np.ndarray, sample_rate: int) -> np.ndarray:
    # phase-continuous oscillator under time-varying frequency
    return 2.0 * np.pi * np.cumsum(freq) / sample_rate


def map_fm(streams: ControlStreams, cfg: MappingConfig, mode: str = "linear") -> AudioBuffer:
    """Equal-amplitude oscillators whose frequencies follow the coefficients."""
    t, ticks = _timeline(streams, cfg)
    out = np.zeros_like(t)
    for k in range(streams.n):
        c = _interp(t, ticks, streams.c[:, k])
        freq = freq_map(c, mode, streams.c_min, streams.c_max, cfg.f_min, cfg.f_max)
        out += np.sin(_phase_accumulate(freq, cfg.sample_rate)) / streams.n
    return AudioBuffer(cfg.sample_rate, _master_normalize(out)[:, None])


def map_fm_inharmonic(streams: ControlStreams, cfg: MappingConfig) -> AudioBuffer:
    """Harmonic series whose partial k is pulled flat by coefficient k.

    Partial k (1-indexed, amplitude 1/k) sits at (k - u_k(t))·f0, so a zero
    coefficient gives the exact harmonic series and a full one drops each
    partial to the next integer multiple down.
    """
    if cfg.f0 <= 0:
        raise ValueError("f0 must be positive")
    t, ticks = _timeline(streams, cfg)
    u_rows = streams.normalized_c()
    out = np.zeros_like(t)
    for k in range(1, streams.n + 1):
        u = _interp(t, ticks, u_rows[:, k - 1])
        freq = np.maximum((k - u) * cfg.f0, MIN_PARTIAL_HZ)
        out += np.sin(_phase_accumulate(freq, cfg.sample_rate)) / k
    return AudioBuffer(cfg.sample_rate, _master_normalize(out)[:, None])


def _bandpass_coeffs(center: float, q: float, sample_rate: int):
    # two-pole resonator, constant 0 dB peak gain
    w0 = 2.0 * np.pi * min(center, 0.49 * sample_rate) / sample_rate
    alpha = np.sin(w0) / (2.0 * q)
    a0 = 1.0 + alpha
    b = np.array([alpha, 0.0, -alpha]) / a0
    a = np.array([1.0, -2.0 * np.cos(w0) / a0, (1.0 - alpha) / a0])
    return b, a


def map_subtractive(
    streams: ControlStreams, cfg: MappingConfig, rotary: bool = False
) -> AudioBuffer:
    """Seeded white noise through parallel band-pass filters, gains = c_n(t).

    The resonance follows the energy inversely (Q = q_max at the dataset's
    minimum energy), so the sound collapses toward pure tones near the ground
    state.  The rotary variant instead keeps Q fixed and pitch-shifts every
    center frequency by 2^(2ê-1), a full octave around the note table.
    Filter coefficients update once per iteration tick; gains move per sample.
    """
    freqs = cfg.note_table(streams.n)
    t, ticks = _timeline(streams, cfg)
    frames = t.shape[0]
    noise = np.random.default_rng(cfg.noise_seed).standard_normal(frames)
    e_norm = streams.normalized_e()
    boundaries = np.round(ticks * cfg.sample_rate).astype(int)
    boundaries = np.append(boundaries, frames)
    out = np.zeros(frames)
    for k in range(streams.n):
        filtered = np.empty(frames)
        zi = np.zeros(2)
        for i in range(streams.length):
            lo, hi = boundaries[i], boundaries[i + 1]
            if hi <= lo:
                continue
            if rotary:
                q = cfg.rotary_q
                center = freqs[k] * 2.0 ** (2.0 * e_norm[i] - 1.0)
            else:
                q = cfg.q_max + (cfg.q_min - cfg.q_max) * e_norm[i]
                center = freqs[k]
            b, a = _bandpass_coeffs(center, q, cfg.sample_rate)
            filtered[lo:hi], zi = lfilter(b, a, noise[lo:hi], zi=zi)
        gain = _interp(t, ticks, streams.c[:, k])
        out += gain * filtered
    return AudioBuffer(cfg.sample_rate, _master_normalize(out)[:, None])


def arpeggio_schedule(
    streams: ControlStreams, cfg: MappingConfig
) -> list[tuple[int, int, float]]:
    """Onset plan as (frame, note, amplitude) triples.

    Per iteration the notes play quietest first; the inter-onset gap is
    arp_gap·ê(i), so at the dataset's energy minimum the whole arpeggio
    collapses onto a single onset.  Equal coefficients keep note-index order.
    """
    _, ticks = _timeline(streams, cfg)
    e_norm = streams.normalized_e()
    plan = []
    for i in range(streams.length):
        gap = cfg.arp_gap * e_norm[i]
        order = np.argsort(streams.c[i], kind="stable")
        for rank, k in enumerate(order):
            onset = int(round((ticks[i] + rank * gap) * cfg.sample_rate))
            plan.append((onset, int(k), float(streams.c[i, k])))
    return plan


def map_arpeggio(streams: ControlStreams, cfg: MappingConfig) -> AudioBuffer:
    """Percussive notes (60 dB decay over arp_decay) per arpeggio_schedule."""
    freqs = cfg.note_table(streams.n)
    note_len = int(round(cfg.arp_decay * cfg.sample_rate))
    tau = cfg.arp_decay / np.log(1000.0)  # 60 dB = amplitude factor 1e-3
    envelope_t = np.arange(note_len) / cfg.sample_rate
    envelope = np.exp(-envelope_t / tau)
    total = int(
        round(
            (streams.length / cfg.iteration_rate + cfg.arp_decay + streams.n * cfg.arp_gap)
            * cfg.sample_rate
        )
    )
    out = np.zeros(total)
    for onset, k, amp in arpeggio_schedule(streams, cfg):
        wave = amp * np.sin(2.0 * np.pi * freqs[k] * envelope_t) * envelope
        out[onset : onset + note_len] += wave[: max(0, total - onset)]
    return AudioBuffer(cfg.sample_rate, _master_normalize(out)[:, None])


def pan_gains(azimuth: np.ndarray, channels: int) -> np.ndarray:
    """Constant-power gains over a ring of equally spaced channels.

    Each azimuth excites the two neighbouring ring positions with
    cos/sin weights, so Σ gain² = 1 everywhere.
    """
    if channels < 2:
        raise ValueError("panning needs at least 2 channels")
    azimuth = np.asarray(azimuth, dtype=float) % (2.0 * np.pi)
    width = 2.0 * np.pi / channels
    sector = np.minimum((azimuth // width).astype(int), channels - 1)
    frac = azimuth / width - sector
    gains = np.zeros((len(azimuth), channels))
    rows = np.arange(len(azimuth))
    gains[rows, sector] = np.cos(frac * np.pi / 2.0)
    gains[rows, (sector + 1) % channels] = np.sin(frac * np.pi / 2.0)
    return gains


def map_pan(
    streams: ControlStreams, cfg: MappingConfig, source=None
) -> AudioBuffer:
    """Ring panning: note k orbits the ring at azimuth 2π·u_k(t).

    Sources, in order of preference: an explicit list of per-note mono
    buffers; a single buffer split into note-centered bands (spectral
    diffusion); otherwise sine stems with amplitude c_k(t) at the note table.
    """
    channels = cfg.channels
    t, ticks = _timeline(streams, cfg)
    frames = t.shape[0]
    freqs = cfg.note_table(streams.n)
    u_rows = streams.normalized_c()
    stems = _pan_sources(streams, cfg, source, t, ticks, freqs, frames)
    out = np.zeros((frames, channels))
    for k in range(streams.n):
        azimuth = 2.0 * np.pi * _interp(t, ticks, u_rows[:, k])
        gains = pan_gains(azimuth, channels)
        out += gains * stems[k][:, None]
    return AudioBuffer(cfg.sample_rate, _master_normalize(out))


def _pan_sources(streams, cfg, source, t, ticks, freqs, frames):
    if source is None:
        stems = []
        for k in range(streams.n):
            amp = _interp(t, ticks, streams.c[:, k])
            stems.append(amp * np.sin(2.0 * np.pi * freqs[k] * t))
        return stems
    if isinstance(source, AudioBuffer):
        mono = source.samples.mean(axis=1)
        mono = np.resize(mono, frames)
        stems = []
        for k in range(streams.n):
            b, a = _bandpass_coeffs(freqs[k], 10.0, cfg.sample_rate)
            stems.append(lfilter(b, a, mono))
        return stems
    stems = [np.resize(np.asarray(buf.samples).mean(axis=1), frames) for buf in source]
    if len(stems) != streams.n:
        raise ValueError(f"need {streams.n} per-note buffers, got {len(stems)}")
    return stems


class StreamingAdditive:
    """Incremental additive renderer for live record consumption.

    Feed one marginal row per iteration tick; each push returns the sample
    block ending at that tick, and finish() returns the tail that holds the
    final row.  Concatenated blocks equal the offline additive render before
    master normalization sample-for-sample (live audio cannot be
    peak-normalized in advance).
    """

    def __init__(self, n: int, cfg: MappingConfig | None = None):
        self.cfg = cfg or MappingConfig()
        self.freqs = self.cfg.note_table(n)
        self.n = n
        self._tick = 0
        self._previous: np.ndarray | None = None

    def _frame(self, tick: int) -> int:
        return int(round(tick / self.cfg.iteration_rate * self.cfg.sample_rate))

    def _block(self, start_tick: int, c_from: np.ndarray, c_to: np.ndarray) -> np.ndarray:
        lo, hi = self._frame(start_tick), self._frame(start_tick + 1)
        t = np.arange(lo, hi) / self.cfg.sample_rate
        ticks = np.array([start_tick, start_tick + 1]) / self.cfg.iteration_rate
        out = np.zeros(hi - lo)
        for k in range(self.n):
            amp = np.interp(t, ticks, [c_from[k], c_to[k]])
            out += amp * np.sin(2.0 * np.pi * self.freqs[k] * t)
        return out

    def push(self, marginals) -> np.ndarray:
        row = np.asarray(marginals, dtype=float)
        if row.shape != (self.n,):
            raise ValueError(f"expected {self.n} marginals, got {row.shape}")
        if self._previous is None:
            self._previous = row
            return np.zeros(0)
        block = self._block(self._tick, self._previous, row)
        self._previous = row
        self._tick += 1
        return block

    def finish(self) -> np.ndarray:
        if self._previous is None:
            return np.zeros(0)
        # the final segment holds the last row, like the offline clamp
        return self._block(self._tick, self._previous, self._previous)


def render(streams: ControlStreams, kind: str, cfg: MappingConfig | None = None) -> AudioBuffer:
    """Dispatch a mapping by its session-command name."""
    cfg = cfg or MappingConfig()
    if kind == "additive":
        return map_additive(streams, cfg)
    if kind == "fmlin":
        return map_fm(streams, cfg, "linear")
    if kind == "fmlog":
        return map_fm(streams, cfg, "log")
    if kind == "inharm":
        return map_fm_inharmonic(streams, cfg)
    if kind == "sub":
        return map_subtractive(streams, cfg, rotary=False)
    if kind == "rotary":
        return map_subtractive(streams, cfg, rotary=True)
    if kind == "arp":
        return map_arpeggio(streams, cfg)
    if kind == "pan":
        return map_pan(streams, cfg)
    raise ValueError(f"unknown mapping {kind!r} (choose from {', '.join(MAPPING_NAMES)})")
