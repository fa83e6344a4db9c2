"""MIDI control-change codecs: the 21-bit clock split and coefficient knobs."""
from __future__ import annotations

CLOCK_CONTROLLERS = (20, 21, 22)
CLOCK_RANGE = 1 << 21  # three 7-bit fields


def midi_clock_encode(step: int, controllers=CLOCK_CONTROLLERS) -> list[tuple[int, int]]:
    """Split a step counter big-endian onto three consecutive CC messages."""
    if not 0 <= step < CLOCK_RANGE:
        raise ValueError(f"step {step} outside [0, 2^21)")
    return [
        (controllers[0], (step >> 14) & 0x7F),
        (controllers[1], (step >> 7) & 0x7F),
        (controllers[2], step & 0x7F),
    ]


def midi_clock_decode(pairs, controllers=CLOCK_CONTROLLERS) -> int:
    if len(pairs) != 3:
        raise ValueError("clock codec needs exactly three messages")
    step = 0
    for (controller, value), expected in zip(pairs, controllers):
        if controller != expected:
            raise ValueError(
                f"controller {controller} out of order (expected {expected})"
            )
        if not 0 <= value <= 127:
            raise ValueError(f"CC value {value} outside [0, 127]")
        step = (step << 7) | value
    return step


def cc_to_coefficient(value: int, lo: float, hi: float) -> float:
    """Affine map from a 7-bit controller value onto [lo, hi]."""
    if not 0 <= value <= 127:
        raise ValueError(f"CC value {value} outside [0, 127]")
    if lo >= hi:
        raise ValueError("lo must be below hi")
    return lo + (value / 127.0) * (hi - lo)


def apply_cc_to_qubo(q, i: int, j: int, value: int, lo: float, hi: float) -> None:
    """Drive one QUBO cell from a knob; off-diagonal edits stay symmetric."""
    coefficient = cc_to_coefficient(value, lo, hi)
    if i == j:
        q.a[i] = coefficient
    else:
        q.b[i, j] = coefficient
        q.b[j, i] = coefficient
