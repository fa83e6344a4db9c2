"""OSC 1.0 message codec and the UDP control-stream emitter.

Encoding is bit-exact per the protocol: NUL-terminated strings padded to
4-byte boundaries, big-endian payloads, a type-tag string opening with ','.
Supported argument types: int32 (i), float32 (f), string (s), blob (b).
"""
from __future__ import annotations

import logging
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

ADDR_MARGINALS = "/vqh/marginals"
ADDR_ENERGY = "/vqh/energy"
ADDR_STATE = "/vqh/state"
ADDR_CLOCK = "/vqh/clock"


@dataclass
class OscMessage:
    address: str
    args: list = field(default_factory=list)


def _pad4(data: bytes) -> bytes:
    return data + b"\x00" * (-len(data) % 4)


def _osc_string(text: str) -> bytes:
    return _pad4(text.encode("utf-8") + b"\x00")


def osc_encode(msg: OscMessage) -> bytes:
    if not msg.address.startswith("/"):
        raise ValueError(f"address must start with '/': {msg.address!r}")
    tags = ","
    payload = b""
    for arg in msg.args:
        if isinstance(arg, bool):
            raise TypeError("bool is not an OSC argument type")
        if isinstance(arg, (int, np.integer)):
            tags += "i"
            payload += struct.pack(">i", int(arg))
        elif isinstance(arg, (float, np.floating)):
            tags += "f"
            payload += struct.pack(">f", float(arg))
        elif isinstance(arg, str):
            tags += "s"
            payload += _osc_string(arg)
        elif isinstance(arg, (bytes, bytearray)):
            tags += "b"
            payload += struct.pack(">i", len(arg)) + _pad4(bytes(arg))
        else:
            raise TypeError(f"unsupported OSC argument type {type(arg).__name__}")
    return _osc_string(msg.address) + _osc_string(tags) + payload


def _read_string(data: bytes, pos: int) -> tuple[str, int]:
    end = data.index(b"\x00", pos)
    text = data[pos:end].decode("utf-8")
    return text, pos + ((end - pos) // 4 + 1) * 4


def osc_decode(data: bytes) -> OscMessage:
    if len(data) % 4:
        raise ValueError("OSC packet length must be a multiple of 4")
    address, pos = _read_string(data, 0)
    tags, pos = _read_string(data, pos)
    if not tags.startswith(","):
        raise ValueError(f"bad type-tag string {tags!r}")
    args: list = []
    for tag in tags[1:]:
        if tag == "i":
            args.append(struct.unpack(">i", data[pos : pos + 4])[0])
            pos += 4
        elif tag == "f":
            args.append(struct.unpack(">f", data[pos : pos + 4])[0])
            pos += 4
        elif tag == "s":
            text, pos = _read_string(data, pos)
            args.append(text)
        elif tag == "b":
            size = struct.unpack(">i", data[pos : pos + 4])[0]
            args.append(data[pos + 4 : pos + 4 + size])
            pos += 4 + (-size % 4) + size
        else:
            raise ValueError(f"unsupported type tag {tag!r}")
    return OscMessage(address, args)


class OscEmitter:
    """Best-effort datagram sender; a socket failure warns once per emitter."""

    def __init__(self, host: str, port: int):
        self.target = (host, int(port))
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._warned = False

    @classmethod
    def from_target(cls, target: str) -> "OscEmitter":
        host, _, port = target.rpartition(":")
        return cls(host or "127.0.0.1", int(port))

    def send(self, msg: OscMessage) -> None:
        try:
            self.sock.sendto(osc_encode(msg), self.target)
        except OSError as exc:
            if not self._warned:
                log.warning("OSC emission to %s failed: %s", self.target, exc)
                self._warned = True

    def send_record(self, index: int, marginals, energy: float, state: str) -> None:
        self.send(OscMessage(ADDR_MARGINALS, [float(v) for v in marginals]))
        self.send(OscMessage(ADDR_ENERGY, [float(energy)]))
        self.send(OscMessage(ADDR_STATE, [state]))
        self.send(OscMessage(ADDR_CLOCK, [int(index)]))

    def close(self) -> None:
        self.sock.close()


def emit_streams(
    streams,
    rate: float,
    target: str,
    stop: threading.Event | None = None,
) -> int:
    """Replay control streams as timed OSC ticks; returns ticks actually sent.

    Four messages per tick (marginals, energy, argmax state, clock index).
    Datagrams are fire-and-forget; the run never blocks on the network.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    emitter = OscEmitter.from_target(target)
    start = time.monotonic()
    sent = 0
    try:
        for i in range(streams.length):
            if stop is not None and stop.is_set():
                break
            emitter.send_record(i, streams.c[i], float(streams.e[i]), streams.states[i])
            sent += 1
            deadline = start + (i + 1) / rate
            delay = deadline - time.monotonic()
            if delay > 0 and i + 1 < streams.length:
                if stop is not None:
                    if stop.wait(delay):
                        break
                else:
                    time.sleep(delay)
    finally:
        emitter.close()
    return sent
