"""External transports: OSC over UDP, the HTTP book API, and the MIDI codec."""

from .osc import OscMessage, OscEmitter, osc_decode, osc_encode, emit_streams
from .midi import (
    CLOCK_CONTROLLERS,
    cc_to_coefficient,
    midi_clock_decode,
    midi_clock_encode,
)
from .api import ApiServer, Book, BookStore, post_book, serve_api

__all__ = [
    "OscMessage",
    "OscEmitter",
    "osc_encode",
    "osc_decode",
    "emit_streams",
    "CLOCK_CONTROLLERS",
    "midi_clock_encode",
    "midi_clock_decode",
    "cc_to_coefficient",
    "Book",
    "BookStore",
    "ApiServer",
    "serve_api",
    "post_book",
]
