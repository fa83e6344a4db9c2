"""Shared test plumbing: a minimal blocking SSE reader."""
import json
import socket
import time


class SseClient:
    def __init__(self, host, port, path="/events"):
        self.sock = socket.create_connection((host, port), timeout=5)
        request = f"GET {path} HTTP/1.1\r\nHost: {host}\r\nAccept: text/event-stream\r\n\r\n"
        self.sock.sendall(request.encode())
        self.buffer = b""

    def read_event(self, timeout=5.0):
        deadline = time.monotonic() + timeout
        event, data = None, None
        while time.monotonic() < deadline:
            while b"\n" in self.buffer:
                line, self.buffer = self.buffer.split(b"\n", 1)
                line = line.strip()
                if line.startswith(b"event:"):
                    event = line.split(b":", 1)[1].strip().decode()
                elif line.startswith(b"data:"):
                    data = json.loads(line.split(b":", 1)[1])
                elif not line and event is not None:
                    return event, data
            self.sock.settimeout(max(0.05, deadline - time.monotonic()))
            try:
                chunk = self.sock.recv(4096)
            except socket.timeout:
                continue
            if not chunk:
                break
            self.buffer += chunk
        raise TimeoutError("no SSE event arrived")

    def close(self):
        self.sock.close()
