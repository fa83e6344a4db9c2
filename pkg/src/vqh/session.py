"""Session lifecycle: folder layout, experiment persistence, live wiring.

A session reads ``h_setup.csv`` and ``vqe_conf.json`` from its working
directory at every run, writes each experiment under
``<SESSIONPATH>_Data/Data_<id>/``, and owns the optional live surfaces:
OSC emission, the hosted book/session API, and book POSTs to a remote URL.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import threading
import time
from pathlib import Path

import numpy as np

from . import report
from .bridge.api import ApiServer, BookStore, post_book, serve_api
from .bridge.osc import OscEmitter, emit_streams
from .qubo import parse_h_setup
from .sonify import (
    ControlStreams,
    MappingConfig,
    basis_protocol,
    render,
)
from .vqe import ExperimentResult, RunCancelled, VqeConfig, run_sequence
from .wav import write_wav

log = logging.getLogger(__name__)

PLATFORMS = ("local",)  # remote providers plug in behind the same name slot
PROTOCOLS = ("basis",)

RAW_PROB_FLOOR = 1e-12  # raw-file sparsity: smaller probabilities are omitted
ID_WIDTH = 3
CONFIG_FILE = "vqe_conf.json"
H_SETUP_FILE = "h_setup.csv"


class SessionError(Exception):
    pass


class Session:
    def __init__(self, sessionpath: str, platform: str = "local",
                 protocol: str = "basis", workdir=None):
        if platform not in PLATFORMS:
            raise SessionError(f"unknown platform {platform!r} (available: {PLATFORMS})")
        if protocol not in PROTOCOLS:
            raise SessionError(f"unknown protocol {protocol!r} (available: {PROTOCOLS})")
        self.platform = platform
        self.protocol = protocol
        self.workdir = Path(workdir) if workdir else Path.cwd()
        self.data_dir = self.workdir / f"{sessionpath}_Data"
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.last_result: ExperimentResult | None = None
        self.last_streams: ControlStreams | None = None
        self.last_error: str | None = None
        self.mapping_config = MappingConfig()
        self._worker: threading.Thread | None = None
        self._cancel = threading.Event()
        self._sound_stop = threading.Event()
        self._emitters: list[threading.Thread] = []
        self._lock = threading.Lock()
        self.server: ApiServer | None = None
        self._maybe_serve()

    # -- configuration -------------------------------------------------

    def load_config(self) -> VqeConfig:
        path = self.workdir / CONFIG_FILE
        if not path.exists():
            raise SessionError(f"missing {CONFIG_FILE} in {self.workdir}")
        try:
            return VqeConfig.from_json(path.read_text())
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise SessionError(f"bad {CONFIG_FILE}: {exc}")

    def load_sequence(self):
        path = self.workdir / H_SETUP_FILE
        if not path.exists():
            raise SessionError(f"missing {H_SETUP_FILE} in {self.workdir}")
        text = path.read_text()
        try:
            return parse_h_setup(text), text
        except ValueError as exc:
            raise SessionError(f"bad {H_SETUP_FILE}: {exc}")

    def _maybe_serve(self):
        try:
            cfg = self.load_config()
        except SessionError:
            return
        if cfg.serve:
            store = BookStore(self.data_dir / "books")
            self.server = serve_api(store, cfg.serve, session_hooks=SessionHooks(self))
            log.info("book API serving on %s", self.server.url)

    # -- id management ---------------------------------------------------

    def next_id(self, cfg: VqeConfig) -> str:
        existing = [
            int(p.name.removeprefix("Data_"))
            for p in self.data_dir.glob("Data_*")
            if p.name.removeprefix("Data_").isdigit()
        ]
        try:
            seed = int(cfg.nextpathid)
        except (TypeError, ValueError):
            seed = 1
        return f"{max(max(existing, default=0) + 1, seed):0{ID_WIDTH}d}"

    # -- running ---------------------------------------------------------

    @property
    def running(self) -> bool:
        return self._worker is not None and self._worker.is_alive()

    def start_run(self, on_record=None) -> str:
        """Validate inputs, then execute the experiment on a worker thread."""
        with self._lock:
            if self.running:
                raise SessionError("an experiment is already running")
            cfg = self.load_config()
            seq, raw_csv = self.load_sequence()
            if cfg.size != seq.n:
                raise SessionError(
                    f"config size {cfg.size} does not match the {seq.n}-note QUBO"
                )
            if cfg.sequence_length != len(seq.entries):
                raise SessionError(
                    f"sequence_length {cfg.sequence_length} but h_setup defines "
                    f"{len(seq.entries)} Hamiltonians"
                )
            if len(cfg.iterations) != len(seq.entries):
                raise SessionError(
                    f"iterations list covers {len(cfg.iterations)} of "
                    f"{len(seq.entries)} Hamiltonians"
                )
            run_id = self.next_id(cfg)
            self.last_error = None
            self._cancel.clear()
            self._worker = threading.Thread(
                target=self._execute,
                args=(run_id, cfg, seq, raw_csv, on_record),
                daemon=True,
            )
            self._worker.start()
            return run_id

    def run_experiment(self, on_record=None) -> ExperimentResult:
        """Synchronous run; same pipeline the worker uses."""
        run_id = self.start_run(on_record)
        self.wait()
        if self.last_result is None or self.last_result.id != run_id:
            raise SessionError(f"experiment {run_id} produced no result")
        return self.last_result

    def wait(self, timeout: float | None = None) -> None:
        if self._worker is not None:
            self._worker.join(timeout)

    def cancel_run(self) -> None:
        self._cancel.set()

    def _execute(self, run_id, cfg, seq, raw_csv, on_record) -> None:
        emitter = OscEmitter.from_target(cfg.osc_target) if cfg.osc_target else None
        broadcaster = self.server.broadcaster if self.server else None

        def collect(record):
            if emitter is not None and not self._sound_stop.is_set():
                emitter.send_record(
                    record.index, record.marginals, record.energy, record.argmax
                )
            if broadcaster is not None:
                broadcaster.publish(
                    "records",
                    {
                        "id": run_id,
                        "index": record.index,
                        "marginals": [float(v) for v in record.marginals],
                        "energy": record.energy,
                        "state": record.argmax,
                    },
                )
            if on_record is not None:
                on_record(record)
            if self._cancel.is_set():
                raise RunCancelled

        try:
            result = run_sequence(seq, cfg, on_record=collect)
        except RunCancelled:
            log.info("experiment %s cancelled before any record", run_id)
            return
        except Exception as exc:
            self.last_error = f"experiment {run_id} failed: {exc}"
            log.exception("experiment %s failed", run_id)
            return
        finally:
            if emitter is not None:
                emitter.close()
        result.id = run_id
        result.created_at = time.strftime("%Y-%m-%dT%H:%M:%S")
        streams = basis_protocol(result)
        self.persist(result, raw_csv, streams)
        self.last_result = result
        self.last_streams = streams
        self._publish_book(result, raw_csv, streams)
        log.info(
            "experiment %s: %d records%s",
            run_id,
            len(result.records),
            " (aborted)" if result.aborted else "",
        )

    # -- persistence -------------------------------------------------------

    def experiment_dir(self, run_id: str) -> Path:
        return self.data_dir / f"Data_{run_id}"

    def persist(self, result: ExperimentResult, raw_csv: str, streams: ControlStreams) -> Path:
        folder = self.experiment_dir(result.id)
        folder.mkdir(parents=True, exist_ok=True)
        labels = result.sequence.labels
        (folder / H_SETUP_FILE).write_text(raw_csv)
        (folder / CONFIG_FILE).write_text(result.config.to_json())
        (folder / "operators.txt").write_text(
            "".join(f"h{k + 1} {op}\n" for k, op in enumerate(result.operators))
        )
        raw = [
            {
                bits: probability
                for bits, probability in record.distribution.probabilities.items()
                if probability >= RAW_PROB_FLOOR
            }
            for record in result.records
        ]
        (folder / "raw.json").write_text(json.dumps(raw) + "\n")
        _write_csv(folder / "marginals.csv", labels, streams.c)
        _write_csv(folder / "energies.csv", ["energy"], streams.e[:, None])
        (folder / "states.csv").write_text(
            "state\n" + "".join(s + "\n" for s in streams.states)
        )
        meta = {
            "id": result.id,
            "created_at": result.created_at,
            "segment_boundaries": result.segment_boundaries,
            "final_params": [float(v) for v in result.final_params],
            "aborted": result.aborted,
            "records": len(result.records),
        }
        (folder / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        report.save_figures(streams, labels, folder)
        return folder

    def load_streams(self, run_id: str) -> ControlStreams:
        folder = self.experiment_dir(run_id)
        if not folder.exists():
            raise SessionError(f"unknown experiment id {run_id!r}")
        c = _read_csv(folder / "marginals.csv")
        e = _read_csv(folder / "energies.csv")[:, 0]
        states = (folder / "states.csv").read_text().splitlines()[1:]
        return ControlStreams.from_arrays(c, e, states)

    def _publish_book(self, result, raw_csv, streams) -> None:
        book = {
            "id": result.id,
            "created_at": result.created_at,
            "config": result.config.to_dict(),
            "qubo_csv": raw_csv,
            "operators": list(result.operators),
            "raw": json.loads((self.experiment_dir(result.id) / "raw.json").read_text()),
            "marginals": [[float(v) for v in row] for row in streams.c],
            "values": [float(v) for v in streams.e],
            "states": list(streams.states),
        }
        if self.server is not None:
            try:
                self.server.store.add(book)
                self.server.broadcaster.publish("book", {"id": result.id})
            except (KeyError, ValueError) as exc:
                log.warning("could not store book %s: %s", result.id, exc)
        if result.config.api_url:
            try:
                post_book(result.config.api_url, book)
            except RuntimeError as exc:
                log.warning("book POST failed: %s", exc)

    # -- sonification ------------------------------------------------------

    def map_last(self, kind: str) -> Path:
        if self.running:
            raise SessionError("experiment still running")
        if self.last_streams is None or self.last_result is None:
            raise SessionError("no experiment in memory; run `runvqe` first")
        return self._render(self.last_result.id, kind, self.last_streams)

    def map_file(self, run_id: str, kind: str) -> Path:
        streams = self.load_streams(run_id)
        return self._render(run_id, kind, streams)

    def _render(self, run_id: str, kind: str, streams: ControlStreams) -> Path:
        buf = render(streams, kind, self.mapping_config)
        path = self.experiment_dir(run_id) / f"render_{run_id}_{kind}.wav"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(buf, path)
        cfg = self.load_config() if (self.workdir / CONFIG_FILE).exists() else None
        if cfg is not None and cfg.osc_target:
            self._start_emission(streams, cfg.osc_target)
        return path

    def _start_emission(self, streams: ControlStreams, target: str) -> None:
        self._sound_stop = threading.Event()
        thread = threading.Thread(
            target=emit_streams,
            args=(streams, self.mapping_config.iteration_rate, target),
            kwargs={"stop": self._sound_stop},
            daemon=True,
        )
        thread.start()
        self._emitters.append(thread)

    def stop_sound(self) -> None:
        """Panic: halt OSC emission; a running optimization keeps generating."""
        self._sound_stop.set()

    def shutdown(self) -> None:
        self.cancel_run()
        self.stop_sound()
        self.wait(timeout=30)
        if self.server is not None:
            self.server.stop()

    # -- API hooks ---------------------------------------------------------

    def replace_qubo(self, text: str) -> None:
        parse_h_setup(text)  # validates; raises ValueError on bad input
        (self.workdir / H_SETUP_FILE).write_text(text)


class SessionHooks:
    """The thin surface the HTTP session endpoints drive."""

    def __init__(self, session: Session):
        self.session = session

    def replace_qubo(self, text: str) -> None:
        self.session.replace_qubo(text)

    def start_run(self) -> str:
        try:
            return self.session.start_run()
        except SessionError as exc:
            if "already running" in str(exc):
                raise RuntimeError(str(exc))
            raise ValueError(str(exc))

    def stop_sound(self) -> None:
        self.session.stop_sound()


def _write_csv(path: Path, header, rows) -> None:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in np.atleast_2d(rows):
        writer.writerow([repr(float(v)) for v in row])
    path.write_text(out.getvalue())


def _read_csv(path: Path) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(path.read_text())))
    return np.array([[float(cell) for cell in row] for row in rows[1:]])
