"""The interactive session prompt and its command grammar."""
from __future__ import annotations

import argparse
import logging
import sys

from .session import PLATFORMS, PROTOCOLS, Session, SessionError
from .sonify import MAPPING_NAMES

PROMPT = "VQH=> "

HELP_TEXT = """commands:
  runvqe              run the configured experiment (h_setup.csv + vqe_conf.json)
  wait                block until the running experiment finishes
  map <type>          sonify the last experiment ({types})
  mapfile <id> <type> sonify a stored experiment by id
  stop                panic: stop all sound emission
  quit | q            exit (cancels a running experiment)
""".format(types=", ".join(MAPPING_NAMES))


def handle_command(session: Session, line: str) -> tuple[str, bool]:
    """Dispatch one prompt line; returns (message, keep_running)."""
    try:
        return _dispatch(session, line)
    except SessionError as exc:
        return f"error: {exc}", True
    except Exception as exc:  # the prompt must survive anything
        return f"error: {type(exc).__name__}: {exc}", True


def _dispatch(session: Session, line: str) -> tuple[str, bool]:
    parts = line.strip().split()
    if not parts:
        return "", True
    command, args = parts[0], parts[1:]
    if command == "runvqe":
        run_id = session.start_run()
        return f"experiment {run_id} running", True
    if command == "wait":
        session.wait()
        if session.last_error is not None:
            return f"error: {session.last_error}", True
        if session.last_result is None:
            return "no experiment completed", True
        return f"experiment {session.last_result.id} finished", True
    if command == "map":
        if len(args) != 1:
            return "usage: map <type>", True
        path = session.map_last(args[0])
        return f"rendered {path}", True
    if command == "mapfile":
        if len(args) != 2:
            return "usage: mapfile <id> <type>", True
        path = session.map_file(args[0], args[1])
        return f"rendered {path}", True
    if command == "stop":
        session.stop_sound()
        return "sound stopped", True
    if command in ("quit", "q"):
        session.shutdown()
        return "bye", False
    if command == "help":
        return HELP_TEXT.rstrip(), True
    return f"unknown command {command!r} (try `help`)", True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vqh",
        description="Run a sonified optimization session: "
        "datasets land in <SESSIONPATH>_Data/.",
    )
    parser.add_argument("sessionpath", help="session folder prefix")
    parser.add_argument("platform", help=f"execution platform ({', '.join(PLATFORMS)})")
    parser.add_argument("protocol", help=f"note-decoding protocol ({', '.join(PROTOCOLS)})")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        session = Session(args.sessionpath, args.platform, args.protocol)
    except SessionError as exc:
        parser.error(str(exc))
    print(f"session data -> {session.data_dir}")
    if session.server is not None:
        print(f"book API -> {session.server.url}")
    keep_running = True
    while keep_running:
        try:
            line = input(PROMPT)
        except (EOFError, KeyboardInterrupt):
            print()
            session.shutdown()
            break
        message, keep_running = handle_command(session, line)
        if message:
            print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
