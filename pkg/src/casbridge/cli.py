"""Command line entry points.

The repl subcommand is a thin wire client: unless --connect points it at a
running service, it starts an in-process server on an ephemeral port and
talks to that over a real socket, so every repl run exercises the same
protocol the web console uses.

    casbridge serve --listen 127.0.0.1:8765 --corpus-dir ./corpus
    casbridge repl --profile maxima --replay maxima_session --auto
    casbridge profiles dump
    casbridge parse '\\frac{1}{x}'
    casbridge render '\\int_0^1 x' --target unicode
"""

from __future__ import annotations

import argparse
import signal
import sys
import threading

from casbridge.corpus import CorpusError, find_corpus, load_script, replay_inputs
from casbridge.formula import (
    ParseError,
    dump_ast,
    parse,
    to_canonical_latex,
    to_mathml,
    to_unicode,
)
from casbridge.profiles import builtin_profiles, dump_profiles
from casbridge.server import BridgeServer, WireClient
from casbridge.session import SessionEvent
from casbridge.wire import WireMessage, record_to_event

RENDER_TARGETS = ("unicode", "latex", "mathml")


def _split_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(
            f"expected HOST:PORT, got {value!r}"
        )
    return host, int(port)


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="casbridge",
        description="Bridge computer algebra REPLs to structured math output.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the wire-protocol service")
    serve.add_argument("--listen", type=_split_listen, default=("127.0.0.1", 8765))
    serve.add_argument("--corpus-dir", default=None)
    serve.add_argument("--transcript-dir", default=None)

    repl = sub.add_parser("repl", help="interactive session in the terminal")
    repl.add_argument("--profile", required=True)
    repl.add_argument("--replay", metavar="CORPUS", default=None)
    repl.add_argument("--render", choices=RENDER_TARGETS, default="unicode")
    repl.add_argument("--ascii", action="store_true", help="avoid non-ASCII glyphs")
    repl.add_argument("--connect", type=_split_listen, default=None,
                      metavar="HOST:PORT", help="use a running service")
    repl.add_argument("--auto", action="store_true",
                      help="replay only: type the scripted inputs automatically")
    repl.add_argument("--corpus-dir", default=None)

    profiles = sub.add_parser("profiles", help="profile registry tools")
    profiles.add_argument("action", choices=["dump"])

    parse_cmd = sub.add_parser("parse", help="parse math input, print the tree")
    parse_cmd.add_argument("expr", nargs="?", default=None,
                           help="math text (reads stdin when omitted)")

    render = sub.add_parser("render", help="parse and render math input")
    render.add_argument("expr", nargs="?", default=None)
    render.add_argument("--target", choices=RENDER_TARGETS, default="unicode")
    render.add_argument("--ascii", action="store_true")

    return top


# ---------------------------------------------------------------------------
# repl


def _render_math(payload: dict, target: str, ascii_mode: bool) -> str:
    latex = payload.get("latex", "")
    if "parse_error" in payload:
        return f"!! unrenderable math ({payload['parse_error']}): {latex}"
    if target == "mathml":
        return payload.get("mathml", "")
    node = parse(latex)
    if target == "latex":
        return to_canonical_latex(node)
    return to_unicode(node, ascii_mode=ascii_mode).text()


def _print_event(event: SessionEvent, target: str, ascii_mode: bool) -> None:
    kind, payload = event.kind, event.payload
    if kind in ("banner", "plain_text"):
        print(payload.get("text", ""))
    elif kind == "math":
        print(_render_math(payload, target, ascii_mode))
    elif kind == "plot_event":
        print(payload.get("text", ""))
    elif kind == "session_end":
        reason = payload.get("reason", "")
        text = payload.get("text", "")
        closing = text if text else f"[session ended: {reason}]"
        print(closing)
    # prompts, questions and input echoes are handled by the loop


class _ReplIO:
    """Prompt display plus input supply (keyboard or scripted)."""

    def __init__(self, auto_inputs: list[str] | None):
        self.auto = auto_inputs

    def ask(self, prompt_text: str) -> str | None:
        if self.auto is not None:
            if not self.auto:
                return None
            text = self.auto.pop(0)
            print(f"{prompt_text}{text}")
            return text
        try:
            return input(prompt_text)
        except EOFError:
            return None


def _run_repl(args) -> int:
    auto_inputs: list[str] | None = None
    script_name = None
    if args.replay:
        try:
            corpus_path = find_corpus(args.replay, args.corpus_dir)
        except CorpusError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        script = load_script(corpus_path)
        script_name = script.name
        if script.profile != args.profile:
            print(
                f"error: corpus {script.name!r} is for profile "
                f"{script.profile!r}, not {args.profile!r}",
                file=sys.stderr,
            )
            return 2
        if args.auto:
            auto_inputs = replay_inputs(script)
    elif args.auto:
        print("error: --auto needs --replay", file=sys.stderr)
        return 2

    owned_server = None
    if args.connect is not None:
        host, port = args.connect
    else:
        owned_server = BridgeServer(port=0, corpus_dir=args.corpus_dir).start()
        host, port = owned_server.address

    io = _ReplIO(auto_inputs)
    status = 0
    client = None
    try:
        client = WireClient(host, port, timeout=None)
        body = {"profile": args.profile}
        if args.replay:
            body["mode"] = "replay"
            body["corpus"] = script_name
        else:
            body["mode"] = "live"
        client.send(WireMessage("create_session", body=body))
        status = _repl_loop(client, io, args.render, args.ascii)
    except KeyboardInterrupt:
        print()
        status = 130
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 2
    finally:
        if client is not None:
            client.close()
        if owned_server is not None:
            owned_server.stop()
    return status


def _repl_loop(client: WireClient, io: _ReplIO, target: str, ascii_mode: bool) -> int:
    session_id = ""
    pending_prompt: SessionEvent | None = None
    awaiting_ack = False
    while True:
        msg = client.recv()
        if msg is None:
            print("error: connection closed", file=sys.stderr)
            return 1
        if msg.type == "error":
            body = msg.body
            print(
                f"error [{body.get('code', '?')}]: {body.get('message', '')}",
                file=sys.stderr,
            )
            if body.get("code") in ("unknown_profile", "unknown_corpus", "backend_error"):
                return 2
            if io.auto is not None:
                return 1
            # Rejected input: the prompt is still open, ask again.
            awaiting_ack = False
        elif msg.type == "session_created":
            session_id = msg.session_id
        elif msg.type == "input_accepted":
            awaiting_ack = False
            pending_prompt = None
        elif msg.type == "event_batch":
            for record in msg.body.get("events", []):
                event = record_to_event(record)
                if event.kind in ("input_prompt", "aux_prompt", "question"):
                    pending_prompt = event
                elif event.kind == "client_input":
                    pass  # echoed at send time
                else:
                    _print_event(event, target, ascii_mode)
                if event.kind == "session_end":
                    return 0
        if pending_prompt is not None and not awaiting_ack:
            answer = _ask_for(pending_prompt, io)
            if answer is None:
                pending_prompt = None
                client.send(WireMessage("terminate", session_id, {}))
                continue
            awaiting_ack = True
            client.send(WireMessage("send_input", session_id, {"text": answer}))


def _ask_for(event: SessionEvent, io: _ReplIO) -> str | None:
    payload = event.payload
    if event.kind == "question":
        # Questions stand out from ordinary prompts.
        header = f"?? {payload.get('text', '')}"
        answers = payload.get("answers")
        if answers:
            header += f"  [{'/'.join(answers)}]"
        print(header)
        return io.ask("> ")
    return io.ask(payload.get("text", ""))


# ---------------------------------------------------------------------------
# other subcommands


def _run_serve(args) -> int:
    host, port = args.listen
    try:
        server = BridgeServer(
            host=host,
            port=port,
            corpus_dir=args.corpus_dir,
            transcript_dir=args.transcript_dir,
        )
    except OSError as exc:
        print(f"error: cannot listen on {host}:{port}: {exc}", file=sys.stderr)
        return 2
    server.start()
    print(f"casbridge service on {server.host}:{server.port}", flush=True)
    done = threading.Event()
    # SIGTERM must still flush transcripts.
    signal.signal(signal.SIGTERM, lambda *_: done.set())
    try:
        done.wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def _read_expr(expr: str | None) -> str:
    if expr is not None:
        return expr
    return sys.stdin.read()


def _run_parse(args) -> int:
    text = _read_expr(args.expr)
    warnings: list[str] = []
    try:
        node = parse(text, warnings)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for note in warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(dump_ast(node))
    return 0


def _run_render(args) -> int:
    text = _read_expr(args.expr)
    warnings: list[str] = []
    try:
        node = parse(text, warnings)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for note in warnings:
        print(f"warning: {note}", file=sys.stderr)
    if args.target == "latex":
        print(to_canonical_latex(node))
    elif args.target == "mathml":
        print(to_mathml(node))
    else:
        print(to_unicode(node, ascii_mode=args.ascii).text())
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command == "serve":
        return _run_serve(args)
    if args.command == "repl":
        return _run_repl(args)
    if args.command == "profiles":
        print(dump_profiles(builtin_profiles()), end="")
        return 0
    if args.command == "parse":
        return _run_parse(args)
    if args.command == "render":
        return _run_render(args)
    raise AssertionError(args.command)  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
