"""End-to-end acceptance: one test per shipping criterion.

Each test prints a single PASS line when it holds; pytest -v adds its own
verdict per test. Tolerances and counts are stated inline.
"""

import json
import random
import socket
import time

from casbridge.corpus import find_corpus, load_script, replay_inputs
from casbridge.formula import Delimited, Matrix, parse, to_canonical_latex, to_unicode
from casbridge.segmenter import StreamSegmenter
from casbridge.server import BridgeServer
from casbridge.session import EmitStep, SessionRegistry
from casbridge.transcript import (
    dumps_transcript,
    load_transcript,
    loads_transcript,
    persist_transcript,
)
from casbridge.profiles import builtin_profiles
from casbridge.wire import WireMessage, encode_message, record_to_event

from astgen import random_events, random_node
from helpers import CORPUS_DIR, GOLDEN_DIR, drive_replay
from replaymodel import make_model, run_ops
from test_layout import check_invariants
from test_segmenter import chunks_at, run as run_segmenter


def labels(events, kind):
    return [e.payload.get("label", "") for e in events if e.kind == kind]


def kinds(events):
    return [e.kind for e in events]


# -- criterion 1: the first corpus replays exactly, quickly --


def test_criterion_01_maxima_replay():
    started = time.monotonic()
    session = drive_replay("maxima_session")
    elapsed = time.monotonic() - started
    events = session.events

    prompts = labels(events, "input_prompt")
    assert prompts == [f"C{i}" for i in range(1, 22)], prompts
    aux = [e for e in events if e.kind == "aux_prompt"]
    assert len(aux) == 3
    assert all(e.payload["kind"] == "debugger" for e in aux)
    assert sum(1 for e in events if e.kind == "question") == 6
    math_labels = [
        events[i - 1].payload["text"]
        for i, e in enumerate(events)
        if e.kind == "math"
    ]
    want = [f"(D{i}) " for i in list(range(1, 18)) + [19, 20, 21]]
    assert math_labels == want, math_labels
    plains = [e.payload["text"] for e in events if e.kind == "plain_text"]
    trace = [t for t in plains if "Enter fac" in t or "Exit fac" in t]
    assert len(trace) == 12
    assert trace[0] == "1 Enter fac [5]"
    assert trace[-1] == "1 Exit fac 120"
    golden = load_transcript(GOLDEN_DIR / "events" / "maxima_session.jsonl")
    assert events == golden, "event stream drifted from golden"
    assert elapsed < 5.0, f"replay took {elapsed:.2f}s"
    print(
        "PASS criterion 1: first corpus replays its 21 prompts, 3 debugger "
        f"stops, 6 questions, 20 results against golden in {elapsed:.2f}s"
    )


# -- criterion 2: second corpus plots and piecewise output --


def test_criterion_02_mupad_replay():
    events = drive_replay("mupad_session").events
    assert len(labels(events, "input_prompt")) == 13
    plots = [e for e in events if e.kind == "plot_event"]
    assert len(plots) == 2
    for plot in plots:
        assert "Plot data saved in binary file" in plot.payload["text"]
        assert plot.payload["path"] == "save.mp"
    cases = [
        parse(e.payload["latex"])
        for e in events
        if e.kind == "math" and e.payload["latex"].startswith("\\left\\{")
    ]
    case = next(
        n for n in cases if isinstance(n, Delimited) and n.right == "none"
    )
    assert isinstance(case.body, Matrix)
    assert len(case.body.rows) == 4
    end = events[-1]
    assert end.kind == "session_end"
    assert end.payload["text"] == "The end"
    print(
        "PASS criterion 2: second corpus replays 13 prompts, 2 plot file "
        "events, a 4-row case construct, and a marked ending"
    )


# -- criterion 3: third corpus question and farewell --


def test_criterion_03_reduce_replay():
    events = drive_replay("reduce_session").events
    assert len(labels(events, "input_prompt")) == 13
    questions = [e for e in events if e.kind == "question"]
    assert len(questions) == 1
    q = questions[0].payload
    assert q["kind"] == "yes_no"
    assert q["text"] == "Declare f operator ? "
    assert q["answers"] == ["y", "n"]
    assert events[-1].kind == "session_end"
    assert events[-2].kind == "plain_text"
    assert events[-2].payload["text"] == "Quitting"
    print(
        "PASS criterion 3: third corpus replays 13 prompts, one yes/no "
        "question, and says Quitting before ending"
    )


# -- criterion 4: every captured formula parses, full node coverage --


def test_criterion_04_corpus_formulas_parse(all_corpus_sessions):
    from astgen import iter_nodes
    from test_corpus_files import ALL_NODE_TYPES

    payloads = [
        e.payload
        for s in all_corpus_sessions.values()
        for e in s.events
        if e.kind == "math"
    ]
    assert len(payloads) == 41
    broken = [p for p in payloads if "parse_error" in p]
    assert not broken, broken
    seen = set()
    for payload in payloads:
        for node in iter_nodes(parse(payload["latex"])):
            seen.add(type(node))
    assert set(ALL_NODE_TYPES) <= seen
    print(
        "PASS criterion 4: all 41 captured formulas parse and cover every "
        "tree node type"
    )


# -- criterion 5: parse/emit round trip, canonical form is a fixed point --


def test_criterion_05_round_trip(all_corpus_sessions):
    for session in all_corpus_sessions.values():
        for event in session.events:
            if event.kind != "math":
                continue
            node = parse(event.payload["latex"])
            canon = to_canonical_latex(node)
            assert parse(canon) == node
            assert to_canonical_latex(parse(canon)) == canon
    rng = random.Random(0x05)
    count = 1000
    for i in range(count):
        node = random_node(rng, depth=rng.randrange(0, 6))
        canon = to_canonical_latex(node)
        assert parse(canon) == node, canon
        assert to_canonical_latex(parse(canon)) == canon, canon
    print(
        f"PASS criterion 5: corpus formulas and {count} random trees "
        "(depth <= 5) survive parse/emit round trips; canonical form is "
        "idempotent"
    )


# -- criterion 6: segmentation is lossless and chunking independent --


def corpus_stream(name):
    script = load_script(find_corpus(name, CORPUS_DIR))
    data = bytearray()
    ticks = []
    for step in script.steps:
        if isinstance(step, EmitStep):
            data.extend(step.data)
            if step.quiesce:
                ticks.append(len(data))
    return bytes(data), ticks


def test_criterion_06_chunking_independence():
    rng = random.Random(0x06)
    profiles = builtin_profiles()
    total = 0
    for name, profile_name in (
        ("maxima_session", "maxima"),
        ("mupad_session", "mupad"),
        ("reduce_session", "reduce"),
    ):
        stream, ticks = corpus_stream(name)
        profile = profiles[profile_name]
        reference = run_segmenter(profile, stream, tick_at=ticks)
        assert b"".join(s.raw for s in reference) == stream
        for _ in range(334):
            cuts = [rng.randrange(1, len(stream)) for _ in range(rng.randrange(0, 40))]
            pieces = chunks_at(stream, set(cuts) | set(ticks))
            segments = run_segmenter(profile, stream, tick_at=ticks, chunks=pieces)
            assert segments == reference
            assert b"".join(s.raw for s in segments) == stream
            total += 1
    assert total >= 1000
    print(
        f"PASS criterion 6: {total} randomized chunkings of the corpus "
        "streams are lossless and chunking independent"
    )


# -- criterion 7: text layout invariants and frozen captures --


def test_criterion_07_layout():
    rng = random.Random(0x07)
    count = 1000
    for _ in range(count):
        node = random_node(rng, depth=rng.randrange(0, 5))
        for ascii_mode in (False, True):
            box = to_unicode(node, ascii_mode=ascii_mode)
            check_invariants(box)
            if ascii_mode:
                assert all(line.isascii() for line in box.lines)
    maxima = drive_replay("maxima_session").events
    mupad = drive_replay("mupad_session").events

    def math_after(events, label_text):
        for i, event in enumerate(events):
            if event.kind == "plain_text" and event.payload["text"] == label_text:
                return events[i + 1].payload["latex"]
        raise AssertionError(label_text)

    picks = {
        "maxima_d1": math_after(maxima, "(D1) "),
        "maxima_d3": math_after(maxima, "(D3) "),
        "maxima_d11": math_after(maxima, "(D11) "),
        "maxima_d12": math_after(maxima, "(D12) "),
        "mupad_cases": next(
            e.payload["latex"]
            for e in mupad
            if e.kind == "math" and e.payload["latex"].startswith("\\left\\{")
        ),
    }
    for stem, latex in picks.items():
        node = parse(latex)
        for mode in ("unicode", "ascii"):
            box = to_unicode(node, ascii_mode=(mode == "ascii"))
            rendered = ("\n".join(box.lines) + "\n").encode("utf-8")
            golden = (GOLDEN_DIR / "layout" / f"{stem}_{mode}.txt").read_bytes()
            assert rendered == golden, f"{stem} {mode} drifted"
    print(
        f"PASS criterion 7: {count} random trees hold layout invariants in "
        "both glyph modes; 5 frozen captures match byte for byte"
    )


# -- criterion 8: session state machine against a reference model --


def test_criterion_08_state_machine():
    rng = random.Random(0x08)
    total_ops = 0
    walks = 0
    while total_ops < 10000:
        result = run_ops(make_model(rng), rng, terminate_chance=0.05)
        total_ops += result.ops
        walks += 1
    print(
        f"PASS criterion 8: {total_ops} operations across {walks} random "
        "walks match the reference model; illegal inputs leave state intact"
    )


# -- criterion 9: the wire service equals direct replay, bit for bit --


def test_criterion_09_wire_replay():
    captured = record_wire_replay("mupad_session", "mupad")
    golden = (GOLDEN_DIR / "wire" / "mupad_wire_server.jsonl").read_bytes()
    assert captured == golden, "server byte stream drifted from golden"
    events = []
    for line in captured.decode("utf-8").splitlines():
        record = json.loads(line)
        if record["type"] == "event_batch":
            events.extend(record_to_event(r) for r in record["body"]["events"])
    direct = drive_replay("mupad_session").events
    assert events == direct
    print(
        "PASS criterion 9: serving the second corpus over the wire equals "
        "direct replay and matches the recorded byte stream exactly"
    )


def record_wire_replay(corpus, profile):
    server = BridgeServer(
        port=0, registry=SessionRegistry(clock=lambda: 0.0), corpus_dir=CORPUS_DIR
    ).start()
    raw = bytearray()
    try:
        sock = socket.create_connection(server.address, timeout=10)
        reader = sock.makefile("rb")

        def send(msg):
            sock.sendall((encode_message(msg) + "\n").encode("utf-8"))

        def read_until(mtype):
            while True:
                line = reader.readline()
                assert line, "server closed early"
                raw.extend(line)
                if json.loads(line)["type"] == mtype:
                    return

        try:
            send(WireMessage("create_session", "", {"profile": profile, "corpus": corpus}))
            read_until("event_batch")
            for text in replay_inputs(load_script(find_corpus(corpus, CORPUS_DIR))):
                send(WireMessage("send_input", "s1", {"text": text}))
                read_until("event_batch")
        finally:
            sock.close()
    finally:
        server.stop()
    return bytes(raw)


# -- criterion 10: transcripts persist and reload exactly --


def test_criterion_10_transcripts(tmp_path, all_corpus_sessions):
    for name, session in all_corpus_sessions.items():
        dest = tmp_path / f"{name}.jsonl"
        persist_transcript(session.events, dest)
        assert load_transcript(dest) == session.events
    rng = random.Random(0x10)
    count = 500
    for _ in range(count):
        events = random_events(rng, rng.randrange(0, 30))
        assert loads_transcript(dumps_transcript(events)) == events
    print(
        f"PASS criterion 10: 3 corpus transcripts and {count} random event "
        "lists reload with deep equality"
    )
