"""Session behavior: replay pumping, state transitions, event payloads."""

import pytest

from casbridge.profiles import builtin_profiles
from casbridge.session import (
    EmitStep,
    ExpectInput,
    InvalidAnswerError,
    MockScript,
    ReplayMismatchError,
    SessionError,
    SessionRegistry,
    UnknownProfileError,
    WrongStateError,
)
from helpers import events_of_kind, kinds_of

FRAME = b"\x02latex:%s\x05"


def math(latex: bytes) -> bytes:
    return FRAME % latex


def script(*steps, profile="maxima", name="inline") -> MockScript:
    return MockScript(name=name, profile=profile, steps=tuple(steps))


def make(ms: MockScript, clock=lambda: 0.0):
    registry = SessionRegistry(clock=clock)
    return registry.create(ms.profile, mode="replay", script=ms)


SIMPLE = script(
    EmitStep(b"Maxima 5.6 of today\n", quiesce=False),
    EmitStep(b"(C1) "),
    ExpectInput(r"1\+1;", example="1+1;"),
    EmitStep(b"(D1) " + math(b"2") + b"\n", quiesce=False),
    EmitStep(b"(C2) "),
    ExpectInput(r"quit\(\);", example="quit();"),
    EmitStep(b"The end\n", quiesce=False),
)


def test_session_ids_are_sequential():
    registry = SessionRegistry()
    a = registry.create("maxima", mode="replay", script=SIMPLE)
    b = registry.create("mupad", mode="replay", script=script(profile="mupad"))
    assert (a.id, b.id) == ("s1", "s2")
    assert registry.get("s1") is a
    assert registry.get("s2") is b


def test_unknown_profile_rejected():
    with pytest.raises(UnknownProfileError):
        SessionRegistry().create("mathematica", mode="replay", script=SIMPLE)


def test_replay_needs_script():
    with pytest.raises(SessionError):
        SessionRegistry().create("maxima", mode="replay")


def test_create_pumps_to_first_prompt():
    session = make(SIMPLE)
    assert session.state.phase == "at_prompt"
    assert session.state.prompt_label == "C1"
    assert kinds_of(session) == ["banner", "input_prompt"]


def test_full_replay_event_sequence():
    session = make(SIMPLE)
    session.send_input("1+1;")
    session.send_input("quit();")
    # the newline after the math frame is real output, so it shows up as
    # an empty plain_text event between the frame and the next prompt
    assert kinds_of(session) == [
        "banner",
        "input_prompt",
        "client_input",
        "plain_text",
        "math",
        "plain_text",
        "input_prompt",
        "client_input",
        "session_end",
    ]
    assert session.state.phase == "ended"
    assert session.state.end_reason == "end_marker"


def test_event_seq_and_clock():
    ticks = iter(range(100))
    session = make(SIMPLE, clock=lambda: float(next(ticks)))
    session.send_input("1+1;")
    session.send_input("quit();")
    seqs = [e.seq for e in session.events]
    assert seqs == list(range(len(session.events)))
    ats = [e.at for e in session.events]
    assert ats == sorted(ats)


def test_prompt_payload_has_label_and_text():
    session = make(SIMPLE)
    prompt = events_of_kind(session, "input_prompt")[0]
    assert prompt.payload == {"label": "C1", "text": "(C1) "}


def test_math_payload_parses_to_latex_and_mathml():
    session = make(SIMPLE)
    session.send_input("1+1;")
    payload = events_of_kind(session, "math")[0].payload
    assert payload["latex"] == "2"
    assert "<mn>2</mn>" in payload["mathml"]
    assert "parse_error" not in payload


def test_broken_math_payload_reports_parse_error():
    bad = script(
        EmitStep(b"Maxima 5.6\n(C1) "),
        ExpectInput("x;", example="x;"),
        EmitStep(math(rb"\frac{1}") + b"\n"),
    )
    session = make(bad)
    session.send_input("x;")
    payload = events_of_kind(session, "math")[0].payload
    assert payload["latex"] == r"\frac{1}"
    assert "parse_error" in payload
    assert "mathml" not in payload


def test_session_end_on_eof_is_synthetic():
    ms = script(
        EmitStep(b"Maxima 5.6\n(C1) "),
        ExpectInput("x;", example="x;"),
        EmitStep(b"done\n", quiesce=False),
    )
    session = make(ms)
    session.send_input("x;")
    end = events_of_kind(session, "session_end")[0]
    assert end.payload == {"reason": "eof"}


def test_session_end_marker_keeps_text():
    session = make(SIMPLE)
    session.send_input("1+1;")
    session.send_input("quit();")
    end = events_of_kind(session, "session_end")[0]
    assert end.payload == {"reason": "end_marker", "text": "The end"}


def test_input_rejected_while_computing_or_ended():
    session = make(SIMPLE)
    session.send_input("1+1;")
    session.send_input("quit();")
    with pytest.raises(WrongStateError):
        session.send_input("anything")


def test_input_rejected_before_first_prompt():
    ms = script(EmitStep(b"thinking...\n", quiesce=False), ExpectInput("x"))
    session = make(ms)
    assert session.state.phase == "starting"
    with pytest.raises(WrongStateError):
        session.send_input("x")


def test_replay_mismatch():
    session = make(SIMPLE)
    with pytest.raises(ReplayMismatchError):
        session.send_input("2+2;")
    # session stays usable at the same prompt
    assert session.state.phase == "at_prompt"
    session.send_input("1+1;")


def test_question_flow_with_yes_no_answers():
    ms = script(
        EmitStep(b"REDUCE 3.7, today\n1: ", quiesce=True),
        ExpectInput(r"df\(f\(x\),x\);", example="df(f(x),x);"),
        EmitStep(b"Declare f operator ? ", quiesce=True),
        ExpectInput("y", example="y"),
        EmitStep(math(b"1") + b"\n2: ", quiesce=True),
        ExpectInput("bye;", example="bye;"),
        EmitStep(b"The end\n", quiesce=False),
        profile="reduce",
    )
    session = make(ms)
    session.send_input("df(f(x),x);")
    assert session.state.phase == "awaiting_answer"
    question = events_of_kind(session, "question")[0]
    assert question.payload["kind"] == "yes_no"
    assert question.payload["answers"] == ["y", "n"]
    assert question.payload["label"] == "declare-operator"
    with pytest.raises(InvalidAnswerError):
        session.send_input("maybe")
    session.send_input("y")
    session.send_input("bye;")
    assert session.state.end_reason == "end_marker"


def test_aux_prompt_payload_and_state():
    ms = script(
        EmitStep(b"Maxima 5.6\n(C1) "),
        ExpectInput("f;", example="f;"),
        EmitStep(b"error\n(dbm:1) "),
        ExpectInput(":q", example=":q"),
        EmitStep(b"(C2) "),
        ExpectInput("q;", example="q;"),
        EmitStep(b"The end\n", quiesce=False),
    )
    session = make(ms)
    session.send_input("f;")
    aux = events_of_kind(session, "aux_prompt")[0]
    assert aux.payload == {"label": "1", "kind": "debugger", "text": "(dbm:1) "}
    assert session.state.phase == "at_prompt"
    assert session.state.prompt_kind == "debugger"
    session.send_input(":q")
    session.send_input("q;")


def test_plot_event_payload_has_path():
    ms = script(
        EmitStep(b"MuPAD 2.0.0\n>> ", quiesce=True),
        ExpectInput("plot;", example="plot;"),
        EmitStep(
            b"Warning: Dumb terminal: Plot data saved in binary file f.mp\n>> ",
        ),
        ExpectInput("quit;", example="quit;"),
        EmitStep(b"The end\n", quiesce=False),
        profile="mupad",
    )
    session = make(ms)
    session.send_input("plot;")
    plot = events_of_kind(session, "plot_event")[0]
    assert plot.payload["path"] == "f.mp"
    assert "Plot data saved" in plot.payload["text"]
    session.send_input("quit;")


def test_terminate_emits_synthetic_end_once():
    session = make(SIMPLE)
    session.terminate()
    assert session.state.phase == "ended"
    ends = events_of_kind(session, "session_end")
    assert len(ends) == 1
    assert ends[0].payload == {"reason": "terminated"}
    session.terminate()  # idempotent
    assert len(events_of_kind(session, "session_end")) == 1


def test_poll_events_after_seq():
    session = make(SIMPLE)
    head = session.poll_events()
    assert [e.seq for e in head] == [0, 1]
    session.send_input("1+1;")
    tail = session.poll_events(after_seq=head[-1].seq)
    assert tail
    assert all(e.seq > head[-1].seq for e in tail)


def test_listener_fires_on_new_events():
    session = make(SIMPLE)
    pokes = []
    session.add_listener(lambda: pokes.append(len(session.events)))
    session.send_input("1+1;")
    assert pokes, "listener never fired"


def test_client_input_is_echoed_as_event():
    session = make(SIMPLE)
    session.send_input("1+1;")
    echo = events_of_kind(session, "client_input")[0]
    assert echo.payload == {"text": "1+1;"}


def test_state_snapshot_shapes():
    session = make(SIMPLE)
    assert session.state.snapshot() == {"phase": "at_prompt", "label": "C1"}
    session.send_input("1+1;")
    session.send_input("quit();")
    assert session.state.snapshot() == {"phase": "ended", "reason": "end_marker"}


def test_corpus_sessions_end_properly(all_corpus_sessions):
    for name, session in all_corpus_sessions.items():
        assert session.state.phase == "ended", name
        ends = events_of_kind(session, "session_end")
        assert len(ends) == 1, name
        assert session.events[-1].kind == "session_end", name
