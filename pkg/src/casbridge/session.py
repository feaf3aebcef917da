"""Sessions: drive a backend (scripted or live), emit a typed event log.

A session owns one segmenter and converts its segments into SessionEvents,
tracking the conversation state machine:

    starting -> at_prompt <-> computing -> awaiting_answer -> computing ...
                                 ... -> ended

Input is legal only in at_prompt and awaiting_answer.  Replay mode runs a
MockScript deterministically: emit steps feed bytes (with an explicit
quiescence marker standing in for wall-clock silence), expect steps block
until the client sends matching input.  Live mode wraps a real subprocess
and derives quiescence from a timer.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Callable

from casbridge.formula import ParseError, parse, to_mathml
from casbridge.profiles import BackendProfile, QuestionRule
from casbridge.segmenter import Segment, StreamSegmenter

EVENT_KINDS = (
    "banner",
    "input_prompt",
    "aux_prompt",
    "math",
    "plain_text",
    "question",
    "plot_event",
    "session_end",
    "client_input",
)

PHASES = ("starting", "at_prompt", "computing", "awaiting_answer", "ended")


class SessionError(Exception):
    pass


class WrongStateError(SessionError):
    """Input sent while the backend is not accepting any."""


class ReplayMismatchError(SessionError):
    """Input does not match what the script expects next."""


class InvalidAnswerError(SessionError):
    """Answer outside a question's accepted set."""


class UnknownProfileError(SessionError):
    pass


class UnknownSessionError(SessionError):
    pass


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    at: float
    kind: str
    payload: dict


@dataclass(frozen=True)
class EmitStep:
    data: bytes
    quiesce: bool = True


@dataclass(frozen=True)
class ExpectInput:
    pattern: str
    # What a conforming client would send, when the script knows it.
    # Lets tests and demos drive a replay without a human at the keyboard.
    example: str = ""


@dataclass(frozen=True)
class MockScript:
    name: str
    profile: str
    steps: tuple = ()
    title: str = ""
    source: str = ""


@dataclass
class SessionState:
    phase: str = "starting"
    prompt_label: str = ""
    prompt_kind: str = ""  # empty for the main input prompt, else the aux kind
    question: QuestionRule | None = None
    end_reason: str = ""

    def snapshot(self) -> dict:
        out: dict = {"phase": self.phase}
        if self.phase == "at_prompt":
            out["label"] = self.prompt_label
            if self.prompt_kind:
                out["kind"] = self.prompt_kind
        elif self.phase == "awaiting_answer" and self.question is not None:
            out["label"] = self.question.label
            out["kind"] = self.question.kind
        elif self.phase == "ended":
            out["reason"] = self.end_reason
        return out


def _strip_newline(text: str) -> str:
    if text.endswith("\r\n"):
        return text[:-2]
    if text.endswith("\n"):
        return text[:-1]
    return text


class Session:
    """One conversation with one backend."""

    def __init__(
        self,
        session_id: str,
        profile: BackendProfile,
        mode: str,
        script: MockScript | None = None,
        command: str | None = None,
        clock: Callable[[], float] = time.time,
    ):
        if mode not in ("replay", "live"):
            raise SessionError(f"unknown mode {mode!r}")
        if mode == "replay" and script is None:
            raise SessionError("replay mode needs a script")
        self.id = session_id
        self.profile = profile
        self.mode = mode
        self.state = SessionState()
        self.events: list[SessionEvent] = []
        self._clock = clock
        self._lock = threading.RLock()
        self._segmenter = StreamSegmenter(profile)
        self._script = script
        self._step = 0
        self._listeners: list[Callable[[], None]] = []
        self._live: _LiveBackend | None = None
        if mode == "live":
            cmd = command or profile.command
            self._live = _LiveBackend(self, cmd, profile)
        else:
            self._pump_replay()

    # -- event plumbing ----------------------------------------------------

    def add_listener(self, callback: Callable[[], None]) -> None:
        """callback() fires after new events are appended (any thread)."""
        with self._lock:
            self._listeners.append(callback)

    def _notify(self) -> None:
        for callback in list(self._listeners):
            callback()

    def _append_event(self, kind: str, payload: dict) -> None:
        event = SessionEvent(len(self.events), self._clock(), kind, payload)
        self.events.append(event)

    def _absorb_segments(self, segments: list[Segment]) -> None:
        for seg in segments:
            if seg.kind == "banner":
                self._append_event("banner", {"text": _strip_newline(seg.text)})
            elif seg.kind == "plain_text":
                self._append_event("plain_text", {"text": _strip_newline(seg.text)})
            elif seg.kind == "math":
                self._append_event("math", self._math_payload(seg.latex))
            elif seg.kind == "input_prompt":
                self.state = SessionState("at_prompt", prompt_label=seg.label)
                self._append_event(
                    "input_prompt",
                    {"label": seg.label, "text": _strip_newline(seg.text)},
                )
            elif seg.kind == "aux_prompt":
                self.state = SessionState(
                    "at_prompt", prompt_label=seg.label, prompt_kind=seg.aux_kind
                )
                self._append_event(
                    "aux_prompt",
                    {
                        "label": seg.label,
                        "kind": seg.aux_kind,
                        "text": _strip_newline(seg.text),
                    },
                )
            elif seg.kind == "question":
                rule = seg.question_rule
                assert rule is not None
                self.state = SessionState("awaiting_answer", question=rule)
                payload = {
                    "text": _strip_newline(seg.text),
                    "kind": rule.kind,
                    "label": rule.label,
                }
                if rule.answers:
                    payload["answers"] = list(rule.answers)
                self._append_event("question", payload)
            elif seg.kind == "plot_event":
                payload = {"text": _strip_newline(seg.text)}
                if seg.label:
                    payload["path"] = seg.label
                self._append_event("plot_event", payload)
            elif seg.kind == "session_end":
                self.state = SessionState("ended", end_reason="end_marker")
                self._append_event(
                    "session_end",
                    {"reason": "end_marker", "text": _strip_newline(seg.text)},
                )

    def _math_payload(self, latex: str) -> dict:
        payload: dict = {"latex": latex}
        try:
            payload["mathml"] = to_mathml(parse(latex))
        except ParseError as exc:
            payload["parse_error"] = str(exc)
        return payload

    # -- replay driving ----------------------------------------------------

    def _pump_replay(self) -> None:
        assert self._script is not None
        steps = self._script.steps
        while self.state.phase != "ended" and self._step < len(steps):
            step = steps[self._step]
            if isinstance(step, ExpectInput):
                return
            assert isinstance(step, EmitStep)
            self._segmenter.feed(step.data)
            if step.quiesce:
                self._segmenter.quiescence_tick()
            self._absorb_segments(self._segmenter.drain())
            self._step += 1
        if self._step >= len(steps):
            self._finish_stream("eof")

    def _finish_stream(self, reason: str) -> None:
        self._segmenter.close()
        self._absorb_segments(self._segmenter.drain())
        if self.state.phase != "ended":
            self.state = SessionState("ended", end_reason=reason)
            self._append_event("session_end", {"reason": reason})

    # -- client operations ---------------------------------------------------

    def send_input(self, text: str) -> None:
        with self._lock:
            state = self.state
            if state.phase not in ("at_prompt", "awaiting_answer"):
                raise WrongStateError(
                    f"session {self.id} is {state.phase}; input not accepted"
                )
            if state.phase == "awaiting_answer":
                rule = state.question
                if rule is not None and rule.kind == "yes_no" and rule.answers:
                    if text not in rule.answers:
                        raise InvalidAnswerError(
                            f"answer {text!r} not in {list(rule.answers)}"
                        )
            if self.mode == "replay":
                self._replay_input(text)
            else:
                assert self._live is not None
                self._append_event("client_input", {"text": text})
                self.state = SessionState("computing")
                self._live.send(text)
        self._notify()

    def _replay_input(self, text: str) -> None:
        assert self._script is not None
        steps = self._script.steps
        if self._step >= len(steps):
            raise ReplayMismatchError("script has no further input step")
        step = steps[self._step]
        if not isinstance(step, ExpectInput):
            raise ReplayMismatchError("script is not expecting input here")
        if not re.fullmatch(step.pattern, text):
            raise ReplayMismatchError(
                f"input {text!r} does not match expected {step.pattern!r}"
            )
        self._append_event("client_input", {"text": text})
        self.state = SessionState("computing")
        self._step += 1
        self._pump_replay()

    def poll_events(self, after_seq: int = -1) -> list[SessionEvent]:
        """Events with seq greater than after_seq.  Never blocks."""
        with self._lock:
            return [e for e in self.events if e.seq > after_seq]

    def terminate(self) -> None:
        with self._lock:
            if self.state.phase == "ended":
                return
            if self._live is not None:
                self._live.stop()
            self._segmenter.close()
            self._absorb_segments(self._segmenter.drain())
            if self.state.phase != "ended":
                self.state = SessionState("ended", end_reason="terminated")
                self._append_event("session_end", {"reason": "terminated"})
        self._notify()

    # -- live-mode hooks (called from backend threads) -----------------------

    def _live_data(self, data: bytes) -> None:
        with self._lock:
            if self.state.phase == "ended":
                return
            self._segmenter.feed(data)
            self._absorb_segments(self._segmenter.drain())
        self._notify()

    def _live_tick(self) -> None:
        with self._lock:
            if self.state.phase == "ended":
                return
            self._segmenter.quiescence_tick()
            self._absorb_segments(self._segmenter.drain())
        self._notify()

    def _live_eof(self) -> None:
        with self._lock:
            if self.state.phase == "ended":
                return
            self._finish_stream("eof")
        self._notify()


class _LiveBackend:
    """Subprocess wrapper: reader thread plus a quiescence timer thread."""

    def __init__(self, session: Session, command: str, profile: BackendProfile):
        self.session = session
        self.profile = profile
        self._stop = threading.Event()
        self._last_data = time.monotonic()
        self._tick_sent = True
        argv = shlex.split(command)
        if profile.use_pty:
            import pty

            self._master, slave = pty.openpty()
            self.proc = subprocess.Popen(
                argv, stdin=slave, stdout=slave, stderr=slave, close_fds=True
            )
            os.close(slave)
            self._write_fd = self._master
        else:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
            )
            self._master = self.proc.stdout.fileno()
            self._write_fd = None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._timer = threading.Thread(target=self._tick_loop, daemon=True)
        self._reader.start()
        self._timer.start()

    def _read_loop(self) -> None:
        while not self._stop.is_set():
            try:
                data = os.read(self._master, 4096)
            except OSError:
                break
            if not data:
                break
            self._last_data = time.monotonic()
            self._tick_sent = False
            self.session._live_data(data)
        if not self._stop.is_set():
            self.session._live_eof()

    def _tick_loop(self) -> None:
        interval = self.profile.quiescence_ms / 1000.0
        while not self._stop.is_set():
            time.sleep(interval / 4)
            if self._tick_sent:
                continue
            if time.monotonic() - self._last_data >= interval:
                self._tick_sent = True
                self.session._live_tick()

    def send(self, text: str) -> None:
        data = (text + "\n").encode("utf-8")
        if self._write_fd is not None:
            os.write(self._write_fd, data)
        else:
            assert self.proc.stdin is not None
            self.proc.stdin.write(data)
            self.proc.stdin.flush()

    def stop(self) -> None:
        self._stop.set()
        try:
            self.proc.terminate()
            self.proc.wait(timeout=2)
        except Exception:
            self.proc.kill()
        if self._write_fd is not None:
            try:
                os.close(self._master)
            except OSError:
                pass


class SessionRegistry:
    """Creates sessions with stable ids s1, s2, ... and looks them up."""

    def __init__(
        self,
        profiles: dict[str, BackendProfile] | None = None,
        clock: Callable[[], float] = time.time,
    ):
        from casbridge.profiles import builtin_profiles

        self.profiles = profiles if profiles is not None else builtin_profiles()
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def create(
        self,
        profile_name: str,
        mode: str = "replay",
        script: MockScript | None = None,
        command: str | None = None,
    ) -> Session:
        profile = self.profiles.get(profile_name)
        if profile is None:
            raise UnknownProfileError(f"unknown profile {profile_name!r}")
        with self._lock:
            self._counter += 1
            sid = f"s{self._counter}"
        session = Session(
            sid, profile, mode, script=script, command=command, clock=self.clock
        )
        with self._lock:
            self._sessions[sid] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"no session {session_id!r}")
        return session

    def all(self) -> list[Session]:
        return list(self._sessions.values())

    def terminate_all(self) -> None:
        for session in self.all():
            session.terminate()
