"""Shared plumbing for the test suite."""

from __future__ import annotations

from pathlib import Path

from casbridge.corpus import find_corpus, load_script, replay_inputs
from casbridge.session import Session, SessionRegistry

REPO_ROOT = Path(__file__).resolve().parents[1]
CORPUS_DIR = REPO_ROOT / "corpus"
GOLDEN_DIR = Path(__file__).resolve().parent / "goldens"


def drive_replay(name: str, clock=lambda: 0.0) -> Session:
    """Replay a corpus to completion, sending every scripted input."""
    script = load_script(find_corpus(name, CORPUS_DIR))
    registry = SessionRegistry(clock=clock)
    session = registry.create(script.profile, mode="replay", script=script)
    for text in replay_inputs(script):
        session.send_input(text)
    assert session.state.phase == "ended", session.state
    return session


def kinds_of(session: Session) -> list[str]:
    return [event.kind for event in session.events]


def events_of_kind(session: Session, kind: str):
    return [event for event in session.events if event.kind == kind]


def golden_text(relpath: str) -> str:
    return (GOLDEN_DIR / relpath).read_text(encoding="utf-8")


def golden_bytes(relpath: str) -> bytes:
    return (GOLDEN_DIR / relpath).read_bytes()
