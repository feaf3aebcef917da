"""Replay corpus files: TOML-scripted backend sessions.

A corpus file holds one MockScript:

    [meta]
    name = "maxima_session"
    profile = "maxima"
    title = "..."
    source = "..."

    [[steps]]
    emit = "...output bytes as a string (\\u0002 escapes for frames)..."
    quiesce = true        # optional, default true

    [[steps]]
    expect_input = "diff(%,x);"     # literal match
    # or: expect_pattern = "regex"  # full-match regex

Corpus files are looked up by name (without .toml) in, in order: an
explicit directory argument, $CASBRIDGE_CORPUS_DIR, ./corpus relative to
the working directory, and the corpus/ directory next to a source checkout.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from casbridge.session import EmitStep, ExpectInput, MockScript

ENV_CORPUS_DIR = "CASBRIDGE_CORPUS_DIR"


class CorpusError(ValueError):
    pass


def load_script(path: str | Path) -> MockScript:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise CorpusError(f"{path}: not valid TOML: {exc}") from exc
    except OSError as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    meta = data.get("meta")
    if not isinstance(meta, dict):
        raise CorpusError(f"{path}: missing [meta] table")
    profile = meta.get("profile")
    if not isinstance(profile, str) or not profile:
        raise CorpusError(f"{path}: meta.profile must name a backend profile")
    name = meta.get("name", path.stem)
    raw_steps = data.get("steps")
    if not isinstance(raw_steps, list) or not raw_steps:
        raise CorpusError(f"{path}: needs a nonempty [[steps]] list")
    steps: list = []
    for i, entry in enumerate(raw_steps):
        where = f"{path}: steps[{i}]"
        if not isinstance(entry, dict):
            raise CorpusError(f"{where}: not a table")
        keys = {"emit", "expect_input", "expect_pattern"} & entry.keys()
        if len(keys) != 1:
            raise CorpusError(
                f"{where}: needs exactly one of emit/expect_input/expect_pattern"
            )
        if "emit" in entry:
            text = entry["emit"]
            if not isinstance(text, str):
                raise CorpusError(f"{where}: emit must be a string")
            quiesce = entry.get("quiesce", True)
            if not isinstance(quiesce, bool):
                raise CorpusError(f"{where}: quiesce must be a boolean")
            steps.append(EmitStep(text.encode("utf-8"), quiesce))
        else:
            if "expect_input" in entry:
                literal = entry["expect_input"]
                if not isinstance(literal, str):
                    raise CorpusError(f"{where}: expect_input must be a string")
                steps.append(ExpectInput(re.escape(literal), example=literal))
            else:
                pattern = entry["expect_pattern"]
                if not isinstance(pattern, str):
                    raise CorpusError(f"{where}: expect_pattern must be a string")
                try:
                    re.compile(pattern)
                except re.error as exc:
                    raise CorpusError(f"{where}: bad regex: {exc}") from exc
                steps.append(ExpectInput(pattern))
    return MockScript(
        name=name,
        profile=profile,
        steps=tuple(steps),
        title=meta.get("title", ""),
        source=meta.get("source", ""),
    )


def replay_inputs(script: MockScript) -> list[str]:
    """The inputs a conforming client sends, in order.

    Only usable when every expect step was written as a literal; pattern
    steps carry no example input.
    """
    out: list[str] = []
    for step in script.steps:
        if isinstance(step, ExpectInput):
            if not step.example:
                raise CorpusError(
                    f"script {script.name!r} has a pattern step; cannot self-drive"
                )
            out.append(step.example)
    return out


def corpus_search_dirs(explicit: str | Path | None = None) -> list[Path]:
    dirs: list[Path] = []
    if explicit is not None:
        dirs.append(Path(explicit))
    env = os.environ.get(ENV_CORPUS_DIR)
    if env:
        dirs.append(Path(env))
    dirs.append(Path.cwd() / "corpus")
    # src/casbridge/corpus.py -> repo root -> corpus/
    dirs.append(Path(__file__).resolve().parents[2] / "corpus")
    seen: set[Path] = set()
    unique: list[Path] = []
    for d in dirs:
        key = d.resolve()
        if key not in seen:
            seen.add(key)
            unique.append(d)
    return unique


def find_corpus(name: str, directory: str | Path | None = None) -> Path:
    """Resolve a corpus name (or direct path) to a file."""
    direct = Path(name)
    if direct.suffix == ".toml" and direct.exists():
        return direct
    tried = []
    for d in corpus_search_dirs(directory):
        candidate = d / f"{name}.toml"
        tried.append(str(candidate))
        if candidate.exists():
            return candidate
    raise CorpusError(f"no corpus named {name!r}; tried {', '.join(tried)}")


def list_corpora(directory: str | Path | None = None) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for d in corpus_search_dirs(directory):
        if not d.is_dir():
            continue
        for path in sorted(d.glob("*.toml")):
            found.setdefault(path.stem, path)
    return found
