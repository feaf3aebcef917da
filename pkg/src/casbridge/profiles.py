"""Backend profiles: the prompt grammar of each supported CAS REPL.

A profile tells the segmenter how to recognize the things a backend prints
that are not ordinary output: input prompts, auxiliary prompts (debugger,
continuation), interactive questions, plot notifications, banners, and the
end-of-session marker.  Profiles load from a small TOML config and the
built-in set can be dumped back out, edited, and reloaded; ``load after
dump`` reproduces the registry exactly.

Classification precedence for one line of text is fixed:
end marker, then aux prompt, then input prompt, then question, then plot
event, then plain text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

QUESTION_KINDS = ("yes_no", "menu", "free_text")

AUX_KINDS = ("debugger", "continuation")


class ProfileError(ValueError):
    """Malformed profile config."""


@dataclass(frozen=True)
class QuestionRule:
    pattern: str
    kind: str
    label: str
    # yes_no only: the exact inputs a client may send back.
    answers: tuple[str, ...] = ()


@dataclass(frozen=True)
class AuxPromptRule:
    pattern: str
    kind: str


@dataclass(frozen=True)
class BackendProfile:
    name: str
    command: str
    banner_pattern: str
    input_prompt: str
    aux_prompts: tuple[AuxPromptRule, ...] = ()
    question_rules: tuple[QuestionRule, ...] = ()
    plot_patterns: tuple[str, ...] = ()
    end_markers: tuple[str, ...] = ()
    use_pty: bool = False
    quiescence_ms: int = 50


@dataclass(frozen=True)
class Classification:
    kind: str  # end_marker | aux_prompt | input_prompt | question | plot_event | plain
    label: str = ""
    aux_kind: str = ""
    rule: QuestionRule | None = None


@lru_cache(maxsize=512)
def _compiled(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern)


def _label_from(match: re.Match[str]) -> str:
    groups = match.groupdict()
    if "label" in groups and groups["label"] is not None:
        return groups["label"]
    if match.lastindex:
        return match.group(1) or ""
    return match.group(0)


def classify_line(profile: BackendProfile, text: str) -> Classification:
    """Classify one line of backend output (without its newline).

    Prompt and question kinds are only *candidates* here; whether they
    stand depends on stream quiescence, which the segmenter tracks.
    """
    for pattern in profile.end_markers:
        if _compiled(pattern).fullmatch(text):
            return Classification("end_marker")
    for rule in profile.aux_prompts:
        m = _compiled(rule.pattern).fullmatch(text)
        if m:
            return Classification("aux_prompt", label=_label_from(m), aux_kind=rule.kind)
    m = _compiled(profile.input_prompt).fullmatch(text)
    if m:
        return Classification("input_prompt", label=_label_from(m))
    for rule in profile.question_rules:
        if _compiled(rule.pattern).fullmatch(text):
            return Classification("question", rule=rule)
    for pattern in profile.plot_patterns:
        m = _compiled(pattern).search(text)
        if m:
            groups = m.groupdict()
            return Classification("plot_event", label=groups.get("path", "") or "")
    return Classification("plain")


# ---------------------------------------------------------------------------
# Built-in profiles

BUILTIN_CONFIG = r"""
[profiles.maxima]
command = "maxima"
banner_pattern = 'Maxima \d+\.\d+'
input_prompt = '^\((C\d+)\) $'
end_markers = ['^The end$']
plot_patterns = []
use_pty = false
quiescence_ms = 50

[[profiles.maxima.aux_prompts]]
pattern = '^\(dbm:(\d+)\) $'
kind = "debugger"

[[profiles.maxima.question_rules]]
pattern = '^Is\s+.+\s+(?:positive or negative|positive, negative, or zero)\?$'
kind = "free_text"
label = "sign"

[[profiles.maxima.question_rules]]
pattern = '^Answer \d+(?:, \d+)* or \d+ : $'
kind = "menu"
label = "menu"

[[profiles.maxima.question_rules]]
pattern = '^Row \d+ Column \d+: $'
kind = "free_text"
label = "matrix-entry"

[profiles.mupad]
command = "mupad"
banner_pattern = 'MuPAD \d+\.\d+'
input_prompt = '^(>>) $'
end_markers = ['^The end$']
plot_patterns = ['Plot data saved in binary file (?P<path>\S+)']
use_pty = false
quiescence_ms = 50

[profiles.reduce]
command = "reduce"
banner_pattern = 'REDUCE \d+\.\d+'
input_prompt = '^(\d+): $'
end_markers = ['^The end$']
plot_patterns = []
use_pty = false
quiescence_ms = 50

[[profiles.reduce.question_rules]]
pattern = '^Declare .+ operator \? $'
kind = "yes_no"
label = "declare-operator"
answers = ["y", "n"]
"""


def _require(table: dict, key: str, where: str) -> object:
    if key not in table:
        raise ProfileError(f"{where}: missing {key!r}")
    return table[key]


def _check_pattern(pattern: object, where: str) -> str:
    if not isinstance(pattern, str) or not pattern:
        raise ProfileError(f"{where}: pattern must be a nonempty string")
    try:
        re.compile(pattern)
    except re.error as exc:
        raise ProfileError(f"{where}: bad regex {pattern!r}: {exc}") from exc
    return pattern


def _str_list(value: object, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise ProfileError(f"{where}: expected a list of strings")
    return tuple(value)


def _parse_profile(name: str, table: dict) -> BackendProfile:
    where = f"profile {name!r}"
    command = _require(table, "command", where)
    if not isinstance(command, str):
        raise ProfileError(f"{where}: command must be a string")
    banner = _check_pattern(_require(table, "banner_pattern", where), where)
    prompt = _check_pattern(_require(table, "input_prompt", where), where)

    aux: list[AuxPromptRule] = []
    for i, entry in enumerate(table.get("aux_prompts", [])):
        w = f"{where} aux_prompts[{i}]"
        pattern = _check_pattern(_require(entry, "pattern", w), w)
        kind = _require(entry, "kind", w)
        if kind not in AUX_KINDS:
            raise ProfileError(f"{w}: unknown aux prompt kind {kind!r}")
        aux.append(AuxPromptRule(pattern, kind))

    questions: list[QuestionRule] = []
    for i, entry in enumerate(table.get("question_rules", [])):
        w = f"{where} question_rules[{i}]"
        pattern = _check_pattern(_require(entry, "pattern", w), w)
        kind = _require(entry, "kind", w)
        if kind not in QUESTION_KINDS:
            raise ProfileError(f"{w}: unknown question kind {kind!r}")
        label = entry.get("label", "")
        if not isinstance(label, str):
            raise ProfileError(f"{w}: label must be a string")
        answers = _str_list(entry.get("answers", []), w)
        if kind == "yes_no" and not answers:
            raise ProfileError(f"{w}: yes_no rule needs an answers list")
        questions.append(QuestionRule(pattern, kind, label, answers))

    plots = tuple(
        _check_pattern(p, f"{where} plot_patterns")
        for p in _str_list(table.get("plot_patterns", []), where)
    )
    ends = tuple(
        _check_pattern(p, f"{where} end_markers")
        for p in _str_list(table.get("end_markers", []), where)
    )

    use_pty = table.get("use_pty", False)
    if not isinstance(use_pty, bool):
        raise ProfileError(f"{where}: use_pty must be a boolean")
    quiescence = table.get("quiescence_ms", 50)
    if not isinstance(quiescence, int) or quiescence <= 0:
        raise ProfileError(f"{where}: quiescence_ms must be a positive integer")

    return BackendProfile(
        name=name,
        command=command,
        banner_pattern=banner,
        input_prompt=prompt,
        aux_prompts=tuple(aux),
        question_rules=tuple(questions),
        plot_patterns=plots,
        end_markers=ends,
        use_pty=use_pty,
        quiescence_ms=quiescence,
    )


def load_profiles(source: str | Path | None = None) -> dict[str, BackendProfile]:
    """Load a profile registry from TOML text or a file path.

    With no argument, returns the built-in registry.
    """
    if source is None:
        text = BUILTIN_CONFIG
    elif isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    else:
        text = source
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProfileError(f"config is not valid TOML: {exc}") from exc
    tables = data.get("profiles")
    if not isinstance(tables, dict) or not tables:
        raise ProfileError("config has no [profiles.*] tables")
    registry = {}
    for name, table in tables.items():
        if not isinstance(table, dict):
            raise ProfileError(f"profile {name!r} is not a table")
        registry[name] = _parse_profile(name, table)
    return registry


def builtin_profiles() -> dict[str, BackendProfile]:
    return load_profiles(None)


def _toml_str(value: str) -> str:
    # JSON string syntax is a subset of TOML basic strings.
    return json.dumps(value)


def dump_profiles(registry: dict[str, BackendProfile]) -> str:
    """Serialize a registry to TOML that load_profiles reads back equal."""
    out: list[str] = []
    for name in sorted(registry):
        p = registry[name]
        out.append(f"[profiles.{name}]")
        out.append(f"command = {_toml_str(p.command)}")
        out.append(f"banner_pattern = {_toml_str(p.banner_pattern)}")
        out.append(f"input_prompt = {_toml_str(p.input_prompt)}")
        out.append(
            "end_markers = [" + ", ".join(_toml_str(s) for s in p.end_markers) + "]"
        )
        out.append(
            "plot_patterns = [" + ", ".join(_toml_str(s) for s in p.plot_patterns) + "]"
        )
        out.append(f"use_pty = {'true' if p.use_pty else 'false'}")
        out.append(f"quiescence_ms = {p.quiescence_ms}")
        for aux in p.aux_prompts:
            out.append("")
            out.append(f"[[profiles.{name}.aux_prompts]]")
            out.append(f"pattern = {_toml_str(aux.pattern)}")
            out.append(f"kind = {_toml_str(aux.kind)}")
        for rule in p.question_rules:
            out.append("")
            out.append(f"[[profiles.{name}.question_rules]]")
            out.append(f"pattern = {_toml_str(rule.pattern)}")
            out.append(f"kind = {_toml_str(rule.kind)}")
            out.append(f"label = {_toml_str(rule.label)}")
            if rule.answers:
                out.append(
                    "answers = [" + ", ".join(_toml_str(a) for a in rule.answers) + "]"
                )
        out.append("")
    return "\n".join(out)
