"""Backend profiles: TOML loading, classification precedence, round-trip."""

import pytest

from casbridge.profiles import (
    BackendProfile,
    ProfileError,
    builtin_profiles,
    classify_line,
    dump_profiles,
    load_profiles,
)

CUSTOM = r"""
[profiles.toycas]
command = "toycas --batch"
banner_pattern = 'ToyCAS v\d+'
input_prompt = '^(in\d+)> $'
end_markers = ['^goodbye$', '^The end$']
plot_patterns = ['saved plot to (?P<path>\S+)']
use_pty = true
quiescence_ms = 75

[[profiles.toycas.aux_prompts]]
pattern = '^\(debug\) $'
kind = "debugger"

[[profiles.toycas.question_rules]]
pattern = '^Proceed \(y or n\)\? $'
kind = "yes_no"
label = "proceed"
answers = ["y", "n"]

[[profiles.toycas.question_rules]]
pattern = '^Enter a value: $'
kind = "free_text"
label = "value"
"""


@pytest.fixture()
def toycas():
    return load_profiles(CUSTOM)["toycas"]


def test_load_custom_profile(toycas):
    assert toycas.name == "toycas"
    assert toycas.command == "toycas --batch"
    assert toycas.use_pty is True
    assert toycas.quiescence_ms == 75
    assert len(toycas.question_rules) == 2
    assert toycas.question_rules[0].answers == ("y", "n")


def test_builtin_registry_has_the_three_backends():
    registry = builtin_profiles()
    assert set(registry) >= {"maxima", "mupad", "reduce"}
    for profile in registry.values():
        assert isinstance(profile, BackendProfile)


def test_classify_input_prompt_extracts_label(toycas):
    cls = classify_line(toycas, "in7> ")
    assert cls.kind == "input_prompt"
    assert cls.label == "in7"


def test_classify_requires_fullmatch(toycas):
    assert classify_line(toycas, "in7> extra").kind == "plain"
    assert classify_line(toycas, "xin7> ").kind == "plain"


def test_classify_aux_prompt(toycas):
    cls = classify_line(toycas, "(debug) ")
    assert cls.kind == "aux_prompt"
    assert cls.aux_kind == "debugger"


def test_classify_question_carries_rule(toycas):
    cls = classify_line(toycas, "Proceed (y or n)? ")
    assert cls.kind == "question"
    assert cls.rule.kind == "yes_no"
    assert cls.rule.label == "proceed"
    assert cls.rule.answers == ("y", "n")


def test_classify_plot_event_searches_within_line(toycas):
    cls = classify_line(toycas, "note: saved plot to /tmp/p1.png (3kb)")
    assert cls.kind == "plot_event"
    assert cls.label == "/tmp/p1.png"


def test_classify_end_marker_beats_everything(toycas):
    assert classify_line(toycas, "goodbye").kind == "end_marker"
    assert classify_line(toycas, "The end").kind == "end_marker"


def test_classification_precedence_order():
    # one line that matches several rule families at once: the order is
    # end_marker, aux_prompt, input_prompt, question, plot_event, plain
    tricky = load_profiles(
        r"""
[profiles.t]
command = "t"
banner_pattern = 'T'
input_prompt = '^(ambiguous)$'
end_markers = []
plot_patterns = ['ambiguous']

[[profiles.t.aux_prompts]]
pattern = '^ambiguous$'
kind = "debugger"

[[profiles.t.question_rules]]
pattern = '^ambiguous$'
kind = "free_text"
label = "q"
"""
    )["t"]
    assert classify_line(tricky, "ambiguous").kind == "aux_prompt"


def test_classify_plain_fallback(toycas):
    assert classify_line(toycas, "just some output").kind == "plain"


def test_maxima_builtin_recognizes_its_lines():
    maxima = builtin_profiles()["maxima"]
    assert classify_line(maxima, "(C12) ").kind == "input_prompt"
    assert classify_line(maxima, "(C12) ").label == "C12"
    assert classify_line(maxima, "(dbm:1) ").kind == "aux_prompt"
    assert classify_line(maxima, "Is  a  positive or negative?").kind == "question"
    assert (
        classify_line(maxima, "Is  a  positive, negative, or zero?").kind
        == "question"
    )
    assert classify_line(maxima, "Answer 1, 2, 3 or 4 : ").kind == "question"
    assert classify_line(maxima, "Row 1 Column 1: ").kind == "question"


def test_mupad_builtin_plot_and_prompt():
    mupad = builtin_profiles()["mupad"]
    assert classify_line(mupad, ">> ").kind == "input_prompt"
    line = "Warning: Dumb terminal: Plot data saved in binary file save.mp"
    cls = classify_line(mupad, line)
    assert cls.kind == "plot_event"
    assert cls.label == "save.mp"


def test_reduce_builtin_question():
    reduce = builtin_profiles()["reduce"]
    cls = classify_line(reduce, "Declare f operator ? ")
    assert cls.kind == "question"
    assert cls.rule.kind == "yes_no"
    assert cls.rule.answers == ("y", "n")


def test_dump_load_round_trip():
    registry = builtin_profiles()
    dumped = dump_profiles(registry)
    assert load_profiles(dumped) == registry


def test_dump_load_round_trip_custom(toycas):
    registry = {"toycas": toycas}
    assert load_profiles(dump_profiles(registry)) == registry


@pytest.mark.parametrize(
    "bad, fragment",
    [
        ("not toml [", "not valid TOML"),
        ("x = 1", "no [profiles.*] tables"),
        ("[profiles.p]\ncommand = 'c'", "missing"),
        (
            "[profiles.p]\ncommand = 'c'\nbanner_pattern = '('\n"
            "input_prompt = '^x$'",
            "bad regex",
        ),
        (
            "[profiles.p]\ncommand = 'c'\nbanner_pattern = 'b'\n"
            "input_prompt = '^x$'\n[[profiles.p.question_rules]]\n"
            "pattern = '^q$'\nkind = 'multiple_choice'\nlabel = 'l'",
            "kind",
        ),
    ],
)
def test_malformed_configs_raise(bad, fragment):
    with pytest.raises(ProfileError) as err:
        load_profiles(bad)
    assert fragment in str(err.value)
