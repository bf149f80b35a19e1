"""Paraphrase prompt construction, reply parsing, and generation retries."""

import re

import pytest

from paraprobe.clients import FlakyTextGenClient, ScriptedTextGenClient
from paraprobe.errors import GenerationError, NumberedListParseError
from paraprobe.ingest import Example
from paraprobe.paraphrase import (
    GenConfig,
    ParaphraseSet,
    build_prompt,
    generate_paraphrases,
    parse_numbered_list,
    prompt_template,
)


def make_example(**overrides) -> Example:
    fields = dict(
        id="ex-0",
        db_id="concerts",
        question="How many singers do we have?",
        context_turns=(),
        gold_sql="SELECT count(*) FROM singer",
        schema_text="CREATE TABLE singer (singer_id INTEGER, name TEXT)",
    )
    fields.update(overrides)
    return Example(**fields)


# -- prompt construction -------------------------------------------------------


def test_template_has_exactly_three_placeholder_names():
    placeholders = set(re.findall(r"\{([a-z_]+)\}", prompt_template()))
    assert placeholders == {"num_queries", "schema_definitions", "sql_query"}


def test_built_prompt_is_template_with_placeholders_substituted():
    example = make_example()
    config = GenConfig(num_queries=10)
    expected = (
        prompt_template()
        .replace("{num_queries}", "10")
        .replace("{schema_definitions}", example.schema_text)
        .replace("{sql_query}", example.gold_sql)
    )
    assert build_prompt(example, config) == expected


def test_built_prompt_preserves_template_text_outside_placeholders():
    prompt = build_prompt(make_example(), GenConfig(num_queries=3))
    # splitting the template on its placeholders leaves literal segments that
    # must appear in the built prompt verbatim and in order
    segments = re.split(r"\{(?:num_queries|schema_definitions|sql_query)\}",
                        prompt_template())
    position = 0
    for segment in segments:
        found = prompt.find(segment, position)
        assert found >= position, f"template segment missing: {segment!r}"
        position = found + len(segment)


def test_dialogue_context_prepended_to_schema_block():
    example = make_example(context_turns=("Show all singers.", "Only UK ones."))
    prompt = build_prompt(example, GenConfig(num_queries=2))
    block = "Dialogue context:\nShow all singers.\nOnly UK ones.\n\n" + make_example().schema_text
    assert block in prompt


def test_gen_config_validation():
    with pytest.raises(ValueError):
        GenConfig(num_queries=0)
    with pytest.raises(ValueError):
        GenConfig(max_attempts=0)
    with pytest.raises(ValueError):
        GenConfig(temperature=-0.5)


# -- numbered-list parsing -------------------------------------------------------


def test_parses_clean_numbered_list():
    raw = "1. First question?\n2. Second question?\n3. Third question?"
    assert parse_numbered_list(raw, expected=3) == [
        "First question?", "Second question?", "Third question?",
    ]


def test_parenthesis_numbering_and_indentation_accepted():
    raw = "  1) Alpha?\n  2) Beta?"
    assert parse_numbered_list(raw, expected=2) == ["Alpha?", "Beta?"]


def test_surrounding_prose_tolerated():
    raw = "Sure, here you go:\n1. Alpha?\n2. Beta?\nHope that helps!"
    assert parse_numbered_list(raw, expected=2) == ["Alpha?", "Beta?"]


def test_numbering_must_advance_from_one():
    raw = "3. Out of order?\n1. Alpha?\n2. Beta?\n1. Restart ignored?"
    assert parse_numbered_list(raw, expected=3) == ["Alpha?", "Beta?"]


def test_items_beyond_expected_are_dropped():
    raw = "1. Alpha?\n2. Beta?\n3. Gamma?"
    assert parse_numbered_list(raw, expected=2) == ["Alpha?", "Beta?"]


def test_no_items_raises_with_raw_reply_attached():
    with pytest.raises(NumberedListParseError) as excinfo:
        parse_numbered_list("no list in here at all", expected=4)
    assert excinfo.value.raw == "no list in here at all"


def test_expected_must_be_positive():
    with pytest.raises(ValueError):
        parse_numbered_list("1. A?", expected=0)


# -- generation with retries ------------------------------------------------------


def scripted(*responses: str) -> ScriptedTextGenClient:
    return ScriptedTextGenClient([{"match": "", "responses": list(responses)}])


def test_single_attempt_fills_request():
    client = scripted("1. Alpha?\n2. Beta?\n3. Gamma?")
    result = generate_paraphrases(make_example(), client, GenConfig(num_queries=3))
    assert isinstance(result, ParaphraseSet)
    assert result.candidates == ["Alpha?", "Beta?", "Gamma?"]
    assert result.shortfall == 0
    assert result.example_id == "ex-0"
    assert client.calls == 1


def test_parse_failure_then_success_retries():
    client = scripted("no list here", "1. Alpha?\n2. Beta?")
    result = generate_paraphrases(
        make_example(), client, GenConfig(num_queries=2, max_attempts=3)
    )
    assert result.candidates == ["Alpha?", "Beta?"]
    assert client.calls == 2


def test_shortfall_triggers_retry_and_merges_new_candidates():
    client = scripted("1. Alpha?", "1. Alpha?\n2. Beta?")
    result = generate_paraphrases(
        make_example(), client, GenConfig(num_queries=2, max_attempts=2)
    )
    assert result.candidates == ["Alpha?", "Beta?"]
    assert result.shortfall == 0


def test_duplicates_removed_case_insensitively():
    client = scripted("1. What is X?\n2. what is x?\n3. Truly new?")
    result = generate_paraphrases(
        make_example(), client, GenConfig(num_queries=3, max_attempts=1)
    )
    assert result.candidates == ["What is X?", "Truly new?"]
    assert result.shortfall == 1


def test_persistent_shortfall_reported_not_fatal():
    client = scripted("1. Only one?")
    result = generate_paraphrases(
        make_example(), client, GenConfig(num_queries=4, max_attempts=2)
    )
    assert result.candidates == ["Only one?"]
    assert result.shortfall == 3
    assert client.calls == 2


def test_transport_failures_retried_then_fatal():
    inner = scripted("1. Alpha?")
    client = FlakyTextGenClient(inner, failures=1)
    result = generate_paraphrases(
        make_example(), client, GenConfig(num_queries=1, max_attempts=2)
    )
    assert result.candidates == ["Alpha?"]

    hopeless = FlakyTextGenClient(scripted("1. Alpha?"), failures=5)
    with pytest.raises(GenerationError):
        generate_paraphrases(
            make_example(), hopeless, GenConfig(num_queries=1, max_attempts=2)
        )


def test_stops_calling_once_request_is_filled():
    client = scripted("1. Alpha?\n2. Beta?", "1. Never requested?")
    generate_paraphrases(make_example(), client, GenConfig(num_queries=2, max_attempts=3))
    assert client.calls == 1


def test_generator_model_recorded():
    client = ScriptedTextGenClient(
        [{"match": "", "response": "1. Alpha?"}], model_id="gen-7b"
    )
    result = generate_paraphrases(make_example(), client, GenConfig(num_queries=1))
    assert result.generator_model == "gen-7b"
