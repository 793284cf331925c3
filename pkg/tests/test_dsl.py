import pytest

from personaforge.dsl import (
    export_interchange,
    import_interchange,
    load_workspace,
    parse_agent,
    parse_configuration,
    parse_mapping_file,
    parse_profile,
    serialize,
    serialize_mapping_file,
)
from personaforge.errors import UnsupportedVersionError

from conftest import GYM_WORKSPACE


def test_gym_agent_parses(gym_agent):
    assert gym_agent.id == "gym"
    assert gym_agent.name == "Gym Assistant"
    assert gym_agent.language == "en"
    assert len(gym_agent.states) == 5
    assert len(gym_agent.intents) == 3
    assert gym_agent.initial_state == "Greeting"


def test_empty_agent_source():
    result = parse_agent("")
    assert result.model is None
    assert any("expected 'agent' header" in d.message for d in result.errors)


def test_duplicate_state_reported_at_second_declaration():
    source = (
        "agent a {\n"
        "  state Idle initial {\n"
        "  }\n"
        "  state Idle {\n"
        "  }\n"
        "}\n"
    )
    result = parse_agent(source, "dup.agent")
    assert result.model is None
    diagnostic = next(d for d in result.errors if "duplicate state id" in d.message)
    assert diagnostic.span.line == 4
    assert diagnostic.span.file == "dup.agent"


def test_agent_without_initial_state_is_an_error():
    result = parse_agent("agent a {\n  state S {\n  }\n}\n")
    assert result.model is None
    assert any("initial" in d.message for d in result.errors)


def test_syntax_error_span_is_on_the_offending_line():
    source = 'agent a {\n  state S initial {\n    say 42\n  }\n}\n'
    result = parse_agent(source)
    assert result.model is None
    assert result.errors[0].span.line == 3


def test_unterminated_string_is_a_lexical_error():
    result = parse_agent('agent a {\n  state S initial {\n    say "oops\n  }\n}\n')
    assert result.model is None
    assert "unterminated string" in result.errors[0].message


def test_paraplegic_profile_fixture():
    source = (GYM_WORKSPACE / "paraplegic.uprof").read_text()
    result = parse_profile(source)
    assert result.ok
    profile = result.model
    assert len(profile.abilities) == 1
    ability = profile.abilities[0]
    assert ability.kind == "physical"
    assert ability.affected_capabilities == ("lower_body",)
    assert ability.excludes_content == ("lower_body",)


def test_elderly_profile_fixture():
    source = (GYM_WORKSPACE / "elderly.uprof").read_text()
    result = parse_profile(source)
    assert result.ok
    profile = result.model
    assert profile.age_group == "elderly"
    assert profile.native_language == "fr"
    preferences = {p.key: p.value for p in profile.preferences}
    assert preferences == {"interaction": "oral", "formality": "formal"}


def test_malformed_language_tag():
    result = parse_profile('profile p {\n  native_language = "12"\n}\n')
    assert result.model is None
    assert any("malformed language tag" in d.message for d in result.errors)


def test_ability_without_affected_capabilities():
    source = (
        "profile p {\n"
        "  ability a {\n"
        "    kind = physical\n"
        "  }\n"
        "}\n"
    )
    result = parse_profile(source)
    assert result.model is None


def test_elderly_configuration_fixture():
    source = (GYM_WORKSPACE / "elderly_conf.aconf").read_text()
    result = parse_configuration(source)
    assert result.ok
    config = result.model
    assert config.presentation.language_complexity == "simple"
    assert config.modality.input == ("speech",)
    assert config.modality.output == ("speech",)
    assert config.content.adapt_to_user_profile is True
    assert config.behavior.response_timing == "simulated_typing"


def test_speech_output_requires_text2speech():
    source = (
        "config c {\n"
        "  modality {\n"
        "    output = [speech]\n"
        "  }\n"
        "}\n"
    )
    result = parse_configuration(source)
    assert result.model is None
    assert any("text2speech" in d.message for d in result.errors)


def test_verify_requires_adapt():
    source = (
        "config c {\n"
        "  content {\n"
        "    verify_with_second_llm = true\n"
        "  }\n"
        "}\n"
    )
    result = parse_configuration(source)
    assert result.model is None


def test_minimal_configuration_is_valid():
    result = parse_configuration("config minimal {\n}\n")
    assert result.ok
    config = result.model
    assert config.presentation.style == "unchanged"
    assert config.modality.input == ("text",)
    assert config.content.adapt_to_user_profile is False


def test_voice_speed_range_checked():
    source = (
        "config c {\n"
        "  presentation {\n"
        "    voice_speed = 3.5\n"
        "  }\n"
        "}\n"
    )
    result = parse_configuration(source)
    assert result.model is None


def test_mapping_file_round_trip(gym_workspace):
    text = serialize_mapping_file(gym_workspace.mappings)
    result = parse_mapping_file(text)
    assert result.ok
    assert result.model == tuple(gym_workspace.mappings)


def test_mapping_missing_key():
    result = parse_mapping_file("map {\n  user_profile = p\n  agent = a\n}\n")
    assert result.model is None


def test_serialize_round_trips_fixtures(gym_workspace, gym_agent):
    assert parse_agent(serialize(gym_agent)).model == gym_agent
    for profile in gym_workspace.profiles.values():
        assert parse_profile(serialize(profile)).model == profile
    for config in gym_workspace.configurations.values():
        assert parse_configuration(serialize(config)).model == config


def test_serialize_is_deterministic(gym_agent):
    assert serialize(gym_agent) == serialize(gym_agent)


def test_interchange_round_trip(gym_workspace):
    document = export_interchange(gym_workspace)
    assert '"schema_version": "1"' in document
    loaded = import_interchange(document)
    assert loaded.profiles == gym_workspace.profiles
    assert loaded.agents == gym_workspace.agents
    assert loaded.configurations == gym_workspace.configurations
    assert loaded.mappings == gym_workspace.mappings
    # running-example counts
    assert len(loaded.profiles) == 2
    assert len(loaded.agents) == 1
    assert len(loaded.configurations) == 2
    assert len(loaded.mappings) == 2


def test_interchange_empty_workspace():
    from personaforge.model import ModelWorkspace

    document = export_interchange(ModelWorkspace())
    loaded = import_interchange(document)
    assert not loaded.profiles and not loaded.agents
    assert not loaded.configurations and not loaded.mappings


def test_interchange_rejects_unknown_schema():
    with pytest.raises(UnsupportedVersionError):
        import_interchange('{"schema_version": "99"}')


def test_load_workspace_skips_derived_files(tmp_path):
    for name in ("gym.agent", "elderly.uprof", "elderly_conf.aconf", "mappings.map"):
        (tmp_path / name).write_text((GYM_WORKSPACE / name).read_text())
    (tmp_path / "gym.elderly.agent").write_text((GYM_WORKSPACE / "gym.agent").read_text())
    workspace, diagnostics = load_workspace(tmp_path)
    assert not diagnostics
    assert list(workspace.agents) == ["gym"]


def test_load_workspace_missing_directory(tmp_path):
    workspace, diagnostics = load_workspace(tmp_path / "nope")
    assert diagnostics and diagnostics[0].severity == "error"
