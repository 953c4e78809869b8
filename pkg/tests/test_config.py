from __future__ import annotations

import pytest

from thetastrat.config import (
    IndexMode,
    apply_overrides,
    canonical_payload,
    config_fingerprint,
    environment_default,
    load_run_config,
    parse_run_config,
)
from thetastrat.errors import ConfigError, IntegerGateError, MathPreconditionError, error_kind, exit_code_for


def vortex_payload(**extra) -> dict:
    return {
        "group": {"type": "GL1"},
        "x": [{"weight": [1]}],
        "v": [{"weight": [1]}],
        "b": [[1]],
        "chi": [2],
        "degree": [-1],
        "gamma": 1,
        **extra,
    }


def test_camel_case_payload_parses_exactly():
    config = parse_run_config(vortex_payload(dKer=["0"], levelScale=2, indexMode="adams", gamma="3/2"))

    assert config.gamma == "3/2"
    assert config.level_scale == 2
    assert config.index_mode is IndexMode.ADAMS
    assert config.x_rep().dimension == 1
    assert config.chi_vector(1) == (2,)


@pytest.mark.parametrize(
    ("changes", "message"),
    [
        ({"gamma": 1.5}, "floats are not exact"),
        ({"gamma": "1/0"}, "Not a rational"),
        ({"colour": "blue"}, "colour"),
        ({"chi": [1, 2]}, "chi must have 1 entries"),
        ({"x": [{"weight": [1, 0]}]}, "Every weight in x"),
        ({"orientation": 2}, "orientation"),
        ({"group": {}}, "group type"),
        ({"group": {"type": "E9"}}, "E9|'E'"),
    ],
)
def test_invalid_payloads_raise_config_errors(changes, message):
    with pytest.raises(ConfigError, match=message):
        parse_run_config(vortex_payload(**changes))


def test_semisimple_groups_need_invariant_characters_and_central_degrees():
    base = {"group": {"type": "A1"}, "x": [{"weight": [1]}, {"weight": [-1]}]}

    with pytest.raises(ConfigError, match="Weyl-invariant"):
        parse_run_config({**base, "chi": [1]})
    with pytest.raises(ConfigError, match="N\\^W"):
        parse_run_config({**base, "degree": [1]})
    assert parse_run_config({**base, "chi": [0], "degree": [0]}).datum().weyl_order == 2


def test_fingerprint_is_stable_and_sensitive():
    first = parse_run_config(vortex_payload())
    second = parse_run_config(vortex_payload())

    assert config_fingerprint(first) == config_fingerprint(second)
    assert len(config_fingerprint(first)) == 64
    assert config_fingerprint(first) != config_fingerprint(parse_run_config(vortex_payload(chi=[3])))
    assert canonical_payload(first)["chi"] == ["2"]


def test_toml_configuration_loads(tmp_path):
    path = tmp_path / "vortex.toml"
    path.write_text(
        'chi = [2]\ndegree = [-1]\ngamma = "1"\nb = [[1]]\n'
        'x = [{weight = [1]}]\nv = [{weight = [1], mult = 1}]\n\n'
        '[group]\ntype = "GL1"\n\n[truncation]\nt = 3\n',
        encoding="utf-8",
    )

    config = load_run_config(path)

    assert config.truncation.t == 3
    assert config.degree == ["-1"]


def test_unreadable_and_malformed_toml_are_config_errors(tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text("[group\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        load_run_config(broken)
    with pytest.raises(ConfigError, match="Cannot read"):
        load_run_config(tmp_path / "missing.toml")


def test_overrides_leave_the_original_untouched():
    config = parse_run_config(vortex_payload())

    assert apply_overrides(config, threads=None, trunc_t=None) is config
    updated = apply_overrides(config, threads=4, trunc_t=2, precision=96)
    assert (updated.threads, updated.truncation.t, updated.precision) == (4, 2, 96)
    assert config.threads == 1
    with pytest.raises(ConfigError):
        apply_overrides(config, precision=8)


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("THETASTRAT_TEST_VALUE", " 17 ")
    assert environment_default("THETASTRAT_TEST_VALUE", 3) == 17
    monkeypatch.setenv("THETASTRAT_TEST_VALUE", "")
    assert environment_default("THETASTRAT_TEST_VALUE", 3) == 3
    monkeypatch.setenv("THETASTRAT_TEST_VALUE", "many")
    with pytest.raises(ConfigError):
        environment_default("THETASTRAT_TEST_VALUE", 3)


@pytest.mark.parametrize(
    ("error", "code", "kind"),
    [
        (ConfigError("bad"), 2, "schema"),
        (MathPreconditionError("bad"), 3, "precondition"),
        (IntegerGateError("bad"), 4, "integer_gate"),
    ],
)
def test_error_exit_codes(error, code, kind):
    assert exit_code_for(error) == code
    assert error_kind(error) == kind
