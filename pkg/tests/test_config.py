import json

import pytest

from ellax.biorth import ArgumentPoint
from ellax.config import (ConfigError, RunConfig, case_configs, deep_merge, dump_point, load_raw, parse_complex,
                          parse_point, suite_raw)


def test_parse_complex_forms():
    assert parse_complex(0.5) == 0.5
    assert parse_complex("0.3-0.2i") == 0.3 - 0.2j
    assert parse_complex({"re": 1, "im": -2}) == 1 - 2j
    for bad in (True, "x", {"a": 1}, None):
        with pytest.raises(ConfigError):
            parse_complex(bad)


def test_points_round_trip():
    pt = parse_point({"kind": "hatted", "value": "0.5+0.1j"})
    assert pt == ArgumentPoint(0.5 + 0.1j, True)
    assert parse_point(dump_point(pt)) == pt
    assert not parse_point(0.3).hatted
    with pytest.raises(ConfigError):
        parse_point({"kind": "curly", "value": 1})


def test_autobalance_on_load():
    cfg = RunConfig.from_dict({"p": 0.05, "q": 0.08, "m": 0, "n": 1, "u": [0.4, 0.5, 0.45, -0.35, 0.3]})
    assert len(cfg.u) == 6
    cfg.params()
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"p": 0.05, "q": 0.08, "m": 0, "n": 1, "u": [0.4]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"p": 0.05, "m": 0, "n": 1, "u": []})


def test_deep_merge_replaces_points():
    base = {"v": {"kind": "plain", "value": 1}, "quadrature": {"N": 1, "refine": 2}}
    out = deep_merge(base, {"v": {"value": 3}, "quadrature": {"N": 5}})
    assert out["v"] == {"value": 3}
    assert out["quadrature"] == {"N": 5, "refine": 2}


def test_bundled_default_has_every_suite():
    raw = load_raw(None)
    assert abs(parse_complex(raw["p"]) - 0.05) < 1e-15
    for suite in ("beta", "selberg", "biorth", "pluecker", "lax-A", "lax-B", "isomono", "transform97"):
        for cfg in case_configs(raw, suite):
            cfg.params()
    assert len(case_configs(raw, "transform97")) == 3
    assert suite_raw(raw, "selberg")["n"] == 2


def test_seed_override_and_labels():
    raw = load_raw("default")
    cases = case_configs(raw, "lax-A", seed=9)
    assert [c.label for c in cases] == ["m1n0", "m1n1"]
    assert all(c.seed == 9 for c in cases)


def test_echo_is_json(tmp_path):
    cfg = case_configs(load_raw(None), "lax-B")[0]
    json.dumps(cfg.echo())
    path = tmp_path / "c.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_raw(path)
    path.write_text("{oops")
    with pytest.raises(ConfigError):
        load_raw(path)
    with pytest.raises(ConfigError):
        load_raw(tmp_path / "missing.json")
