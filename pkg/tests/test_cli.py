import json

import pytest

from ellax.cli import main
from ellax.config import load_raw


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_eval_theta_at_one(capsys, tmp_path):
    cfg = write(tmp_path, {"p": 0.1, "q": 0.2, "m": 0, "n": 1, "u": []})
    code, out, _ = run(capsys, "eval", "theta", "--config", cfg, "--z", "1,0")
    assert code == 0
    assert json.loads(out) == {"re": 0.0, "im": 0.0, "est_error": 0.0}


def test_eval_selberg_matches_closed_form(capsys):
    _, out, _ = run(capsys, "eval", "selberg")
    _, closed, _ = run(capsys, "eval", "selberg-closed")
    a, b = json.loads(out), json.loads(closed)
    assert abs(complex(a["re"], a["im"]) - complex(b["re"], b["im"])) < 1e-12
    assert a["est_error"] < 1e-12


def test_eval_gamma_pole_exits_3(capsys, tmp_path):
    cfg = write(tmp_path, {"p": 0.1, "q": 0.2})
    code, _, err = run(capsys, "eval", "gamma", "--config", cfg, "--z", str(1 / (0.1 * 0.2 ** 2)) + ",0")
    assert code == 3
    assert "p^1*q^2" in err


def test_eval_F_and_Fplus(capsys):
    code, out, _ = run(capsys, "eval", "F", "--z", "0.5,0.2")
    assert code == 0 and "re" in json.loads(out)
    code, _, _ = run(capsys, "eval", "Fplus", "--z", "1.5,0.2", "--x-kind", "hatted")
    assert code == 0
    code, _, err = run(capsys, "eval", "F")
    assert code == 2 and "--z" in err


def test_verify_beta_report(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "beta", "--out", str(out_file))
    assert code == 0
    report = json.loads(out_file.read_text())
    assert report["schema"] == "ellax-report/1"
    assert report["pass"] is True
    assert report["version"]
    assert len(report["records"]) == 21
    assert all(r["residual"] <= 1e-10 for r in report["records"])
    assert "seconds" not in report["records"][0]
    names = [r["name"] for r in report["records"]]
    assert names == sorted(names)


def test_verify_is_byte_stable(capsys, monkeypatch):
    _, first, _ = run(capsys, "verify", "pluecker")
    monkeypatch.setenv("ELLAX_THREADS", "4")
    _, second, _ = run(capsys, "verify", "pluecker")
    assert first == second


def test_timing_flag(capsys):
    _, out, _ = run(capsys, "verify", "kernel", "--timing")
    assert all("seconds" in r for r in json.loads(out)["records"])


def test_unbalanced_config_exits_2(capsys, tmp_path):
    raw = load_raw(None)
    raw["u"] = [0.4, 0.5, 0.45, -0.35, 0.3, 0.2]
    code, _, err = run(capsys, "verify", "all", "--config", write(tmp_path, raw))
    assert code == 2 and "balancing violated" in err


def test_missing_prime_points_exit_2(capsys, tmp_path):
    raw = load_raw(None)
    del raw["w_prime"]
    code, _, err = run(capsys, "verify", "lax-B", "--config", write(tmp_path, raw))
    assert code == 2 and "w_prime" in err


def test_failing_check_exits_1(capsys, tmp_path):
    raw = load_raw(None)
    raw["tolerances"] = {"gamma_p_shift": 1e-30}
    code, out, _ = run(capsys, "verify", "kernel", "--config", write(tmp_path, raw))
    report = json.loads(out)
    assert code == 1 and report["pass"] is False
    assert [r["name"] for r in report["records"] if not r["pass"]] == ["gamma_p_shift"]


def test_numeric_failure_exits_3(capsys, tmp_path):
    raw = load_raw(None)
    raw["suites"]["beta"]["quadrature"] = {"max_N": 32}
    code, out, _ = run(capsys, "verify", "beta", "--config", write(tmp_path, raw))
    assert code == 3
    assert any("AccuracyError" in r.get("error", "") for r in json.loads(out)["records"])


def test_lax_A_lists_every_special_value(capsys):
    code, out, _ = run(capsys, "verify", "lax-A")
    assert code == 0
    names = {r["name"] for r in json.loads(out)["records"]}
    for case in ("m1n0", "m1n1"):
        special = [n for n in names if n.startswith(f"{case}/A(") and not n.endswith("_rank")]
        assert len(special) == 2 * (2 * 1 + 6) + 4


def test_autobalance(capsys, tmp_path):
    raw = {"p": 0.05, "q": 0.08, "m": 0, "n": 1, "u": [0.4, 0.5, 0.45, -0.35, "0.229452656185347+0.193265306171307j"]}
    code, out, _ = run(capsys, "autobalance", "--config", write(tmp_path, raw))
    assert code == 0
    last = json.loads(out)["u"][-1]
    assert abs(abs(complex(last["re"], last["im"])) - 0.4233) < 1e-3
    raw["u"] = [0.01, 0.01, 0.02, 0.03, 0.02]
    code, _, err = run(capsys, "autobalance", "--config", write(tmp_path, raw))
    assert code == 2 and "modulus" in err
    raw["u"] = raw["u"] + [0.5]
    code, _, _ = run(capsys, "autobalance", "--config", write(tmp_path, raw))
    assert code == 2


def test_bad_config_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    code, _, err = run(capsys, "verify", "kernel", "--config", str(path))
    assert code == 2 and "invalid JSON" in err


def test_usage_errors():
    with pytest.raises(SystemExit):
        main(["verify", "nope"])
