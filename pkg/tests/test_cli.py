import json
import math

import pytest
from hypothesis import given, strategies as st

from levybridge import checks, cli
from levybridge.checks import CheckResult


def binary_scenario(**blocks) -> dict:
    d = {
        "kernel": {"family": "brownian"},
        "horizon": 1.0,
        "terminal_law": {"atoms": [[0.0, 0.5], [1.0, 0.5]]},
        "seed": 3,
    }
    d.update(blocks)
    return d


def write(tmp_path, payload, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


# ---------------------------------------------------------------------------
# serialization helpers


def test_dumps17_special_floats_stay_loadable():
    text = cli.dumps17({"a": math.nan, "b": math.inf, "c": -math.inf})
    back = json.loads(text)
    assert back == {"a": "nan", "b": "inf", "c": "-inf"}


def test_dumps17_rejects_unknown_types():
    with pytest.raises(TypeError):
        cli.dumps17(object())


@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_dumps17_floats_round_trip_exactly(x):
    assert float(json.loads(cli.dumps17(x))) == x


def test_paths_to_csv_layout():
    text = cli.paths_to_csv([0.5, 1.0], [[1.0, 2.0], [3.0, 4.0]])
    lines = text.strip().split("\n")
    assert lines[0] == "path_id,time,value"
    assert lines[1] == "0,0.5,1"
    assert lines[4] == "1,1,4"


# ---------------------------------------------------------------------------
# simulate


def test_simulate_writes_csv(tmp_path):
    cfg = write(tmp_path, binary_scenario(simulate={"grid": [0.5, 1.0], "n_paths": 4}))
    out = tmp_path / "paths.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "path_id,time,value"
    assert len(lines) == 1 + 4 * 2


def test_simulate_worker_count_invisible_in_output(tmp_path):
    cfg = write(tmp_path, binary_scenario(simulate={"grid": [0.5, 1.0], "n_paths": 6}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(a), "--workers", "1"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, binary_scenario(simulate={"grid": [0.5, 1.0], "n_paths": 3}))
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    cli.main(["simulate", "--config", cfg, "--out", str(a)])
    cli.main(["simulate", "--config", cfg, "--out", str(b), "--seed", "99"])
    cli.main(["simulate", "--config", cfg, "--out", str(c), "--seed", "99"])
    assert a.read_bytes() != b.read_bytes()
    assert b.read_bytes() == c.read_bytes()


def test_simulate_requires_its_block(tmp_path):
    cfg = write(tmp_path, binary_scenario())
    out = tmp_path / "x.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 1


# ---------------------------------------------------------------------------
# price


def test_price_records(tmp_path, capsys):
    cfg = write(
        tmp_path,
        binary_scenario(price={"points": [[0.0, 0.0], [0.5, 0.25]]}),
    )
    assert cli.main(["price", "--config", cfg]) == 0
    records = json.loads(capsys.readouterr().out)
    assert records[0]["psi"] == 1.0
    assert records[0]["posterior_mean"] == 0.5
    assert abs(records[1]["price"] - 0.5) < 1e-12
    # at the midpoint state both atom terms coincide: psi = sqrt(2) e^(-1/16)
    assert abs(records[1]["psi"] - math.sqrt(2.0) * math.exp(-1.0 / 16.0)) < 1e-14


def test_price_discounting_applied(tmp_path, capsys):
    cfg = write(
        tmp_path,
        binary_scenario(
            rate={"times": [0.0], "rates": [0.05]},
            price={"points": [[0.5, 0.25]]},
        ),
    )
    assert cli.main(["price", "--config", cfg]) == 0
    rec = json.loads(capsys.readouterr().out)[0]
    assert abs(rec["price"] - rec["posterior_mean"] * math.exp(-0.05 * 0.5)) < 1e-15


def test_price_unreachable_state_is_a_numeric_error(tmp_path):
    payload = {
        "kernel": {"family": "gamma", "m": 2.0},
        "horizon": 1.0,
        "terminal_law": {"atoms": [[1.0, 0.5], [2.5, 0.5]]},
        "price": {"points": [[0.5, 3.5]]},
    }
    cfg = write(tmp_path, payload)
    assert cli.main(["price", "--config", cfg]) == 2


# ---------------------------------------------------------------------------
# option


def test_option_record(tmp_path, capsys):
    cfg = write(
        tmp_path,
        binary_scenario(option={"strike": 0.5, "maturity": 0.5}),
    )
    assert cli.main(["option", "--config", cfg]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["method"] == "closed"
    assert rec["boundary"]["kind"] == "threshold"
    assert abs(rec["boundary"]["threshold"] - 0.25) < 1e-9
    assert abs(rec["price"] - 0.09573123063700656) < 1e-10


def test_option_quadrature_route(tmp_path, capsys):
    cfg = write(
        tmp_path,
        binary_scenario(option={"strike": 0.5, "maturity": 0.5, "method": "quadrature"}),
    )
    assert cli.main(["option", "--config", cfg]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert abs(rec["price"] - 0.09573123063700656) < 1e-6


def test_option_writes_to_file(tmp_path):
    cfg = write(tmp_path, binary_scenario(option={"strike": 0.5, "maturity": 0.5}))
    out = tmp_path / "opt.json"
    assert cli.main(["option", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["strike"] == 0.5


# ---------------------------------------------------------------------------
# verify


def test_verify_subset_passes(tmp_path, capsys):
    cfg = write(tmp_path, binary_scenario(verify={"checks": ["normalization"]}))
    assert cli.main(["verify", "--config", cfg]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report[0]["check"] == "normalization"
    assert report[0]["pass"] is True


def test_verify_failure_exit_code(tmp_path, capsys, monkeypatch):
    def failing(seed=None):
        return CheckResult(
            name="always_failing", statistic=1.0, threshold=0.5, passed=False
        )

    monkeypatch.setitem(checks.CHECKS, "always_failing", failing)
    cfg = write(tmp_path, binary_scenario(verify={"checks": ["always_failing"]}))
    assert cli.main(["verify", "--config", cfg]) == 3
    report = json.loads(capsys.readouterr().out)
    assert report[0]["pass"] is False


def test_verify_unknown_check_is_config_error(tmp_path):
    cfg = write(tmp_path, binary_scenario(verify={"checks": ["nope"]}))
    assert cli.main(["verify", "--config", cfg]) == 1


def test_verify_requires_its_block(tmp_path):
    cfg = write(tmp_path, binary_scenario())
    assert cli.main(["verify", "--config", cfg]) == 1


# ---------------------------------------------------------------------------
# failure modes and argument handling


def test_missing_config_file(tmp_path):
    assert cli.main(["price", "--config", str(tmp_path / "absent.json")]) == 1


def test_invalid_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.main(["price", "--config", str(p)]) == 1


def test_unknown_scenario_key(tmp_path):
    cfg = write(tmp_path, binary_scenario(extra=1))
    assert cli.main(["price", "--config", cfg]) == 1


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0
    capsys.readouterr()


def test_no_arguments_exits_one(capsys):
    assert cli.main([]) == 1
    capsys.readouterr()


def test_unknown_command_exits_one(capsys):
    assert cli.main(["frobnicate"]) == 1
    capsys.readouterr()
