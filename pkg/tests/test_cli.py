import json
import os
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "gausskey"]


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    env.pop("GAUSSKEY_THREADS", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, env=env
    )


def csv_pairs(text):
    lines = text.strip().splitlines()
    assert lines[0] == "key,value"
    return dict(line.split(",", 1) for line in lines[1:])


def test_rate_zero_point():
    result = run_cli(
        "rate", "--protocol", "noswitching", "--tau", "0.44", "--omega", "1.2",
        "--g", "0", "--gprime", "0",
    )
    assert result.returncode == 0
    pairs = csv_pairs(result.stdout)
    assert abs(float(pairs["rate"])) < 2e-3
    assert pairs["mu"] == "asymptotic"


def test_rate_unphysical_names_constraint():
    result = run_cli(
        "rate", "--tau", "0.44", "--omega", "1.2", "--g", "0.5", "--gprime", "0.5"
    )
    assert result.returncode == 2
    assert "omega*|g + g_prime| <= omega^2 + g*g_prime - 1" in result.stderr


def test_rate_finite_mu_matches_asymptotic():
    base = ["rate", "--tau", "0.44", "--omega", "1.2", "--g", "0.3", "--gprime", "-0.1"]
    finite = csv_pairs(run_cli(*base, "--mu", "1000000").stdout)
    asym = csv_pairs(run_cli(*base, "--mu", "asymptotic").stdout)
    assert abs(float(finite["rate"]) - float(asym["rate"])) < 2e-3


def test_rate_clamp_flag():
    result = run_cli(
        "rate", "--tau", "0.3", "--omega", "1.2", "--clamp-nonnegative"
    )
    assert result.returncode == 0
    assert float(csv_pairs(result.stdout)["rate"]) == 0.0


def test_config_errors_exit_one():
    assert run_cli("rate", "--tau", "nope", "--omega", "1.2").returncode == 1
    assert run_cli("rate", "--omega", "1.2").returncode == 1  # missing tau
    assert run_cli("rate", "--tau", "0.5", "--omega", "1.2", "--mu", "huge").returncode == 1


def test_domain_errors_exit_two():
    assert run_cli("rate", "--tau", "1.5", "--omega", "1.2").returncode == 2
    assert run_cli("rate", "--tau", "0.5", "--omega", "0.8").returncode == 2
    assert run_cli("converge", "--tau", "1", "--omega", "1.2").returncode == 2
    assert run_cli("critical", "--tau", "0.5", "--omega", "1.0").returncode == 2
    assert run_cli("boundary", "--tau", "0.5", "--omega", "1.0").returncode == 2


def test_scan_schema_and_minimum(tmp_path):
    out = tmp_path / "scan.csv"
    result = run_cli(
        "scan", "--tau", "0.44", "--omega", "1.2",
        "--grid-resolution", "31", "--output", str(out),
    )
    assert result.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "g,g_prime,rate,physical,on_boundary"
    rows = [line.split(",") for line in lines[1:]]
    assert all(row[3] == "true" for row in rows)
    keyed = {(float(r[0]), float(r[1])): float(r[2]) for r in rows}
    origin_rate = keyed[(0.0, 0.0)]
    assert origin_rate == min(keyed.values())
    assert all(
        rate > origin_rate for point, rate in keyed.items() if point != (0.0, 0.0)
    )
    # sorted by (g, g')
    points = [(float(r[0]), float(r[1])) for r in rows]
    assert points == sorted(points)
    assert any(r[4] == "true" for r in rows)


def test_scan_deterministic_and_thread_invariant(tmp_path):
    args = ["scan", "--tau", "0.44", "--omega", "1.2", "--grid-resolution", "21"]
    first = run_cli(*args).stdout
    second = run_cli(*args).stdout
    threaded = run_cli(*args, env_extra={"GAUSSKEY_THREADS": "4"}).stdout
    assert first == second == threaded


def test_scan_degenerate_region():
    result = run_cli("scan", "--tau", "0.5", "--omega", "1", "--grid-resolution", "51")
    assert result.returncode == 0
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 2
    g, gp, _, physical, on_boundary = lines[1].split(",")
    assert (float(g), float(gp)) == (0.0, 0.0)
    assert physical == "true"


def test_scan_json_round_trip():
    args = ["scan", "--tau", "0.44", "--omega", "1.2", "--grid-resolution", "15"]
    csv_text = run_cli(*args).stdout
    json_text = run_cli(*args, "--format", "json").stdout
    payload = json.loads(json_text)
    assert payload["verdict"] is True
    csv_rows = [line.split(",") for line in csv_text.strip().splitlines()[1:]]
    assert len(csv_rows) == len(payload["rows"])
    for csv_row, json_row in zip(csv_rows, payload["rows"]):
        assert float(csv_row[0]) == json_row["g"]
        assert float(csv_row[1]) == json_row["g_prime"]
        assert float(csv_row[2]) == json_row["rate"]
        assert (csv_row[4] == "true") == json_row["on_boundary"]
    origin = [r for r in payload["rows"] if (r["g"], r["g_prime"]) == (0.0, 0.0)]
    assert payload["origin_rate"] == origin[0]["rate"]


def test_boundary_subcommand():
    result = run_cli("boundary", "--tau", "0.44", "--omega", "1.2", "--grid-resolution", "51")
    assert result.returncode == 0
    rows = [line.split(",") for line in result.stdout.strip().splitlines()[1:]]
    assert len(rows) > 10
    assert all(row[4] == "true" for row in rows)
    assert all(float(row[2]) > 0.0 for row in rows)


def test_critical_subcommand():
    result = run_cli(
        "critical", "--protocol", "noswitching", "--tau", "0.6", "--omega", "1.2",
        "--format", "json",
    )
    assert result.returncode == 0
    payload = json.loads(result.stdout)
    assert payload["is_minimum"] is True
    assert payload["det_residual_rel"] < 1e-4
    sw = json.loads(
        run_cli(
            "critical", "--protocol", "switching", "--tau", "0.5", "--omega", "1.5",
            "--format", "json",
        ).stdout
    )
    from gausskey import analytic_detH_switching

    assert sw["analytic_det_h"] == pytest.approx(analytic_detH_switching(1.5), abs=1e-15)


def test_critical_degenerate_message():
    result = run_cli("critical", "--protocol", "switching", "--tau", "0.5", "--omega", "1.0")
    assert result.returncode == 2
    assert "point" in result.stderr


def test_converge_table():
    result = run_cli(
        "converge", "--tau", "0.44", "--omega", "1.2", "--g", "0.3", "--gprime", "-0.1"
    )
    assert result.returncode == 0
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "mu,rate_numeric,rate_asymptotic,abs_delta"
    deltas = [float(line.split(",")[3]) for line in lines[1:]]
    assert len(deltas) == 5
    assert all(b < a for a, b in zip(deltas, deltas[1:]))
    assert deltas[-1] < 2e-3


def test_config_file_and_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        "tau=0.3\nomega=1.2\ng=0.1\ngprime=-0.1\nprotocol=switching\n# comment\n"
    )
    from_file = csv_pairs(run_cli("rate", "--config", str(config)).stdout)
    assert from_file["tau"] == "0.29999999999999999"
    assert from_file["protocol"] == "switching"
    overridden = csv_pairs(
        run_cli("rate", "--config", str(config), "--tau", "0.44").stdout
    )
    assert overridden["tau"] == "0.44"


def test_config_file_unknown_key(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("tau=0.3\nomega=1.2\nwat=1\n")
    result = run_cli("rate", "--config", str(config))
    assert result.returncode == 1
    assert "unknown key" in result.stderr


def test_rate_json_matches_csv():
    args = ["rate", "--tau", "0.44", "--omega", "1.2", "--g", "0.3", "--gprime", "-0.1"]
    pairs = csv_pairs(run_cli(*args).stdout)
    payload = json.loads(run_cli(*args, "--format", "json").stdout)
    for key in ("i_ab", "holevo", "rate"):
        assert float(pairs[key]) == payload[key]
    assert [float(x) for x in pairs["total_spectrum"].split(";")] == payload[
        "total_spectrum"
    ]
