import json
import math
import subprocess
import sys

SIGMA_TABLE_N5 = {
    1: 1.7889, 2: 3.2071, 3: 4.3818, 4: 5.3936, 5: 6.2897,
    6: 7.0993, 7: 7.8416, 8: 8.5298, 9: 9.1736, 10: 9.7802,
}


def run_cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "finiten", *args],
        input=stdin,
        capture_output=True,
        text=True,
        timeout=300,
    )


def test_sample_is_deterministic_and_bounded():
    first = run_cli("sample", "--N", "5", "--n", "10", "--seed", "1")
    second = run_cli("sample", "--N", "5", "--n", "10", "--seed", "1")
    assert first.returncode == 0
    assert first.stdout == second.stdout
    values = [float(line) for line in first.stdout.splitlines()]
    assert len(values) == 10
    assert all(abs(v) < math.sqrt(5.0) for v in values)


def test_sample_draws_seed_when_omitted():
    result = run_cli("sample", "--N", "5", "--n", "3")
    assert result.returncode == 0
    assert "seed=" in result.stderr
    assert len(result.stdout.splitlines()) == 3


def test_sample_gaussian_alternative_unbounded():
    result = run_cli("sample", "--N", "5", "--n", "5000", "--seed", "2", "--hypothesis", "h1")
    values = [float(line) for line in result.stdout.splitlines()]
    # standard normal tail mass: about 32% of draws exceed 1 in magnitude
    frac = sum(1 for v in values if abs(v) > 1.0) / len(values)
    assert abs(frac - 0.3173) < 0.03


def test_test_command_json_report():
    sample = run_cli("sample", "--N", "5", "--n", "500", "--seed", "7")
    result = run_cli(
        "test", "--N", "5", "--m", "4", "--format", "json", "--no-standardize",
        stdin=sample.stdout,
    )
    assert result.returncode == 0
    payload = json.loads(result.stdout)
    assert set(payload) == {"statistic", "dof", "cutoff", "p_value", "reject", "coefficients"}
    assert payload["dof"] == 1
    assert set(payload["coefficients"]) == {"4"}
    assert payload["reject"] == (payload["statistic"] > payload["cutoff"])


def test_test_command_csv_report():
    sample = run_cli("sample", "--N", "5", "--n", "200", "--seed", "8")
    result = run_cli("test", "--N", "5", "--m", "6", stdin=sample.stdout)
    assert result.returncode == 0
    header, line = result.stdout.strip().split("\n")
    assert header == "statistic,dof,cutoff,p_value,reject,mu_4,mu_6"
    fields = line.split(",")
    assert fields[4] in ("true", "false")
    t = float(fields[0])
    assert t == __import__("pytest").approx(float(fields[5]) ** 2 + float(fields[6]) ** 2, rel=1e-9)


def test_test_command_fail_on_reject():
    # Gaussian data at n=2000 against N=5 is rejected essentially always
    sample = run_cli("sample", "--N", "5", "--n", "2000", "--seed", "9", "--hypothesis", "h1")
    result = run_cli(
        "test", "--N", "5", "--fail-on-reject", "--no-standardize", stdin=sample.stdout
    )
    assert result.returncode == 1
    payload_line = result.stdout.strip().splitlines()[-1]
    assert payload_line.split(",")[4] == "true"


def test_test_command_rejects_malformed_input():
    result = run_cli("test", "--N", "5", stdin="1.0 2.0 oops 3.0")
    assert result.returncode == 2
    assert result.stdout == ""  # no partial output
    assert "invalid numeric input" in result.stderr
    assert len(result.stderr.strip().splitlines()) == 1


def test_test_command_explicit_cutoff():
    sample = run_cli("sample", "--N", "5", "--n", "100", "--seed", "4")
    result = run_cli("test", "--N", "5", "--cutoff", "1e9", "--format", "json", stdin=sample.stdout)
    assert json.loads(result.stdout)["reject"] is False
    bad = run_cli("test", "--N", "5", "--cutoff", "sometimes", stdin=sample.stdout)
    assert bad.returncode == 2


def test_test_command_calibrated_cutoff():
    sample = run_cli("sample", "--N", "5", "--n", "50", "--seed", "12")
    result = run_cli(
        "test", "--N", "5", "--cutoff", "calibrated", "--reps", "1000",
        "--seed", "13", "--format", "json", stdin=sample.stdout,
    )
    assert result.returncode == 0
    payload = json.loads(result.stdout)
    theoretical = 3.841458820694
    assert abs(payload["cutoff"] - theoretical) > 1e-6  # a Monte Carlo value
    repeat = run_cli(
        "test", "--N", "5", "--cutoff", "calibrated", "--reps", "1000",
        "--seed", "13", "--format", "json", stdin=sample.stdout,
    )
    assert repeat.stdout == result.stdout


def test_usage_errors_exit_two():
    result = run_cli("test", "--N")
    assert result.returncode == 2
    assert len(result.stderr.strip().splitlines()) == 1
    result = run_cli("sample", "--N", "5", "--n", "10", "--hypothesis", "h3")
    assert result.returncode == 2


def test_sigma_table_matches_reference_values():
    result = run_cli("sigma-table", "--N", "5", "--m", "10")
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "k,sigma"
    for line in lines[1:]:
        k, sigma = line.split(",")
        assert abs(float(sigma) - SIGMA_TABLE_N5[int(k)]) <= 5e-5
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_dist_queries():
    result = run_cli("dist", "--N", "5", "--x", "0,1", "--p", "0.5,0.975")
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "x,density,log_density,cdf"
    x0 = lines[1].split(",")
    assert float(x0[3]) == 0.5
    assert lines[3] == "p,quantile"
    assert float(lines[4].split(",")[1]) == 0.0
    missing = run_cli("dist", "--N", "5")
    assert missing.returncode == 2


def test_calibrate_csv_and_validation():
    result = run_cli(
        "calibrate", "--N", "5", "--n", "50", "--m", "4",
        "--reps", "1000", "--seed", "5",
    )
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "N,n,m,level,cutoff,reps,seed"
    fields = lines[1].split(",")
    assert fields[0] == "5" and fields[1] == "50" and float(fields[4]) > 0
    repeat = run_cli(
        "calibrate", "--N", "5", "--n", "50", "--m", "4",
        "--reps", "1000", "--seed", "5",
    )
    assert repeat.stdout == result.stdout
    too_few = run_cli("calibrate", "--N", "5", "--n", "50", "--reps", "10", "--seed", "5")
    assert too_few.returncode == 2


def test_grid_emits_rows_and_completeness_flag():
    result = run_cli(
        "grid", "--N-values", "5", "--n-values", "10,20", "--m-values", "4",
        "--calib-reps", "1000", "--eval-reps", "500", "--seed", "3", "--quiet",
    )
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "N,n,m,modes,cutoff_source,hypothesis,rejection_rate,reps,seed"
    assert lines[-1] == "# complete=true"
    assert len(lines) == 2 + 2 * 4  # header + 2 cells x 4 rows + flag line


def test_grid_json_mirrors_fields():
    result = run_cli(
        "grid", "--N-values", "5", "--n-values", "10", "--m-values", "4",
        "--calib-reps", "1000", "--eval-reps", "500", "--seed", "3",
        "--quiet", "--format", "json",
    )
    payload = json.loads(result.stdout)
    assert payload["complete"] is True
    assert len(payload["rows"]) == 4
    assert payload["rows"][0]["modes"] == [4]
    assert len(payload["calibration"]) == 1


def test_sanov_reproduces_reference_table():
    expected = {
        (4, 50): 0.983, (5, 10): 0.370, (10, 100): 0.603, (20, 2000): 0.984,
    }
    result = run_cli("sanov")
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "N"
    sizes = [int(v) for v in header[1:]]
    for line in lines[1:]:
        fields = line.split(",")
        N = float(fields[0])
        for n, value in zip(sizes, fields[1:]):
            if (int(N), n) in expected:
                assert abs(float(value) - expected[(int(N), n)]) <= 1e-3


def test_boundary_command():
    result = run_cli("boundary", "--N-values", "5", "--target", "0.8")
    assert result.returncode == 0
    assert result.stdout.strip().split("\n")[1] == "5,35"


def test_compare_schema():
    result = run_cli(
        "compare", "--N", "5", "--n-values", "50", "--reps", "1000", "--seed", "2",
    )
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "test_name,n,calibrated_power"
    names = [line.split(",")[0] for line in lines[1:]]
    assert names == ["stein", "ks", "cvm", "ad"]
