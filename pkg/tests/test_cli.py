"""End-to-end CLI contract: formats, determinism, exit codes, schema.

Every invocation runs in a fresh interpreter so environment handling,
argument parsing and exit codes are exercised exactly as a shell user
would hit them.
"""

import json
import math
from datetime import datetime

import pytest

B_REF = 1.0062378251027815
C_REF = 1.2625145606675758
RATIO_E_REF = 515.03500138488278
RATIO_NODE_REF = 22.694382595366695
SLOPE_REF = 0.73750752295684
BRANCH_ROOTS_AT_X0 = [-1.012514560667576, 19.938856034048226,
                      46.49004553340669, 86.94975630411273]

MANIFEST_KEYS = {"command", "version", "kernel_backend", "parameters",
                 "tolerances", "units", "timestamp"}


def _manifest_ok(manifest, command):
    assert MANIFEST_KEYS <= set(manifest)
    assert manifest["command"] == command
    assert manifest["units"]["hbar"] == 1.0
    assert manifest["units"]["mass_scale"] == 1.0
    assert "a < 0" in manifest["units"]["convention"]
    assert {"format", "tol", "output"} <= set(manifest["parameters"])
    datetime.fromisoformat(manifest["timestamp"])


def test_version_flag(cli):
    out = cli(["--version"]).stdout
    assert out.startswith("efimov-lab ")


def test_constants_json_contract(cli, schema_validator):
    doc = json.loads(cli(["constants", "--format", "json"]).stdout)
    schema_validator.validate(doc)
    assert set(doc) == {"b", "C", "residual", "manifest"}
    assert doc["b"] == pytest.approx(B_REF, rel=1e-10)
    assert doc["C"] == pytest.approx(C_REF, rel=1e-10)
    assert abs(doc["C"] - (doc["b"] ** 2 + 0.25)) <= 1e-12
    assert doc["residual"] <= 1e-10
    _manifest_ok(doc["manifest"], "constants")


def test_constants_csv_layout(cli, schema_validator):
    proc = cli(["constants"])
    lines = proc.stdout.splitlines()
    assert lines[0] == "b,C,residual"
    assert len(lines) == 2
    b, c, res = (float(v) for v in lines[1].split(","))
    assert b == pytest.approx(B_REF, rel=1e-10)
    assert c == pytest.approx(C_REF, rel=1e-10)
    side = json.loads(proc.stderr)
    schema_validator.validate(side)
    _manifest_ok(side["manifest"], "constants")


def test_csv_cells_are_canonical_12_digit_forms(cli):
    args = ["spectrum", "--a", "inf", "--R", "1", "--rho-max", "1e6"]
    lines = cli(args).stdout.splitlines()
    for line in lines[1:]:
        for cell in line.split(","):
            assert cell == "%.12g" % float(cell) or cell in ("0", "1")


def test_reruns_are_byte_identical(cli):
    args = ["potential", "--a", "3.3", "--rho-min", "0.01",
            "--rho-max", "100", "--points", "60"]
    first = cli(args).stdout
    second = cli(args).stdout
    assert first == second
    assert first.endswith("\n") and "\r" not in first


def test_thread_count_does_not_change_output(cli):
    base = ["potential", "--a", "-2.5", "--rho-min", "0.01",
            "--rho-max", "1e3", "--points", "80"]
    one = cli(base + ["--threads", "1"]).stdout
    four = cli(base + ["--threads", "4"]).stdout
    via_env = cli(base, env_extra={"EFIMOV_LAB_THREADS": "4"}).stdout
    assert one == four == via_env


def test_garbage_threads_env_is_a_config_error(cli):
    proc = cli(["potential", "--a", "inf", "--rho-min", "0.1",
                "--rho-max", "10", "--points", "8"],
               expect=2, env_extra={"EFIMOV_LAB_THREADS": "many"})
    assert proc.stderr.startswith("efimov-lab: error:")


def test_potential_table_at_unitarity(cli, schema_validator):
    doc = json.loads(cli(["potential", "--a", "inf", "--rho-min", "1e-3",
                          "--rho-max", "1e3", "--points", "40",
                          "--format", "json"]).stdout)
    schema_validator.validate(doc)
    tbl = doc["table"]
    assert set(tbl) == {"rho", "x", "nu_squared", "lambda", "v_eff"}
    for nu2, lam in zip(tbl["nu_squared"], tbl["lambda"]):
        assert lam == nu2 - 4.0
        assert nu2 == pytest.approx(-B_REF ** 2, rel=1e-10)
    for rho, x, v in zip(tbl["rho"], tbl["x"], tbl["v_eff"]):
        assert x == 0.0
        assert 2.0 * v * rho * rho == pytest.approx(-C_REF, rel=1e-10)


def test_potential_dimer_tail_matches_binding_energy(cli):
    # x = -200 sits at rho = 200 sqrt(0.5) for a = -1; there the doubled
    # potential must reproduce -1/(mu a^2)
    rho_star = 200.0 * math.sqrt(0.5)
    doc = json.loads(cli(["potential", "--a", "-1", "--rho-min",
                          "%.17g" % rho_star, "--rho-max", "150",
                          "--points", "2", "--format", "json"]).stdout)
    x0 = doc["table"]["x"][0]
    v0 = doc["table"]["v_eff"][0]
    assert x0 == pytest.approx(-200.0, rel=1e-12)
    assert 2.0 * v0 == pytest.approx(-2.0, rel=0.01)


def test_spectrum_contract(cli, schema_validator):
    args = ["spectrum", "--a", "inf", "--R", "1", "--rho-max", "1e6"]
    doc = json.loads(cli(args + ["--format", "json"]).stdout)
    schema_validator.validate(doc)
    levels = doc["levels"]
    assert len(levels) >= 3
    assert doc["total_nodes_at_edge"] >= len(levels)
    for k, lv in enumerate(levels):
        assert lv["node_count"] == k
        assert lv["E_n"] < 0.0
        assert lv["kappa_n"] == pytest.approx(math.sqrt(-2.0 * lv["E_n"]),
                                              rel=1e-12)
    for k in range(len(levels) - 1):
        if not (levels[k]["flag"] or levels[k + 1]["flag"]):
            assert levels[k]["ratio_to_next"] == pytest.approx(
                RATIO_E_REF, rel=0.02)
    assert levels[-1]["flag"] is True

    lines = cli(args).stdout.splitlines()
    assert lines[0] == "E_n,kappa_n,node_count,ratio_to_next,flag"
    assert len(lines) == len(levels) + 1
    assert lines[-1].endswith(",1")


def test_spectrum_of_bare_potential_is_forbidden(cli):
    proc = cli(["spectrum", "--a", "inf", "--R", "1", "--rho-max", "1e6",
                "--regularization", "none"], expect=3)
    assert proc.stderr.startswith("efimov-lab: forbidden:")
    assert "no ground state" in proc.stderr


def test_nodes_analytic_selftest(cli, schema_validator):
    doc = json.loads(cli(["nodes", "--analytic", "--periods", "6",
                          "--format", "json"]).stdout)
    schema_validator.validate(doc)
    s = doc["summary"]
    assert s["mode"] == "analytic"
    assert s["reference_ratio"] == pytest.approx(RATIO_NODE_REF, rel=1e-12)
    assert s["fitted_ratio"] == pytest.approx(RATIO_NODE_REF, rel=1e-6)
    assert s["ratio_spread"] < 1e-6
    assert doc["nodes"][0]["ratio"] is None


def test_nodes_level_mode_geometric_spacing(cli, schema_validator):
    doc = json.loads(cli(["nodes", "--a", "inf", "--R", "1",
                          "--rho-max", "1e8", "--format", "json"]).stdout)
    schema_validator.validate(doc)
    s = doc["summary"]
    assert s["mode"] == "level"
    assert s["level"] >= 3
    assert len(doc["nodes"]) == s["level"]
    assert s["interior_count"] >= 3
    assert s["fitted_ratio"] == pytest.approx(RATIO_NODE_REF, rel=0.01)
    assert s["E"] < 0.0


def test_nodes_ground_state_has_too_few_nodes(cli):
    proc = cli(["nodes", "--a", "inf", "--R", "1", "--rho-max", "1e4",
                "--level", "0"], expect=2)
    assert proc.stderr.startswith("efimov-lab: error:")


def test_nodes_probe_mode(cli, schema_validator):
    doc = json.loads(cli(["nodes", "--a", "inf", "--probe-E", "-0.5",
                          "--decades", "3", "--per-decade", "4",
                          "--format", "json"]).stdout)
    schema_validator.validate(doc)
    s = doc["summary"]
    assert s["mode"] == "probe"
    assert s["reference_slope"] == pytest.approx(SLOPE_REF, rel=1e-9)
    assert s["slope_per_decade"] == pytest.approx(SLOPE_REF, rel=0.10)
    counts = [row["node_count"] for row in doc["sweep"]]
    assert len(counts) == 3 * 4 + 1
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] > counts[0]


def test_meanfield_contract(cli, schema_validator):
    args = ["meanfield", "--statistics", "bose", "--t0", "-1",
            "--stabilizer", "threebody", "--t3", "1"]
    doc = json.loads(cli(args + ["--format", "json"]).stdout)
    schema_validator.validate(doc)
    rep = doc["report"]
    assert rep["classification"] == "Saturating"
    assert rep["n_sat"] == pytest.approx(1.5, rel=1e-10)
    assert rep["e_min"] == pytest.approx(-0.375, rel=1e-10)
    assert rep["model"]["c3"] == pytest.approx(1.0 / 6.0)
    assert rep["model"]["c3_defaulted"] is True
    assert len(rep["caveat"]) > 50
    tbl = doc["table"]
    assert len(tbl["n"]) == 100
    for n, e, per in zip(tbl["n"], tbl["epsilon"],
                         tbl["epsilon_per_particle"]):
        assert per == pytest.approx(e / n, rel=1e-12)

    proc = cli(args)
    lines = proc.stdout.splitlines()
    assert lines[0] == "n,epsilon,epsilon_per_particle"
    assert len(lines) == 101
    side = json.loads(proc.stderr)
    schema_validator.validate(side)
    assert side["report"]["classification"] == "Saturating"


def test_meanfield_argument_errors(cli):
    proc = cli(["meanfield", "--statistics", "fermi", "--t0", "-4",
                "--stabilizer", "dd", "--t3", "1"], expect=2)
    assert "--alpha" in proc.stderr
    proc = cli(["meanfield", "--statistics", "bose", "--t0", "-1",
                "--t3", "1"], expect=2)
    assert "--stabilizer" in proc.stderr
    proc = cli(["meanfield", "--statistics", "bose", "--t0", "-1",
                "--stabilizer", "threebody", "--t3", "-1"], expect=2)
    assert proc.stderr.startswith("efimov-lab: error:")


def test_branches_frozen_roots(cli, schema_validator):
    doc = json.loads(cli(["branches", "--x", "0", "--count", "4",
                          "--format", "json"]).stdout)
    schema_validator.validate(doc)
    assert doc["x"] == 0.0
    got = [br["nu_squared"] for br in doc["branches"]]
    for value, want in zip(got, BRANCH_ROOTS_AT_X0):
        assert value == pytest.approx(want, rel=1e-9)
    for br in doc["branches"]:
        assert br["lambda"] == br["nu_squared"] - 4.0
        assert br["near_pole"] is False
        assert br["residual"] <= 1e-10
    lines = cli(["branches", "--x", "0", "--count", "4"]).stdout.splitlines()
    assert lines[0] == "branch,nu_squared,lambda,residual,near_pole"
    assert len(lines) == 5


def test_output_file_and_manifest_sidecar(cli, schema_validator, tmp_path):
    out = tmp_path / "pot.csv"
    args = ["potential", "--a", "inf", "--rho-min", "0.1", "--rho-max", "10",
            "--points", "12", "--output", str(out)]
    cli(args)
    body = out.read_text(encoding="utf-8")
    stdout_body = cli(args[:-2]).stdout
    assert body == stdout_body
    side = json.loads((tmp_path / "pot.csv.manifest.json").read_text())
    schema_validator.validate(side)
    _manifest_ok(side["manifest"], "potential")
    assert side["manifest"]["parameters"]["points"] == 12

    jout = tmp_path / "pot.json"
    cli(args[:-2] + ["--format", "json", "--output", str(jout)])
    doc = json.loads(jout.read_text(encoding="utf-8"))
    schema_validator.validate(doc)
    _manifest_ok(doc["manifest"], "potential")
