import io
import json
import subprocess
import sys

import pytest

from curvrigid import curvature as cv
from curvrigid.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, build_config, build_parser, cmd_verify, main
from curvrigid.suites import SUITES, SuiteConfig, run_battery, shipped_fixture_path


def verify(argv, environ=None):
    out = io.StringIO()
    args = build_parser().parse_args(["verify", *argv])
    code = cmd_verify(args, out=out, environ=environ or {})
    return code, out.getvalue()


@pytest.fixture(scope="module")
def default_report():
    code, text = verify(["--json", "--seed", "0"])
    return code, json.loads(text)


def test_default_battery_passes(default_report):
    code, report = default_report
    assert code == EXIT_OK
    assert report["summary"]["fail"] == 0
    assert report["summary"]["total"] == len(report["results"])
    suites = {r["suite"] for r in report["results"]}
    expected = set(SUITES) - {"rigidity"} | {"ricci-minimal-fibers", "mean-curvature",
                                             "pointwise-annihilation", "real-case"}
    assert expected <= suites


def test_report_schema(default_report):
    _, report = default_report
    assert set(report) == {"version", "config", "summary", "results"}
    assert report["config"] == {"seed": 0, "tol": None, "max_dim": 8, "fixtures": []}
    for row in report["results"]:
        assert set(row) == {"suite", "case", "status", "residual", "threshold", "details"}
        assert row["status"] in ("PASS", "FAIL", "SKIP")
    keys = [(r["suite"], r["case"]) for r in report["results"]]
    assert keys == sorted(keys)


def test_text_output_summary_line():
    code, text = verify(["--fixture", "sphere3"])
    assert code == EXIT_OK
    assert text.strip().splitlines()[-1].endswith("0 failed")


@pytest.mark.parametrize("argv", [["--seed", "abc"], ["--seed", "-1"], ["--tol", "0.5"],
                                  ["--max-dim", "1"], ["--max-dim", "11"], ["--fixture", "nope"]])
def test_config_errors_exit_2(argv):
    assert verify(argv)[0] == EXIT_CONFIG


def test_parse_errors_exit_2(capsys):
    assert main(["verify", "--bogus"]) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG
    assert main(["classify", "x.json", "--seed", "z"]) == EXIT_CONFIG


def test_env_precedence():
    parser = build_parser()
    env = {"CURVRIGID_SEED": "5", "CURVRIGID_TOL": "1e-7", "CURVRIGID_MAX_DIM": "6",
           "CURVRIGID_JSON": "yes", "CURVRIGID_FIXTURE": "sphere3,cp2"}
    cfg, as_json = build_config(parser.parse_args(["verify"]), env)
    assert (cfg.seed, cfg.tol, cfg.max_dim, cfg.fixtures, as_json) == (5, 1e-7, 6, ("sphere3", "cp2"), True)
    cfg, _ = build_config(parser.parse_args(["verify", "--seed", "2", "--fixture", "sphere4"]), env)
    assert cfg.seed == 2 and cfg.fixtures == ("sphere4",)
    cfg, as_json = build_config(parser.parse_args(["verify"]), {"CURVRIGID_SEED": ""})
    assert cfg.seed == 0 and not as_json


def test_env_bad_value_exit_2():
    assert verify([], {"CURVRIGID_MAX_DIM": "big"})[0] == EXIT_CONFIG


def test_non_bianchi_fixture_fails(tmp_path):
    path = tmp_path / "bad.json"
    cv.save(cv.four_form_operator(), path)
    code, text = verify(["--json", "--fixture", str(path)])
    assert code == EXIT_FAIL
    rows = [r for r in json.loads(text)["results"] if r["suite"] == "curvature-decomp"]
    assert rows and all(r["status"] == "FAIL" for r in rows)
    assert "BianchiViolated" in rows[0]["details"]["error"]


def test_claims_mismatch_exit_2(tmp_path):
    data = cv.four_form_operator().to_dict()
    data["claims"]["bianchi"] = True
    path = tmp_path / "liar.json"
    path.write_text(json.dumps(data))
    assert verify(["--fixture", str(path)])[0] == EXIT_CONFIG


def test_small_max_dim_skips():
    results = run_battery(SuiteConfig(max_dim=4), only=("annihilator", "lichnerowicz-zero-order"))
    skipped = {r.case for r in results if r.status == "SKIP"}
    assert "cp2-in-Cl(4,4)" in skipped and "cp2-mu1" in skipped
    assert not any(r.status == "FAIL" for r in results)


def test_tol_override_changes_thresholds():
    results = run_battery(SuiteConfig(tol=1e-6), only=("graded-chain",))
    assert all(r.threshold == 1e-6 for r in results)


@pytest.mark.parametrize("name,kinds,lam", [
    ("sphere4", ["real"], [-3.0]),
    ("cp2", ["complex"], [-6.0]),
    ("s2xs3", ["complex", "real"], [-1.0, -2.0]),
])
def test_classify_shipped_fixtures(name, kinds, lam, capsys):
    code = main(["classify", str(shipped_fixture_path(name)), "--json"])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report["verdict"] == "PASS"
    assert [b["type"] for b in report["blocks"]] == kinds
    assert [b["lambda"] for b in report["blocks"]] == pytest.approx(lam)
    assert all(b["intertwiners"] == 0 for b in report["blocks"])


def test_classify_text_and_errors(tmp_path, capsys):
    assert main(["classify", str(shipped_fixture_path("cp2"))]) == EXIT_OK
    assert "complex" in capsys.readouterr().out
    assert main(["classify", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    cv.save(cv.four_form_operator(), bad)
    assert main(["classify", str(bad)]) == EXIT_FAIL


@pytest.mark.parametrize("name,verdict", [("hopf", "obstructed"), ("product", "product"),
                                          ("mapping-torus", "product")])
def test_submersion_fixtures(name, verdict, capsys):
    assert main(["submersion", name, "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == verdict
    assert max(abs(d) for d in report["defects"]) <= 1e-10


def test_submersion_unknown(capsys):
    assert main(["submersion", "klein-bottle"]) == EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvrigid", "submersion", "hopf"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "verdict: obstructed" in proc.stdout
