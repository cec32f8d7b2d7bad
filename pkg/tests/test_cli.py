import json

import numpy as np
import pytest

from frobenius_verify.cli import (
    Config,
    ManifoldSpec,
    SpecError,
    catalog_exit_code,
    load_manifold_spec,
    main,
    run_catalog,
    run_theta,
    run_verify,
    to_json,
)

CFG = Config(samples=12)

TORUS_SPEC = {
    "name": "torus-2",
    "dim": 2,
    "potential": "z1*zbar1 + z2*zbar2",
    "sample_domain": {"re": [[-0.4, 0.4], [-0.4, 0.4]], "im": [[-0.4, 0.4], [-0.4, 0.4]]},
    "lattice": {
        "generators": [
            [[1, 0], [0, 0]],
            [[0, 1], [0, 0]],
            [[0, 0], [1, 0]],
            [[0, 0], [0, 1]],
        ]
    },
    "expected_class": "torus",
}

FS_SPEC = {
    "name": "fubini-study-2",
    "dim": 2,
    "potential": "log(1 + z1*zbar1 + z2*zbar2)",
    "sample_domain": {"re": [[-0.45, 0.45], [-0.45, 0.45]], "im": [[-0.45, 0.45], [-0.45, 0.45]]},
}

ROTATION_SPEC = {
    "name": "z2-rotation",
    "dim": 1,
    "potential": "z1*zbar1",
    "sample_domain": {"re": [[-0.4, 0.4]], "im": [[-0.4, 0.4]]},
    "lattice": {"generators": [[[1, 0]], [[0, 1]]]},
    "group": {
        "elements": [
            {"A": [[[1, 0]]], "t": [[0, 0]]},
            {"A": [[[-1, 0]]], "t": [[0, 0]]},
        ]
    },
}


def test_torus_spec_end_to_end():
    report = run_verify(load_manifold_spec(TORUS_SPEC), CFG)
    assert report.verdict == "frobenius"
    for sample in report.samples:
        assert sample["max_curvature"] < 1e-9
        assert sample["wdvv"] < 1e-9
        for row in sample["pencil"]:
            assert row["curvature_norm"] < 1e-9


def test_fubini_study_not_frobenius():
    report = run_verify(load_manifold_spec(FS_SPEC), CFG)
    assert report.verdict == "not-frobenius"
    assert max(s["wdvv"] for s in report.samples) > 1e-2


def test_rotation_action_not_free():
    report = run_verify(load_manifold_spec(ROTATION_SPEC), CFG)
    assert report.verdict == "not-frobenius"
    assert "action not free" in report.reasons
    assert report.group["free"] is False
    assert report.group["fixed_point_witness"] is not None


def test_catalog_full_run():
    reports = run_catalog(None, Config(samples=8))
    geometric = [r for r in reports if "expected_verdict" in r]
    assert len(geometric) == 8
    assert all(r["verdict"] == "frobenius" for r in geometric)
    assert catalog_exit_code(reports) == 0


def test_catalog_filter_torus():
    reports = run_catalog("torus", Config(samples=4))
    assert len(reports) == 1
    assert reports[0]["spec"] == "torus"


def test_catalog_filter_hopf():
    reports = run_catalog("hopf", Config(samples=4))
    assert len(reports) == 1
    assert reports[0]["kind"] == "negative-control"
    assert reports[0]["flags"] == {
        "frobenius": False,
        "affine": True,
        "kahler": False,
    }


def test_catalog_determinism_bytes():
    r1 = run_catalog(None, Config(samples=6, seed=777))
    r2 = run_catalog(None, Config(samples=6, seed=777))
    assert to_json(r1) == to_json(r2)


def test_catalog_seed_changes_points():
    r1 = run_catalog("torus", Config(samples=6, seed=1))
    r2 = run_catalog("torus", Config(samples=6, seed=2))
    assert to_json(r1) != to_json(r2)


def test_run_theta_report():
    import time

    start = time.monotonic()
    report = run_theta(np.array([[1j]]), 3, Config())
    elapsed = time.monotonic() - start
    assert report["verdict"] == "pass"
    assert report["level_dimension"] == 3
    assert all(s["residual"] < 1e-8 for s in report["samples"])
    assert elapsed < 5.0


def test_spec_errors():
    with pytest.raises(SpecError):
        load_manifold_spec({"name": "x", "dim": 1})  # missing keys
    bad = dict(TORUS_SPEC)
    bad["potential"] = "z1*(zbar1"
    with pytest.raises(SpecError):
        load_manifold_spec(bad)
    degenerate = json.loads(json.dumps(TORUS_SPEC))
    degenerate["sample_domain"]["re"][0] = [0.5, 0.5]
    with pytest.raises(SpecError):
        load_manifold_spec(degenerate)
    orphan_group = json.loads(json.dumps(ROTATION_SPEC))
    del orphan_group["lattice"]
    with pytest.raises(SpecError):
        load_manifold_spec(orphan_group)


def test_report_schema_keys():
    report = run_verify(load_manifold_spec(TORUS_SPEC), Config(samples=4))
    payload = json.loads(to_json(report))
    for key in ("spec", "version", "seed", "tolerances", "samples", "group",
                "verdict", "reasons", "disclaimer"):
        assert key in payload


def test_main_verify_exit_codes(tmp_path, capsys):
    path = tmp_path / "torus.json"
    path.write_text(json.dumps(TORUS_SPEC))
    assert main(["--samples", "4", "verify", str(path)]) == 0
    out = capsys.readouterr().out
    assert "frobenius" in out

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == 2

    # a flat potential declared as negative-control mismatches
    mismatch = dict(TORUS_SPEC)
    mismatch["expected_class"] = "negative-control"
    path2 = tmp_path / "mismatch.json"
    path2.write_text(json.dumps(mismatch))
    assert main(["--samples", "4", "verify", str(path2)]) == 1


def test_main_json_output_deterministic(tmp_path, capsys):
    path = tmp_path / "torus.json"
    path.write_text(json.dumps(TORUS_SPEC))
    assert main(["--samples", "4", "--seed", "5", "--json", "verify", str(path)]) == 0
    first = capsys.readouterr().out
    assert main(["--samples", "4", "--seed", "5", "--json", "verify", str(path)]) == 0
    second = capsys.readouterr().out
    assert first == second
    json.loads(first)  # valid JSON


def test_main_theta_and_catalog(capsys):
    assert main(["--samples", "4", "theta", "--genus", "1", "--tau", "i",
                 "--level", "2"]) == 0
    capsys.readouterr()
    assert main(["--samples", "4", "catalog", "--catalog", "torus"]) == 0


def test_main_theta_invalid_tau(capsys):
    code = main(["theta", "--tau", "[[[1.0, 0.0]]]", "--genus", "1"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_env_seed_override(tmp_path, monkeypatch, capsys):
    path = tmp_path / "torus.json"
    path.write_text(json.dumps(TORUS_SPEC))
    monkeypatch.setenv("FROBENIUS_VERIFY_SEED", "4242")
    assert main(["--samples", "4", "--json", "verify", str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["seed"] == 4242
    # explicit flag wins over the environment
    assert main(["--samples", "4", "--seed", "7", "--json", "verify", str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["seed"] == 7


def test_tolerance_flag_override(tmp_path, capsys):
    path = tmp_path / "fs.json"
    path.write_text(json.dumps(FS_SPEC))
    # with an absurdly loose structural tolerance even the curved example passes
    assert (
        main(
            ["--samples", "4", "--tolerance", "structural=100", "--json",
             "verify", str(path)]
        )
        == 0
    )
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "frobenius"
    assert payload["tolerances"]["structural"] == 100.0


DEGENERATE_SPEC = {
    "name": "degenerate",
    "dim": 2,
    "potential": "z1*zbar1 + (z2*zbar2)^2",
    "sample_domain": {
        "re": [[-0.4, 0.4], [-1e-5, 1e-5]],
        "im": [[-0.4, 0.4], [-1e-5, 1e-5]],
    },
}


def test_degenerate_sample_reports_error():
    report = run_verify(load_manifold_spec(DEGENERATE_SPEC), Config(samples=4))
    assert report.verdict == "error"
    assert any("error" in s for s in report.samples)


def test_main_numeric_error_exit_code(tmp_path, capsys):
    path = tmp_path / "degenerate.json"
    path.write_text(json.dumps(DEGENERATE_SPEC))
    assert main(["--samples", "4", "verify", str(path)]) == 3
    assert "error" in capsys.readouterr().out
