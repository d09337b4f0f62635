"""Body spec files, preset running, manifests, reports, CLI."""

import json
import math

import numpy as np
import pytest

from chrwalk import cli, geometry, harness
from chrwalk.geometry import make_ball, make_box, make_polytope, unit_cube
from chrwalk.harness import (
    CheckRecord,
    PresetRun,
    RunManifest,
    body_from_dict,
    body_to_dict,
    canonical_json,
    config_hash,
    emit_report,
    load_body_spec,
    run_preset,
    save_body_spec,
)


# ---------------------------------------------------------------------------
# body spec round trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("body", [
    make_box([1.0, 2.0], center=[0.1, -0.2]),
    make_ball(1.5, center=[0.0, 0.3]),
    geometry.random_sandwiched_polytope(2, 6, np.random.default_rng(1)),
    geometry.standard_simplex(3),
])
def test_body_spec_round_trip_membership(body, tmp_path):
    path = tmp_path / "body.json"
    save_body_spec(body, path)
    loaded = load_body_spec(path).body
    rng = np.random.default_rng(2)
    lo, hi = geometry.bounding_box(body)
    pts = rng.uniform(lo - 0.5, hi + 0.5, size=(10_000, body.dim))
    assert np.array_equal(geometry.contains_many(body, pts),
                          geometry.contains_many(loaded, pts))


def test_cube_spec_loads_clean(tmp_path):
    path = tmp_path / "cube.json"
    save_body_spec(unit_cube(3), path)
    loaded = load_body_spec(path)
    assert loaded.warnings == ()
    assert loaded.body.declared_R == 1.0


def test_inner_failure_becomes_warning(tmp_path):
    body = make_polytope([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]], [1.0, 1.0, 1.0])
    path = tmp_path / "cut.json"
    save_body_spec(body, path)
    loaded = load_body_spec(path)
    assert any("inner_ok" in w for w in loaded.warnings)
    with pytest.raises(geometry.BodyValidationError):
        load_body_spec(path, require_sandwich=True)


def test_malformed_json_names_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ValueError, match="broken.json"):
        load_body_spec(path)


def test_missing_field_named_in_error(tmp_path):
    path = tmp_path / "missing.json"
    path.write_text(json.dumps({"dim": 2, "kind": "box", "center": [0, 0]}))
    with pytest.raises(ValueError, match="halfwidths"):
        load_body_spec(path)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="kind"):
        body_from_dict({"dim": 2, "kind": "v_polytope"})


def test_intersection_round_trip(tmp_path):
    body = geometry.make_intersection([unit_cube(2), make_ball(1.3, dim=2)])
    path = tmp_path / "inter.json"
    save_body_spec(body, path)
    loaded = load_body_spec(path).body
    assert loaded.kind == "intersection"
    assert len(loaded.components) == 2


def test_canonical_json_order_invariance():
    a = {"b": 1, "a": [1, 2], "c": {"y": 0, "x": 1}}
    b = {"c": {"x": 1, "y": 0}, "a": [1, 2], "b": 1}
    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)


# ---------------------------------------------------------------------------
# presets, manifests, reports
# ---------------------------------------------------------------------------

def test_unknown_preset_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown preset"):
        run_preset("not-a-preset", {}, seed=0, out_dir=tmp_path)


def test_preset_outputs_reproducible(tmp_path):
    r1 = run_preset("flow-symmetry", {"bodies": 3}, seed=7, out_dir=tmp_path / "a")
    r2 = run_preset("flow-symmetry", {"bodies": 3}, seed=7, out_dir=tmp_path / "b")
    h1 = {o["path"]: o["sha256"] for o in r1.manifest.outputs}
    h2 = {o["path"]: o["sha256"] for o in r2.manifest.outputs}
    assert h1 == h2
    r3 = run_preset("flow-symmetry", {"bodies": 3}, seed=8, out_dir=tmp_path / "c")
    h3 = {o["path"]: o["sha256"] for o in r3.manifest.outputs}
    assert h1 != h3


def test_preset_writes_manifest_and_csv(tmp_path):
    run = run_preset("pinsker", {"trials": 50}, seed=3, out_dir=tmp_path)
    assert (tmp_path / "pinsker.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["preset"] == "pinsker"
    assert manifest["verdict"] == "pass"
    assert {o["path"] for o in manifest["outputs"]} == {"pinsker.csv", "report.txt"}


def test_bounds_table_preset_reference_values(tmp_path):
    run = run_preset("bounds-table", {}, seed=0, out_dir=tmp_path)
    by_label = {r.label: r for r in run.records}
    assert by_label["table-mixing-steps"].measured == 7557
    assert abs(by_label["table-s-conductance-lower"].measured - 0.0165881765) < 1e-9


def test_emit_report_empty_manifest(tmp_path):
    manifest = RunManifest(preset="empty", config={}, config_hash="x", version="0",
                           seed=0, started_at=0.0, finished_at=0.0)
    run = PresetRun(name="empty", manifest=manifest, records=[], out_dir=tmp_path)
    path = emit_report(run)
    text = path.read_text()
    assert "preset: empty" in text
    assert "PASS" not in text


def test_emit_report_line_carries_label(tmp_path):
    manifest = RunManifest(preset="demo", config={}, config_hash="x", version="0",
                           seed=0, started_at=0.0, finished_at=0.0)
    records = [CheckRecord("tv-pinsker", 0.3, 0.5, "pass", "1000 cases")]
    run = PresetRun(name="demo", manifest=manifest, records=records, out_dir=tmp_path)
    text = emit_report(run).read_text()
    assert "PASS" in text and "tv-pinsker" in text


def test_inconclusive_reporting(tmp_path):
    manifest = RunManifest(preset="demo", config={}, config_hash="x", version="0",
                           seed=0, started_at=0.0, finished_at=0.0)
    records = [CheckRecord("coupling-tv", 0.08, 0.0625, "inconclusive",
                           "noise floor 0.08 above bound 0.0625")]
    run = PresetRun(name="demo", manifest=manifest, records=records, out_dir=tmp_path)
    assert harness.aggregate_verdict(records) == "inconclusive"
    text = emit_report(run).read_text()
    assert "INCONCLUSIVE" in text and "noise floor" in text


def test_trajectory_csv_format(tmp_path):
    path = tmp_path / "traj.csv"
    trajs = [np.zeros((3, 2)), np.ones((3, 2))]
    harness.write_trajectory_csv(path, trajs, thinning=5)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "chain_id,step,x_1,x_2"
    assert lines[1].startswith("0,0,")
    assert lines[2].startswith("0,5,")
    assert len(lines) == 7


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _write_cube(tmp_path, dim=2):
    path = tmp_path / "cube.json"
    save_body_spec(unit_cube(dim), path)
    return path


def test_cli_bound_table(capsys):
    assert cli.main(["bound", "--n", "2", "--R", "1", "--M", "1", "--eps", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "mixing-steps" in out
    assert "7557" in out


def test_cli_sample_writes_csv(tmp_path):
    body = _write_cube(tmp_path)
    out = tmp_path / "traj.csv"
    rc = cli.main(["sample", "--body", str(body), "--steps", "50", "--chains", "2",
                   "--thin", "5", "--seed", "1", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "chain_id,step,x_1,x_2"
    assert len(lines) == 1 + 2 * 11


def test_cli_sample_requires_seed(tmp_path):
    body = _write_cube(tmp_path)
    with pytest.raises(SystemExit):
        cli.main(["sample", "--body", str(body)])


def test_cli_conductance_csv(tmp_path):
    body = _write_cube(tmp_path)
    out = tmp_path / "cond.csv"
    rc = cli.main(["conductance", "--body", str(body), "--cells", "4", "--s", "0.1",
                   "--mode", "exact", "--seed", "2", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "subset_bits,measure,flow,ratio"
    assert len(lines) == 2


def test_cli_diagnose(tmp_path):
    body = _write_cube(tmp_path)
    out = tmp_path / "diag.csv"
    rc = cli.main(["diagnose", "--body", str(body), "--scheme", "chr", "--M", "4",
                   "--eps", "0.25", "--chains", "128", "--checkpoints", "1,16,256",
                   "--seed", "3", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "checkpoint,tv_estimate,ci,pass"
    assert len(lines) == 4


def test_cli_verify_exit_codes(tmp_path):
    rc = cli.main(["verify", "pinsker", "--seed", "5", "--out", str(tmp_path / "v"),
                   "--set", "trials=100"])
    assert rc == 0
    with pytest.raises(SystemExit):
        cli.main(["verify", "nonsense", "--seed", "5"])
