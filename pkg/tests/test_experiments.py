import csv
import json

import pytest
from click.testing import CliRunner

from aoi_tandem import cli, experiments as ex
from aoi_tandem.dist import erlang, exponential

UNIT_EXP = exponential(1.0)


def small_spec(tmp_path, **over):
    base = dict(
        model="markov_tandem_global_failure",
        lambda_start=0.1, lambda_stop=0.3, lambda_step=0.1,
        alpha_values=(0.0, 0.5), n_nodes=2, stage=UNIT_EXP, gamma=1.0,
        engines=("analytic",), output_path=str(tmp_path / "out.csv"),
        horizon=3e4, replications=3,
    )
    base.update(over)
    return ex.SweepSpec(**base)


def test_spec_validation(tmp_path):
    with pytest.raises(ex.SweepSpecError, match="model"):
        small_spec(tmp_path, model="bogus")
    with pytest.raises(ex.SweepSpecError, match="lambda_step"):
        small_spec(tmp_path, lambda_step=0.0)
    with pytest.raises(ex.SweepSpecError, match="engines"):
        small_spec(tmp_path, engines=("magic",))
    with pytest.raises(ex.SweepSpecError, match="analytic"):
        small_spec(tmp_path, n_nodes=3)
    with pytest.raises(ex.SweepSpecError, match="overlap"):
        small_spec(tmp_path, model="mg1_overlap")
    with pytest.raises(ex.SweepSpecError, match="ctmc"):
        small_spec(tmp_path, model="mg1_sequential_stage", engines=("ctmc",))


def test_lambda_values(tmp_path):
    spec = small_spec(tmp_path)
    assert spec.lambda_values() == (0.1, 0.2, 0.3)


def test_spec_json_round_trip(tmp_path):
    spec = small_spec(tmp_path, stage=erlang(2, 2.0),
                      model="mg1_sequential_stage")
    assert ex.SweepSpec.from_json(json.loads(json.dumps(spec.to_json()))) == spec


def test_sweep_csv_schema_and_order(tmp_path):
    spec = small_spec(tmp_path, engines=("analytic", "simulation"))
    manifest = ex.sweep(spec, seed=1)
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == ex.CSV_HEADER
    rows = list(csv.DictReader(lines))
    assert len(rows) == manifest["rows"] == 3 * 2 * 2
    keys = [(float(r["alpha"]), float(r["lambda"]), r["engine"]) for r in rows]
    assert keys == sorted(keys)
    for r in rows:
        assert r["stable"] in ("true", "false")
        assert "nan" not in r["aaoi"].lower() and "inf" not in r["aaoi"].lower()


def test_sweep_flags_unstable_rows(tmp_path):
    spec = small_spec(tmp_path, lambda_start=0.2, lambda_stop=0.4,
                      lambda_step=0.1, alpha_values=(0.5,))
    ex.sweep(spec, seed=1)
    rows = list(csv.DictReader((tmp_path / "out.csv").read_text().splitlines()))
    flagged = [r for r in rows if r["stable"] == "false"]
    assert flagged and all(r["aaoi"] == "" for r in flagged)
    assert any(r["stable"] == "true" for r in rows)


def test_sweep_rerun_byte_identical(tmp_path):
    spec = small_spec(tmp_path, engines=("analytic", "simulation"))
    m = ex.sweep(spec, seed=5)
    first = (tmp_path / "out.csv").read_bytes()
    ex.run_sweep_from_manifest(m)
    assert (tmp_path / "out.csv").read_bytes() == first


def test_sweep_jsonl(tmp_path):
    spec = small_spec(tmp_path, output_path=str(tmp_path / "out.jsonl"))
    ex.sweep(spec, seed=1, fmt="jsonl")
    objs = [json.loads(l) for l in
            (tmp_path / "out.jsonl").read_text().splitlines()]
    assert all(o["engine"] == "analytic" for o in objs)
    assert set(objs[0]) == set(ex.CSV_HEADER.split(","))


def test_sweep_manifest(tmp_path):
    spec = small_spec(tmp_path)
    m = ex.sweep(spec, seed=3)
    on_disk = json.loads(
        (tmp_path / "out.csv.manifest.json").read_text()
    )
    assert on_disk["seed"] == 3
    assert on_disk["spec"] == m["spec"]
    assert on_disk["wall_time_sec"] >= 0


def test_sweep_parallel_matches_serial(tmp_path):
    spec = small_spec(tmp_path, engines=("analytic", "simulation"))
    ex.sweep(spec, seed=2)
    serial = (tmp_path / "out.csv").read_bytes()
    ex.sweep(spec, seed=2, jobs=3)
    assert (tmp_path / "out.csv").read_bytes() == serial


def test_lambda_star_single_node_classic():
    f = ex.analytic_aaoi_fn("mg1_sequential_stage", 1, UNIT_EXP, 0.0, 1.0)
    lam, val = ex.find_lambda_star(f, (0.1, 0.9))
    assert lam == pytest.approx(0.531, abs=1e-3)
    assert val == pytest.approx(3.484, abs=1e-3)


def test_lambda_star_shifts_left_with_failures():
    f0 = ex.analytic_aaoi_fn("markov_tandem_global_failure", 2, UNIT_EXP, 0.0, 1.0)
    f5 = ex.analytic_aaoi_fn("markov_tandem_global_failure", 2, UNIT_EXP, 0.5, 1.0)
    l0, _ = ex.find_lambda_star(f0, (0.02, 0.48))
    l5, _ = ex.find_lambda_star(f5, (0.02, 0.32))
    assert l5 < l0


def test_lambda_star_no_interior_minimum():
    f = ex.analytic_aaoi_fn("mg1_sequential_stage", 1, UNIT_EXP, 0.0, 1.0)
    with pytest.raises(ex.NoInteriorMinimumError, match="no interior minimum"):
        ex.find_lambda_star(f, (0.6, 0.95))


def test_lambda_star_simulation_engine():
    f = ex.simulation_aaoi_fn("mg1_sequential_stage", 1, UNIT_EXP, 0.0, 1.0,
                              base_seed=3, horizon=3e4, replications=4)
    lam, _ = ex.find_lambda_star(f, (0.2, 0.85), coarse_points=11, tol=0.02)
    assert 0.35 < lam < 0.7


def test_canned_specs_cover_all_figures(tmp_path):
    for fid in ex.FIGURE_IDS:
        spec = ex._canned_spec(fid, tmp_path)
        assert spec.output_path.endswith(f"{fid}.csv")
    with pytest.raises(ValueError):
        ex._canned_spec("fig9z", tmp_path)


def test_cli_sweep_and_lambda_star(tmp_path):
    runner = CliRunner()
    spec = small_spec(tmp_path)
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps(spec.to_json()))
    out = runner.invoke(cli.main, ["sweep", "--config", str(cfg)])
    assert out.exit_code == 0, out.output
    assert (tmp_path / "out.csv").exists()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"model": "bogus"}))
    out = runner.invoke(cli.main, ["sweep", "--config", str(bad)])
    assert out.exit_code != 0
    assert "invalid sweep config" in out.output

    ls = tmp_path / "ls.json"
    ls.write_text(json.dumps({
        "model": "mg1_sequential_stage", "n_nodes": 1,
        "stage": {"kind": "exp", "rate": 1.0}, "alpha": 0.0, "gamma": 1.0,
        "engine": "analytic", "bracket": [0.1, 0.9],
    }))
    out = runner.invoke(cli.main, ["lambda-star", "--config", str(ls)])
    assert out.exit_code == 0, out.output
    result = json.loads(out.output.strip().splitlines()[-1])
    assert result["lambda_star"] == pytest.approx(0.531, abs=1e-3)


def test_validate_report_schema(tmp_path):
    report = ex.validate(out_dir=str(tmp_path / "val"), seed=21)
    ids = {e["id"] for e in report["entries"]}
    assert "boundary-prob-vs-oracle" in ids
    assert "system-pmf-vs-des" in ids
    for alpha in ("0.1", "0.5"):
        e = next(x for x in report["entries"]
                 if x["id"] == f"markov-age-lst-gap-alpha{alpha}")
        assert e["kind"] == "measurement"
        assert e["measured_gap"] is not None
    # self-consistency rows hold; transcription-defect rows are honest reds
    assert next(x for x in report["entries"]
                if x["id"] == "age-lst-alpha0")["passed"]
    assert not next(x for x in report["entries"]
                    if x["id"] == "boundary-prob-vs-oracle")["passed"]
    assert (tmp_path / "val" / "report.json").exists()
    txt = (tmp_path / "val" / "report.txt").read_text()
    assert "MEASURED" in txt and "PASS" in txt
    with pytest.raises(ValueError):
        ex.validate(suite="nope")
