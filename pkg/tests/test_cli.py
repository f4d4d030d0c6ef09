import json
import subprocess
import sys
from pathlib import Path

from spec_cases import CATALOG

ROOT = Path(__file__).resolve().parent.parent
PHI1 = str(ROOT / "spec" / "phi1.tqtl")
PHI2 = str(ROOT / "spec" / "phi2.tqtl")
PHI3 = str(ROOT / "spec" / "phi3.tqtl")
SYNTH_CONFIG = str(ROOT / "configs" / "synth_default.json")
from proto_tqtl.cli import main
from proto_tqtl.synth import script_trace
from proto_tqtl.trace import Label, write_trace


def write_traces(tmp_path):
    sat = script_trace([[0.2, 0.9]] * 6, "sat-video", Label.FAKE, Label.FAKE, CATALOG)
    unsat = script_trace([[0.45, 0.9]] * 6, "unsat-video", Label.FAKE, Label.FAKE, CATALOG)
    neg = script_trace([[0.9, 0.2]] * 6, "neg-video", Label.REAL, Label.REAL, CATALOG)
    paths = []
    for t in (sat, unsat, neg):
        p = tmp_path / f"{t.video_id}.trace"
        write_trace(t, p)
        paths.append(str(p))
    return paths


def test_spec_check_ok(capsys):
    assert main(["spec-check", PHI2]) == 0
    out = capsys.readouterr().out
    assert out.startswith("always freeze t . forall p at t .")


def test_spec_check_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.tqtl"
    bad.write_text("always freeze . t")
    assert main(["spec-check", str(bad)]) == 1
    assert "parse error" in capsys.readouterr().err


def test_spec_check_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.tqtl"
    empty.write_text("")
    assert main(["spec-check", str(empty)]) == 1


def test_spec_check_scope_error(tmp_path, capsys):
    unbound = tmp_path / "unbound.tqtl"
    unbound.write_text("freeze t . S(t, p) > 0.5\n")
    assert main(["spec-check", str(unbound)]) == 2
    assert "'p'" in capsys.readouterr().err


def test_spec_check_missing_file(capsys):
    assert main(["spec-check", "no/such/file.tqtl"]) == 1


def test_verify_builtin_phi2(tmp_path, capsys):
    paths = write_traces(tmp_path)
    assert main(["verify", "--spec", "phi2", "--trace", paths[0], "--trace", paths[2]]) == 0
    out = capsys.readouterr().out
    assert "SAT" in out and "(+)" in out and "100.00" in out


def test_verify_mixed_set_report_block(tmp_path, capsys):
    paths = write_traces(tmp_path)
    code = main(["verify", "--spec", "phi2"] + [f for p in paths for f in ("--trace", p)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    table = [l for l in lines if l.startswith(("(+)", "(-)", "all"))]
    assert len(table) == 3
    assert table[0].split()[:2] == ["(+)", "50.00"]
    assert table[1].split()[:2] == ["(-)", "100.00"]
    assert table[2].split()[:2] == ["all", "66.67"]


def test_verify_strict_exit_code(tmp_path, capsys):
    paths = write_traces(tmp_path)
    assert main(["verify", "--spec", "phi2", "--trace", paths[1], "--strict"]) == 3
    assert main(["verify", "--spec", "phi2", "--trace", paths[0], "--strict"]) == 0


def test_verify_json_schema(tmp_path, capsys):
    paths = write_traces(tmp_path)
    assert main(["verify", "--spec", "phi3", "--trace", paths[0], "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"spec", "class_source", "results", "groups"}
    assert doc["class_source"] == "predicted"
    assert set(doc["groups"]) == {"positive", "negative", "all"}
    result = doc["results"][0]
    assert set(result) == {"video_id", "ground_truth", "predicted", "verdict", "robustness"}
    assert result["verdict"] == "SAT"
    assert isinstance(result["robustness"], float)
    stats = doc["groups"]["all"]
    assert stats == {"total": 1, "sat": 1, "unsat": 0, "inconclusive": 0, "percent_satisfied": 100.0}


def test_verify_spec_file_path_and_trace_dir(tmp_path, capsys):
    write_traces(tmp_path)
    code = main(["verify", "--spec", PHI3, "--trace-dir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "neg-video" in out and "sat-video" in out


def test_verify_builtin_flags_rejected_for_spec_files(tmp_path, capsys):
    paths = write_traces(tmp_path)
    code = main(["verify", "--spec", PHI2, "--trace", paths[0], "--ceiling", "0.3"])
    assert code == 1
    assert "--ceiling" in capsys.readouterr().err


def test_verify_unreadable_trace_aborts_with_path(tmp_path, capsys):
    missing = tmp_path / "missing.trace"
    assert main(["verify", "--spec", "phi2", "--trace", str(missing)]) == 1
    assert "missing.trace" in capsys.readouterr().err


def test_verify_scope_error_in_spec_file(tmp_path, capsys):
    paths = write_traces(tmp_path)
    unbound = tmp_path / "unbound.tqtl"
    unbound.write_text("freeze t . S(t, p) > 0.5\n")
    assert main(["verify", "--spec", str(unbound), "--trace", paths[0]]) == 2


def test_verify_class_source_flag(tmp_path, capsys):
    # predicted REAL / ground-truth FAKE: phi2's FAKE antecedent only fires
    # under --class-source ground-truth, where the 0.45 real score violates
    t = script_trace([[0.45, 0.9]] * 4, "v", Label.FAKE, Label.REAL, CATALOG)
    p = tmp_path / "v.trace"
    write_trace(t, p)
    assert main(["verify", "--spec", "phi2", "--trace", str(p), "--strict"]) == 0
    assert (
        main(
            ["verify", "--spec", "phi2", "--trace", str(p), "--strict", "--class-source", "ground-truth"]
        )
        == 3
    )


def test_verify_group_by_predicted(tmp_path, capsys):
    # ground truth FAKE but predicted REAL: the (+)/(-) rows move with --group-by
    t = script_trace([[0.2, 0.2]] * 4, "v", Label.FAKE, Label.REAL, CATALOG)
    p = tmp_path / "v.trace"
    write_trace(t, p)
    assert main(["verify", "--spec", "phi3", "--trace", str(p), "--json"]) == 0
    by_truth = json.loads(capsys.readouterr().out)
    assert by_truth["groups"]["positive"]["total"] == 1
    assert by_truth["groups"]["negative"]["total"] == 0
    assert main(["verify", "--spec", "phi3", "--trace", str(p), "--json", "--group-by", "predicted"]) == 0
    by_prediction = json.loads(capsys.readouterr().out)
    assert by_prediction["groups"]["positive"]["total"] == 0
    assert by_prediction["groups"]["negative"]["total"] == 1


def test_bad_flag_value_exits_one(capsys):
    assert main(["verify", "--spec", "phi2", "--jobs", "not-a-number"]) == 1
    err = capsys.readouterr().err
    assert "--jobs" in err


def test_gen_data_defaults_and_flag_override(tmp_path, capsys):
    out = tmp_path / "d.dataset"
    assert main(["gen-data", "--clips-per-class", "2", "--seed", "5", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "seed = 5" in text.replace("'", "") and out.exists()


def test_gen_data_config_file(tmp_path, capsys):
    out = tmp_path / "d.dataset"
    assert main(["gen-data", "--config", SYNTH_CONFIG, "--clips-per-class", "1", "--out", str(out)]) == 0
    assert out.exists()


def test_full_pipeline_via_cli(tmp_path, capsys):
    data = tmp_path / "toy.dataset"
    model = tmp_path / "toy.model"
    trace = tmp_path / "toy.trace"
    assert main(["gen-data", "--config", SYNTH_CONFIG, "--clips-per-class", "4", "--out", str(data)]) == 0
    assert main(["train", "--data", str(data), "--m-k", "2", "--epochs", "30", "--out", str(model)]) == 0
    out = capsys.readouterr().out
    assert "resolved training config:" in out and "seed = 0" in out
    assert "initial loss" in out and "final loss" in out
    assert main(["project", "--model", str(model), "--data", str(data)]) == 0
    grounded = (tmp_path / "toy.model").read_text()
    assert '"grounding": [' in grounded
    assert main([
        "gen-trace", "--model", str(model), "--data", str(data), "--video-id", "toy",
        "--ground-truth", "FAKE", "--out", str(trace),
    ]) == 0
    assert main(["verify", "--spec", "phi3", "--trace", str(trace)]) == 0


def test_gen_trace_class_filter(tmp_path, capsys):
    data = tmp_path / "d.dataset"
    model = tmp_path / "m.model"
    trace = tmp_path / "t.trace"
    assert main(["gen-data", "--clips-per-class", "3", "--out", str(data)]) == 0
    assert main(["train", "--data", str(data), "--m-k", "1", "--epochs", "10", "--out", str(model)]) == 0
    assert main([
        "gen-trace", "--model", str(model), "--data", str(data), "--class-filter", "REAL",
        "--video-id", "pure", "--ground-truth", "REAL", "--out", str(trace),
    ]) == 0
    out = capsys.readouterr().out
    assert "3 frames" in out  # only the REAL clips remain


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "proto_tqtl.cli", "spec-check", PHI1],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("eventually freeze t .")
