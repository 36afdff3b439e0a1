import json
import subprocess
import sys

import pytest

from stepwise_ids.cli import build_parser, main, parse_counts
from stepwise_ids.errors import DataError

FAST = ["--trees", "3", "--max-depth", "8"]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(out), "--divisor", "400", "--noise", "1",
                 "--off-axis-std", "0", "--seed", "3"]) == 0
    return out


def _data_args(d):
    return ["--train", str(d / "train.csv"), "--test", str(d / "test.csv")]


def test_synth_writes_pair_and_manifest(synth_dir):
    for name in ("train.csv", "test.csv", "schema.txt", "synth_spec.txt", "manifest.json"):
        assert (synth_dir / name).is_file()
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert manifest["command"] == "synth" and manifest["seed"] == 3
    assert set(manifest["datasets"]) == {"train", "test"}


def test_stats_includes_fuzzers(synth_dir, tmp_path, capsys):
    # the default synthetic pair omits Fuzzers, so regenerate with it
    data = tmp_path / "fz"
    assert main(["synth", "--out", str(data), "--divisor", "400", "--include-fuzzers"]) == 0
    out = tmp_path / "stats"
    assert main(["stats", "--train", str(data / "train.csv"), "--out", str(out)]) == 0
    stats = json.loads((out / "stats.json").read_text())
    assert "Fuzzers" in json.dumps(stats)


def test_detect_outputs(synth_dir, tmp_path):
    out = tmp_path / "detect"
    assert main(["detect", *_data_args(synth_dir), *FAST, "--out", str(out)]) == 0
    report = json.loads((out / "detection.json").read_text())
    assert report["overall_error_pct"] + report["overall_accuracy_pct"] == 100
    assert (out / "model.bin").read_bytes().startswith(b"SWIDSMDL")
    manifest = json.loads((out / "manifest.json").read_text())
    assert "model.bin" in manifest["outputs"] and "train_and_evaluate" in manifest["phase_times_s"]


def test_select_outputs_and_sweep(synth_dir, tmp_path):
    out = tmp_path / "select"
    assert main(["select", *_data_args(synth_dir), "--learner", "tree", "--out", str(out),
                 "--counts", "1..99"]) == 0
    subset = (out / "subset.txt").read_text().split()
    assert subset and all(name.startswith(("x", "noise", "proto")) for name in subset)
    assert (out / "selection_trace.csv").read_text().startswith("iteration,feature,criterion_pct")
    assert (out / "sweep.csv").is_file()


def test_categorize_and_compare(synth_dir, tmp_path):
    out = tmp_path / "cat"
    assert main(["categorize", *_data_args(synth_dir), *FAST, "--out", str(out)]) == 0
    for name in ("categorize_single.json", "categorize_cascade.json", "comparison.json",
                 "cascade_spec.ini", "models/cascade_stage_1.bin", "models/single_Generic.bin"):
        assert (out / name).is_file(), name
    again = tmp_path / "cmp"
    assert main(["compare", str(out / "categorize_single.json"), str(out / "categorize_cascade.json"),
                 "--out", str(again)]) == 0
    assert (again / "comparison.json").read_text() == (out / "comparison.json").read_text()


def test_custom_cascade_spec_file(synth_dir, tmp_path):
    spec = tmp_path / "spec.ini"
    spec.write_text("[stage 1]\npopulation = Normal, Generic, Exploits, DoS, Analysis, Backdoor, "
                    "Reconnaissance, Shellcode, Worm\npositive = Generic, Exploits, DoS, Analysis, "
                    "Backdoor, Reconnaissance, Shellcode, Worm\n\n[stage 2]\npopulation = Generic, "
                    "Exploits, DoS, Analysis, Backdoor, Reconnaissance, Shellcode, Worm\npositive = "
                    "Generic\n\n[stage 3]\npopulation = Exploits, DoS, Analysis, Backdoor, "
                    "Reconnaissance, Shellcode, Worm\npositive = Exploits, DoS, Analysis, Backdoor\n"
                    "\n[stage 4]\npopulation = Exploits, DoS, Analysis, Backdoor\npositive = Exploits, DoS\n"
                    "\n[stage 5]\npopulation = Exploits, DoS\npositive = Exploits\n"
                    "\n[stage 6]\npopulation = Analysis, Backdoor\npositive = Analysis\n"
                    "\n[stage 7]\npopulation = Reconnaissance, Shellcode, Worm\npositive = Reconnaissance\n"
                    "\n[stage 8]\npopulation = Shellcode, Worm\npositive = Shellcode\n")
    out = tmp_path / "custom"
    assert main(["categorize", *_data_args(synth_dir), *FAST, "--strategy", "cascade",
                 "--cascade-spec", str(spec), "--out", str(out)]) == 0
    report = json.loads((out / "categorize_cascade.json").read_text())
    assert [s["stage_id"] for s in report["stages"]] == [str(i) for i in range(1, 9)]


def test_invalid_cascade_spec_exit_code(synth_dir, tmp_path, capsys):
    spec = tmp_path / "bad.ini"
    spec.write_text("[stage 1]\npopulation = Normal, DoS\npositive = Worm\n")
    code = main(["categorize", *_data_args(synth_dir), *FAST, "--strategy", "cascade",
                 "--cascade-spec", str(spec)])
    assert code == 2 and "error" in capsys.readouterr().err


def test_missing_file_exit_code_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    code = main(["detect", "--train", str(missing), "--test", str(missing)])
    assert code == 2 and "nope.csv" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    assert main(["detect"]) == 2
    assert "--train" in capsys.readouterr().err


def test_env_override_and_flag_precedence(monkeypatch):
    monkeypatch.setenv("IDSCAT_SEED", "11")
    monkeypatch.setenv("IDSCAT_INCLUDE_FUZZERS", "yes")
    from stepwise_ids.cli import apply_env_defaults
    parser = build_parser()
    apply_env_defaults(parser)
    args = parser.parse_args(["detect"])
    assert args.seed == 11 and args.include_fuzzers
    assert parser.parse_args(["detect", "--seed", "4"]).seed == 4


def test_env_override_with_bad_choice(monkeypatch, capsys):
    monkeypatch.setenv("IDSCAT_LEARNER", "svm")
    assert main(["detect"]) == 2


def test_parse_counts():
    assert parse_counts("1..4", 10) == [1, 2, 3, 4]
    assert parse_counts("5,1,5", 10) == [1, 5]
    assert parse_counts("1..43", 42)[-1] == 42
    with pytest.raises(DataError):
        parse_counts("50..60", 42)


def test_console_entry_point_runs():
    result = subprocess.run([sys.executable, "-m", "stepwise_ids.cli", "--version"],
                            capture_output=True, text=True)
    assert result.returncode == 0 and "stepwise-ids" in result.stdout
