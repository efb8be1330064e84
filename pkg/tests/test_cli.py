"""CLI tests, driven through main() with temp directories."""

import csv
import json
import time

import numpy as np
import pytest

from qnnkit.cli import main

FEASIBLE_ARCH = """\
input_dim 4
classes 2
layer v width=2 r=2
layer u width=4
layer n width=4
layer p width=2
"""

INFEASIBLE_ARCH = """\
input_dim 4
classes 2
layer v width=2
layer u width=3
layer u width=2
"""

VUN_ARCH = """\
input_dim 4
classes 1
layer v width=2 r=2
layer u width=1
layer n width=1
"""

XOR_TRAIN = [
    "--dataset", "xor",
    "--epochs", "3",
    "--batch", "16",
]


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_feasible_architecture_exits_zero(tmp_path, capsys):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    code = main(["check", "--arch", arch, "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out
    report = json.loads((tmp_path / "out" / "check_report.json").read_text())
    assert report["passed"] is True
    assert report["mid_circuit_measurements"] == 0
    assert (tmp_path / "out" / "manifest.json").exists()


def test_check_infeasible_architecture_exits_one(tmp_path, capsys):
    arch = write(tmp_path, "bad.arch", INFEASIBLE_ARCH)
    code = main(["check", "--arch", arch, "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 1
    assert "principle 4" in out
    assert "infeasible" in out


def test_check_malformed_file_exits_two(tmp_path, capsys):
    arch = write(tmp_path, "broken.arch", "input_dim 4\nclasses 2\nlayer z width=1\n")
    code = main(["check", "--arch", arch, "--out", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 3" in err


def test_check_is_fast(tmp_path):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    start = time.monotonic()
    main(["check", "--arch", arch, "--out", str(tmp_path / "out")])
    assert time.monotonic() - start < 1.0


# ---------------------------------------------------------------------------
# train / eval
# ---------------------------------------------------------------------------


def test_train_writes_all_artifacts(tmp_path, capsys):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    out = tmp_path / "run"
    code = main(["train", "--arch", arch, *XOR_TRAIN, "--out", str(out)])
    assert code == 0
    assert "test_accuracy=" in capsys.readouterr().out

    rows = read_csv(out / "results.csv")
    assert len(rows) == 1
    assert rows[0]["architecture"] == "v*2+u+n+p"
    assert rows[0]["schema"] == "1"
    assert 0.0 <= float(rows[0]["test_accuracy"]) <= 1.0

    metrics = read_csv(out / "metrics.csv")
    assert len(metrics) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "train"
    assert manifest["config"]["seed"] == 0
    assert (out / "checkpoint.json").exists()


def test_train_refuses_infeasible_architecture(tmp_path, capsys):
    arch = write(tmp_path, "bad.arch", INFEASIBLE_ARCH)
    code = main(["train", "--arch", arch, *XOR_TRAIN, "--out", str(tmp_path / "out")])
    assert code == 1
    assert "refusing to train" in capsys.readouterr().err


def test_train_is_bit_identical_across_reruns(tmp_path):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    main(["train", "--arch", arch, *XOR_TRAIN, "--out", str(tmp_path / "a")])
    main(["train", "--arch", arch, *XOR_TRAIN, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "metrics.csv").read_text() == (
        tmp_path / "b" / "metrics.csv"
    ).read_text()
    assert (tmp_path / "a" / "results.csv").read_text() == (
        tmp_path / "b" / "results.csv"
    ).read_text()


def test_eval_untrained_checkpoint_sits_near_chance(tmp_path, capsys):
    from qnnkit.arch import vu_architecture
    from qnnkit.model import init_parameters, save_checkpoint

    arch = vu_architecture(4, 2, r1=1)
    ckpt = tmp_path / "fresh.json"
    save_checkpoint(ckpt, arch, init_parameters(arch, seed=0))
    code = main(
        ["eval", "--checkpoint", str(ckpt), "--dataset", "xor", "--out",
         str(tmp_path / "eval")]
    )
    assert code == 0
    acc = float(read_csv(tmp_path / "eval" / "results.csv")[0]["test_accuracy"])
    assert 0.25 <= acc <= 0.75  # a 2-class untrained model hovers near 1/2


def test_eval_roundtrips_checkpoint(tmp_path, capsys):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    out = tmp_path / "run"
    main(["train", "--arch", arch, *XOR_TRAIN, "--out", str(out)])
    trained = read_csv(out / "results.csv")[0]

    code = main(
        [
            "eval",
            "--checkpoint",
            str(out / "checkpoint.json"),
            "--dataset",
            "xor",
            "--out",
            str(tmp_path / "eval"),
        ]
    )
    assert code == 0
    evaluated = read_csv(tmp_path / "eval" / "results.csv")[0]
    assert float(evaluated["test_accuracy"]) == pytest.approx(
        float(trained["test_accuracy"])
    )


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_single_neuron_chain_is_exact(tmp_path, capsys):
    arch = write(tmp_path, "vun.arch", VUN_ARCH)
    out = tmp_path / "verify"
    code = main(["verify", "--arch", arch, "--samples", "10", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "verify.csv")
    assert len(rows) == 10
    assert all(float(r["max_abs_deviation"]) < 1e-9 for r in rows)
    assert all(r["argmax_agree"] == "1" for r in rows)


def test_verify_demo_path6_reports_large_deviation(tmp_path, capsys):
    arch = write(tmp_path, "vun.arch", VUN_ARCH)
    out = tmp_path / "verify"
    code = main(
        ["verify", "--arch", arch, "--samples", "2", "--demo-path6", "--out", str(out)]
    )
    assert code == 0
    demo = json.loads((out / "path6_demo.json").read_text())
    assert demo["deviation"] > 0.01
    assert "counterexample" in capsys.readouterr().out


def test_verify_respects_qubit_cap(tmp_path, capsys):
    arch = write(
        tmp_path,
        "wide.arch",
        "input_dim 16\nclasses 8\nlayer v width=4\nlayer u width=8\n",
    )
    code = main(
        [
            "verify",
            "--arch",
            str(arch),
            "--samples",
            "1",
            "--max-qubits",
            "12",
            "--out",
            str(tmp_path / "v"),
        ]
    )
    assert code == 1
    assert "needs 40 qubits" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_writes_one_row_per_r(tmp_path, capsys):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep",
            "--arch",
            arch,
            "--r-min",
            "1",
            "--r-max",
            "2",
            *XOR_TRAIN,
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert [r["r"] for r in rows] == ["1", "2"]


def test_sweep_single_value_gives_single_row(tmp_path):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    out = tmp_path / "sweep"
    main(
        ["sweep", "--arch", arch, "--r-min", "2", "--r-max", "2", *XOR_TRAIN,
         "--out", str(out)]
    )
    assert len(read_csv(out / "sweep.csv")) == 1


def test_sweep_rejects_inverted_range(tmp_path, capsys):
    arch = write(tmp_path, "ok.arch", FEASIBLE_ARCH)
    code = main(
        ["sweep", "--arch", arch, "--r-min", "3", "--r-max", "1", "--out",
         str(tmp_path / "s")]
    )
    assert code == 2
