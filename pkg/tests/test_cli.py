"""The nadnn command-line driver."""

import csv
import io
import json

import numpy as np
import pytest

from nadnn.cli import main
from nadnn.localfield import FieldConfig
from nadnn.network import Network
from nadnn.testfn import TestFunction

from conftest import POS


def read_csv(path):
    return list(csv.reader(io.StringIO(path.read_text())))


def report(path):
    return {row[0]: float(row[1]) for row in read_csv(path)[1:]}


class TestEncode:
    @pytest.mark.parametrize(
        "argv,digits",
        [
            (["encode", "0.5", "--p", "2", "--depth", "4"], "1000"),
            (["encode", "0", "--p", "3", "--depth", "3"], "000"),
            (["encode", "0.75", "--p", "2", "--depth", "4"], "1100"),
        ],
    )
    def test_digits(self, capsys, argv, digits):
        assert main(argv) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == digits
        assert "rank" in out[1]

    def test_out_of_range(self, capsys):
        assert main(["encode", "1.5", "--p", "2"]) == 2

    def test_bad_flag(self, capsys):
        assert main(["encode", "0.5", "--p", "two"]) == 2


class TestSample:
    def test_writes_json(self, tmp_path):
        out = tmp_path / "f.json"
        assert main(["sample", "--target", "poly:0,1", "--p", "2", "--level", "1", "--mode", "left", "--out", str(out)]) == 0
        phi = TestFunction.load(out)
        np.testing.assert_array_equal(phi.coeffs, [0.0, 0.5])

    def test_unknown_target(self, tmp_path):
        assert main(["sample", "--target", "cosine", "--out", str(tmp_path / "x.json")]) == 2


class TestApprox:
    def test_zero_target(self, tmp_path):
        rep = tmp_path / "r.csv"
        model = tmp_path / "m.json"
        assert main(["approx", "--target", "poly:0", "--report", str(rep), "--out", str(model)]) == 0
        r = report(rep)
        assert r["error_L1"] == r["error_L2"] == r["error_Linf"] == 0.0
        assert r["theta_radius"] > 0 and r["weight_radius"] > 0
        assert Network.load(model).depth == 2

    def test_requested_norms_only(self, tmp_path):
        rep = tmp_path / "r.csv"
        assert main(["approx", "--norms", "2,inf", "--report", str(rep)]) == 0
        assert set(report(rep)) == {"error_L2", "error_Linf", "theta_radius", "weight_radius", "epsilon"}

    def test_refinement(self, tmp_path):
        errors = []
        for delta in (3, 4):
            rep = tmp_path / f"r{delta}.csv"
            args = ["approx", "--target", "sin2pi", "--p", "2", "--L", "2", "--delta", str(delta), "--M", "2"]
            assert main(args + ["--report", str(rep)]) == 0
            errors.append(report(rep)["error_L2"])
        assert errors[1] < errors[0]

    def test_target_too_large(self, tmp_path, capsys):
        assert main(["approx", "--target", "poly:3", "--report", str(tmp_path / "r.csv")]) == 2
        assert "coefficient of rank" in capsys.readouterr().err

    def test_file_target(self, tmp_path):
        f = tmp_path / "phi.json"
        TestFunction(FieldConfig(2, POS), 4, np.linspace(-1, 1, 16)).save(f)
        rep = tmp_path / "r.csv"
        assert main(["approx", "--target", str(f), "--report", str(rep)]) == 0
        assert report(rep)["error_Linf"] < 1e-15


class TestTrain:
    def test_zero_epochs(self, tmp_path):
        log = tmp_path / "log.csv"
        assert main(["train", "--epochs", "0", "--log", str(log)]) == 1
        assert log.read_text() == "epoch,cost\n"

    def test_deterministic_bytes(self, tmp_path):
        outs = []
        for i in range(2):
            log, model = tmp_path / f"log{i}.csv", tmp_path / f"m{i}.json"
            args = ["train", "--L", "2", "--delta", "2", "--epochs", "5", "--seed", "7"]
            assert main(args + ["--log", str(log), "--out", str(model)]) == 0
            outs.append((log.read_bytes(), model.read_bytes()))
        assert outs[0] == outs[1]
        assert len(read_csv(tmp_path / "log0.csv")) == 6

    def test_reference_run_ratio(self, tmp_path, capsys):
        # first reference run (seed 0, eta 0.05, batch 8): ratio 0.0478
        args = ["train", "--p", "2", "--L", "3", "--delta", "2", "--target", "sin2pi", "--seed", "0"]
        assert main(args + ["--log", str(tmp_path / "l.csv")]) == 0
        ratio = float(capsys.readouterr().err.split("ratio ")[1].split()[0])
        assert ratio < 0.06

    def test_haar_metric_large_step(self, tmp_path, capsys):
        args = ["train", "--L", "3", "--delta", "2", "--eta", "0.5", "--batch", "8", "--metric", "haar"]
        assert main(args + ["--log", str(tmp_path / "l.csv")]) == 0
        ratio = float(capsys.readouterr().err.split("ratio ")[1].split()[0])
        assert ratio < 0.5

    def test_euclidean_large_step_does_not_improve(self, tmp_path):
        args = ["train", "--L", "3", "--delta", "2", "--eta", "0.5", "--batch", "8"]
        assert main(args + ["--log", str(tmp_path / "l.csv")]) == 1

    def test_divergence(self, tmp_path, capsys):
        args = ["train", "--L", "1", "--delta", "1", "--eta", "1e300", "--M", "1e10", "--epochs", "3", "--log", str(tmp_path / "l.csv")]
        assert main(args) == 3
        assert "numeric failure" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path):
        assert main(["train", "--kind", "dense", "--delta", "0", "--log", str(tmp_path / "l.csv")]) == 2
        assert main(["train", "--p", "4", "--log", str(tmp_path / "l.csv")]) == 2

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "field": {"p": 3, "characteristic": "zero"},
            "network": {"L": 1, "delta": 1, "M": 2.0, "kind": "conv"},
            "training": {"epochs": 2, "batch": 3, "eta": 0.05, "seed": 1},
            "target": "absaw",
        }))
        model = tmp_path / "m.json"
        main(["train", "--config", str(cfg), "--epochs", "1", "--out", str(model), "--log", str(tmp_path / "l.csv")])
        net = Network.load(model)
        assert net.cfg.p == 3 and net.layers[0].kind == "conv"
        assert len(read_csv(tmp_path / "l.csv")) == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"network": {"width": 3}}))
        assert main(["train", "--config", str(cfg)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.json")]) == 2


class TestWalsh:
    def test_constant_single_row(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["walsh", "--target", "poly:1", "--level", "3", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["level", "a_digits", "re", "im", "modulus"]
        assert len(rows) == 2 and rows[1][0] == "0" and float(rows[1][2]) == pytest.approx(1.0)

    def test_rademacher_localizes(self, tmp_path):
        f = tmp_path / "r.json"
        TestFunction(FieldConfig(2, POS), 1, [1.0, -1.0]).save(f)
        out = tmp_path / "c.csv"
        assert main(["walsh", "--target", str(f), "--level", "4", "--basis", "theta", "--out", str(out)]) == 0
        rows = read_csv(out)[1:]
        assert len(rows) == 1 and rows[0][:2] == ["1", "1"]
        assert float(rows[0][4]) == pytest.approx(1.0)

    def test_truncation_non_increasing(self, tmp_path):
        err = tmp_path / "e.csv"
        assert main(["walsh", "--target", "poly:0,1", "--level", "6", "--out", str(tmp_path / "c.csv"), "--errors", str(err)]) == 0
        values = [float(r[1]) for r in read_csv(err)[1:]]
        assert len(values) == 7
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_basis_mismatch(self, tmp_path):
        assert main(["walsh", "--char", "zero", "--basis", "theta", "--out", str(tmp_path / "c.csv")]) == 2


class TestProduct:
    def test_bundle(self, tmp_path):
        models = []
        for i in range(2):
            m = tmp_path / f"m{i}.json"
            assert main(["approx", "--target", f"poly:0.{i}", "--out", str(m), "--report", str(tmp_path / "r.csv")]) == 0
            models.append(str(m))
        out = tmp_path / "b.json"
        assert main(["product", *models, "--charts", "0:1", "1:1", "--out", str(out)]) == 0
        bundle = json.loads(out.read_text())
        assert [m["chart"] for m in bundle] == [{"center": "0", "N": 1}, {"center": "1", "N": 1}]

    def test_overlap_rejected(self, tmp_path):
        m = tmp_path / "m.json"
        main(["approx", "--out", str(m), "--report", str(tmp_path / "r.csv")])
        assert main(["product", str(m), str(m), "--charts", "0:1", "01:2", "--out", str(tmp_path / "b.json")]) == 2

    def test_missing_model(self, tmp_path):
        assert main(["product", str(tmp_path / "none.json")]) == 2
