import json

import numpy as np
import pytest

from corcomp import read_tensor, summarize
from corcomp.cli import cli_main


def run(argv, capsys):
    code = cli_main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def exact_tensor_file(tmp_path, capsys):
    path = tmp_path / "x.tns"
    code = cli_main(
        ["synth", "--dims", "20", "15", "8", "--rank", "3", "--noise", "0",
         "--dist", "gaussian", "--seed", "1", "--out", str(path)]
    )
    capsys.readouterr()
    assert code == 0
    return path


class TestSynthAndCorcondia:
    def test_pipeline_prints_100(self, exact_tensor_file, capsys):
        code, out, _ = run(
            ["corcondia", "--input", str(exact_tensor_file), "--ranks", "3",
             "--tol", "1e-12", "--max-iter", "2000", "--restarts", "2"],
            capsys,
        )
        assert code == 0
        rank, value = out.strip().split("\t")
        assert rank == "3"
        assert abs(float(value) - 100.0) <= 1e-6
        assert value == f"{float(value):.6f}"

    def test_synth_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.tns", tmp_path / "b.tns"
        for path in (a, b):
            code, _, _ = run(
                ["synth", "--dims", "6", "5", "4", "--rank", "2", "--noise", "0.1",
                 "--seed", "9", "--out", str(path)],
                capsys,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_ranks_table(self, exact_tensor_file, capsys):
        code, out, _ = run(
            ["corcondia", "--input", str(exact_tensor_file), "--ranks", "1", "2", "3",
             "--tol", "1e-10", "--restarts", "2"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert [ln.split("\t")[0] for ln in lines] == ["1", "2", "3"]


class TestCompressCommand:
    def test_half_ratio_dims(self, tmp_path, capsys):
        src = tmp_path / "x.tns"
        run(["synth", "--dims", "268", "44", "7", "--rank", "3", "--noise", "0",
             "--seed", "1", "--out", str(src)], capsys)
        out_path = tmp_path / "c.tns"
        code, _, _ = run(
            ["compress", "--input", str(src), "--scheme", "orthonormal",
             "--ratio", "0.5", "--seed", "2", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert read_tensor(out_path).dims == (134, 22, 7)

    def test_tucker_scheme(self, exact_tensor_file, tmp_path, capsys):
        out_path = tmp_path / "c.tns"
        code, _, _ = run(
            ["compress", "--input", str(exact_tensor_file), "--scheme", "tucker",
             "--ratio", "0.5", "--seed", "0", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert read_tensor(out_path).dims == (10, 7, 8)


class TestDecomposeCommand:
    def test_cp_factors_written(self, exact_tensor_file, tmp_path, capsys):
        prefix = tmp_path / "fit"
        code, out, _ = run(
            ["decompose", "--input", str(exact_tensor_file), "--rank", "3",
             "--restarts", "2", "--out-prefix", str(prefix)],
            capsys,
        )
        assert code == 0
        assert "fit=" in out
        A = np.loadtxt(tmp_path / "fit_A.csv", delimiter=",")
        assert A.shape == (20, 3)

    def test_tucker_writes_core(self, exact_tensor_file, tmp_path, capsys):
        prefix = tmp_path / "tk"
        code, out, _ = run(
            ["decompose", "--input", str(exact_tensor_file), "--tucker-dims",
             "3", "3", "3", "--out-prefix", str(prefix)],
            capsys,
        )
        assert code == 0
        core = read_tensor(tmp_path / "tk_core.tns")
        assert core.dims == (3, 3, 3)


class TestExperimentCommand:
    BASE = ["experiment", "--rank", "3", "--schemes", "gaussian", "orthonormal", "tucker",
            "--ratios", "0.5", "--samples-gaussian", "3", "--samples-orthonormal", "3",
            "--samples-tucker", "2", "--seed", "5", "--restarts", "2",
            "--max-iter", "150", "--tol", "1e-7"]

    @pytest.fixture
    def noisy_file(self, tmp_path, capsys):
        path = tmp_path / "noisy.tns"
        run(["synth", "--dims", "24", "18", "7", "--rank", "3", "--noise", "0.05",
             "--seed", "3", "--out", str(path)], capsys)
        return path

    def test_rerun_byte_identical_json(self, noisy_file, tmp_path, capsys):
        outs = []
        for name in ("r1.json", "r2.json"):
            out_json = tmp_path / name
            code, _, _ = run(
                self.BASE + ["--input", str(noisy_file), "--out-json", str(out_json)],
                capsys,
            )
            assert code == 0
            outs.append(out_json.read_bytes())
        assert outs[0] == outs[1]

    def test_csv_agrees_with_json_raw_samples(self, noisy_file, tmp_path, capsys):
        out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
        code, _, _ = run(
            self.BASE + ["--input", str(noisy_file), "--out-json", str(out_json),
                         "--out-csv", str(out_csv)],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_json.read_text())
        rows = out_csv.read_text().strip().splitlines()
        header = rows[0].split(",")
        assert header[:3] == ["scheme", "ratio", "n"]
        for cell, row in zip(doc["cells"], rows[1:]):
            fields = dict(zip(header, row.split(",")))
            stats = summarize([max(v, 0.0) for v in cell["raw_samples"]])
            assert fields["scheme"] == cell["scheme"]
            assert float(fields["ratio"]) == cell["ratio"]
            for name, got in (
                ("min", stats.min), ("q1", stats.q1), ("median", stats.median),
                ("q3", stats.q3), ("max", stats.max),
                ("lower_whisker", stats.lower_whisker),
                ("upper_whisker", stats.upper_whisker),
                ("smoothed_mean", stats.smoothed_mean),
            ):
                assert abs(float(fields[name]) - got) <= 1e-12
            assert int(fields["n_outliers"]) == len(stats.outliers)

    def test_config_file_with_flag_override(self, noisy_file, tmp_path, capsys):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text(
            "\n".join(
                [
                    f"input = {noisy_file}",
                    "rank = 3",
                    "schemes = orthonormal",
                    "ratios = 0.5, 0.2",
                    "samples-orthonormal = 2",
                    "seed = 11",
                    "restarts = 2",
                    "max-iter = 120",
                    "tol = 1e-7",
                    "# a comment",
                ]
            )
        )
        out_json = tmp_path / "r.json"
        code, _, _ = run(
            ["experiment", "--config", str(cfg_file), "--ratios", "0.5",
             "--out-json", str(out_json)],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_json.read_text())
        assert doc["config"]["ratios"] == [0.5]  # flag overrode the file
        assert doc["config"]["schemes"] == ["orthonormal"]
        assert doc["config"]["master_seed"] == 11

    def test_unknown_flag_exits_2(self, capsys):
        code, _, _ = run(["experiment", "--frobnicate"], capsys)
        assert code == 2

    def test_infeasible_grid_exits_2(self, noisy_file, capsys):
        code, _, err = run(
            self.BASE + ["--input", str(noisy_file), "--ratios", "0.04"], capsys
        )
        assert code == 2
        assert "configuration error" in err

    def test_missing_input_exits_2(self, capsys):
        code, _, err = run(["experiment", "--rank", "3"], capsys)
        assert code == 2


class TestErrorPaths:
    def test_malformed_file_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.tns"
        bad.write_bytes(b"TNS3" + b"\x01" + b"\x00" * 12)
        code, _, err = run(["corcondia", "--input", str(bad), "--ranks", "1"], capsys)
        assert code == 1
        assert "error" in err

    def test_missing_subcommand_exits_2(self, capsys):
        code, _, _ = run([], capsys)
        assert code == 2

    def test_version_flag(self, capsys):
        code, out, _ = run(["--version"], capsys)
        assert code == 0
