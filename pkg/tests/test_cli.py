import csv
import hashlib
import json

import pytest

from jittervan import cli
from jittervan.errors import NumericalError


def run(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMoments:
    def test_writes_json_with_unit_first_moment(self, tmp_path, capsys):
        out = tmp_path / "m.json"
        code, stdout, _ = run(
            [
                "moments", "--p-max", "3", "--beta", "0.55", "--d", "2",
                "--jitter", "uniform", "--seed", "7", "--points", "4096",
                "--replicates", "8", "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        assert stdout.count("p=") == 3
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == 1
        assert payload["results"][0]["p"] == 1
        assert payload["results"][0]["value"] == 1.0
        assert len(payload["results"]) == 3

    def test_invalid_beta_exits_2(self, capsys):
        code, _, stderr = run(["moments", "--p-max", "2", "--beta", "1.5"], capsys)
        assert code == 2
        assert "error" in stderr

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["moments", "--p-max", "2", "--beta", "0.5", "--bogus"])
        assert info.value.code == 2

    def test_reproducible_output(self, tmp_path, capsys):
        digests = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code, _, _ = run(
                [
                    "moments", "--p-max", "2", "--beta", "0.4", "--seed", "9",
                    "--points", "2048", "--replicates", "4", "--out", str(out),
                ],
                capsys,
            )
            assert code == 0
            digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert digests[0] == digests[1]


class TestMp:
    def test_values_and_support(self, tmp_path, capsys):
        out = tmp_path / "mp.json"
        code, stdout, _ = run(
            ["mp", "--p-max", "3", "--beta", "0.55", "--out", str(out)], capsys
        )
        assert code == 0
        payload = json.loads(out.read_text())
        values = {row["p"]: row["value"] for row in payload["results"]}
        assert values[1] == pytest.approx(1.0)
        assert values[2] == pytest.approx(1.55)
        assert "support" in payload


class TestSimulate:
    def test_histogram_csv(self, tmp_path, capsys):
        out = tmp_path / "hist.csv"
        eigs = tmp_path / "eigs.csv"
        code, stdout, _ = run(
            [
                "simulate", "--beta", "0.55", "--d", "3", "--budget", "1000",
                "--trials", "5", "--bins", "25", "--seed", "42",
                "--out", str(out), "--eigs-out", str(eigs),
            ],
            capsys,
        )
        assert code == 0
        assert "beta_actual" in stdout
        with open(out) as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 25
        assert set(rows[0]) == {"bin_left", "bin_right", "density"}
        mass = sum(
            (float(r["bin_right"]) - float(r["bin_left"])) * float(r["density"])
            for r in rows
        )
        assert mass == pytest.approx(1.0, abs=1e-9)
        with open(eigs) as handle:
            eig_rows = list(csv.DictReader(handle))
        assert len(eig_rows) == 5 * 729
        assert set(eig_rows[0]) == {"trial", "eigenvalue"}

    def test_infeasible_budget_exits_2(self, capsys):
        code, _, stderr = run(
            ["simulate", "--beta", "0.5", "--d", "2", "--budget", "4"], capsys
        )
        assert code == 2

    def test_bit_identical_reruns(self, tmp_path, capsys):
        digests = []
        for name in ("h1.csv", "h2.csv"):
            out = tmp_path / name
            code, _, _ = run(
                [
                    "simulate", "--beta", "0.6", "--d", "1", "--budget", "60",
                    "--trials", "3", "--bins", "12", "--seed", "5",
                    "--out", str(out),
                ],
                capsys,
            )
            assert code == 0
            digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert digests[0] == digests[1]


class TestMse:
    def test_curve_csv_and_negative_grid(self, tmp_path, capsys):
        out = tmp_path / "mse.csv"
        code, stdout, _ = run(
            [
                "mse", "--beta", "0.729", "--d", "1,2", "--snr-db", "-10:30:20",
                "--jitter", "uniform", "--trials", "4", "--budget", "300",
                "--seed", "1", "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        with open(out) as handle:
            rows = list(csv.DictReader(handle))
        assert {r["source"] for r in rows} == {"empirical", "mp", "equally_spaced"}
        assert {r["snr_db"] for r in rows} == {"-10.0", "10.0", "30.0"}
        # ideal placement never does worse than a jittered spectrum
        for db in ("-10.0", "10.0", "30.0"):
            eq = [float(r["mse"]) for r in rows if r["source"] == "equally_spaced" and r["snr_db"] == db][0]
            for r in rows:
                if r["source"] == "empirical" and r["snr_db"] == db:
                    assert eq <= float(r["mse"]) + 3 * float(r["std_err"]) + 5e-3

    def test_json_format(self, tmp_path, capsys):
        out = tmp_path / "mse.json"
        code, _, _ = run(
            [
                "mse", "--beta", "0.5", "--d", "1", "--snr-db", "0:20:10",
                "--trials", "3", "--budget", "100", "--format", "json",
                "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["kind"] == "mse" and payload["beta_target"] == 0.5
        sources = {point["source"] for point in payload["points"]}
        assert sources == {"empirical", "mp", "equally_spaced"}


class TestVerify:
    def test_all_suites_pass(self, capsys):
        code, stdout, _ = run(["verify", "--suite", "all"], capsys)
        assert code == 0
        assert "checks passed" in stdout
        assert "FAIL" not in stdout

    def test_single_suite_with_report(self, tmp_path, capsys):
        report = tmp_path / "report.json"
        code, _, _ = run(
            ["verify", "--suite", "partitions", "--report", str(report)], capsys
        )
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["kind"] == "verify"
        assert all(check["passed"] for check in payload["checks"])

    def test_failures_exit_3(self, capsys, monkeypatch):
        from jittervan import verify as verify_mod

        monkeypatch.setitem(
            cli.SUITES, "partitions", lambda seed: [verify_mod.Check("forced", False, "")]
        )
        code, stdout, _ = run(["verify", "--suite", "partitions"], capsys)
        assert code == 3
        assert "FAIL" in stdout


class TestErrorMapping:
    def test_numerical_error_exits_3(self, capsys, monkeypatch):
        def boom(args):
            raise NumericalError("forced")

        monkeypatch.setattr(cli, "_cmd_mp", boom)
        code, _, stderr = run(["mp", "--beta", "0.5"], capsys)
        assert code == 3
        assert "numerical error" in stderr
