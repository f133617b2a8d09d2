import json
import subprocess
import sys

import numpy as np
import pytest

from distrep.cli import main
from distrep.io import quantiles_from_csv
from distrep.wasserstein import DistanceMatrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def ok(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    assert main(["simulate", "--config", "n_subjects=30 days=2", "--seed", "4", "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def quantiles(cohort, tmp_path_factory):
    path = tmp_path_factory.mktemp("q") / "q.csv"
    assert main(["quantile", "--input", str(cohort / "cgm.csv"), "--out", str(path), "--points", "100"]) == 0
    return path


class TestExitCodes:
    def test_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0 and "simulate" in out

    def test_subcommand_help(self, capsys):
        assert run(capsys, "cluster", "--help")[0] == 0

    def test_unknown_command(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 2
        assert json.loads(err)["error"] == "UsageError"

    def test_missing_seed(self, capsys, quantiles):
        code, _, err = run(capsys, "cluster", "--quantiles", quantiles, "-k", 2)
        assert code == 2 and "--seed" in json.loads(err)["message"]

    def test_bad_threads(self, capsys):
        assert run(capsys, "--threads", "0", "simulate", "--seed", 1, "--out", "x")[0] == 2

    def test_missing_file_is_data_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "ingest", "--input", tmp_path / "nope.csv")
        assert code == 1
        assert len(err.strip().splitlines()) == 1
        json.loads(err)

    def test_unparseable_rows(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("subject_id,timestamp,glucose\nS1,yesterday,100\n")
        code, _, err = run(capsys, "ingest", "--input", bad)
        assert code == 1 and json.loads(err)["error"] == "UnparseableRow"

    def test_bad_config(self, capsys, tmp_path):
        assert run(capsys, "simulate", "--config", "days=9", "--seed", 1, "--out", tmp_path)[0] == 2
        assert run(capsys, "simulate", "--config", "colour=red", "--seed", 1, "--out", tmp_path)[0] == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "distrep", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and "distrep" in proc.stdout


class TestPipeline:
    def test_simulate_outputs(self, cohort):
        assert (cohort / "cgm.csv").exists() and (cohort / "biomarkers.csv").exists()
        manifest = json.loads((cohort / "cgm.csv.manifest.json").read_text())
        assert manifest["command"] == "simulate" and manifest["seed"] == 4
        assert set(manifest) == {"command", "parameters", "input_digests", "seed", "tool_version"}

    def test_ingest_reports_gap_day(self, capsys, tmp_path):
        lines = ["subject_id,timestamp,glucose"]
        for k in range(2 * 288):
            h = (k * 5) / 60
            if 24 + 10 < h < 24 + 13:
                continue
            lines.append(f"A,2022-01-0{1 + int(h // 24)}T{int(h % 24):02d}:{k * 5 % 60:02d}:00,{100 + k % 7}")
        path = tmp_path / "a.csv"
        path.write_text("\n".join(lines) + "\n")
        doc = ok(capsys, "ingest", "--input", path)
        (subject,) = doc["result"]["subjects"]
        assert subject["discarded_days"] == ["2022-01-02"]
        assert doc["manifest"]["input_digests"][str(path)].startswith("sha256:")

    def test_quantiles_and_distmat(self, capsys, quantiles, tmp_path):
        qs = quantiles_from_csv(quantiles.read_text())
        assert len(qs) == 30 and qs[0].values.size == 100
        ok(capsys, "distmat", "--quantiles", quantiles, "--out", tmp_path / "d.csv", "--binary", tmp_path / "d.bin")
        square = DistanceMatrix.from_csv((tmp_path / "d.csv").read_text())
        binary = DistanceMatrix.from_bytes((tmp_path / "d.bin").read_bytes())
        np.testing.assert_array_equal(square.entries, binary.entries)

    def test_density(self, capsys, cohort, tmp_path):
        doc = ok(capsys, "density", "--input", cohort / "cgm.csv", "--out", tmp_path / "g.csv")
        assert len(doc["result"]["bandwidths"]) == 30

    def test_frechet_mean(self, capsys, quantiles):
        doc = ok(capsys, "frechet-mean", "--quantiles", quantiles)
        assert doc["result"]["n"] == 30 and doc["result"]["frechet_variance"] > 0

    def test_regressions(self, capsys, cohort, quantiles, tmp_path):
        doc = ok(capsys, "regress-scalar", "--quantiles", quantiles, "--responses", cohort / "biomarkers.csv", "--response", "a1c")
        assert doc["result"]["r2_loo"] > 0.5
        doc = ok(
            capsys, "regress-density", "--quantiles", quantiles, "--covariates", cohort / "biomarkers.csv",
            "--columns", "level,ou_sd", "--out", tmp_path / "fit.csv",
        )
        assert 0 < doc["result"]["r2"] <= 1

    def test_tests_and_cluster(self, capsys, cohort, quantiles, tmp_path):
        labels = cohort / "biomarkers.csv"
        doc = ok(capsys, "anova", "--quantiles", quantiles, "--labels", labels, "--groups", "archetype", "--seed", 1, "--reps", 50)
        assert 0 < doc["result"]["p_value"] <= 1
        code, _, err = run(capsys, "energy-test", "--quantiles", quantiles, "--labels", labels, "--groups", "archetype", "--seed", 1)
        assert code == 1 and "2 groups" in json.loads(err)["message"]
        doc = ok(capsys, "cluster", "--quantiles", quantiles, "-k", 3, "--seed", 2, "--out", tmp_path / "c.csv")
        assert set(doc["result"]["labels"]) == {1, 2, 3}

    def test_tir(self, capsys, cohort, tmp_path):
        ok(capsys, "tir", "--input", cohort / "cgm.csv", "--cutoffs", "ada", "--out", tmp_path / "ada.csv")
        doc = ok(
            capsys, "tir", "--input", cohort / "cgm.csv", "--cutoffs", "deciles",
            "--normo-ids", cohort / "normo_ids.txt", "--out", tmp_path / "dec.csv",
        )
        assert len(doc["result"]["cutoffs"]) == 9
        header = (tmp_path / "dec.csv").read_text().splitlines()[0].split(",")
        assert len(header) == 1 + 10 + 9

    def test_report(self, capsys, cohort, tmp_path):
        doc = ok(capsys, "report", "--cohort", cohort, "--out", tmp_path / "rep")
        assert (tmp_path / "rep" / "r2_table.csv").exists()
        assert json.loads((tmp_path / "rep" / "report.json").read_text()) == doc
        assert set(doc["result"]["glucodensity_wins"]) == {"a1c", "variance", "homa_ir"}


class TestReproducibility:
    def test_same_manifest_same_output(self, capsys, quantiles, tmp_path):
        a = run(capsys, "cluster", "--quantiles", quantiles, "-k", 3, "--seed", 5)[1]
        b = run(capsys, "--threads", "4", "cluster", "--quantiles", quantiles, "-k", 3, "--seed", 5)[1]
        assert a == b

    def test_simulate_bytes_identical(self, tmp_path):
        for name, threads in (("a", "1"), ("b", "4")):
            assert main(["--threads", threads, "simulate", "--config", "n_subjects=5", "--seed", "9", "--out", str(tmp_path / name)]) == 0
        for f in ("cgm.csv", "biomarkers.csv", "normo_ids.txt"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
