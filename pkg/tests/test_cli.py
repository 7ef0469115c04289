import csv
import json
import math

import numpy as np
import pytest

from bosim.cli import main
from bosim.core import validate_unitary
from bosim.interferometer import load_matrix


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv_rows(path):
    with open(path, encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def test_generate_fourier(tmp_path, capsys):
    out = tmp_path / "f.json"
    code, _, _ = run_cli(capsys, "generate", "--fourier", "--modes", "4", "--out", str(out))
    assert code == 0
    assert validate_unitary(load_matrix(out))


def test_generate_haar_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli(capsys, "generate", "--haar", "--modes", "6", "--seed", "9", "--out", str(a))
    run_cli(capsys, "generate", "--haar", "--modes", "6", "--seed", "9", "--out", str(b))
    assert np.array_equal(load_matrix(a).entries, load_matrix(b).entries)


def test_generate_manifest_ignored_by_loader(tmp_path, capsys):
    out = tmp_path / "u.json"
    run_cli(capsys, "generate", "--haar", "--modes", "3", "--seed", "1", "--out", str(out))
    payload = json.loads(out.read_text())
    assert payload["manifest"]["subcommand"] == "generate"
    assert load_matrix(out).modes == 3


def test_exact_hom_table(tmp_path, capsys):
    matrix = tmp_path / "bs.json"
    run_cli(capsys, "generate", "--fourier", "--modes", "2", "--out", str(matrix))
    out = tmp_path / "table.csv"
    code, _, _ = run_cli(
        capsys, "exact", "--photons", "2", "--matrix", str(matrix), "--out", str(out)
    )
    assert code == 0
    table = {row["occupation"]: float(row["probability"]) for row in read_csv_rows(out)}
    assert table["[1, 1]"] == pytest.approx(0.0, abs=1e-12)
    assert table["[2, 0]"] == pytest.approx(0.5, abs=1e-12)


def test_exact_has_manifest_header(tmp_path, capsys):
    out = tmp_path / "table.csv"
    run_cli(
        capsys, "exact", "--photons", "2", "--modes", "4", "--seed", "3", "--out", str(out)
    )
    first = out.read_text().splitlines()[0]
    assert first.startswith("# manifest: ")
    manifest = json.loads(first.removeprefix("# manifest: "))
    assert manifest["flags"]["photons"] == 2


def test_sample_byte_identical(tmp_path, capsys):
    args = [
        "sample", "--photons", "3", "--modes", "9", "--x", "1", "--eta", "1",
        "--k", "3", "--samples", "5", "--seed", "7",
    ]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_cli(capsys, *args, "--out", str(a))[0] == 0
    assert run_cli(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.jsonl.manifest.json").exists()
    lines = a.read_text().splitlines()
    assert len(lines) == 5
    assert all(len(json.loads(line)) == 9 for line in lines)


def test_sample_stdout_manifest_on_stderr(capsys):
    code, out, err = run_cli(
        capsys, "sample", "--photons", "2", "--modes", "4", "--samples", "2", "--seed", "1"
    )
    assert code == 0
    assert len(out.strip().splitlines()) == 2
    assert "manifest" in err


def test_unknown_flag_rejected(capsys):
    code, _, err = run_cli(capsys, "sample", "--photons", "2", "--modes", "4",
                           "--samples", "1", "--seed", "1", "--frobnicate")
    assert code == 1


def test_invalid_range_exits_one(capsys):
    code, _, err = run_cli(
        capsys, "sample", "--photons", "5", "--modes", "3", "--samples", "1", "--seed", "1"
    )
    assert code == 1
    assert "error" in err.lower() or "InvalidConfig" in err


def test_bounds_state_max_x(capsys):
    code, out, _ = run_cli(
        capsys, "bounds", "--mode", "state-max-x", "--photons", "90", "--k", "89",
        "--epsilon", "0.1",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(0.1 ** (1 / 90), abs=1e-5)


def test_bounds_worst_case_kind(capsys):
    code, out, _ = run_cli(
        capsys, "bounds", "--mode", "worst-case", "--photons", "4", "--k", "2", "--x", "0.5"
    )
    payload = json.loads(out)
    assert code == 0
    assert payload["kind"] == "worst_state"
    assert payload["value"] == pytest.approx(0.3125)


def test_bounds_min_k(capsys):
    code, out, _ = run_cli(
        capsys, "bounds", "--mode", "min-k", "--photons", "4", "--x", "0.5",
        "--epsilon", "0.32",
    )
    assert json.loads(out)["value"] == 2


def test_bounds_depth_threshold(capsys):
    code, out, _ = run_cli(
        capsys, "bounds", "--mode", "depth-threshold", "--photons", "100", "--k", "10",
        "--x", "1.0", "--tau", "0.5", "--depth", "4",
    )
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(math.log(10) / math.log(2))
    assert payload["simulable"] is True


def test_cost_state(capsys):
    code, out, _ = run_cli(
        capsys, "cost", "--method", "state", "--photons", "90", "--modes", "8100", "--k", "30"
    )
    payload = json.loads(out)
    assert payload["operations"] == pytest.approx(6.442851894e10, rel=1e-6)


def test_cost_point(capsys):
    code, out, _ = run_cli(capsys, "cost", "--method", "point", "--photons", "90", "--k", "0")
    payload = json.loads(out)
    assert payload["operations"] == pytest.approx(100 * 90**4 * math.log(90), rel=1e-9)


def test_cost_crossover_sentinel(capsys):
    code, out, _ = run_cli(
        capsys, "cost", "--method", "crossover", "--x", "1.0", "--eta", "1.0",
        "--n-min", "2", "--n-max", "40",
    )
    assert json.loads(out)["crossover_n"] is None


def test_figures_fig3_shape(tmp_path, capsys):
    out = tmp_path / "fig3.csv"
    code, _, _ = run_cli(
        capsys, "figures", "--which", "fig3", "--epsilon", "0.1", "--k-min", "1",
        "--k-max", "10", "--out", str(out),
    )
    assert code == 0
    rows = read_csv_rows(out)
    assert len(rows) == 10
    assert [int(r["k"]) for r in rows] == list(range(1, 11))


def test_figures_fig1_shape(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    run_cli(
        capsys, "figures", "--which", "fig1", "--n-min", "4", "--n-max", "8", "--out", str(out)
    )
    rows = read_csv_rows(out)
    assert len(rows) == 10  # two k rules per n
    assert all(0.0 <= float(r["state_max_x"]) <= 1.0 for r in rows)


def test_validate_bound_respect_passes(capsys):
    code, out, _ = run_cli(
        capsys, "validate", "--check", "bound-respect", "--photons", "3", "--x", "0.6",
        "--seed", "2",
    )
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_validate_tvd_passes(capsys):
    code, out, _ = run_cli(
        capsys, "validate", "--check", "tvd", "--photons", "2", "--modes", "4",
        "--samples", "4000", "--threshold", "0.2", "--seed", "3",
    )
    assert code == 0


def test_validate_tvd_fails_with_absurd_threshold(capsys):
    code, out, _ = run_cli(
        capsys, "validate", "--check", "tvd", "--photons", "2", "--modes", "4",
        "--samples", "1000", "--threshold", "0.0001", "--seed", "3",
    )
    assert code == 3
    assert json.loads(out)["passed"] is False


def test_validate_photon_marginal(capsys):
    code, out, _ = run_cli(
        capsys, "validate", "--check", "photon-marginal", "--photons", "6", "--modes", "8",
        "--eta", "0.6", "--x", "0.5", "--k", "2", "--samples", "5000", "--seed", "4",
    )
    assert code == 0
    assert json.loads(out)["p_value"] > 0.01


def test_version_flag(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0
