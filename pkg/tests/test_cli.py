"""Command-line tests: tiny end-to-end runs in temporary directories,
output reproducibility, config precedence, exit codes, and figure
rendering for every figure kind."""

import json

import pytest

from krsketch.cli import main
from krsketch.figures import FigureSpec
from krsketch.records import (
    medians_by_group,
    medians_json_path,
    read_grid_csv,
    read_medians_json,
    read_sweep_csv,
)

TINY_SWEEP_R = [
    "sweep-r", "--r-grid", "16,25", "--n1", "9", "--n2", "9", "--p", "3",
    "--trials", "2", "--strategy", "case1,case2",
]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_no_command_prints_usage():
    assert main([]) == 1


def test_unknown_flag_is_usage_error(capsys):
    assert main(["sweep-r", "--bogus", "1"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_sweep_r_end_to_end(workdir):
    assert main(TINY_SWEEP_R) == 0
    kind, recs = read_sweep_csv(workdir / "sweep_r.csv")
    assert kind == "sweep_r"
    assert len(recs) == 2 * 2 * 2
    assert all(rec.wall_time_ms == 0.0 for rec in recs)
    payload = read_medians_json(workdir / "sweep_r.csv.medians.json")
    assert payload["medians"] == medians_by_group(recs, "sweep_r")
    assert payload["metadata"]["seed"] == 7
    assert payload["metadata"]["strategies"] == ["case1", "case2"]


def test_sweep_r_reruns_are_byte_identical(workdir):
    assert main(TINY_SWEEP_R) == 0
    csv_bytes = (workdir / "sweep_r.csv").read_bytes()
    json_bytes = (workdir / "sweep_r.csv.medians.json").read_bytes()
    assert main(TINY_SWEEP_R) == 0
    assert (workdir / "sweep_r.csv").read_bytes() == csv_bytes
    assert (workdir / "sweep_r.csv.medians.json").read_bytes() == json_bytes


def test_timing_flag_populates_wall_times(workdir):
    assert main(TINY_SWEEP_R + ["--timing"]) == 0
    _, recs = read_sweep_csv(workdir / "sweep_r.csv")
    assert any(rec.wall_time_ms > 0.0 for rec in recs)


def test_json_format(workdir):
    assert main(TINY_SWEEP_R + ["--format", "json", "--out", "r.json"]) == 0
    payload = json.loads((workdir / "r.json").read_text())
    assert payload["schema"].startswith("krsketch-csv v1")
    assert len(payload["records"]) == 8
    assert "nx" not in payload["records"][0]
    assert (workdir / "r.json.medians.json").exists()


def test_unknown_format_is_usage_error(workdir):
    assert main(TINY_SWEEP_R + ["--format", "tsv"]) == 1


def test_unknown_strategy_is_config_error(workdir, capsys):
    assert main(["sweep-r", "--strategy", "case9"]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_config_file_layering(workdir):
    (workdir / "cfg.json").write_text(json.dumps({
        "r_grid": "16,25", "n1": 9, "n2": 9, "p": 3,
        "trials": 2, "strategy": "case2", "seed": 11,
    }))
    assert main(["sweep-r", "--config", "cfg.json", "--trials", "3"]) == 0
    _, recs = read_sweep_csv(workdir / "sweep_r.csv")
    # flag beats config for trials; config beats defaults elsewhere
    assert {rec.trial for rec in recs} == {1, 2, 3}
    assert {rec.strategy for rec in recs} == {"case2"}
    assert {rec.n1 for rec in recs} == {9}


def test_config_key_value_format(workdir):
    (workdir / "cfg.txt").write_text(
        "# comment\nr-grid = 16,25\nn1 = 9\nn2 = 9\np = 3\ntrials = 2\nstrategy = case2\n"
    )
    assert main(["sweep-r", "--config", "cfg.txt"]) == 0
    _, recs = read_sweep_csv(workdir / "sweep_r.csv")
    assert len(recs) == 4


def test_config_unknown_key_rejected(workdir, capsys):
    (workdir / "cfg.json").write_text(json.dumps({"frobnicate": 1}))
    assert main(["sweep-r", "--config", "cfg.json"]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_sweep_n_and_sweep_p_smoke(workdir):
    assert main(["sweep-n", "--n-grid", "8,10", "--r", "16", "--p", "3",
                 "--trials", "2", "--strategy", "case2"]) == 0
    kind, recs = read_sweep_csv(workdir / "sweep_n.csv")
    assert kind == "sweep_n" and {rec.n1 for rec in recs} == {8, 10}
    assert main(["sweep-p", "--p-grid", "2,3", "--r", "16", "--n1", "8", "--n2", "8",
                 "--trials", "2", "--strategy", "case2"]) == 0
    kind, recs = read_sweep_csv(workdir / "sweep_p.csv")
    assert kind == "sweep_p" and {rec.p for rec in recs} == {2, 3}


EIT_ARGS = [
    "eit", "--nx", "4", "--r-grid", "25,64", "--trials", "2",
    "--strategy", "case2", "--noise", "1e-8",
]


def test_eit_writes_records_and_grids(workdir):
    assert main(EIT_ARGS) == 0
    kind, recs = read_sweep_csv(workdir / "eit_sweep.csv")
    assert kind == "eit_sweep"
    assert all(rec.nx == 4 and rec.sigma_star == 10.0 for rec in recs)
    label, nx, truth = read_grid_csv(workdir / "eit_sweep.grid_truth.csv")
    assert label == "truth" and nx == 4
    label, _, sigma_hat = read_grid_csv(workdir / "eit_sweep.grid_case2.csv")
    assert label == "case2" and sigma_hat.shape == (16,)


def test_eit_grids_opt_out(workdir):
    assert main(EIT_ARGS + ["--grids", "false"]) == 0
    assert not (workdir / "eit_sweep.grid_truth.csv").exists()


def test_embed_test_smoke(workdir):
    # the sampled-vs-exact bracket needs the full default sample count;
    # only the per-strategy seed loop is shortened here
    code = main(["embed-test", "--seeds", "4", "--samples", "2000",
                 "--out", "embed.json"])
    assert code == 0
    payload = json.loads((workdir / "embed.json").read_text())
    assert payload["ok"] is True
    names = {c["check"] for c in payload["checks"]}
    assert "sampled-sup-brackets-exact" in names
    assert {f"success-rate-{s}" for s in ("case1", "case2", "dense-gaussian")} <= names


def test_zeta_test_smoke(workdir):
    code = main(["zeta-test", "--draws", "20000", "--spectra", "1",
                 "--out", "zeta.json"])
    assert code == 0
    payload = json.loads((workdir / "zeta.json").read_text())
    assert payload["ok"] is True
    assert any(c["check"] == "product-normal-fourth-moment-equality"
               for c in payload["checks"])


def test_plot_sweep_kinds(workdir):
    assert main(TINY_SWEEP_R) == 0
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_r",
                 "--out", "fig_r"]) == 0
    assert (workdir / "fig_r.png").stat().st_size > 0
    assert (workdir / "fig_r.svg").stat().st_size > 0

    assert main(["sweep-n", "--n-grid", "8,10", "--r", "16", "--p", "3",
                 "--trials", "2", "--strategy", "case2"]) == 0
    assert main(["plot", "--input", "sweep_n.csv", "--kind", "sweep_n",
                 "--out", "fig_n"]) == 0
    assert (workdir / "fig_n.svg").exists()

    assert main(["sweep-p", "--p-grid", "2,3", "--r", "16", "--n1", "8", "--n2", "8",
                 "--trials", "2", "--strategy", "case2"]) == 0
    assert main(["plot", "--input", "sweep_p.csv", "--kind", "sweep_p",
                 "--out", "fig_p"]) == 0
    assert (workdir / "fig_p.png").exists()


def test_plot_eit_kinds(workdir):
    assert main(EIT_ARGS) == 0
    assert main(["plot", "--input", "eit_sweep.csv", "--kind", "eit_sweep",
                 "--out", "fig_e"]) == 0
    assert (workdir / "fig_e.png").exists()
    assert main(["plot", "--input", "eit_sweep.grid_truth.csv",
                 "--input", "eit_sweep.grid_case2.csv",
                 "--kind", "eit_panels", "--out", "fig_panels"]) == 0
    assert (workdir / "fig_panels.svg").exists()


def test_plot_requires_input_and_kind(workdir, capsys):
    assert main(["plot", "--kind", "sweep_r"]) == 1
    assert main(["plot", "--input", "x.csv"]) == 1


def test_plot_strategy_subset_and_empty_error(workdir, capsys):
    assert main(TINY_SWEEP_R) == 0
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_r",
                 "--out", "fig_sub", "--strategy", "case2"]) == 0
    # a subset with no data present aborts instead of drawing nothing
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_r",
                 "--out", "fig_none", "--strategy", "dense-gaussian"]) == 2
    assert "no data" in capsys.readouterr().err
    assert not (workdir / "fig_none.png").exists()


def test_plot_wrong_kind_for_file(workdir):
    assert main(TINY_SWEEP_R) == 0
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_n",
                 "--out", "fig_bad"]) == 2


def test_plot_verifies_medians_sidecar(workdir, capsys):
    assert main(TINY_SWEEP_R) == 0
    sidecar = medians_json_path(workdir / "sweep_r.csv")
    payload = json.loads(sidecar.read_text())
    payload["medians"][0]["median_rel_error"] *= 2.0
    sidecar.write_text(json.dumps(payload))
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_r",
                 "--out", "fig_tampered"]) == 2
    assert "disagree" in capsys.readouterr().err


def test_plot_refuses_newer_schema(workdir):
    assert main(TINY_SWEEP_R) == 0
    path = workdir / "sweep_r.csv"
    lines = path.read_text().splitlines()
    lines[0] = lines[0].replace("v1", "v2")
    path.write_text("\n".join(lines) + "\n")
    assert main(["plot", "--input", "sweep_r.csv", "--kind", "sweep_r",
                 "--out", "fig_v2"]) == 2


def test_figure_spec_validation():
    with pytest.raises(ValueError):
        FigureSpec(kind="sweep_q", inputs=("a.csv",), out_base="x")
    with pytest.raises(ValueError):
        FigureSpec(kind="sweep_r", inputs=(), out_base="x")
    with pytest.raises(ValueError):
        FigureSpec(kind="sweep_r", inputs=("a.csv",), out_base="x", scale="cubic")
