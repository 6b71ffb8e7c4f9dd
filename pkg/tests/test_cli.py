import csv
import io
import math

import pytest

from covert_aoi import analysis as an
from covert_aoi import cli
from covert_aoi.model import SystemParams


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def parse_text(text):
    pairs = (line.split("=", 1) for line in text.splitlines())
    return {k.strip(): v.strip() for k, v in pairs}


def test_fmt():
    assert cli.fmt(math.inf) == "inf"
    assert cli.fmt(-math.inf) == "-inf"
    assert cli.fmt(math.nan) == ""
    assert cli.fmt(None) == ""
    assert cli.fmt(True) == "true"
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(7) == "7"


def test_optimize_case1(capsys):
    code, out, _ = run(["optimize", "--delta", "2", "--format", "csv"], capsys)
    assert code == 0
    (row,) = parse_csv(out)
    assert row["case"] == "case1_boundary"
    assert float(row["p_star"]) == pytest.approx(0.50500, abs=1e-5)


def test_optimize_infeasible_is_an_answer(capsys):
    code, out, _ = run(["optimize", "--delta", "0.9", "--format", "csv"], capsys)
    assert code == 0
    (row,) = parse_csv(out)
    assert row["feasible"] == "false" and row["p_star"] == ""


def test_sweep_header_and_shape(capsys):
    argv = ["sweep", "--axis", "delta", "--from", "1.1", "--to", "10", "--points", "90",
            "--p-b-dbm", "10", "--format", "csv"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.splitlines()[0] == "axis,value,feasible,case,p_star,xi_bar_star,q,rho1_mw,rho2_mw"
    rows = [r for r in parse_csv(out) if r["feasible"] == "true"]
    ps = [float(r["p_star"]) for r in rows]
    assert len(rows) == 89
    assert all(b <= a + 1e-12 for a, b in zip(ps, ps[1:]))
    assert ps[0] > ps[-1]


def test_simulate_aoi_perfect_link(capsys):
    argv = ["simulate-aoi", "--p", "1", "--phi-c", "0", "--sigma-b2-dbm", "-999",
            "--seed", "1", "--slots", "10000", "--format", "csv"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.splitlines()[0] == "slots,seed,time_avg_aoi,mean_x,mean_x2,empirical_q,closed_form_aoi"
    (row,) = parse_csv(out)
    assert float(row["time_avg_aoi"]) == 1.0


def test_simulate_detection_header(capsys):
    argv = ["simulate-detection", "--p", "0.25", "--seed", "3", "--trials", "1000", "--format", "csv"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.splitlines()[0] == (
        "trials,seed,p,empirical_xi,empirical_pfa,empirical_pmd,closed_form_xi_paper,closed_form_xi_derived"
    )
    (row,) = parse_csv(out)
    assert float(row["closed_form_xi_derived"]) == pytest.approx(5 / 24, rel=1e-11)


def test_fixed_threshold_has_no_closed_form(capsys):
    argv = ["simulate-detection", "--p", "0.25", "--seed", "3", "--trials", "1000",
            "--threshold", "1e-6", "--format", "csv"]
    _, out, _ = run(argv, capsys)
    (row,) = parse_csv(out)
    assert float(row["empirical_xi"]) == pytest.approx(0.75, abs=0.05)
    assert row["closed_form_xi_paper"] == "" and row["closed_form_xi_derived"] == ""


def test_seed_required(capsys):
    code, _, err = run(["simulate-aoi", "--p", "0.5"], capsys)
    assert code == 2 and "--seed" in err


def test_analyze_with_gaw(capsys):
    code, out, _ = run(["analyze", "--p", "0.25", "--g-aw", "0.5"], capsys)
    fields = parse_text(out)
    assert code == 0
    assert fields["tau_star"] == "inf"
    assert float(fields["xi_star"]) == 0.25
    assert float(fields["xi_bar_star_paper"]) == pytest.approx(0.263888888889)


def test_text_and_csv_agree(capsys):
    base = ["simulate-aoi", "--p", "0.5", "--seed", "4", "--slots", "20000"]
    _, text, _ = run(base, capsys)
    _, csv_out, _ = run(base + ["--format", "csv"], capsys)
    assert parse_text(text) == parse_csv(csv_out)[0]


def test_csv_round_trip(capsys):
    _, out, _ = run(["analyze", "--p", "0.3", "--format", "csv"], capsys)
    (row,) = parse_csv(out)
    q = an.decode_success_prob(SystemParams())
    assert float(row["q"]) == pytest.approx(q, rel=1e-11)
    assert cli.fmt(float(row["q"])) == row["q"]
    assert float(row["xi_bar_star_derived"]) == pytest.approx(an.expected_det_error(SystemParams(), 0.3), rel=1e-11)


def test_config_file_and_override(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "link.cfg"
    cfg.write_text("# link\np_a_dbm = 10\ndelta = 3   # slots\n\nphi_c=0.02\n")
    spec = cli.parse_args(["optimize", "--config", str(cfg), "--delta", "4"])
    assert spec.params.p_a == pytest.approx(10.0)
    assert spec.params.phi_c == 0.02
    assert spec.params.delta == 4.0
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    assert cli.parse_args(["optimize"]).params.delta == 3.0


@pytest.mark.parametrize(
    "content, message",
    [("bogus = 1\n", "unknown key"), ("p_a_dbm 3\n", "expected"), ("delta = x\n", "not a number")],
)
def test_bad_config(tmp_path, capsys, content, message):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(content)
    code, _, err = run(["optimize", "--config", str(cfg)], capsys)
    assert code == 2 and message in err
    assert len(err.strip().splitlines()) == 1


def test_unreadable_config(capsys):
    code, _, err = run(["optimize", "--config", "/nonexistent/x.cfg"], capsys)
    assert code == 2 and "cannot read config" in err


def test_invalid_params(capsys):
    code, _, err = run(["optimize", "--phi-c", "1.5"], capsys)
    assert code == 2 and "phi_c out of [0,1]" in err


def test_malformed_grid(capsys):
    code, _, err = run(["sweep", "--axis", "delta", "--from", "5", "--to", "1", "--points", "3"], capsys)
    assert code == 2 and "malformed grid" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "o.csv"
    code, out, _ = run(["optimize", "--format", "csv", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("delta,feasible,case")


def test_runspec_requires_grid_only_for_sweep():
    with pytest.raises(cli.UsageError):
        cli.RunSpec(command="sweep", params=SystemParams())
    with pytest.raises(cli.UsageError):
        cli.RunSpec(command="optimize", params=SystemParams(), grid=[1.0])


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate-aoi", "--p", "0.3", "--seed", "5", "--slots", "200000"],
        ["simulate-detection", "--p", "0.3", "--seed", "5", "--trials", "200000"],
    ],
)
def test_byte_identical_across_workers(argv, capsys):
    outputs = set()
    for workers in ("1", "2", "5"):
        _, out, _ = run(argv + ["--format", "csv", "--workers", workers], capsys)
        outputs.add(out)
    assert len(outputs) == 1
