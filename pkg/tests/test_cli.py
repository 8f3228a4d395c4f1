import csv
import io
import json

import pytest

from fsorelay import cli
from fsorelay.cli import (
    EXIT_FAIL,
    EXIT_USAGE,
    RunSpec,
    UsageError,
    db_to_linear,
    format_number,
    link_params,
    main,
    parse_snr_range,
    snr_grid,
)


def test_outage_sweep_csv(tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert main(["outage", "--regime", "strong", "--trials", "2000", "-o", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 16
    assert rows[0]["gamma_avg_db"] == "10" and rows[-1]["gamma_avg_db"] == "40"
    vals = [float(r["outage_expanded"]) for r in rows]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    for r in rows:
        assert float(r["outage_factored"]) == pytest.approx(float(r["outage_expanded"]), rel=1e-8)
        assert r["trials"] == "2000"


def test_ber_sweep_to_stdout_with_plot_script(tmp_path, capsys):
    script = tmp_path / "plot.py"
    code = main(["ber", "--regime", "saturate", "--snr", "24:24:1", "--trials", "0",
                 "--M", "1", "--plot-script", str(script)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["gamma_avg_db"] for r in rows] == ["24"]
    assert all(r["closed_form_kind"] == "asymptotic" for r in rows)
    assert all(r["mc_estimate"] == "" for r in rows)
    text = script.read_text()
    compile(text, str(script), "exec")
    assert "semilogy" in text


@pytest.mark.parametrize("argv", [
    ["outage", "--regime", "calm"],
    ["outage", "--snr", "30:10:2"],
    ["outage", "--snr", "10:20"],
    ["outage", "--N", "0"],
    ["outage", "-o", "/nonexistent/dir/out.csv"],
    ["validate", "--only", "one"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_evaluation_failure_exits_1(monkeypatch, capsys):
    def boom(spec):
        raise RuntimeError("outage probability (expanded form) failed")

    monkeypatch.setattr(cli, "run_sweep", boom)
    assert main(["outage", "--trials", "0"]) == EXIT_FAIL
    assert "expanded form" in capsys.readouterr().err


def test_validate_report_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["validate", "--only", "1,11", "--workers", "1", "-o", str(a)]) == 0
    assert main(["validate", "--only", "1,11", "--workers", "4", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_helpers():
    assert parse_snr_range("10:40:2") == (10.0, 40.0, 2.0)
    assert snr_grid(10, 14, 2) == [10, 12, 14]
    assert db_to_linear(20) == pytest.approx(100.0)
    assert format_number(True) == "true"
    assert format_number(None) == ""
    assert format_number(0.1 + 0.2) == "0.3"
    with pytest.raises(UsageError):
        RunSpec(command="outage", regime="moderate", snr_step_db=0.0)


def test_eta_scales_only_the_optical_link():
    fso, rf = link_params("moderate", 20.0, eta=0.5)
    assert rf.mean_snr == pytest.approx(100.0)
    assert fso.mean_snr == pytest.approx(25.0)
    ne, _ = link_params("saturate", 20.0)
    assert ne.lam == 1.0
