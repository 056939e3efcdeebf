import pytest

from repeater_lnc.channel import EXAMPLE_CHANNEL, load_channel
from repeater_lnc.cli import main
from repeater_lnc.coding_types import LAMBDA_R_REFERENCE, LAMBDA_REFERENCE
from repeater_lnc.evaluation import (
    gap_records, parse_mode, parse_region_csv, region_points,
)
from repeater_lnc.lp import weight_grid

EXAMPLE_YAML = "independent: true\nmarginals:\n  s: {d1: 0.15, d2: 0.25, r: 0.8}\n  r: {d1: 0.75, d2: 0.85}\n"


@pytest.fixture
def example_ch_file(tmp_path):
    path = tmp_path / "example_ch.yaml"
    path.write_text(EXAMPLE_YAML)
    return str(path)


def test_enumerate_types(capsys):
    assert main(["enumerate-types"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:154] == sorted(LAMBDA_REFERENCE)
    assert lines[154:] == list(LAMBDA_R_REFERENCE)


def test_region_csv_round_trip(capsys, example_ch_file):
    assert main(["region", "--bound", "inner-general", "--channel", example_ch_file, "--weights", "5"]) == 0
    parsed = parse_region_csv(capsys.readouterr().out)
    pts = region_points("inner-general", load_channel(example_ch_file), weight_grid(5))
    assert len(parsed["inner-general"]) == 5
    for (w1, w2, r1, r2), p in zip(parsed["inner-general"], pts):
        assert abs(r1 - p.R1) <= 1e-12 and abs(r2 - p.R2) <= 1e-12 and (w1, w2) == (p.w1, p.w2)


def test_region_all_emits_eight_curves(capsys):
    assert main(["region", "--all", "--weights", "2"]) == 0
    out = capsys.readouterr()
    assert len(parse_region_csv(out.out)) == 8
    assert "not strong-relaying" in out.err


def test_region_single_direction(capsys):
    assert main(["region", "--bound", "scheme1", "--weights", "1"]) == 0
    rows = parse_region_csv(capsys.readouterr().out)["scheme1"]
    assert rows == [(1.0, 0.0, 0.15, 0.0)]


def test_region_on_zero_channel(tmp_path, capsys):
    path = tmp_path / "zero.yaml"
    path.write_text("independent: true\nmarginals: {s: {d1: 0, d2: 0, r: 0}, r: {d1: 0, d2: 0}}\n")
    assert main(["region", "--channel", str(path), "--weights", "4"]) == 0
    rows = parse_region_csv(capsys.readouterr().out)["outer"]
    assert all(r1 == 0 and r2 == 0 for _, _, r1, r2 in rows)


def test_dump_lp_variable_count(tmp_path):
    out = tmp_path / "outer.lp"
    assert main(["dump-lp", "--bound", "outer", "--out", str(out)]) == 0
    bounds = [ln for ln in out.read_text().splitlines() if ln.endswith(">= 0") and ln.startswith(" ")]
    assert len(bounds) == 188


def test_gap_cdf_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["gap-cdf", "--samples", "4", "--seed", "12", "--mode", "arbitrary+prop3", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "index,gap" and [ln.split(",")[0] for ln in lines[1:]] == ["0", "1", "2", "3"]
    recs = gap_records(4, "arbitrary", 12)
    assert [float(ln.split(",")[1]) for ln in lines[1:]] == pytest.approx([r.gap for r in recs], abs=1e-12)
    assert "fraction_below_0.08%" in capsys.readouterr().out


def test_gap_single_sample_stable():
    (rec,) = gap_records(1, "strong-relaying", 0)
    assert rec.index == 0 and rec.rsum_outer >= rec.rsum_inner - 1e-9
    assert gap_records(1, "strong-relaying+prop2", 0) == [rec]


def test_gap_mode_parsing():
    assert parse_mode("arbitrary") == "arbitrary"
    with pytest.raises(ValueError):
        parse_mode("arbitrary+prop2")


def test_simulate_zero_rates(capsys, example_ch_file):
    assert main(["simulate", "--channel", example_ch_file, "--rates", "0,0", "--slots", "50", "--seed", "1"]) == 0
    assert "success yes" in capsys.readouterr().out


def test_simulate_with_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    argv = ["simulate", "--slots", "800", "--fraction", "0.7", "--trace", str(trace), "--prop", "3"]
    assert main(argv) == 0
    assert "rank_check agree" in capsys.readouterr().out
    assert trace.read_text().startswith("slot,op,reception,movements")


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--channel", "missing.yaml"],
        ["simulate", "--rates", "0.5"],
        ["simulate", "--rates", "0.5,0.5", "--slots", "10"],
        ["simulate", "--slots", "-1"],
        ["gap-cdf", "--samples", "0"],
        ["gap-cdf", "--mode", "sideways"],
        ["region", "--weights", "0"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_channel_document_exit_2(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("joint: {s: {'-': 1.0}, r: {'-': 1.0}}\n")
    assert main(["region", "--channel", str(path)]) == 2


def test_solver_failure_exit_3(monkeypatch):
    from repeater_lnc import cli
    from repeater_lnc.lp import LpError

    def boom(*a, **k):
        raise LpError("pivot limit exceeded")

    monkeypatch.setattr(cli, "region_points", boom)
    assert main(["region"]) == 3


def test_argparse_rejects_unknown_bound():
    with pytest.raises(SystemExit) as exc:
        main(["region", "--bound", "nope"])
    assert exc.value.code == 2


def test_builtin_channel_name():
    from repeater_lnc.cli import _channel

    assert _channel("example") is EXAMPLE_CHANNEL
