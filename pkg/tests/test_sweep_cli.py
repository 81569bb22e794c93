import csv
import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from brillouin_memory.analytic import SqueezedVacuum
from brillouin_memory.cli import main
from brillouin_memory.params import SystemParams
from brillouin_memory.protocol import ProtocolConfig, Schedule, run_protocol
from brillouin_memory.scenario import SweepSpec, load_scenario
from brillouin_memory.sweep import FIGURE_COLUMNS, OutputTable, emit_csv, format_value, run_sweep

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def _cfg(**kw):
    return ProtocolConfig(SqueezedVacuum(1.0), SystemParams.from_ratios(100.0, **kw), Schedule(tau_s=10e-9))


# ---------------------------------------------------------------------------
# CSV output


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(float("nan")) == "nan"
    assert format_value(-float("inf")) == "-inf"
    assert float(format_value(np.pi)) == np.pi


def test_empty_table_is_metadata_and_header():
    buf = io.StringIO()
    emit_csv(OutputTable(("a", "b"), (), {"seed": 3, "tool": "x"}), buf)
    assert buf.getvalue() == "# seed: 3\r\n# tool: x\r\na,b\r\n"


def test_one_row_round_trips():
    row = (np.pi, -1e-300, 6.02214076e23, float("nan"))
    buf = io.StringIO()
    emit_csv(OutputTable(("w", "x", "y", "z"), (row,)), buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    parsed = list(csv.reader(io.StringIO(buf.getvalue())))
    values = [float(v) for v in parsed[1]]
    assert values[:3] == list(row[:3])
    assert np.isnan(values[3])


def test_table_validation():
    with pytest.raises(ValueError):
        OutputTable(("a", "b"), ((1.0,),))
    t = OutputTable(("a", "b"), ((1, 2), (3, 4)))
    assert t.column("b").tolist() == [2.0, 4.0]
    assert t.as_array().shape == (2, 2)


def test_emit_csv_reports_path_on_failure(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv(OutputTable(("a",)), target)


# ---------------------------------------------------------------------------
# sweeps


def test_single_point_sweep_equals_run_protocol():
    cfg = _cfg(T_en=1.0)
    table = run_sweep(cfg, SweepSpec((("T_en_K", [1.0]),)))
    assert len(table) == 1
    s = run_protocol(cfg).summary()
    assert table.column("F_read")[0] == s["F_read"]
    assert table.column("var_read")[0] == s["var_read"]
    assert table.column("tau1_ns")[0] == pytest.approx(s["tau1"] * 1e9, rel=1e-15)
    assert table.columns == ("T_en_K",) + FIGURE_COLUMNS


def test_temperature_sweep_is_monotone():
    table = run_sweep(_cfg(), SweepSpec((("T_en_K", [10.0, 0.1, 1.0, 4.0, 0.5]),)))
    assert table.column("T_en_K").tolist() == [0.1, 0.5, 1.0, 4.0, 10.0]
    assert np.all(np.diff(table.column("F_read")) <= 0)


def test_k_sweep_squeezing_is_flat():
    table = run_sweep(_cfg(T_en=1.0), SweepSpec((("Delta_as_over_Gamma", list(np.linspace(-0.2, 0.2, 9))),)))
    sq = table.column("squeezing_factor_read")
    assert np.ptp(sq) / np.max(sq) < 0.10


def test_two_axis_sweep_is_lexicographic_and_parallel_safe():
    spec = SweepSpec((("g_over_Gamma", [200.0, 50.0]), ("tau_s_ns", [10.0, 0.0, 5.0])))
    a = run_sweep(_cfg(), spec, jobs=1)
    b = run_sweep(_cfg(), spec, jobs=2)
    keys = [tuple(r[:2]) for r in a.rows]
    assert keys == sorted(keys) and len(keys) == 6
    assert np.array_equal(a.as_array(), b.as_array(), equal_nan=True)


def test_invalid_points_are_flagged_not_dropped():
    spec = SweepSpec((("g2_over_Gamma", [0.0, 100.0]),))
    cfg = ProtocolConfig(SqueezedVacuum(1.0), SystemParams.from_ratios(100.0), Schedule(None, 0.0, 2.5e-9))
    table = run_sweep(cfg, spec)
    assert len(table) == 2
    assert table.column("fallback").tolist() == [1.0, 0.0]
    assert table.column("failed").tolist() == [0.0, 0.0]
    # an automatic readout time cannot be chosen without readout coupling
    auto = run_sweep(_cfg(), spec)
    assert auto.column("failed").tolist() == [1.0, 0.0]
    assert np.isnan(auto.column("F_read")[0])


# ---------------------------------------------------------------------------
# command line


def _run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_memory_is_byte_identical(tmp_path, capsys):
    cfg = str(SCENARIOS / "squeezed_memory.ini")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run(["memory", "--config", cfg, "--out", str(a)], capsys)[0] == 0
    assert _run(["memory", "--config", cfg, "--out", str(b), "--jobs", "2"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert f"# config_hash: {load_scenario(cfg).config_hash}" in text
    assert "# seed: 1" in text


def test_cli_sweep_to_stdout(capsys):
    code, out, err = _run(["sweep", "--config", str(SCENARIOS / "k_sweep.ini"), "--jobs", "1"], capsys)
    assert code == 0
    data = [line for line in out.splitlines() if not line.startswith("#")]
    assert data[0].startswith("Delta_as_over_Gamma,tau1_ns")
    assert len(data) == 1 + 9


def test_cli_transduce_reports_peak(capsys):
    code, out, err = _run(["transduce", "--points", "101"], capsys)
    assert code == 0
    assert "peak efficiency" in err
    assert len([l for l in out.splitlines() if not l.startswith("#")]) == 102
    code, out, _ = _run(["transduce", "--k-grid", "0, 1e-3", "--points", "101"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("0.001")


def test_cli_validate_exit_codes(capsys):
    assert _run(["validate", "--draws", "2"], capsys)[0] == 0
    assert _run(["validate", "--draws", "2", "--tol", "1e-30"], capsys)[0] == 1


def test_cli_config_errors(tmp_path, capsys):
    assert _run(["memory"], capsys)[0] == 2
    assert _run(["memory", "--config", str(tmp_path / "nope.ini")], capsys)[0] == 2
    bad = tmp_path / "bad.ini"
    good = (SCENARIOS / "squeezed_memory.ini").read_text()
    bad.write_text(good.replace("Gamma_over_2pi_MHz = 1", "Gamma_over_2pi_MHz = -1"))
    code, _, err = _run(["memory", "--config", str(bad)], capsys)
    assert code == 2 and "Gamma_over_2pi_MHz" in err
    assert _run(["sweep", "--config", str(SCENARIOS / "squeezed_memory.ini")], capsys)[0] == 2
    assert _run(["memory", "--config", str(SCENARIOS / "squeezed_memory.ini"),
                 "--out", str(tmp_path / "no" / "dir.csv")], capsys)[0] == 2
    assert _run(["frobnicate"], capsys)[0] == 2
    assert _run(["memory", "--jobs", "0"], capsys)[0] == 2


def test_cli_benchmark_reports_discrepancy(capsys):
    code, out, err = _run(["benchmark", "--config", str(SCENARIOS / "ensemble_benchmark.ini"),
                           "--samples", "100", "--jobs", "1"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == "beta,n_samples,F_mean,F_stderr,benchmark,exceeds_benchmark"
    assert len(rows) == 3
    assert "complex" in err and "real" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "brillouin_memory", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "0.1.0" in proc.stdout
