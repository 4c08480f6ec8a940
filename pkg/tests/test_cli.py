import csv
import math
import subprocess
import sys

import pytest

from halfheat.cli import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, ConfigError, fmt, load_config,
                          main, parse_family)
from oracles import erfc_series

CALORIC = """
[problem]
u0 = ExpDecay(1, 1)
g0 = ExpGrow(1, 1)

[experiment]
xs = 0.5, 1, 2
ts = 0.5, 1, 2
T = 3
traces = x0:0:1, t0:0:1
corner_orders = 0, 1, 2, 3, 4, 5
"""

ERFC = """
[problem]
u0 = ExpDecay(0, 1)
g0 = Constant(1)

[experiment]
xs = 0.5, 1, 2
ts = 0.5, 1, 2
corner_orders = 0
"""

ZERO = """
[problem]
u0 = ExpDecay(0, 1)
g0 = Constant(0)

[experiment]
xs = 0.5, 1
ts = 0.5, 1
traces = x0:0:1, t0:1:1
corner_orders = 0, 2
"""


def run(tmp_path, text, command, *extra, name="out.csv"):
    cfg = tmp_path / "run.ini"
    cfg.write_text(text)
    out = tmp_path / name
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    rows = list(csv.DictReader(out.open())) if code == EXIT_OK else None
    return code, rows, out


def test_eval_caloric_grid(tmp_path):
    code, rows, _ = run(tmp_path, CALORIC, "eval")
    assert code == EXIT_OK and len(rows) == 36
    by_point = {}
    for r in rows:
        by_point.setdefault((r["x"], r["t"]), []).append(float(r["value"]))
        x, t = float(r["x"]), float(r["t"])
        assert abs(float(r["value"]) - math.exp(t - x)) <= 1e-7
        assert float(r["est_error"]) >= 0
    assert all(max(v) - min(v) <= 1e-7 for v in by_point.values())
    assert {r["representation"] for r in rows} == {"fokas", "ehrenpreis(T=3)", "gauss", "sine"}


def test_eval_zero_data(tmp_path):
    code, rows, _ = run(tmp_path, ZERO, "eval")
    assert code == EXIT_OK and rows and all(float(r["value"]) == 0 for r in rows)


def test_horizon_violation(tmp_path, capsys):
    code, _, _ = run(tmp_path, CALORIC.replace("T = 3", "T = 2"), "eval")
    assert code == EXIT_CONFIG
    assert "horizon" in capsys.readouterr().err


@pytest.mark.parametrize("text", [CALORIC, ERFC], ids=["caloric", "erfc"])
def test_compare(tmp_path, text):
    code, rows, _ = run(tmp_path, text, "compare")
    assert code == EXIT_OK
    spreads = [r for r in rows if r["kind"] == "spread"]
    assert len(spreads) == 6
    assert all(float(r["max_abs_diff"]) <= 1e-7 for r in spreads)
    (res,) = [r for r in rows if r["kind"] == "pde_residual"]
    assert float(res["max_abs_diff"]) <= 1e-6


def test_compare_zero(tmp_path):
    code, rows, _ = run(tmp_path, ZERO, "compare")
    assert code == EXIT_OK
    assert all(float(r["max_abs_diff"]) == 0 for r in rows)


def test_trace(tmp_path):
    code, rows, _ = run(tmp_path, CALORIC, "trace")
    assert code == EXIT_OK and len(rows) == 2
    assert float(rows[0]["value"]) == pytest.approx(math.e, abs=1e-6)
    assert rows[0]["converged"] == "true"
    assert float(rows[1]["value"]) == pytest.approx(math.exp(-1), abs=1e-6)
    code, rows, _ = run(tmp_path, ZERO, "trace")
    assert all(float(r["value"]) == 0 for r in rows)


def test_corner(tmp_path):
    code, rows, _ = run(tmp_path, CALORIC, "corner")
    assert code == EXIT_OK and len(rows) == 18
    assert all(r["agrees"] == "true" for r in rows)
    code, rows, _ = run(tmp_path, ERFC, "corner")
    vals = [float(r["limit"]) for r in rows]
    assert max(vals) - min(vals) > 0.3
    assert all(r["predicted"] == "" and r["compat_order"] == "-1" for r in rows)
    code, rows, _ = run(tmp_path, ZERO, "corner")
    assert all(float(r["limit"]) == 0 for r in rows)


def test_convergence(tmp_path):
    code, rows, _ = run(tmp_path, CALORIC, "convergence")
    assert code == EXIT_OK
    nodes = [r for r in rows if r["study"] == "nodes"]
    assert len(nodes) == 5
    errs = [abs(float(r["value"]) - 1.0) for r in nodes]
    assert all(a >= 4 * b for a, b in zip(errs, errs[1:]))
    radius = [r for r in rows if r["study"] == "radius"]
    assert radius and all(float(r["change"]) <= float(r["tail_bound"]) for r in radius)
    code, rows, _ = run(tmp_path, ZERO, "convergence")
    assert all(float(r["value"]) == 0 for r in rows)


def test_deterministic_and_parallel(tmp_path):
    _, _, a = run(tmp_path, ERFC, "eval", name="a.csv")
    _, _, b = run(tmp_path, ERFC, "eval", name="b.csv")
    _, _, c = run(tmp_path, ERFC, "eval", "--jobs", "3", name="c.csv")
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_plot_script(tmp_path):
    code, _, out = run(tmp_path, ERFC, "eval", "--plot-script")
    assert code == EXIT_OK
    script = out.with_suffix(".gp").read_text()
    assert str(out) in script or out.name in script


def test_plot_script_needs_file(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(ERFC)
    assert main(["eval", "--config", str(cfg), "--plot-script"]) == EXIT_CONFIG


def test_numeric_failure_exit(tmp_path):
    code, _, _ = run(tmp_path, ERFC + "\n[quadrature]\nmax_panels = 1\n", "eval")
    assert code == EXIT_NUMERIC


@pytest.mark.parametrize("bad", [
    "[problem]\nu0 = ExpDecay(1, 1)\ng0 = ExpGrow(1, 1)\ncolour = red\n",
    "[problem]\nu0 = Sinusoid(1)\ng0 = Constant(1)\n",
    "[problem]\nu0 = Constant(1)\ng0 = Constant(1)\n",
    "[problem]\nu0 = ExpDecay(1, 1)\n",
    "[problem]\nu0 = ExpDecay(1, 1)\ng0 = Constant(1)\n[quadrature]\nabs_tol = 0\n",
    "[problem]\nu0 = ExpDecay(1, 1)\ng0 = Constant(1)\n[experiment]\nxs = -1\n",
    "[problem]\nu0 = ExpDecay(1, 1)\ng0 = Constant(1)\n[experiment]\ntraces = y0:0:1\n",
    "[problem]\nu0 = ExpDecay(1, 1)\ng0 = Constant(1)\n[extra]\na = 1\n",
])
def test_config_errors(tmp_path, bad):
    with pytest.raises(ConfigError):
        load_config(bad)
    code, _, _ = run(tmp_path, bad, "eval")
    assert code == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["eval", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_parse_family_and_format():
    fam = parse_family("PolyExp([1, 2], 0.5)")
    assert fam.kind == "PolyExp" and fam.params == ((1.0, 2.0), 0.5)
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) == "true" and fmt(None) == ""
    assert float(fmt(math.pi)) == math.pi


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(ERFC.replace("xs = 0.5, 1, 2", "xs = 1").replace("ts = 0.5, 1, 2", "ts = 1"))
    out = subprocess.run([sys.executable, "-m", "halfheat", "eval", "--config", str(cfg)],
                         capture_output=True, text=True, check=True).stdout
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 4
    for r in rows:
        assert float(r["value"]) == pytest.approx(erfc_series(0.5), abs=1e-10)
