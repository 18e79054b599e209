import csv

import numpy as np
import pytest

from segregation import cli, config
from segregation.errors import ConfigError

SMALL = """\
[run]
mode = simulate
eps = 1.0

[kernels]
sigma1 = 10
sigma2 = 1.5

[initial]
rho1 = triangle(-1, 1)
rho2 = triangle(1, 1)

[particles]
N = 12
T = 0.2
snapshot_every = 0.1
snapshot_cells = 200
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_loads_defaults():
    cfg = config.loads("[run]\neps = 2\n")
    assert cfg.eps == 2.0 and cfg.N == 50 and cfg.atomization == "midpoint"
    assert cfg.triple.k.mass == 1.0 and cfg.triple.s1.mass == 1.0
    assert "particles.N = 50" in cfg.describe()


def test_loads_sigma_multiples():
    cfg = config.loads(SMALL)
    assert cfg.triple.s1.mass == 10.0 and cfg.triple.s2.mass == 1.5
    assert cfg.rho1_0.mass == pytest.approx(1.0, abs=1e-6)
    assert cfg.init2.args == (1.0, 1.0)


def test_explicit_kernels():
    cfg = config.loads("[kernels]\nk_amplitude = 1.5\nk_width = 0.05\n")
    assert cfg.triple.k.width == 0.05 and cfg.triple.k.mass == 1.5
    assert cfg.triple.s1.width == 1.0


def test_tabulated_kernel_and_table_density(tmp_path):
    x = np.linspace(-6, 6, 601)
    np.savetxt(tmp_path / "k.txt", np.column_stack([x, np.exp(-x * x / 2) / np.sqrt(2 * np.pi)]))
    y = np.linspace(-1, 1, 201)
    np.savetxt(tmp_path / "rho.txt", np.column_stack([y, 1 - np.abs(y)]))
    p = write(tmp_path, "[kernels]\nbase_family = tabulated\nbase_table = k.txt\nsigma1 = 3\n[initial]\nrho1 = table(rho.txt)\n")
    cfg = config.load(p)
    assert cfg.triple.s1.family == "tabulated" and cfg.triple.s1.mass == pytest.approx(3.0, rel=1e-6)
    assert cfg.rho1_0.mass == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("[run]\nmode = simulate\nepz = 1\n", 3, "epz"),
        ("[run]\neps = -1\n", 2, "eps"),
        ("[run]\neps = abc\n", 2, "eps"),
        ("[run]\nmode = dance\n", 2, "mode"),
        ("[particles]\nN = 1\n", 2, "N"),
        ("[initial]\n\nrho1 = hexagon(0)\n", 3, "rho1"),
        ("[initial]\natomization = random\n", 2, "atomization"),
    ],
)
def test_config_errors_carry_location(text, line, field):
    with pytest.raises(ConfigError) as e:
        config.loads(text)
    assert e.value.line == line and e.value.field == field
    assert f"line {line}" in str(e.value)


def test_empty_and_garbled_configs():
    with pytest.raises(ConfigError):
        config.loads("")
    with pytest.raises(ConfigError) as e:
        config.loads("eps = 1\n")
    assert e.value.line == 1
    with pytest.raises(ConfigError):
        config.loads("[nonsense]\nx = 1\n")


def test_simulate_outputs(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", str(write(tmp_path, SMALL)), "--out", str(out)]) == 0
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert len(snaps) == 3
    with open(snaps[0]) as fh:
        assert next(csv.reader(fh)) == ["x", "rho1", "rho2", "w", "zeta"]
    with open(out / "summary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["t", "mass1", "mass2"] and len(rows) == 4
    report = (out / "report.txt").read_text()
    assert "verdict = " in report and "particles.N = 12" in report and "particles.dt = 1e-3" in report


def test_simulate_deterministic(tmp_path):
    p = write(tmp_path, SMALL)
    cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "a")])
    cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "b")])
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_run_dispatches_on_mode(tmp_path, capsys):
    p = write(tmp_path, "[run]\nmode = coercivity-check\neps = 1\n[kernels]\nsigma1 = 10\nsigma2 = 1.5\n")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip().startswith("not-coercive,0,")


def test_steady_commands(tmp_path, capsys):
    p = write(tmp_path, "[run]\neps = 1e-3\n[kernels]\nsigma1 = 2\nsigma2 = 0.5\n[masses]\nm1 = 0.5\nm2 = 0.5\n[steady]\nL2_values = 0.8, 1.0\n")
    for cmd, name in (("steady-kr", "profile.csv"), ("steady-asymptotic", "profile.csv"), ("eps-map", "eps_map.csv")):
        out = tmp_path / cmd
        assert cli.main([cmd, "--config", str(p), "--out", str(out)]) == 0
        assert (out / name).exists() and (out / "report.txt").exists()
    text = capsys.readouterr().out
    assert "eps,0.1716947" in text


def test_exit_code_config_error(tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(write(tmp_path, ""))]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_exit_code_numeric_failure(tmp_path):
    p = write(tmp_path, "[kernels]\nsigma1 = 0.5\nsigma2 = 2\n")
    assert cli.main(["steady-kr", "--config", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_NUMERIC


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as e:
        cli.main(["dance", "--config", "x"])
    assert e.value.code == 2


def test_compare_small(tmp_path):
    text = """\
[run]
eps = 1e-2
[kernels]
sigma1 = 2
sigma2 = 0.5
[masses]
m1 = 0.5
m2 = 0.5
[initial]
rho1 = triangle(0, 0.5)
rho2 = triangle(0, 0.5)
[particles]
N = 16
[compare]
T_long = 0.05
cells = 400
"""
    out = tmp_path / "o"
    assert cli.main(["compare", "--config", str(write(tmp_path, text)), "--out", str(out)]) == 0
    with open(out / "compare.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["route_a", "route_b", "l1_w"]
    d = {(a, b): float(v) for a, b, v in rows[1:]}
    assert set(d) == {("transport", "asymptotic"), ("transport", "kr"), ("asymptotic", "kr")}
    assert all(v >= 0 for v in d.values())
