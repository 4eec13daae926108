import csv
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radial_swirl.cli import fmt, main, read_table, ProfileError
from radial_swirl.config import ConfigError, LEDGER_COLUMNS, parse_config

MINIMAL = "mu: 1.0\nbeta: 1.0\ngamma: 2.0\nR: 1.0\nN: 32\nt_end: 0.1\npreset: equilibrium\n"
HEADER = ("t,mass,energy,dissipation_cum,energy_residual,sup_rho,G_boundary_direct,"
          "G_boundary_formula,transport_residual_norm,supnorm_ineq_slack,rho_u3,rho_u_2pd,"
          "dist_rho_L2,dist_gradu_L2,A1sq,A2sq,A3sq,cap_ok")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.solver.cfl == 0.4 and cfg.solver.viscous_scheme == "crank_nicolson"
    assert cfg.solver.advect_scheme == "muscl2" and cfg.solver.snapshot_every == 1
    assert cfg.study == "single" and cfg.columns == LEDGER_COLUMNS and cfg.rho_floor_auto
    assert cfg.resolved_solver(2.0).rho_floor == pytest.approx(2e-10)


def test_explicit_floor_is_kept():
    cfg = parse_config(MINIMAL + "rho_floor: 0.0\n")
    assert not cfg.rho_floor_auto and cfg.resolved_solver(2.0).rho_floor == 0.0


@pytest.mark.parametrize("line,key", [
    ("beta: 0", "beta"), ("mu: -1", "mu"), ("gamma: 1.0", "gamma"), ("R: 0", "R"),
    ("N: 2", "N"), ("N: 3.5", "N"), ("t_end: -1", "t_end"), ("cfl: 0", "cfl"), ("cfl: 1.5", "cfl"),
    ("dt_max: 0", "dt_max"), ("rho_floor: -1", "rho_floor"), ("snapshot_every: 0", "snapshot_every"),
    ("viscous_scheme: rk4", "viscous_scheme"), ("advect_scheme: 3", "advect_scheme"),
    ("study: sweep", "study"), ("levels: 7", "levels"), ("levels: 1", "levels"),
    ("preset: nope", "preset"), ("mu: yes", "mu"), ("mu: '1.0'", "mu"),
    ("columns: [t, bogus]", "columns"), ("columns: 3", "columns"),
])
def test_invalid_values_name_the_key(line, key):
    key_name = line.split(":")[0]
    doc = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(key_name + ":")) + "\n" + line
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.key == key


def test_unknown_key_suggests_closest():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "viscocity: 1.0\n")
    assert info.value.key == "viscocity" and "viscous_scheme" in str(info.value)


@pytest.mark.parametrize("drop", ["mu", "beta", "gamma", "R", "N", "t_end"])
def test_missing_required_key(drop):
    doc = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(drop + ":"))
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.key == drop


def test_structural_errors():
    for doc in ("[1, 2]", "mu: [", ""):
        with pytest.raises(ConfigError):
            parse_config(doc)
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "profile_path: x.csv\n")
    assert info.value.key == "preset"
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("preset: equilibrium\n", ""))
    parse_config(MINIMAL.replace("preset: equilibrium\n", "study: threshold\n").replace("beta: 1.0", "beta: 0.5"))


def test_columns_are_reordered_and_keep_t():
    cfg = parse_config(MINIMAL + "columns: [energy, mass]\n")
    assert cfg.columns == ("t", "mass", "energy")


@settings(max_examples=40, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_bools():
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0"


def test_run_equilibrium(tmp_path):
    cfg = write(tmp_path, "eq.yaml", MINIMAL)
    out = str(tmp_path / "eq.csv")
    assert main(["run", cfg, "-o", out]) == 0
    with open(out) as fh:
        assert fh.readline().strip() == HEADER
    rows = read_csv(out)
    # cfl 0.4, h = 1/32, sound speed sqrt(2): 12 steps of at most 8.84e-3 reach t = 0.1
    assert len(rows) == 13 and float(rows[-1]["t"]) == pytest.approx(0.1)
    for col in HEADER.split(","):
        vals = np.array([float(r[col]) for r in rows])
        if col == "t":
            continue
        finite = vals[np.isfinite(vals)]
        assert np.ptp(finite) <= 1e-12 * max(1.0, np.max(np.abs(finite))), col


def test_run_is_bit_reproducible(tmp_path):
    cfg = write(tmp_path, "c.yaml", """\
        mu: 0.5
        beta: 1.5
        gamma: 2.0
        R: 1.0
        N: 48
        t_end: 0.1
        preset: beta_between
        """)
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["run", cfg, "-o", a]) == 0 and main(["run", cfg, "-o", b]) == 0
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_admitted_small_density_run_keeps_cap(tmp_path):
    cfg = write(tmp_path, "s.yaml", """\
        mu: 1.0
        beta: 0.5
        gamma: 2.0
        R: 1.0
        N: 64
        t_end: 1.0
        dt_max: 0.05
        viscous_scheme: implicit_euler
        preset: beta_lt_1_small
        """)
    out = str(tmp_path / "s.csv")
    assert main(["run", cfg, "-o", out]) == 0
    assert all(r["cap_ok"] == "1" for r in read_csv(out))


def test_nan_profile_fails_naming_the_row(tmp_path, capsys):
    prof = write(tmp_path, "p.csv", "r,rho0,ur0,utheta0\n0.0,1,0,0\n0.5,1,nan,0\n1.0,1,0,0\n")
    cfg = write(tmp_path, "c.yaml", MINIMAL.replace("preset: equilibrium", f"profile_path: {prof}"))
    assert main(["run", cfg, "-o", str(tmp_path / "o.csv")]) == 3
    assert "row 3" in capsys.readouterr().err


def test_profile_run(tmp_path):
    prof = write(tmp_path, "p.csv", "r,rho0,ur0,utheta0\n0.0,1.2,0,0\n0.5,1.0,0,0.1\n1.0,0.8,0,0\n")
    cfg = write(tmp_path, "c.yaml", MINIMAL.replace("preset: equilibrium", f"profile_path: {prof}"))
    assert main(["run", cfg, "-o", str(tmp_path / "o.csv")]) == 0


def test_read_table_errors(tmp_path):
    bad_header = write(tmp_path, "a.csv", "r,rho\n0,1\n1,1\n")
    with pytest.raises(ProfileError):
        read_table(bad_header, ("r", "rho0", "ur0", "utheta0"))
    unsorted = write(tmp_path, "b.csv", "r,rho0,ur0,utheta0\n0.5,1,0,0\n0.1,1,0,0\n")
    with pytest.raises(ProfileError):
        read_table(unsorted, ("r", "rho0", "ur0", "utheta0"))
    with pytest.raises(ProfileError):
        read_table(str(tmp_path / "missing.csv"), ("r",))


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", MINIMAL.replace("beta: 1.0", "beta: 0"))
    assert main(["run", cfg]) == 2
    assert "beta" in capsys.readouterr().err


def test_threshold_rejects_beta_one(tmp_path, capsys):
    cfg = write(tmp_path, "t.yaml", MINIMAL.replace("preset: equilibrium", "study: threshold"))
    assert main(["threshold", cfg]) == 2
    assert "beta < 1" in capsys.readouterr().err


def test_threshold_report_and_csv(tmp_path, capsys):
    base = MINIMAL.replace("beta: 1.0", "beta: 0.5").replace("preset: equilibrium", "study: threshold")
    cfg = write(tmp_path, "t.yaml", base)
    out = str(tmp_path / "th.csv")
    assert main(["threshold", cfg, "--csv", out]) == 0
    text = capsys.readouterr().out
    assert "a0" in text and "residual" in text and "mass_times_energy" in text
    cfg2 = write(tmp_path, "t2.yaml", base.replace("study: threshold", "study: threshold\npreset: beta_lt_1_small"))
    assert main(["threshold", cfg2, "--csv", out]) == 0
    assert "verdict    = admitted" in capsys.readouterr().out
    rows = read_csv(out)
    assert len(rows) == 2
    assert all(float(r["residual"]) <= 1e-10 for r in rows)
    # the preset has a nonzero initial velocity, hence a smaller threshold
    assert float(rows[1]["grad_u0_L2"]) > 0 and float(rows[1]["a0"]) < float(rows[0]["a0"])


def test_rejected_preset_verdict(tmp_path, capsys):
    base = MINIMAL.replace("beta: 1.0", "beta: 0.5").replace("preset: equilibrium", "preset: beta_lt_1_rejected\nstudy: threshold")
    assert main(["threshold", write(tmp_path, "t.yaml", base)]) == 0
    assert "not_admitted" in capsys.readouterr().out


def test_refine_equilibrium_reports_saturated(tmp_path):
    cfg = write(tmp_path, "r.yaml", MINIMAL.replace("t_end: 0.1", "t_end: 0.05") + "study: refine\nlevels: 2\n")
    out = str(tmp_path / "r.csv")
    assert main(["refine", cfg, "-o", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 2
    assert rows[1]["order_energy_residual"] == "saturated"
    assert rows[1]["order_transport_residual"] == "saturated"


def test_mms_subcommand(tmp_path):
    cfg = write(tmp_path, "m.yaml", "mu: 1.0\nbeta: 1.0\ngamma: 2.0\nR: 1.0\nN: 32\nt_end: 0.2\n"
                                    "dt_max: 0.0078125\nstudy: mms\nlevels: 2\n")
    out = str(tmp_path / "m.csv")
    assert main(["mms", cfg, "-o", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 2 and float(rows[1]["order_rho"]) > 1.5


def test_compat_subcommand(tmp_path):
    force = write(tmp_path, "g.csv", "r,g_r,g_theta\n0.0,0,0\n0.5,0,1\n1.0,0,0\n")
    cfg = write(tmp_path, "c.yaml", MINIMAL)
    out = str(tmp_path / "u.csv")
    assert main(["compat", cfg, "--forcing", force, "--delta", "0.05", "-o", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 32
    assert all(float(r["rho0"]) == pytest.approx(1.05) for r in rows)
    assert max(abs(float(r["ur0"])) for r in rows) < 1e-12
    assert max(float(r["utheta0"]) for r in rows) > 0


def test_compat_rejects_vacuum(tmp_path):
    prof = write(tmp_path, "p.csv", "r,rho0,ur0,utheta0\n0.0,0,0,0\n1.0,0,0,0\n")
    cfg = write(tmp_path, "c.yaml", MINIMAL.replace("preset: equilibrium", f"profile_path: {prof}"))
    assert main(["compat", cfg, "-o", str(tmp_path / "u.csv")]) == 2


def test_console_script_entry_point(tmp_path):
    cfg = write(tmp_path, "eq.yaml", MINIMAL)
    res = subprocess.run([sys.executable, "-m", "radial_swirl.cli", "run", cfg],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == HEADER


def test_shipped_configs_parse():
    here = os.path.join(os.path.dirname(__file__), "..", "configs")
    names = sorted(f for f in os.listdir(here) if f.endswith(".yaml"))
    assert names
    for name in names:
        parse_config(open(os.path.join(here, name)).read())
