import hashlib
import json

import pytest

from dampedwave import cli
from dampedwave.config import parse_config
from dampedwave.errors import BadValue, ConfigError, MissingKey, UnknownFamily

MINIMAL = """
[grid]
n = 1
N = 1024
L = 64.0

[mu]
family = "power"
kappa = 1.0
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- parse_config --------------------------------------------------------------

def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL), experiment="simulate")
    assert cfg.grid.N == 1024 and cfg.grid.L == 64.0
    assert cfg.mu.family == "power" and cfg.mu.param == 1.0
    assert cfg.solver.dt == 0.05 and cfg.solver.scheme == "ETD2"
    assert cfg.solver.sample_times[0] == 0.0
    assert cfg.echo()["solver.Tmax"] == 10.0


def test_missing_family_parameter(tmp_path):
    text = MINIMAL.replace("kappa = 1.0\n", "")
    with pytest.raises(MissingKey) as info:
        parse_config(write(tmp_path, text), "simulate")
    assert str(info.value) == "MissingKey('mu.kappa')"


def test_points_not_power_of_two(tmp_path):
    with pytest.raises(BadValue) as info:
        parse_config(write(tmp_path, MINIMAL.replace("N = 1024", "N = 1000")), "simulate")
    assert info.value.key == "grid.N"


def test_unknown_family(tmp_path):
    with pytest.raises(UnknownFamily):
        parse_config(write(tmp_path, MINIMAL.replace('"power"', '"cubic"')), "simulate")


@pytest.mark.parametrize("extra,key", [
    ("[solver]\ndt = 0.5\n", "solver.dt"),
    ("[solver]\nscheme = \"RK4\"\n", "solver.scheme"),
    ("[solver]\nspeed = 3\n", "solver.speed"),
    ("[data]\neps = \"big\"\n", "data.eps"),
    ("[data.u0]\nkind = \"box\"\n", "data.u0.kind"),
    ("[picard]\nJ = 1\n", "picard.J"),
])
def test_bad_values_name_the_key(tmp_path, extra, key):
    with pytest.raises(BadValue) as info:
        parse_config(write(tmp_path, MINIMAL + extra), "simulate")
    assert info.value.key == key


def test_small_box_is_rejected(tmp_path):
    with pytest.raises(BadValue):
        parse_config(write(tmp_path, MINIMAL.replace("L = 64.0", "L = 8.0")), "simulate")


def test_experiment_must_agree_with_subcommand(tmp_path):
    p = write(tmp_path, 'experiment = "simulate"\n' + MINIMAL)
    assert parse_config(p).experiment == "simulate"
    with pytest.raises(BadValue):
        parse_config(p, "dini-check")
    with pytest.raises(MissingKey):
        parse_config(write(tmp_path, MINIMAL, "b.toml"))


def test_sweep_needs_four_amplitudes(tmp_path):
    with pytest.raises(BadValue):
        parse_config(write(tmp_path, MINIMAL + "[sweep]\neps = [1.0, 2.0]\n"), "lifespan-sweep")


def test_missing_or_broken_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.toml", "simulate")
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "[grid\n"), "simulate")


# --- dispatch ---------------------------------------------------------------------

def run_cli(tmp_path, command, text, *extra):
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    summary = json.loads((out / "summary.json").read_text())
    return code, out, summary


def test_dini_check_reports_non_dini(tmp_path):
    text = MINIMAL.replace('"power"', '"logpower"').replace("kappa", "gamma")
    code, out, summary = run_cli(tmp_path, "dini-check", text)
    assert code == 0
    assert summary["dini"] is False
    assert summary["outputs"]["dini_integral"] is None


def test_dini_check_reports_dini(tmp_path):
    code, out, summary = run_cli(tmp_path, "dini-check", MINIMAL)
    assert code == 0 and summary["dini"] is True
    assert summary["outputs"]["derivative_ratio"] == pytest.approx(1.0)


def test_simulate_zero_amplitude_gives_zero_norms(tmp_path):
    code, out, summary = run_cli(tmp_path, "simulate", MINIMAL + "[data]\neps = 0.0\n")
    assert code == 0
    assert summary["outputs"]["status"] == "Completed"
    lines = (out / "norms.csv").read_text().splitlines()
    assert lines[0] == "t,Lalpha,L2,Linf,H2dot,cumNL,M,devLalpha,devLinf,devH2"
    for line in lines[1:]:
        assert all(float(v) == 0 for v in line.split(",")[1:7])


def test_lifespan_sweep_with_global_row_exits_one(tmp_path, capsys):
    text = (MINIMAL.replace('"power"', '"constant"').replace("kappa", "m")
            .replace("N = 1024", "N = 16").replace("L = 64.0", "L = 32.0")
            + "[solver]\nTmax = 5.0\n[data.u0]\nkind = \"uniform\"\n"
            + "[sweep]\neps = [3.0, 2.5, 2.0, 0.01]\n")
    code, out, summary = run_cli(tmp_path, "lifespan-sweep", text)
    assert code == 1
    assert summary["status"] == "error"
    assert "IncompleteSweep" in summary["error"]
    assert "IncompleteSweep" in capsys.readouterr().err


def test_lifespan_sweep_writes_table_and_fit(tmp_path):
    text = (MINIMAL.replace('"power"', '"constant"').replace("kappa", "m")
            .replace("N = 1024", "N = 16").replace("L = 64.0", "L = 32.0")
            + "[solver]\nTmax = 60.0\n[data.u0]\nkind = \"uniform\"\n"
            + "[sweep]\neps = [2.0, 1.5, 1.0, 0.7]\nr2_min = 0.0\n")
    code, out, summary = run_cli(tmp_path, "lifespan-sweep", text)
    assert code == 0
    assert (out / "lifespan.csv").read_text().startswith("eps,T,PsiT,dt,N\n")
    fit = json.loads((out / "fit.json").read_text())
    assert set(fit) == {"slope", "intercept", "r2", "n", "family"}


def test_failed_check_exits_two(tmp_path):
    text = MINIMAL + "[data]\neps = 0.02\n[picard]\nJ = 3\nratio_max = 0.0\n"
    code, out, summary = run_cli(tmp_path, "picard-demo", text)
    assert code == 2
    assert summary["checks"]["ratios"] is False
    assert summary["checks"]["agreement"] is True


def test_profile_check_runs(tmp_path):
    text = (MINIMAL + "[solver]\nTmax = 20.0\n[data]\neps = 0.05\n"
            "[data.u1]\nkind = \"gaussian\"\n[profile]\ntimes = [2.0, 20.0]\n")
    code, out, summary = run_cli(tmp_path, "profile-check", text)
    assert code in (0, 2)
    assert summary["outputs"]["M"] > 0
    assert set(summary["checks"]) == {"devLalpha_ratio", "devLinf_ratio", "devH2_ratio"}


def test_decay_sweep_reports_slopes(tmp_path):
    text = (MINIMAL.replace("N = 1024", "N = 2048").replace("L = 64.0", "L = 128.0")
            + "[solver]\nTmax = 100.0\n[data]\neps = 0.05\n[data.u1]\nkind = \"gaussian\"\n"
            + "[decay]\nt_window = [10.0, 100.0]\n")
    code, out, summary = run_cli(tmp_path, "decay-sweep", text)
    assert code == 0, summary["checks"]
    assert (out / "decay.csv").exists()


def test_outputs_are_deterministic_and_hashed(tmp_path):
    text = MINIMAL + "[data]\neps = 0.3\n[data.u1]\nkind = \"gaussian\"\n"
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _, out_a, sum_a = run_cli(a, "simulate", text)
    _, out_b, sum_b = run_cli(b, "simulate", text)
    assert (out_a / "norms.csv").read_bytes() == (out_b / "norms.csv").read_bytes()
    assert sum_a["manifest"] == sum_b["manifest"]
    for entry in sum_a["manifest"]:
        digest = hashlib.sha256((out_a / entry["file"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]


def test_snapshot_is_listed_in_manifest(tmp_path):
    text = MINIMAL + "[solver]\nTmax = 1.0\n[output]\nsnapshot = true\n"
    code, out, summary = run_cli(tmp_path, "simulate", text)
    assert code == 0
    assert {e["file"] for e in summary["manifest"]} == {"norms.csv", "final.dwlf"}


def test_config_error_exits_one(tmp_path, capsys):
    p = write(tmp_path, MINIMAL.replace("N = 1024", "N = 1000"))
    assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == 1
    assert "grid.N" in capsys.readouterr().err


def test_thread_count_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("DWL_THREADS", "3")
    assert cli._threads(None) == 3
    assert cli._threads(2) == 2
    monkeypatch.delenv("DWL_THREADS")
    assert cli._threads(None) == 1


def test_positional_arguments_are_rejected(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["simulate", "extra.toml"])
