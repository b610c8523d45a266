import math
from pathlib import Path

import numpy as np
import pytest

from eitcool import analytics, cli
from eitcool.constants import TWO_PI
from eitcool.csvio import sha256_of
from eitcool.params import ModelParams
from eitcool.scenarios import (ConfigError, load_config, parse_config, run,
                               validate_config)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
scenario = robustness
seed = 7
output_dir = {out}
params.rabi_omega0 = 8.0
params.gamma_total = 15.0
params.eta = 0.115
params.temperature_mk = 20.0
params.bath = thermal
sweep.rabi_fraction.start = -0.2
sweep.rabi_fraction.stop = 0.2
sweep.rabi_fraction.points = 201
"""


def read_csv(path):
    def to_float(x):
        try:
            return float(x)
        except ValueError:
            return math.nan  # non-numeric label column

    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [[to_float(x) for x in line.strip().split(",")] for line in fh]
    return header, np.array(rows)


class TestConfigParsing:
    def test_unknown_scenario_names_field(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config("scenario = warp-drive\n")

    def test_missing_scenario(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config("seed = 1\n")

    def test_fock_dim_floor(self):
        text = "scenario = recycling-check\nsolver.fock_dim = 1\n"
        with pytest.raises(ConfigError, match="fock_dim"):
            parse_config(text)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("scenario = absorption\nbanana = 3\n")

    def test_unknown_param_rejected(self):
        with pytest.raises(ConfigError, match="parameter"):
            parse_config("scenario = absorption\nparams.bananas = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("scenario = absorption\nseed = 1\nseed = 2\n")

    def test_axis_needs_bounds(self):
        text = ("scenario = absorption\n"
                "sweep.probe_detuning.points = 11\n")
        with pytest.raises(ConfigError, match="start"):
            parse_config(text)

    def test_axis_needs_two_points(self):
        text = ("scenario = absorption\n"
                "sweep.probe_detuning.start = -1\n"
                "sweep.probe_detuning.stop = 1\n"
                "sweep.probe_detuning.points = 1\n")
        with pytest.raises(ConfigError, match="points"):
            parse_config(text)

    def test_axis_must_be_recognized(self):
        text = ("scenario = absorption\n"
                "sweep.rabi_fraction.start = 0\n"
                "sweep.rabi_fraction.stop = 1\n"
                "sweep.rabi_fraction.points = 5\n")
        with pytest.raises(ConfigError, match="does not recognize"):
            parse_config(text)

    def test_unit_conversion(self):
        text = ("scenario = absorption\n"
                "params.omega_m_mhz = 2.0\n"
                "params.gamma_total_mhz = 30.0\n"
                "params.temperature_mk = 20.0\n"
                "params.gamma_mech_hz = 20.0\n")
        config = parse_config(text)
        assert config.params.omega_m == pytest.approx(TWO_PI * 2e6)
        assert config.params.gamma_total == pytest.approx(15.0)
        assert config.params.temperature == pytest.approx(0.020)
        assert config.params.gamma_mech == pytest.approx(1e-5)

    def test_comments_and_blank_lines(self):
        config = parse_config("# a comment\n\nscenario = absorption  # trailing\n")
        assert config.scenario == "absorption"

    def test_level_energy_override(self):
        text = ("scenario = recycling-check\n"
                "params.level_energies.omega_0 = 3.0\n")
        config = parse_config(text)
        assert config.params.level_energies["omega_0"] == 3.0


class TestShippedConfigs:
    @pytest.mark.parametrize("name", [
        "absorption.cfg", "rates_vs_mr.cfg", "steady_map.cfg",
        "cooling_rate_compare.cfg", "robustness.cfg", "recycling_check.cfg",
        "nuclear_bath.cfg"])
    def test_validates_clean(self, name):
        config, _ = validate_config(CONFIG_DIR / name)
        assert config.scenario in name.replace("_", "-")

    def test_recycling_config_warns_about_strong_pump(self):
        _, warnings = validate_config(CONFIG_DIR / "recycling_check.cfg")
        assert any("perturbative" in w for w in warnings)


class TestRunners:
    def test_robustness_minimum_off_center_and_ordering(self, tmp_path):
        config = parse_config(MINIMAL.format(out=tmp_path))
        manifest = run(config)
        header, rows = read_csv(tmp_path / "robustness.csv")
        assert header[0] == "rabi_fraction"
        fractions = rows[:, 0]
        for col in (1, 2, 3):
            k = int(np.argmin(rows[:, col]))
            assert abs(fractions[k]) > 1e-9  # not at zero deviation
        assert np.all(rows[:, 1] <= rows[:, 2] + 1e-15)
        assert np.all(rows[:, 2] <= rows[:, 3] + 1e-15)
        assert "robustness.csv" in manifest.outputs

    def test_robustness_steeper_for_larger_rabi(self, tmp_path):
        def sensitivity(m_r):
            text = MINIMAL.format(out=tmp_path / f"m{m_r}").replace(
                "params.rabi_omega0 = 8.0", f"params.rabi_omega0 = {m_r}")
            run(parse_config(text))
            _, rows = read_csv(tmp_path / f"m{m_r}" / "robustness.csv")
            zero_t = rows[:, 1]  # gamma_m = 0 curve
            return zero_t[-1] / zero_t.min()  # rise at +20% deviation

        assert sensitivity(10.0) > sensitivity(6.0)

    def test_steady_map_against_closed_form(self, tmp_path):
        text = ("scenario = steady-map\noutput_dir = {out}\n"
                "params.rabi_omega0 = 8.0\nparams.detuning = 31.0\n"
                "params.gamma_total = 15.0\nparams.eta = 0.115\n"
                "sweep.quality_q.start = 1e4\nsweep.quality_q.stop = 1e6\n"
                "sweep.quality_q.points = 3\nsweep.quality_q.scale = log\n"
                "sweep.temperature_mk.start = 10\nsweep.temperature_mk.stop = 30\n"
                "sweep.temperature_mk.points = 3\n").format(out=tmp_path)
        run(parse_config(text))
        header, rows = read_csv(tmp_path / "steady_map.csv")
        assert header == ["quality_q", "temperature_mk", "n_ss", "log10_n_ss"]
        assert len(rows) == 9
        # spot-check the (Q = 1e5, T = 20 mK) cell against the quotient form
        mask = (np.abs(rows[:, 0] - 1e5) < 1) & (np.abs(rows[:, 1] - 20) < 1e-9)
        assert mask.sum() == 1
        assert rows[mask][0, 2] == pytest.approx(0.05205, abs=2e-4)
        assert rows[mask][0, 3] == pytest.approx(math.log10(0.05205), abs=2e-3)

    def test_rates_vs_mr_ratio(self, tmp_path):
        text = ("scenario = rates-vs-mr\noutput_dir = {out}\n"
                "params.gamma_total = 15.0\nparams.eta = 0.115\n"
                "params.bath = thermal\nparams.temperature_mk = 20.0\n"
                "sweep.rabi_omega0.start = 2.0\nsweep.rabi_omega0.stop = 12.0\n"
                "sweep.rabi_omega0.points = 11\n").format(out=tmp_path)
        run(parse_config(text))
        header, rows = read_csv(tmp_path / "rates_vs_mr.csv")
        at_8 = rows[np.abs(rows[:, 0] - 8.0) < 1e-9][0]
        assert at_8[2] / at_8[1] > 10.0  # cooling over ten times heating
        assert np.all(np.diff(rows[:, 2]) > 0)  # A- monotone in m_R

    def test_absorption_runner(self, tmp_path):
        text = ("scenario = absorption\noutput_dir = {out}\n"
                "sweep.probe_detuning.start = -40\n"
                "sweep.probe_detuning.stop = 10\n"
                "sweep.probe_detuning.points = 501\n").format(out=tmp_path)
        run(parse_config(text))
        header, rows = read_csv(tmp_path / "absorption.csv")
        assert header == ["omega", "absorption"]
        k0 = int(np.argmin(np.abs(rows[:, 0])))
        assert rows[k0, 1] < 1e-8 * rows[:, 1].max()

    def test_recycling_runner_small(self, tmp_path):
        text = ("scenario = recycling-check\noutput_dir = {out}\n"
                "params.rabi_omega0 = 6.0\nparams.detuning = 10.0\n"
                "params.gamma_total = 15.194771468144044\n"
                "params.gamma_plus = 7.597385734072022\n"
                "params.gamma_minus = 7.597385734072022\n"
                "params.gamma_p1 = 7.5\nparams.gamma_m1 = 7.5\n"
                "params.gamma_0 = 1.5\nparams.gamma_dark = 0.11538461538461539\n"
                "params.gamma_s = 0.45454545454545453\nparams.Gamma_0 = 15.0\n"
                "params.Gamma_p1 = 0.1\nparams.Gamma_m1 = 0.1\n"
                "params.rabi_pump = 15.0\nparams.eta = 0.115\n"
                "solver.fock_dim = 12\nsolver.t_final = 30.0\n"
                "solver.sample_count = 31\nsolver.rel_tol = 1e-6\n"
                "recycling.sensitivity = true\n").format(out=tmp_path)
        manifest = run(parse_config(text))
        header, rows = read_csv(tmp_path / "recycling.csv")
        assert header == ["t", "n3", "n4", "n7"]
        assert rows[0, 1:] == pytest.approx([3.0, 3.0, 3.0])
        assert "max_rel_dev_n3_n7" in manifest.solver_stats
        # frame-offset insensitivity: the shipped probe of the default-zero choice
        _, sens = read_csv(tmp_path / "offset_sensitivity.csv")
        assert sens[:, 3].max() < 0.01
        # checksums in the manifest match the files on disk
        for name, digest in manifest.outputs.items():
            assert sha256_of(tmp_path / name) == digest

    def test_nuclear_bath_determinism(self, tmp_path):
        text = ("scenario = nuclear-bath\noutput_dir = {out}\nseed = 42\n"
                "params.bath = thermal\nparams.temperature_mk = 20.0\n"
                "params.gamma_mech_hz = 10.0\n"
                "sweep.delta_max_mhz.values = 0.0,0.1\n"
                "mc.samples = 2\nsolver.fock_dim = 14\n"
                "solver.t_final = 40.0\nsolver.sample_count = 21\n")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        digests = {}
        for out in (out_a, out_b):
            manifest = run(parse_config(text.format(out=out)))
            digests[out] = manifest.outputs
        assert digests[out_a] == digests[out_b]
        header, rows = read_csv(out_a / "nuclear_mean_n.csv")
        assert header[0] == "t" and len(header) == 3


class TestCli:
    def test_list_scenarios(self, capsys):
        assert cli.main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "recycling-check" in out and "absorption" in out

    def test_validate_good_config(self, capsys):
        code = cli.main(["validate", str(CONFIG_DIR / "recycling_check.cfg")])
        assert code == 0
        assert "validates clean" in capsys.readouterr().out

    def test_validate_bad_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("scenario = nope\n")
        assert cli.main(["validate", str(bad)]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_is_config_error(self):
        assert cli.main(["validate", "/definitely/not/here.cfg"]) == 2

    def test_run_with_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "scenario = absorption\noutput_dir = will_be_overridden\n"
            "sweep.probe_detuning.start = -5\nsweep.probe_detuning.stop = 5\n"
            "sweep.probe_detuning.points = 41\n")
        out = tmp_path / "result"
        code = cli.main(["run", str(cfg), "--output-dir", str(out), "--seed", "7"])
        assert code == 0
        assert (out / "absorption.csv").exists()
        assert (out / "manifest.txt").exists()
        text = (out / "manifest.txt").read_text()
        assert "scenario = absorption" in text
        assert "sha256" in text

    def test_bad_rel_tol_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scenario = absorption\n")
        assert cli.main(["run", str(cfg), "--rel-tol", "0.5"]) == 2


def test_threads_resolution(monkeypatch, tmp_path):
    from eitcool.scenarios import resolve_threads
    config = parse_config("scenario = absorption\n")
    monkeypatch.delenv("EITCOOL_THREADS", raising=False)
    assert resolve_threads(config) == 1
    monkeypatch.setenv("EITCOOL_THREADS", "3")
    assert resolve_threads(config) == 3
    config.threads = 2
    assert resolve_threads(config) == 2
    assert resolve_threads(config, override=5) == 5


def test_write_timeseries_csv(tmp_path):
    from eitcool.csvio import write_timeseries_csv
    from eitcool.dynamics import evolve
    from eitcool.nvmodel import build_three_level_model
    from eitcool import operators as ops

    model = build_three_level_model(ModelParams(), 10)
    series = evolve(model, ops.basis_state(model.space, "-1", 1), 2.0, 5,
                    rel_tol=1e-7)
    path = tmp_path / "series.csv"
    write_timeseries_csv(series, path, ["n", "p_dark", "p_A2"])
    header, rows = read_csv(path)
    assert header == ["t", "n", "p_dark", "p_A2", "trace", "leakage"]
    assert rows.shape == (5, 6)
    assert rows[0, 1] == pytest.approx(1.0)   # starts in |n=1>
    assert np.abs(rows[:, 4] - 1.0).max() < 1e-6


def test_write_spectrum_csv(tmp_path):
    from eitcool.analytics import SpectrumSeries, fluctuation_spectrum
    from eitcool.csvio import write_spectrum_csv

    omegas = np.linspace(0.5, 2.5, 5)
    complex_series = SpectrumSeries(
        omegas=omegas,
        values=np.array([fluctuation_spectrum(ModelParams(), w) for w in omegas]))
    write_spectrum_csv(complex_series, tmp_path / "s.csv")
    header, rows = read_csv(tmp_path / "s.csv")
    assert header == ["omega", "re", "im"] and rows.shape == (5, 3)

    real_series = SpectrumSeries(omegas=omegas, values=np.abs(omegas))
    write_spectrum_csv(real_series, tmp_path / "a.csv")
    header, _ = read_csv(tmp_path / "a.csv")
    assert header == ["omega", "absorption"]
