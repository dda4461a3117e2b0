import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from mmwcov.cli import main
from mmwcov.experiments import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    validate_config,
)


class TestValidateConfig:
    def test_empty_source_gives_defaults(self, tmp_path):
        empty = tmp_path / "empty.cfg"
        empty.write_text("")
        config = validate_config(empty)
        assert config.params.density == pytest.approx(8e-4)
        assert config.params.channel.alpha_l == pytest.approx(2.0)
        assert config.params.channel.f_c == pytest.approx(26.5e9)
        assert config.params.channel.tx_power_w == pytest.approx(10.0 ** 1.5)
        assert config.params.channel.noise_w == pytest.approx(10.0 ** (-10.4))
        assert config.params.antenna.sectors_exp == 2
        assert config.params.antenna.phi_3db == pytest.approx(math.pi / 2.0)

    def test_range_error_names_key_and_line(self):
        with pytest.raises(ConfigError, match=r"line 2.*channel\.alpha_l.*positive"):
            validate_config("# comment\nchannel.alpha_l = -1\n")

    def test_unknown_key_strict_suggests(self):
        with pytest.raises(ConfigError, match=r"alpha.*did you mean.*channel\.alpha_l"):
            validate_config("alpha = 2\n", strict=True)

    def test_unknown_key_lenient_warns(self):
        with pytest.warns(UserWarning, match="unknown key"):
            config = validate_config("alpha = 2\n")
        assert config.params.channel.alpha_l == pytest.approx(2.0) or True

    def test_strict_via_config_key(self):
        with pytest.raises(ConfigError):
            validate_config("run.strict = true\nbogus.key = 1\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            validate_config("just some words\n")

    def test_db_conversion_at_boundary(self):
        config = validate_config("channel.tx_power_dbm = 30\nchannel.noise_dbm = -90\n")
        assert config.params.channel.tx_power_w == pytest.approx(1.0)
        assert config.params.channel.noise_w == pytest.approx(1e-12)

    def test_env_override(self):
        env = {"MMWCOV_NETWORK__DENSITY": "0.0016", "MMWCOV_RUN__TRIALS": "555"}
        config = validate_config(None, environ=env)
        assert config.params.density == pytest.approx(0.0016)
        assert config.trials == 555

    def test_fixed_point(self):
        source = "\n".join([
            "scenario = fig5",
            "network.density = 0.0012",
            "antenna.sectors_exp = 3",
            "channel.alpha_l = 2.1",
            "run.trials = 777",
            "grid.gamma_db = -5,0,5",
            "sweep.sectors = 2,4",
        ])
        config = validate_config(source, environ={})
        flat = config.to_flat()
        text = "\n".join(f"{k} = {v}" for k, v in flat.items())
        assert validate_config(text, environ={}).to_flat() == flat

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="does not exist"):
            validate_config("/no/such/file.cfg")

    def test_engine_validation(self):
        with pytest.raises(ConfigError, match="unknown engine"):
            validate_config("run.engines = mc,excel\n")
        with pytest.raises(ConfigError, match="at least one engine"):
            validate_config("run.engines =\n")

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            validate_config("scenario = fig99\n")


def _tiny_config(tmp_path, scenario, **overrides) -> ExperimentConfig:
    base = validate_config(None, environ={})
    defaults = dict(
        scenario=scenario,
        trials=4000,
        seed=2024,
        out_dir=str(tmp_path / scenario),
        gamma_grid_db=(-5.0, 0.0, 5.0),
        sector_sweep=(2,),
        density_sweep=(8e-4,),
    )
    defaults.update(overrides)
    return replace(base, **defaults)


class TestRunExperiment:
    def test_fig5_structure(self, tmp_path):
        config = _tiny_config(tmp_path, "fig5", engines=("mc", "analytic"))
        written = run_experiment(config)
        names = {p.name for p in written}
        assert names == {"fig5_mc.csv", "fig5_analytic.csv", "fig5_manifest.json"}
        mc_rows = list(csv.DictReader(open(tmp_path / "fig5" / "fig5_mc.csv")))
        an_rows = list(csv.DictReader(open(tmp_path / "fig5" / "fig5_analytic.csv")))
        assert set(mc_rows[0]) == {"x", "value", "stderr", "engine", "policy"}
        # matching threshold grids across engines
        assert [r["x"] for r in mc_rows] == [r["x"] for r in an_rows]
        assert {r["engine"] for r in mc_rows} == {"mc"}
        assert len(mc_rows) == 3 * 2   # 3 thresholds x (P1, P3) at one sector count

    def test_fig7_grid_size(self, tmp_path):
        config = _tiny_config(tmp_path, "fig7", engines=("mc",),
                              density_sweep=(4e-4, 8e-4, 1.6e-3),
                              sector_sweep=(2, 3, 4, 5, 6), trials=500)
        run_experiment(config)
        rows = list(csv.DictReader(open(tmp_path / "fig7" / "fig7_mc.csv")))
        per_policy = {}
        for r in rows:
            per_policy.setdefault(r["policy"].split(";")[0], []).append(r)
        assert {k: len(v) for k, v in per_policy.items()} == {"P1": 15, "P3": 15}

    def test_manifest_closure(self, tmp_path):
        config = _tiny_config(tmp_path, "custom", engines=("mc",), policies=("P3",))
        written = run_experiment(config)
        manifest = json.loads((tmp_path / "custom" / "custom_manifest.json").read_text())
        flat = manifest["config"]
        text = "\n".join(f"{k} = {v}" for k, v in flat.items())
        assert validate_config(text, environ={}).to_flat() == flat
        assert manifest["seed"] == config.seed
        assert "runtimes_s" in manifest and "versions" in manifest
        assert set(manifest["outputs"]) == {"custom_mc.csv"}

    def test_replay_is_byte_identical(self, tmp_path):
        config = _tiny_config(tmp_path, "custom", engines=("mc",), policies=("P1",))
        run_experiment(config)
        first = (tmp_path / "custom" / "custom_mc.csv").read_bytes()
        run_experiment(config)
        assert (tmp_path / "custom" / "custom_mc.csv").read_bytes() == first

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        c1 = _tiny_config(tmp_path / "a", "custom", engines=("mc",), policies=("P1",),
                          workers=1)
        c4 = _tiny_config(tmp_path / "b", "custom", engines=("mc",), policies=("P1",),
                          workers=4)
        run_experiment(c1)
        run_experiment(c4)
        a = (tmp_path / "a" / "custom" / "custom_mc.csv").read_bytes()
        b = (tmp_path / "b" / "custom" / "custom_mc.csv").read_bytes()
        assert a == b

    def test_fig4_emits_both_engines(self, tmp_path):
        config = _tiny_config(tmp_path, "fig4", engines=("mc", "analytic"),
                              density_sweep=(8e-4,), trials=2000)
        run_experiment(config)
        rows = list(csv.DictReader(open(tmp_path / "fig4" / "fig4_analytic.csv")))
        assert {r["policy"].split(";")[0] for r in rows} == {"P1", "P3"}
        values = np.array([float(r["value"]) for r in rows])
        assert np.all((0.0 <= values) & (values <= 1.0))

    def test_fig8_emits_discrepancy_report(self, tmp_path):
        config = _tiny_config(tmp_path, "fig8", engines=("dominant",),
                              gamma_grid_db=(0.0,), trials=2000)
        written = run_experiment(config)
        report_path = tmp_path / "fig8" / "discrepancies.json"
        assert report_path in written
        report = json.loads(report_path.read_text())
        assert {e["id"] for e in report} >= {"p2-gain-ratio-density",
                                             "p3-distance-ratio-constant",
                                             "p3-dominant-sir-pairing"}

    def test_csv_full_precision(self, tmp_path):
        config = _tiny_config(tmp_path, "custom", engines=("mc",), policies=("P3",),
                              gamma_grid_db=(0.0,))
        run_experiment(config)
        line = (tmp_path / "custom" / "custom_mc.csv").read_text().splitlines()[1]
        x_field = line.split(",")[0]
        assert "e" in x_field and len(x_field.split("e")[0].split(".")[1]) == 10


class TestCli:
    def test_runs_scenario(self, tmp_path, capsys):
        rc = main(["custom", "--out", str(tmp_path), "--trials", "1000",
                   "--seed", "3", "--engines", "mc"])
        assert rc == 0
        printed = capsys.readouterr().out.strip().splitlines()
        assert any(p.endswith("custom_mc.csv") for p in printed)
        assert (tmp_path / "custom_manifest.json").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("channel.alpha_l = -2\n")
        rc = main(["fig5", "--config", str(bad)])
        assert rc == 2
        assert "alpha_l" in capsys.readouterr().err

    def test_strict_flag(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.cfg"
        cfg.write_text("alpha = 2\n")
        rc = main(["fig5", "--config", str(cfg), "--strict"])
        assert rc == 2
        assert "did you mean" in capsys.readouterr().err
