"""Config validation, CLI behavior, output schemas, and reproducibility."""

import hashlib
import json

import numpy as np
import pytest

from vnoise.cli import main
from vnoise.config import load_config, resolve_config
from vnoise.errors import ConfigError
from vnoise.output import observables_header
from vnoise.presets import PRESETS, get_preset
from vnoise.scenarios import run_scenario

SMALL_PARTIAL = """
mode = "partially_coherent"

[output]
prefix = "tiny"

[grid]
t_max_fs = 60.0
dt_fs = 0.6

[system]
tau_c_fs = 200.0
rabi_thz = 62.832

[drive]
coupling = "cross_coupled"
carrier = "per_transition"

[fields]
tau_d_fs = 60.0
model = "phase_jump"

[ensemble]
n_trajectories = 16
master_seed = 99
"""

SMALL_WHITE = """
mode = "white_noise"

[output]
prefix = "wn"

[grid]
t_max_fs = 30.0
dt_fs = 0.1

[white_noise]
gamma_1_thz = 250.0
gamma_2_thz = 250.0
"""

SMALL_STATS = """
mode = "field_stats"

[output]
prefix = "fs"

[grid]
t_max_fs = 360.0
dt_fs = 3.0

[fields]
tau_d_fs = 60.0

[field_stats]
n_realizations = 64
master_seed = 5
max_lag_fs = 60.0
dump_realizations = 1
"""


def write(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestValidation:
    def test_thz_conversion(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_PARTIAL)))
        assert cfg.system.rabi_1 == pytest.approx(0.062832)
        assert cfg.system.omega_21 == pytest.approx(2 * np.pi / 200.0)
        assert cfg.field_1.coherence_time == 60.0

    @pytest.mark.parametrize(
        "mutate,field",
        [
            (lambda d: d.pop("mode"), "config.mode"),
            (lambda d: d.update(mode="bogus"), "config.mode"),
            (lambda d: d.pop("system"), "system"),
            (lambda d: d["system"].update(extra=1), "system.extra"),
            (lambda d: d["system"].update(omega_21_thz=5.0), "system"),
            (lambda d: d["system"].update(rabi_thz="fast"), "system.rabi_thz"),
            (lambda d: d["fields"].update(tau_d_fs=-3.0), "fields.tau_d_fs"),
            (lambda d: d["fields"].update(model="pink"), "fields.model"),
            (lambda d: d["ensemble"].update(n_trajectories=1), "ensemble.n_trajectories"),
            (lambda d: d["drive"].update(coupling="both"), "drive.coupling"),
            (lambda d: d["grid"].update(dt_fs=50.0), "grid.dt_fs"),
            (lambda d: d.update(white_noise={}), "white_noise"),
        ],
    )
    def test_partial_config_errors_name_field(self, tmp_path, mutate, field):
        raw = load_config(write(tmp_path, SMALL_PARTIAL))
        mutate(raw)
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            resolve_config(raw)

    def test_white_noise_requires_table(self, tmp_path):
        raw = load_config(write(tmp_path, SMALL_WHITE))
        raw.pop("white_noise")
        with pytest.raises(ConfigError, match="white_noise"):
            resolve_config(raw)

    def test_field_stats_lag_span(self, tmp_path):
        raw = load_config(write(tmp_path, SMALL_STATS))
        raw["field_stats"]["max_lag_fs"] = 1000.0
        with pytest.raises(ConfigError, match="max_lag_fs"):
            resolve_config(raw)

    def test_all_presets_resolve(self):
        assert len(PRESETS) >= 5
        for preset in PRESETS.values():
            for raw in preset.configs:
                cfg = resolve_config(json.loads(json.dumps(raw)))
                assert cfg.mode in ("white_noise", "partially_coherent", "field_stats")

    def test_partial_presets_echo_paper_times(self):
        for tau in (60, 120):
            cfg = resolve_config(
                json.loads(json.dumps(get_preset(f"partial_tau{tau}_tc400").configs[0]))
            )
            assert cfg.field_1.coherence_time == tau
            assert cfg.system.tau_c == pytest.approx(400.0)


class TestRunScenario:
    def test_white_noise_outputs(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_WHITE)))
        outputs = run_scenario(cfg, tmp_path)
        obs = tmp_path / outputs["observables_csv"]
        lines = obs.read_text().splitlines()
        assert lines[0] == "# vnoise-observables-v1"
        assert lines[1] == ",".join(observables_header(with_stderr=False))
        data = np.genfromtxt(obs, delimiter=",", names=True, skip_header=1)
        assert abs(data["rho_gg"][-1] - 1.0 / 3.0) < 1e-6

    def test_partial_outputs_and_rerun_identical(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_PARTIAL)))
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        o1 = run_scenario(cfg, out1)
        o2 = run_scenario(cfg, out2)
        f1 = out1 / o1["observables_csv"]
        f2 = out2 / o2["observables_csv"]
        assert sha(f1) == sha(f2)
        header = f1.read_text().splitlines()[1]
        assert header == ",".join(observables_header(with_stderr=True))

    def test_manifest_round_trip(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_PARTIAL)))
        out1 = tmp_path / "a"
        o1 = run_scenario(cfg, out1)
        manifest = json.loads((out1 / o1["manifest_json"]).read_text())
        assert manifest["schema"] == "vnoise-manifest-v1"
        cfg2 = resolve_config(load_config(out1 / o1["manifest_json"]))
        out2 = tmp_path / "b"
        o2 = run_scenario(cfg2, out2)
        assert sha(out1 / o1["observables_csv"]) == sha(out2 / o2["observables_csv"])

    def test_overwrite_protection(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_WHITE)))
        run_scenario(cfg, tmp_path)
        with pytest.raises(FileExistsError):
            run_scenario(cfg, tmp_path)
        run_scenario(cfg, tmp_path, overwrite=True)

    def test_field_stats_outputs(self, tmp_path):
        cfg = resolve_config(load_config(write(tmp_path, SMALL_STATS)))
        outputs = run_scenario(cfg, tmp_path)
        corr = tmp_path / outputs["correlations_csv"]
        lines = corr.read_text().splitlines()
        assert lines[0] == "# vnoise-correlations-v1"
        data = np.genfromtxt(corr, delimiter=",", names=True, skip_header=1)
        assert data["abs_g1_1"][0] == pytest.approx(1.0, abs=1e-12)
        assert (tmp_path / "fs_realization_a0.csv").exists()
        assert (tmp_path / "fs_events_a0.csv").exists()


class TestCli:
    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        out = capsys.readouterr().out
        assert len(out.strip().splitlines()) >= 5
        assert "whitenoise_equilibration" in out
        assert "figure" in out

    def test_run_and_exit_codes(self, tmp_path, capsys):
        path = write(tmp_path, SMALL_WHITE)
        assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 0
        # collision without --overwrite
        assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 2
        assert main(["run", str(path), "--out-dir", str(tmp_path), "--overwrite"]) == 0
        assert main(["run", str(tmp_path / "missing.toml")]) == 2

    def test_invalid_config_exit_2(self, tmp_path, capsys):
        path = write(tmp_path, SMALL_PARTIAL.replace('coupling = "cross_coupled"', 'coupling = "x"'))
        assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 2
        assert "drive.coupling" in capsys.readouterr().err

    def test_numerical_guard_exit_3(self, tmp_path):
        bad = SMALL_PARTIAL.replace("rabi_thz = 62.832", "rabi_thz = 3000.0").replace(
            "dt_fs = 0.6", "dt_fs = 2.0"
        )
        path = write(tmp_path, bad)
        assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 3

    def test_preset_with_overrides(self, tmp_path):
        assert (
            main(
                ["preset", "field_stats_tau60", "--out-dir", str(tmp_path),
                 "--trajectories", "32", "--seed", "4"]
            )
            == 0
        )
        manifest = json.loads((tmp_path / "field_stats_tau60_manifest.json").read_text())
        assert manifest["config"]["field_stats"]["n_realizations"] == 32
        assert manifest["config"]["field_stats"]["master_seed"] == 4

    def test_unknown_preset_exit_2(self, capsys):
        assert main(["preset", "nope"]) == 2
