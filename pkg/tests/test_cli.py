import json

import pytest

from waveschwarz import cli
from waveschwarz.cli import (
    ExperimentConfig,
    default_tolerances,
    main,
    parse_config,
    run,
    validate,
)

FIG2_CONFIG = """
# spectrum of the interface iteration matrix
experiment = spectrum
k = 30
sigma = 0.1
delta = 0.1
L = 1
alpha_mode = impedance
N = 20
"""


def write_config(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestParsing:
    def test_parse_fig2(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, FIG2_CONFIG))
        assert cfg.experiment == "spectrum"
        assert cfg.parameters["k"] == 30.0
        assert cfg.parameters["N"] == 20
        assert cfg.seed == 0

    def test_lists_and_comments(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, """
experiment = discrete-scan
k_list = 10, 20   # two wave numbers
N_list = 4, 6, 8
sigma = 1
case = waveguide
"""))
        assert cfg.parameters["k_list"] == [10, 20]
        assert cfg.parameters["N_list"] == [4, 6, 8]

    def test_duplicate_key_rejected(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            parse_config(write_config(tmp_path, "experiment = spectrum\nk = 1\nk = 2\n"))

    def test_missing_experiment_rejected(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            parse_config(write_config(tmp_path, "k = 1\n"))


class TestValidation:
    def test_negative_sigma(self):
        cfg = ExperimentConfig("spectrum", dict(k=30.0, sigma=-1.0, delta=0.1,
                                                L=1.0, alpha_mode="impedance", N=20))
        issues = validate(cfg)
        assert any("sigma" in m for m in issues)

    def test_missing_required_key_named(self):
        cfg = ExperimentConfig("spectrum", dict(k=30.0, sigma=0.1, delta=0.1,
                                                L=1.0, alpha_mode="impedance"))
        issues = validate(cfg)
        assert any("'N'" in m for m in issues)

    def test_well_formed_empty_diagnostics(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, FIG2_CONFIG))
        assert validate(cfg) == []

    def test_unknown_key_rejected(self):
        cfg = ExperimentConfig("nilpotency", dict(k=1.0, delta=0.1, L=1.0, N=8,
                                                  sigma=0.0))
        issues = validate(cfg)
        assert any("unknown key 'sigma'" in m for m in issues)

    def test_sigma_zero_only_for_nilpotency(self):
        cfg = ExperimentConfig("spectrum", dict(k=30.0, sigma=0.0, delta=0.1,
                                                L=1.0, alpha_mode="impedance", N=20))
        assert any("nilpotency" in m for m in validate(cfg))

    def test_unknown_experiment(self):
        assert validate(ExperimentConfig("frobnicate", {}))


class TestRun:
    def test_spectrum_outputs(self, tmp_path):
        cfg = ExperimentConfig(
            "spectrum",
            dict(k=30.0, sigma=0.1, delta=0.1, L=1.0, alpha_mode="impedance",
                 N=20, curve_samples=512),
            output_dir=str(tmp_path))
        assert run(cfg) == 0
        for name in ("eigenvalues.csv", "curve.csv", "spectrum.svg", "manifest.json"):
            assert (tmp_path / name).exists()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert manifest["results"]["spectral_radius"] < 1
        header = (tmp_path / "eigenvalues.csv").read_text().splitlines()[0]
        assert header == "re,im,distance_to_limit"

    def test_manifest_records_all_tolerances_and_seed(self, tmp_path):
        cfg = ExperimentConfig("nilpotency", dict(k=1.0, delta=0.1, L=1.0, N=8),
                               output_dir=str(tmp_path), seed=7)
        assert run(cfg) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seed"] == 7
        assert manifest["results"]["relative_norm"] <= 1e-8
        assert set(default_tolerances()) <= set(manifest["tolerances"])

    def test_determinism_byte_identical(self, tmp_path):
        outputs = []
        for sub in ("one", "two"):
            d = tmp_path / sub
            cfg = ExperimentConfig(
                "factor-vs-N",
                dict(k=30.0, sigma=5.0, delta=0.1, L=1.0,
                     alpha_mode="impedance", N_list=[4, 8, 12]),
                output_dir=str(d))
            assert run(cfg) == 0
            outputs.append((d / "rho_vs_N.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_validation_failure_exit_code(self, tmp_path):
        cfg = ExperimentConfig("spectrum", dict(k=30.0), output_dir=str(tmp_path))
        assert run(cfg) == 1

    def test_runtime_failure_exit_code(self, tmp_path, monkeypatch):
        def boom(config, outdir, results):
            raise RuntimeError("synthetic failure")

        monkeypatch.setitem(cli._RUNNERS, "nilpotency", boom)
        cfg = ExperimentConfig("nilpotency", dict(k=1.0, delta=0.1, L=1.0, N=4),
                               output_dir=str(tmp_path))
        assert run(cfg) == 2
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"].startswith("error")

    def test_mode_sweep_and_k_robust(self, tmp_path):
        cfg = ExperimentConfig(
            "mode-sweep",
            dict(k=10.0, sigma=1.0, delta=0.1, L=1.0, L_hat=1.0,
                 equation="helmholtz"),
            output_dir=str(tmp_path / "sweep"))
        assert run(cfg) == 0
        manifest = json.loads((tmp_path / "sweep" / "manifest.json").read_text())
        assert manifest["results"]["sup_factor"] < 1

    def test_output_dir_env_override(self, tmp_path, monkeypatch):
        override = tmp_path / "override"
        monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(override))
        cfg = ExperimentConfig("nilpotency", dict(k=1.0, delta=0.1, L=1.0, N=4),
                               output_dir=str(tmp_path / "ignored"))
        assert run(cfg) == 0
        assert (override / "manifest.json").exists()
        assert not (tmp_path / "ignored").exists()


class TestMain:
    def test_list_experiments(self, capsys):
        assert main(["list-experiments"]) == 0
        out = capsys.readouterr().out
        for name in ("spectrum", "discrete-scan", "nilpotency"):
            assert name in out

    def test_validate_subcommand(self, tmp_path, capsys):
        path = write_config(tmp_path, FIG2_CONFIG)
        assert main(["validate", path]) == 0
        bad = write_config(tmp_path, FIG2_CONFIG.replace("sigma = 0.1", "sigma = -3"),
                           name="bad.cfg")
        assert main(["validate", bad]) == 1

    def test_run_subcommand(self, tmp_path):
        text = FIG2_CONFIG + f"output_dir = {tmp_path / 'out'}\nN = 10\n"
        text = text.replace("N = 20\n", "")
        path = write_config(tmp_path, text)
        assert main(["run", path]) == 0
        assert (tmp_path / "out" / "spectrum.svg").exists()

    def test_missing_config_file(self):
        assert main(["run", "/nonexistent/path.cfg"]) == 1
