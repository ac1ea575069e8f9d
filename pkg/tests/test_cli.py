"""Command-line interface: exit codes, file contracts, config parsing."""

import json

import numpy as np
import pytest

from sparsecoint.cli import main
from sparsecoint.kvconfig import load_dgp_config, load_experiment_grid, parse_kv_file

SIM_CONFIG = """\
# simulation config
signal = strong
n = 300
p = 10
rho = 0.0
seed = 7
"""


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture()
def sim_csv(tmp_path):
    """Simulated strong-signal dataset written through the CLI."""
    config = write(tmp_path / "sim.conf", SIM_CONFIG)
    out = tmp_path / "data.csv"
    assert main(["simulate", config, "--output", str(out)]) == 0
    return out


class TestSimulate:
    def test_writes_expected_shape(self, sim_csv):
        lines = sim_csv.read_text().splitlines()
        assert lines[0] == "y," + ",".join(f"x{j}" for j in range(1, 11))
        assert len(lines) == 1 + 300

    def test_metadata_sidecar_written(self, sim_csv):
        meta = sim_csv.with_suffix(".meta")
        kv = parse_kv_file(meta)
        assert kv["n"] == "300"
        assert kv["true_active"] == "1,2,3,4,5"

    def test_invalid_rho_exits_2_naming_field(self, tmp_path, capsys):
        config = write(tmp_path / "bad.conf", SIM_CONFIG.replace("rho = 0.0", "rho = 1.5"))
        assert main(["simulate", config, "--output", str(tmp_path / "x.csv")]) == 2
        assert "rho" in capsys.readouterr().err

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        config = write(tmp_path / "bad.conf", SIM_CONFIG + "mystery = 1\n")
        assert main(["simulate", config, "--output", str(tmp_path / "x.csv")]) == 2
        assert "mystery" in capsys.readouterr().err

    def test_missing_config_exits_1(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.conf")]) == 1

    def test_repeat_invocation_byte_identical(self, tmp_path):
        config = write(tmp_path / "sim.conf", SIM_CONFIG)
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", config, "--output", str(out_a)]) == 0
        assert main(["simulate", config, "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_seed_override_changes_data(self, tmp_path):
        config = write(tmp_path / "sim.conf", SIM_CONFIG)
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", config, "--output", str(out_a)]) == 0
        assert main(["simulate", config, "--output", str(out_b), "--seed", "8"]) == 0
        assert out_a.read_bytes() != out_b.read_bytes()


class TestDetect:
    def test_cointegrated_dataset_exits_0(self, sim_csv, capsys):
        code = main(["detect", str(sim_csv)])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record["verdict"] == "cointegrated"
        assert set(record["selected_covariates"]) >= {1, 2, 3, 4, 5}

    def test_non_numeric_cell_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("y,x1\n1.0,2.0\n1.0,zzz\n")
        assert main(["detect", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "row 3" in err

    def test_wrong_header_exits_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1.0,2.0\n")
        assert main(["detect", str(bad)]) == 2

    def test_flags_accepted(self, sim_csv, capsys):
        code = main([
            "detect", str(sim_csv),
            "--gamma", "1",
            "--grid-scale", "600",
            "--residual-mode", "direct",
            "--kmax", "4",
            "--penalty", "sqrt-n",
        ])
        record = json.loads(capsys.readouterr().out)
        assert code in (0, 3)
        assert record["gamma"] == 1.0
        assert record["residual_mode"] == "direct"
        assert record["ic"]["k_hat"] <= 4

    def test_unknown_flag_is_an_error(self, sim_csv):
        with pytest.raises(SystemExit) as err:
            main(["detect", str(sim_csv), "--mystery"])
        assert err.value.code == 2

    @pytest.mark.xfail(
        strict=True,
        reason="the two-step verdict on unit-root data flags stationarity: "
        "post-selection residuals of a dense spurious fit are biased toward "
        "I(0) (see the oracle columns of the harness detection tables)",
    )
    def test_unit_root_dataset_exits_3_in_majority(self, tmp_path):
        spurious = 0
        for seed in range(50):
            config = write(
                tmp_path / f"rw{seed}.conf",
                SIM_CONFIG.replace("rho = 0.0", "rho = 1.0")
                .replace("seed = 7", f"seed = {seed}")
                .replace("n = 300", "n = 500"),
            )
            out = tmp_path / f"rw{seed}.csv"
            assert main(["simulate", config, "--output", str(out)]) == 0
            spurious += main(["detect", str(out)]) == 3
        assert spurious > 25


MC_CONFIG = """\
n_values = 150
p_values = 5
rho_values = 0.0
gamma_values = 1
signal = strong
replications = 5
base_seed = 3
"""


class TestMonteCarlo:
    def test_one_cell_grid(self, tmp_path, capsys):
        config = write(tmp_path / "grid.conf", MC_CONFIG)
        out_dir = tmp_path / "fresh" / "nested"  # created automatically
        assert main(["montecarlo", config, "--output", str(out_dir), "--jobs", "1"]) == 0
        table = (out_dir / "table1_strong.csv").read_text().splitlines()
        assert len(table) == 2
        assert (out_dir / "table4_strong.csv").exists()
        assert (out_dir / "manifest.txt").exists()
        assert "cell 1/1" in capsys.readouterr().out

    def test_config_error_exits_2(self, tmp_path, capsys):
        config = write(tmp_path / "grid.conf", MC_CONFIG + "bogus = 1\n")
        assert main(["montecarlo", config, "--output", str(tmp_path / "o")]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        config = write(tmp_path / "grid.conf", MC_CONFIG)
        out_dir = tmp_path / "envout"
        monkeypatch.setenv("SPARSECOINT_OUTPUT_DIR", str(out_dir))
        assert main(["montecarlo", config, "--jobs", "1"]) == 0
        assert (out_dir / "table1_strong.csv").exists()

    def test_invalid_cell_exits_1(self, tmp_path, capsys):
        # every replication fails the n > p + 1 precondition, so the single
        # cell is flagged invalid
        config = write(tmp_path / "grid.conf", MC_CONFIG.replace("p_values = 5", "p_values = 150"))
        assert main(["montecarlo", config, "--output", str(tmp_path / "o"), "--jobs", "1"]) == 1
        assert "invalid" in capsys.readouterr().err


class TestConfigParsing:
    def test_dgp_config_with_explicit_beta(self, tmp_path):
        config = load_dgp_config(
            write(
                tmp_path / "c.conf",
                "beta_active = 1.0, 0.5\nn = 100\np = 4\nrho = 0.5\ntau = 0.2\n",
            )
        )
        assert config.beta_active == (1.0, 0.5)
        assert config.s == 2
        assert config.sigma2_e == 4.0

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        kv = parse_kv_file(
            write(tmp_path / "c.conf", "# header\n\na = 1  # trailing\nb = two words\n")
        )
        assert kv == {"a": "1", "b": "two words"}

    def test_grid_with_overrides(self, tmp_path):
        grid = load_experiment_grid(
            write(
                tmp_path / "g.conf",
                MC_CONFIG + "grid_scale = 123.0\nresidual_mode = direct\nkmax = 3\npenalty = sqrt-n\ntau = 0.1\n",
            )
        )
        assert grid.tau == 0.1
        assert grid.pipeline.residual_mode == "direct"
        assert grid.pipeline.ic_settings.k_max == 3
        assert grid.pipeline.ic_settings.penalty_rule == "sqrt-n"
        assert grid.pipeline.grid.scale == 123.0

    def test_custom_signal_requires_beta(self, tmp_path):
        with pytest.raises(Exception) as err:
            load_experiment_grid(
                write(tmp_path / "g.conf", MC_CONFIG.replace("signal = strong", "signal = custom"))
            )
        assert "beta_active" in str(err.value)


def test_version_flag():
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
