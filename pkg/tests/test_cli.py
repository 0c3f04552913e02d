import csv
import io

import pytest

from pure_explore.cli import (
    ConfigError,
    a2_scenario_arms,
    build_instance,
    main,
    parse_config,
    run_bounds,
    run_oracle,
    run_simulate,
    run_xarmed,
    serialize_config,
)

BASE_CONFIG = """
scenario_id = "demo"
seed = 42
horizon = 8
replicates = 50
checkpoints = [2, 4, 8]

[instance]
kind = "explicit"
arms = [
    {type = "bernoulli", p = 0.5},
    {type = "bernoulli", p = 1.0},
]

[[strategies]]
allocation = "unif"
recommendation = "eba"

[[strategies]]
allocation = "ucb"
alpha = 2.0
recommendation = "mpa"

[bounds]
alpha = 2.0
eta = 0.5
"""


class TestParseConfig:
    def test_valid_config(self):
        config = parse_config(BASE_CONFIG)
        assert config.scenario_id == "demo"
        assert config.seed == 42
        assert config.checkpoints == (2, 4, 8)
        assert len(config.strategies) == 2
        assert config.strategies[1].alpha == 2.0

    def test_missing_seed(self):
        bad = BASE_CONFIG.replace('seed = 42\n', "")
        with pytest.raises(ConfigError, match="seed"):
            parse_config(bad)

    def test_checkpoint_beyond_horizon(self):
        bad = BASE_CONFIG.replace("checkpoints = [2, 4, 8]", "checkpoints = [2, 4, 9]")
        with pytest.raises(ConfigError, match="checkpoints"):
            parse_config(bad)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(BASE_CONFIG + "\nmystery = 1\n")

    def test_unknown_strategy_key_rejected(self):
        bad = BASE_CONFIG.replace('recommendation = "mpa"', 'recommendation = "mpa"\ngamma = 3')
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(bad)

    def test_ucb_requires_alpha(self):
        bad = BASE_CONFIG.replace("alpha = 2.0\nrecommendation = \"mpa\"", 'recommendation = "mpa"')
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(bad)

    def test_alpha_rejected_for_unif(self):
        bad = BASE_CONFIG.replace(
            'allocation = "unif"', 'allocation = "unif"\nalpha = 2.0'
        )
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(bad)

    def test_eba_floor_only_for_eba(self):
        bad = BASE_CONFIG.replace(
            'recommendation = "mpa"', 'recommendation = "mpa"\neba_floor = true'
        )
        with pytest.raises(ConfigError, match="eba_floor"):
            parse_config(bad)

    def test_default_checkpoints(self):
        cfg = parse_config(BASE_CONFIG.replace("checkpoints = [2, 4, 8]\n", ""))
        assert cfg.checkpoints == (1, 2, 4, 8)

    def test_a2_scenario(self):
        text = """
scenario_id = "a2"
seed = 1
horizon = 10
replicates = 10

[instance]
kind = "a2-scenario"
k = 20
delta = 0.2
mu_star = 0.9

[[strategies]]
allocation = "unif"
recommendation = "eba"
"""
        config = parse_config(text)
        inst = build_instance(config.instance)
        assert inst.k == 20
        assert inst.means[0] == 0.9
        assert inst.means[1] == pytest.approx(0.7)
        assert all(m == pytest.approx(0.5) for m in inst.means[2:])

    def test_a2_validation(self):
        with pytest.raises(ConfigError):
            a2_scenario_arms(1, 0.2, 0.9)
        with pytest.raises(ConfigError):
            a2_scenario_arms(20, 0.5, 0.9)  # floor mean below 0
        with pytest.raises(ConfigError):
            a2_scenario_arms(20, 0.2, 1.2)

    def test_round_trip_fixed_point(self):
        config = parse_config(BASE_CONFIG)
        assert parse_config(serialize_config(config)) == config

    def test_round_trip_with_discrete_and_a2(self):
        text = """
scenario_id = "mix"
seed = 9
horizon = 6
replicates = 5
output = "x.csv"

[instance]
kind = "explicit"
arms = [
    {type = "dirac", v = 0.25},
    {type = "discrete", support = [[0.0, 0.5], [1.0, 0.5]]},
]

[[strategies]]
allocation = "unif"
recommendation = "eba"
eba_floor = true
"""
        config = parse_config(text)
        assert parse_config(serialize_config(config)) == config

    def test_not_toml(self):
        with pytest.raises(ConfigError, match="TOML"):
            parse_config("{json: no}")


class TestRunners:
    def test_simulate_rows(self):
        config = parse_config(BASE_CONFIG)
        rows = run_simulate(config)
        assert len(rows) == 2 * 3
        assert rows[0][0] == "demo"
        assert {r[1] for r in rows} == {"unif", "ucb(2)"}
        # replicates=1 convention: std_error column is 0
        single = parse_config(BASE_CONFIG.replace("replicates = 50", "replicates = 1"))
        rows1 = run_simulate(single)
        assert all(r[6] == "0" for r in rows1)

    def test_simulate_deterministic_and_thread_invariant(self):
        config = parse_config(BASE_CONFIG)
        assert run_simulate(config, threads=1) == run_simulate(config, threads=4)

    def test_oracle_rows(self):
        config = parse_config(BASE_CONFIG)
        rows = run_oracle(config)
        unif_eba_n2 = [r for r in rows if r[1] == "unif" and r[3] == "2"]
        assert len(unif_eba_n2) == 1
        assert float(unif_eba_n2[0][4]) == 0.25
        assert all(r[5] == "exact" for r in rows)

    def test_bounds_rows(self):
        config = parse_config(BASE_CONFIG)
        rows = run_bounds(config)
        names = {r[1] for r in rows}
        assert {"unif_eba_sum", "unif_eba_mcdiarmid", "unif_eba_df", "ucb_mpa_dd",
                "ucb_mpa_beta", "edp_df", "lower_df"} <= names
        assert all(r[4] in ("true", "false") for r in rows)

    def test_bounds_requires_params(self):
        config = parse_config(BASE_CONFIG.split("[bounds]")[0])
        with pytest.raises(ConfigError, match="bounds"):
            run_bounds(config)


class FakeXArgs:
    def __init__(self, **kw):
        self.env = kw.get("env", "tent:a=0.3,rho2=0.2")
        self.noise = kw.get("noise", "deterministic")
        self.horizon = kw.get("horizon", 20)
        self.checkpoints = kw.get("checkpoints", "5,20")
        self.replicates = kw.get("replicates", 10)
        self.seed = kw.get("seed", 3)
        self.scenario_id = kw.get("scenario_id")


class TestXarmed:
    def test_rows(self):
        rows = run_xarmed(FakeXArgs())
        assert len(rows) == 2
        assert rows[0][1] == "tent:a=0.3,rho2=0.2"
        assert float(rows[0][5]) >= 0.0

    def test_custom_env_rejected(self):
        with pytest.raises(ConfigError, match="library"):
            run_xarmed(FakeXArgs(env="custom"))

    def test_malformed_env(self):
        with pytest.raises(ConfigError):
            run_xarmed(FakeXArgs(env="tent:a=0.3"))
        with pytest.raises(ConfigError):
            run_xarmed(FakeXArgs(env="peak:a=1,rho2=2"))


class TestMain:
    def write_config(self, tmp_path, text=BASE_CONFIG):
        path = tmp_path / "config.toml"
        path.write_text(text)
        return str(path)

    def test_simulate_csv_bytes_identical(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert main(["simulate", "--config", cfg, "--output", out1, "--threads", "1"]) == 0
        assert main(["simulate", "--config", cfg, "--output", out2, "--threads", "3"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_csv_round_trip(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out = str(tmp_path / "sim.csv")
        assert main(["simulate", "--config", cfg, "--output", out]) == 0
        with open(out, newline="") as fh:
            records = list(csv.DictReader(fh))
        config = parse_config(BASE_CONFIG)
        rows = run_simulate(config)
        assert len(records) == len(rows)
        for record, row in zip(records, rows):
            assert record["mean_simple_regret"] == row[5]
            assert float(record["mean_simple_regret"]) == float(row[5])

    def test_oracle_and_bounds_commands(self, tmp_path):
        cfg = self.write_config(tmp_path)
        assert main(["oracle", "--config", cfg, "--output", str(tmp_path / "o.csv")]) == 0
        assert main(["bounds", "--config", cfg, "--output", str(tmp_path / "b.csv")]) == 0

    def test_xarmed_command(self, tmp_path):
        out = str(tmp_path / "x.csv")
        code = main([
            "xarmed", "--env", "tent:a=0.3,rho2=0.2", "--noise", "deterministic",
            "--horizon", "50", "--replicates", "5", "--seed", "7", "--output", out,
        ])
        assert code == 0
        header = open(out).readline().strip().split(",")
        assert header[0] == "scenario_id"

    def test_error_exit_codes(self, tmp_path, capsys):
        bad_cfg = self.write_config(tmp_path, BASE_CONFIG.replace('seed = 42\n', ""))
        assert main(["simulate", "--config", bad_cfg]) == 1
        assert "seed" in capsys.readouterr().err
        assert main(["simulate", "--config", str(tmp_path / "missing.toml")]) == 1
        assert main(["xarmed", "--env", "custom", "--horizon", "10",
                     "--replicates", "2", "--seed", "1"]) == 1

    def test_seed_override_changes_results(self, tmp_path):
        cfg = self.write_config(tmp_path)
        a, b = str(tmp_path / "s1.csv"), str(tmp_path / "s2.csv")
        assert main(["simulate", "--config", cfg, "--output", a, "--seed", "42"]) == 0
        assert main(["simulate", "--config", cfg, "--output", b, "--seed", "43"]) == 0
        assert open(a).read() != open(b).read()

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        cfg = self.write_config(tmp_path)
        out1, out2 = str(tmp_path / "e1.csv"), str(tmp_path / "e2.csv")
        assert main(["simulate", "--config", cfg, "--output", out1]) == 0
        monkeypatch.setenv("PURE_EXPLORE_THREADS", "4")
        assert main(["simulate", "--config", cfg, "--output", out2]) == 0
        assert open(out1).read() == open(out2).read()
