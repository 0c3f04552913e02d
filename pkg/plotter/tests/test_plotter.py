import pytest

from pure_explore_plotter import PlotSpec, PlotterError, main, render

SIMULATE_CSV = """scenario_id,allocation,recommendation,n,replicates,mean_simple_regret,std_error,mean_cumulative_regret
a2,unif,eba,20,10000,0.35,0.004,5.1
a2,unif,eba,80,10000,0.21,0.003,20.6
a2,unif,eba,320,10000,0.05,0.002,81.2
a2,ucb(2),mpa,20,10000,0.30,0.004,4.2
a2,ucb(2),mpa,80,10000,0.12,0.003,11.8
a2,ucb(2),mpa,320,10000,0.01,0.001,24.0
"""

BOUNDS_CSV = """scenario_id,bound,n,value,valid
a2,unif_eba_sum,20,3.2,false
a2,unif_eba_sum,80,1.1,true
a2,unif_eba_sum,320,0.4,true
a2,ucb_mpa_df,20,9.0,false
a2,ucb_mpa_df,80,2.5,false
a2,ucb_mpa_df,320,0.9,true
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRender:
    def test_renders_png(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        bounds = write(tmp_path, "bounds.csv", BOUNDS_CSV)
        out = tmp_path / "plot.png"
        render(PlotSpec(simulate_csv=sim, bounds_csv=bounds, output=str(out)))
        data = out.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000

    def test_rerender_identical_bytes(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        bounds = write(tmp_path, "bounds.csv", BOUNDS_CSV)
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        spec1 = PlotSpec(simulate_csv=sim, bounds_csv=bounds, output=str(out1), clamp=1.0)
        spec2 = PlotSpec(simulate_csv=sim, bounds_csv=bounds, output=str(out2), clamp=1.0)
        render(spec1)
        render(spec2)
        assert out1.read_bytes() == out2.read_bytes()

    def test_inputs_not_mutated(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        bounds = write(tmp_path, "bounds.csv", BOUNDS_CSV)
        render(PlotSpec(simulate_csv=sim, bounds_csv=bounds, output=str(tmp_path / "p.png")))
        assert open(sim).read() == SIMULATE_CSV
        assert open(bounds).read() == BOUNDS_CSV

    def test_without_bounds(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        out = tmp_path / "plain.png"
        render(PlotSpec(simulate_csv=sim, output=str(out)))
        assert out.exists()

    def test_log_axes_and_clamp(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        bounds = write(tmp_path, "bounds.csv", BOUNDS_CSV)
        out = tmp_path / "log.png"
        render(
            PlotSpec(
                simulate_csv=sim, bounds_csv=bounds, output=str(out),
                logx=True, logy=True, clamp=0.5,
            )
        )
        assert out.exists()

    def test_empty_csv_rejected(self, tmp_path):
        empty = write(tmp_path, "empty.csv", "")
        header_only = write(
            tmp_path,
            "header.csv",
            "scenario_id,allocation,recommendation,n,replicates,mean_simple_regret,std_error\n",
        )
        for path in (empty, header_only):
            with pytest.raises(PlotterError):
                render(PlotSpec(simulate_csv=path, output=str(tmp_path / "x.png")))

    def test_malformed_csv_rejected(self, tmp_path):
        missing_col = write(tmp_path, "bad.csv", "allocation,n\nunif,3\n")
        with pytest.raises(PlotterError):
            render(PlotSpec(simulate_csv=missing_col, output=str(tmp_path / "x.png")))
        bad_value = write(
            tmp_path,
            "badval.csv",
            SIMULATE_CSV.replace("0.35", "not-a-number"),
        )
        with pytest.raises(PlotterError):
            render(PlotSpec(simulate_csv=bad_value, output=str(tmp_path / "y.png")))
        bad_flag = write(tmp_path, "badflag.csv", BOUNDS_CSV.replace("false", "maybe"))
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        with pytest.raises(PlotterError):
            render(PlotSpec(simulate_csv=sim, bounds_csv=bad_flag, output=str(tmp_path / "z.png")))


class TestMain:
    def test_exit_zero_on_success(self, tmp_path):
        sim = write(tmp_path, "sim.csv", SIMULATE_CSV)
        bounds = write(tmp_path, "bounds.csv", BOUNDS_CSV)
        out = tmp_path / "cli.png"
        code = main(["--simulate", sim, "--bounds", bounds, "--out", str(out), "--clamp", "1"])
        assert code == 0
        assert out.exists()

    def test_exit_nonzero_on_malformed(self, tmp_path, capsys):
        bad = write(tmp_path, "bad.csv", "x,y\n1,2\n")
        code = main(["--simulate", bad, "--out", str(tmp_path / "no.png")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_exit_nonzero_on_missing_file(self, tmp_path):
        code = main(["--simulate", str(tmp_path / "ghost.csv"), "--out", str(tmp_path / "no.png")])
        assert code == 1


class TestAcceptance:
    def test_a2_scenario_end_to_end(self, tmp_path):
        """Render the 20-arm scenario's simulate + bounds CSVs produced by the
        core package's CLI; one solid curve per pair plus overlays, exit 0."""
        pure_explore_cli = pytest.importorskip("pure_explore.cli")
        config = tmp_path / "a2.toml"
        config.write_text(
            """
scenario_id = "a2"
seed = 5
horizon = 640
replicates = 400
checkpoints = [20, 40, 80, 160, 320, 640]

[instance]
kind = "a2-scenario"
k = 20
delta = 0.2
mu_star = 0.9

[[strategies]]
allocation = "unif"
recommendation = "eba"

[[strategies]]
allocation = "ucb"
alpha = 2.0
recommendation = "mpa"

[[strategies]]
allocation = "ucb"
alpha = 2.0
recommendation = "edp"

[bounds]
alpha = 2.0
eta = 0.5
"""
        )
        sim_csv = tmp_path / "sim.csv"
        bounds_csv = tmp_path / "bounds.csv"
        assert pure_explore_cli.main(["simulate", "--config", str(config), "--output", str(sim_csv)]) == 0
        assert pure_explore_cli.main(["bounds", "--config", str(config), "--output", str(bounds_csv)]) == 0
        out = tmp_path / "a2.png"
        code = main(
            ["--simulate", str(sim_csv), "--bounds", str(bounds_csv),
             "--out", str(out), "--clamp", "1.0", "--logx"]
        )
        print(f"[acceptance] plotter-a2-scenario: {'PASS' if code == 0 and out.exists() else 'FAIL'}")
        assert code == 0
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_malformed_csv_exits_nonzero(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("scenario_id,allocation\nonly,two\n")
        code = main(["--simulate", str(bad), "--out", str(tmp_path / "out.png")])
        print(f"[acceptance] plotter-malformed-csv: {'PASS' if code == 1 else 'FAIL'}")
        assert code == 1
