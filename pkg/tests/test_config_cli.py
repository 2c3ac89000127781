import json

import numpy as np
import pytest

from kaslocal.cli import main
from kaslocal.config import ConfigError, parse_config, parse_space_file
from kaslocal.report import Report


class TestConfigParsing:
    def test_full_config(self):
        cfg = parse_config(
            """
            # torus determinant sweep
            backend = torus{n=2, res=405}
            kernel = ball{r=0.1}
            sweep r = 0.1, 0.05, 0.025
            p = 2
            eps = 0.3
            fixtures = sin, sin-weighted
            seed = 7
            stagger = true
            """
        )
        assert cfg.backend.name == "torus"
        assert cfg.backend.params == {"n": 2, "res": 405}
        assert cfg.kernel.params == {"r": 0.1}
        assert cfg.sweep_param == "r"
        assert cfg.sweep_values == (0.1, 0.05, 0.025)
        assert cfg.fixtures == ("sin", "sin-weighted")
        assert cfg.stagger

    def test_error_cites_line_number(self):
        with pytest.raises(ConfigError) as err:
            parse_config("backend = torus{n=2}\np = not-a-number\n")
        assert "line 2" in str(err.value)

    def test_missing_backend(self):
        with pytest.raises(ConfigError):
            parse_config("p = 1\n")

    def test_non_monotone_sweep_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("backend = torus{n=1, res=8}\nsweep r = 0.1, 0.2, 0.15\n")

    def test_bad_eps_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("backend = torus{n=1, res=8}\neps = -1\n")


class TestSpaceFile:
    def test_explicit_dist(self):
        sp = parse_space_file("dist = 0 1 ; 1 0\nmu = 1 2\n")
        assert sp.n == 2
        assert sp.mu[1] == 2.0

    def test_points_euclidean(self):
        sp = parse_space_file("points = 0 0 ; 3 4\n")
        assert sp.dist[0, 1] == pytest.approx(5.0)
        assert sp.mu.tolist() == [1.0, 1.0]

    def test_stiffness_field(self):
        sp = parse_space_file("dist = 0 1 ; 1 0\nstiffness = 2 -2 ; -2 2\n")
        f = np.array([0.0, 1.0])
        assert sp.dirichlet_energy(f) == pytest.approx(2.0)

    def test_default_complete_graph_stiffness(self):
        sp = parse_space_file("dist = 0 1 ; 1 0\n")
        assert sp.dirichlet_energy(np.array([0.0, 1.0])) == pytest.approx(1.0)

    def test_bad_number_cites_line(self):
        with pytest.raises(ConfigError) as err:
            parse_space_file("dist = 0 x ; 1 0\n")
        assert "line 1" in str(err.value)


class TestReportFormat:
    def test_csv_shape(self, tmp_path):
        rep = Report("demo", {"seed": 0})
        rep.add_row("a", 1.0 / 3.0, 0.5, 12.5)
        rep.summary = {"pass": True, "failures": []}
        csv_path, json_path = rep.write(tmp_path / "out")
        text = csv_path.read_text()
        assert text.startswith("param,nonlocal,local,abs_err,rel_err,ms\n")
        assert "0.33333333333333331" in text  # 17 significant digits
        assert "\r" not in text
        payload = json.loads(json_path.read_text())
        assert payload["format_version"] == 1
        assert payload["config"] == {"seed": 0}
        assert payload["rows"][0]["param"] == "a"

    def test_rel_err_nonnegative(self):
        rep = Report("demo", {})
        row = rep.add_row("x", -2.0, 1.0, 0.0)
        assert row.abs_err == 3.0
        assert row.rel_err == 3.0


@pytest.fixture
def twopoint_file(tmp_path):
    path = tmp_path / "twopoint.txt"
    path.write_text("dist = 0 1 ; 1 0\nmu = 1 1\n")
    return path


class TestCliCommands:
    def test_converge_energy_two_point(self, tmp_path, twopoint_file, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"backend = finite{{file={twopoint_file}}}\n"
            "kernel = heat{t=1}\n"
            "sweep t = 1, 0.1, 0.01, 0.001\n"
            "fixtures = indicator\n"
            "max_final_rel_err = 0.002\n"
        )
        code = main(["converge-energy", "--config", str(cfg), "--out", str(tmp_path / "r")])
        assert code == 0
        rows = (tmp_path / "r.csv").read_text().strip().splitlines()
        assert len(rows) == 5
        # closed-form deficit at t=1 is 1 - (1 - e^-2)/2
        first = rows[1].split(",")
        assert float(first[4]) == pytest.approx(1 - (1 - np.exp(-2)) / 2, rel=1e-12)

    def test_failure_exit_code(self, tmp_path, twopoint_file):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"backend = finite{{file={twopoint_file}}}\n"
            "kernel = heat{t=1}\n"
            "sweep t = 1, 0.5\n"
            "fixtures = indicator\n"
            "max_final_rel_err = 1e-6\n"
        )
        assert main(["converge-energy", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 1

    def test_config_error_exit_code(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("kernel = heat{t=1}\n")
        assert main(["converge-energy", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2
        assert main(["identities", "--config", str(tmp_path / "missing.cfg")]) == 2

    def test_identities_command(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("backend = torus{n=1, res=8}\nidentity_fixtures = 10\n")
        out = tmp_path / "ident"
        assert main(["identities", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads(out.with_suffix(".json").read_text())
        assert payload["summary"]["pass"] is True
        names = [r["param"] for r in payload["rows"]]
        assert "delta-delta-null" in names and "rational-spotcheck" in names

    def test_kas_cohomology_command(self, tmp_path):
        pts = " ; ".join(f"{np.cos(a)} {np.sin(a)}" for a in np.arange(12) / 12 * 2 * np.pi)
        space = tmp_path / "circle.txt"
        space.write_text(f"points = {pts}\n")
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"backend = finite{{file={space}}}\n"
            "p = 2\n"
            "sweep eps = 3.0, 0.8, 0.1\n"
        )
        out = tmp_path / "coh"
        assert main(["kas-cohomology", "--config", str(cfg), "--out", str(out)]) == 0
        dims = json.loads(out.with_suffix(".json").read_text())["summary"]["dims"]
        assert dims["0.8"] == [1, 1, 0]
        assert dims["3"] == [1, 0, 0]
        assert dims["0.1"] == [12, 0, 0]

    def test_chain_map_command(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "backend = torus{n=2, res=24}\n"
            "kernel = ball{r=0.1}\n"
            "sweep r = 0.1, 0.05\n"
            "p = 2\n"
            "eps = 0.3\n"
            "fixtures = sin, trig-random\n"
        )
        out = tmp_path / "chain"
        assert main(["chain-map", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads(out.with_suffix(".json").read_text())
        residuals = [r["nonlocal"] for r in payload["rows"] if r["param"].startswith("residual")]
        assert all(v <= 1e-12 for v in residuals)

    def test_converge_det_reproducible(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "backend = torus{n=2, res=30}\n"
            "kernel = ball{r=0.12}\n"
            "sweep r = 0.12, 0.06\n"
            "p = 2\n"
            "eps = 0.3\n"
            "fixtures = trig-random\n"
            "seed = 5\n"
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["converge-det", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["converge-det", "--config", str(cfg), "--out", str(out2)]) == 0
        csv1 = (tmp_path / "a.csv").read_text()
        csv2 = (tmp_path / "b.csv").read_text()
        # timing column differs; everything numeric before it must be identical
        strip = lambda text: [",".join(line.split(",")[:-1]) for line in text.splitlines()]
        assert strip(csv1) == strip(csv2)

    def test_threads_do_not_change_results(self, tmp_path, twopoint_file):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"backend = finite{{file={twopoint_file}}}\n"
            "kernel = heat{t=1}\n"
            "sweep t = 1, 0.1, 0.01\n"
            "fixtures = indicator\n"
        )
        outs = []
        for threads, name in ((1, "s"), (4, "t")):
            main(
                [
                    "converge-energy",
                    "--config",
                    str(cfg),
                    "--out",
                    str(tmp_path / name),
                    "--threads",
                    str(threads),
                ]
            )
            text = (tmp_path / f"{name}.csv").read_text()
            outs.append([",".join(l.split(",")[:-1]) for l in text.splitlines()])
        assert outs[0] == outs[1]
