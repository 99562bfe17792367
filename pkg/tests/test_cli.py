import json
import re

import numpy as np
import pytest

from cknlab.cli import main, parse_config_echo


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestParams:
    def test_json_payload(self, capsys):
        code, out = run_cli(["params", "--d", "3", "--gamma", "0.5",
                             "--p", "2", "--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == "ckn/1"
        assert payload["result"]["two_star_gamma"] == pytest.approx(5.0)
        assert payload["result"]["eta"] == pytest.approx(0.5)

    def test_validation_exit_code(self, capsys):
        code = main(["params", "--d", "3", "--gamma", "1.2", "--p", "2"])
        assert code == 2

    def test_dimension_exit_code(self, capsys):
        assert main(["params", "--d", "2", "--gamma", "0.1", "--p", "1.5"]) == 2


class TestReproducibility:
    def test_byte_identical_modulo_timestamp(self, tmp_path):
        target = tmp_path / "a.json"
        args = ["params", "--d", "4", "--gamma", "0.25", "--p", "1.5",
                "--out", str(target)]
        main(args)
        first = target.read_text()
        main(args)
        second = target.read_text()
        strip = lambda t: re.sub(r'"timestamp": "[^"]*"', "", t)
        assert strip(first) == strip(second)

    def test_config_echo_round_trip(self, tmp_path):
        out = tmp_path / "o.json"
        main(["params", "--d", "3", "--gamma", "0.5", "--p", "2.0",
              "--out", str(out)])
        cfg = parse_config_echo(out.read_text())
        assert cfg["d"] == 3 and cfg["gamma"] == 0.5 and cfg["p"] == 2.0
        assert cfg["subcommand"] == "params"

    def test_csv_config_echo(self, tmp_path):
        out = tmp_path / "o.csv"
        main(["params", "--d", "3", "--gamma", "0.0", "--p", "2.0",
              "--format", "csv", "--out", str(out)])
        cfg = parse_config_echo(out.read_text())
        assert cfg["format"] == "csv" and cfg["d"] == 3

    def test_config_file_with_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("d=3\ngamma=0.5\np=1.7\n")
        code, out = run_cli(["params", "--config", str(cfg), "--p", "2.0"],
                            capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["config"]["gamma"] == 0.5
        assert payload["config"]["p"] == 2.0  # explicit flag wins


class TestCompute:
    def test_minimize_small_grid(self, tmp_path):
        out = tmp_path / "m.json"
        code = main(["minimize", "--d", "3", "--gamma", "0", "--p", "2",
                     "--grid", "256", "--no-richardson", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        got = payload["result"]["best_quotient"]
        ref = payload["result"]["closed_form_quotient"]
        assert abs(got - ref) / ref < 1e-4

    def test_spectrum_zero_mode(self, tmp_path):
        out = tmp_path / "s.json"
        code = main(["spectrum", "--d", "3", "--gamma", "0", "--p", "2",
                     "--ell", "1", "--n", "1000", "--out", str(out)])
        assert code == 0
        lam = json.loads(out.read_text())["result"]["lambda_min"]
        assert abs(lam) < 1e-4

    def test_flow_csv_decay(self, tmp_path):
        out = tmp_path / "f.csv"
        code = main(["flow", "--d", "3", "--gamma", "0", "--m", "0.75",
                     "--T", "0.5", "--cells", "150", "--format", "csv",
                     "--out", str(out)])
        assert code == 0
        text = out.read_text()
        rows = [line for line in text.splitlines() if not line.startswith("#")]
        header, data = rows[0], rows[1:]
        assert header == "t,F,I,mass,dt"
        t, F = [], []
        for line in data:
            cols = [float(x) for x in line.split(",")]
            t.append(cols[0])
            F.append(cols[1])
        t, F = np.array(t), np.array(F)
        assert np.all(F <= F[0] * np.exp(-4.0 * t) * 1.01)

    def test_shoot_json(self, tmp_path, capsys):
        code, out = run_cli(["shoot", "--d", "3", "--gamma", "0", "--p", "2",
                             "--tol", "1e-5"], capsys)
        assert code == 0
        v0 = json.loads(out)["result"]["v0"]
        assert v0 == pytest.approx(4.0, rel=1e-5)

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--d", "3", "--p", "2", "--gamma-start", "0",
                     "--gamma-stop", "0.05", "--gamma-points", "3",
                     "--n", "500", "--format", "csv", "--out", str(out)])
        assert code == 0
        rows = [r for r in out.read_text().splitlines() if not r.startswith("#")]
        assert rows[0] == "gamma,ell,lambdaMin,gridN,rMax"
        assert len(rows) == 4

    def test_selection_summary(self, tmp_path):
        out = tmp_path / "sel.json"
        code = main(["selection", "--d", "3", "--p", "2", "--s-points", "5",
                     "--out", str(out)])
        assert code == 0
        res = json.loads(out.read_text())["result"]
        assert res["crossing_radius"] == pytest.approx(1.0, abs=1e-8)
        assert abs(res["total_K_quadrature"] - res["total_K_closed_form"]) \
            < 1e-8 * abs(res["total_K_closed_form"])
