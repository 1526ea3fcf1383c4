import csv
import io
import json
import math

import pytest

from nlcone import cli
from nlcone.errors import ConvergenceError, InconsistencyError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


def numbers_without_errors(obj, path=""):
    """Floats not wrapped in a {value, error} pair."""
    if isinstance(obj, dict):
        if set(obj) == {"value", "error"}:
            return []
        return [p for k, v in obj.items() for p in numbers_without_errors(v, f"{path}.{k}")]
    if isinstance(obj, list):
        return [p for i, v in enumerate(obj) for p in numbers_without_errors(v, f"{path}[{i}]")]
    return [path] if isinstance(obj, float) else []


class TestCommands:
    def test_alpha_s0_routes_to_alpha0(self, capsys):
        doc = run_json(capsys, "alpha", "--m", "2", "--n", "1", "--s", "0")
        assert abs(doc["result"]["alpha"]["value"] - 1 / math.sqrt(3)) < 1e-8

    def test_alpha_symmetric(self, capsys):
        doc = run_json(capsys, "alpha", "--m", "5", "--n", "5", "--s", "0.2")
        assert doc["result"]["alpha"]["value"] == 1.0

    def test_alpha_table_value(self, capsys):
        doc = run_json(capsys, "alpha", "--m", "4", "--n", "3", "--s", "0.3")
        assert abs(doc["result"]["alpha"]["value"] - 0.8341) < 5e-4

    def test_alpha0(self, capsys):
        doc = run_json(capsys, "alpha0", "--m", "3", "--n", "3")
        assert doc["result"]["alpha"]["value"] == 1.0

    @pytest.mark.parametrize("m, n, verdict, h, a", [(4, 3, "stable", 0.4477, 0.4288), (2, 2, "unstable", 1.0679, 2.3015)])
    def test_stability(self, capsys, m, n, verdict, h, a):
        res = run_json(capsys, "stability", "--m", str(m), "--n", str(n), "--s", "0")["result"]
        assert res["verdict"] == verdict
        assert abs(res["H"]["value"] - h) < 2e-3 and abs(res["A0_squared"]["value"] - a) < 2e-3
        assert res["normalization"] == "normalized"

    def test_stability_high_s_unstable(self, capsys):
        res = run_json(capsys, "stability", "--m", "4", "--n", "3", "--s", "0.4")["result"]
        assert res["verdict"] == "unstable"

    def test_raw_flag(self, capsys):
        red = run_json(capsys, "stability", "--m", "3", "--n", "2", "--s", "0.2", "--alpha", "0.7")["result"]
        raw = run_json(capsys, "stability", "--m", "3", "--n", "2", "--s", "0.2", "--alpha", "0.7", "--raw")["result"]
        f = raw["raw_factor"]["value"]
        assert raw["normalization"] == "raw"
        assert raw["H"]["value"] == pytest.approx(f * red["H"]["value"])

    def test_scan_symmetric(self, capsys):
        res = run_json(capsys, "scan", "--m", "3", "--n", "3", "--s-from", "0.1", "--s-to", "0.3", "--steps", "3")["result"]
        assert [r["alpha"]["value"] for r in res["rows"]] == [1.0, 1.0, 1.0]
        assert [r["s"] for r in res["rows"]] == pytest.approx([0.1, 0.2, 0.3])

    def test_mc_check(self, capsys):
        res = run_json(capsys, "mc-check", "--m", "3", "--n", "3", "--s", "0.3", "--alpha", "1",
                       "--samples", "100000")["result"]
        assert res["agrees_3sigma"] and abs(res["quadrature"]["value"]) < 1e-9
        assert res["cutoff_radius"]["value"] == 1e3

    def test_mc_check_alignment(self, capsys):
        res = run_json(capsys, "mc-check", "--m", "2", "--n", "2", "--s", "0.2", "--alpha", "1",
                       "--integrand", "normal-alignment", "--samples", "100000")["result"]
        assert abs(res["z_score"]["value"]) < 4

    def test_jacobi_probe(self, capsys):
        res = run_json(capsys, "jacobi-probe", "--m", "3", "--n", "3", "--s", "0.2", "--alpha", "1")["result"]
        assert res["agrees"] and res["beta"]["value"] == pytest.approx(1.9)

    def test_self_check(self, capsys):
        res = run_json(capsys, "self-check", "--samples", "100000")["result"]
        assert res["all_ok"]

    def test_out_path(self, capsys, tmp_path):
        path = tmp_path / "a.json"
        code, out, _ = run(capsys, "alpha0", "--m", "2", "--n", "1", "--format", "json", "--out", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["meta"]["command"] == "alpha0"


class TestOutput:
    def test_json_round_trip(self, capsys):
        code, out, _ = run(capsys, "stability", "--m", "3", "--n", "2", "--s", "0.2", "--alpha", "0.7", "--format", "json")
        assert code == 0
        assert cli.to_json(json.loads(out)) == out

    def test_meta_and_error_fields(self, capsys):
        doc = run_json(capsys, "stability", "--m", "3", "--n", "2", "--s", "0.2", "--alpha", "0.7")
        assert set(doc) == {"meta", "result"}
        assert {"version", "defaults", "timestamp", "command", "params"} <= set(doc["meta"])
        assert doc["meta"]["defaults"]["mc_samples"] == 1_000_000 and doc["meta"]["defaults"]["seed"] == 0
        # inputs are echoed as given; every computed float carries an error
        bare = numbers_without_errors(doc["result"])
        assert bare == [".s"]

    def test_csv_provenance_header(self, capsys):
        code, out, _ = run(capsys, "alpha0", "--m", "4", "--n", "3", "--format", "csv")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("# nlcone ")
        assert any(l.startswith("# default quad_abs_tol=") for l in lines)
        body = [l for l in lines if not l.startswith("#")]
        rows = list(csv.DictReader(io.StringIO("\n".join(body))))
        assert float(rows[0]["alpha"]) == pytest.approx(0.839881275702594, abs=1e-9)
        assert "alpha_error" in rows[0]

    def test_human_header(self, capsys):
        code, out, _ = run(capsys, "alpha0", "--m", "4", "--n", "3")
        assert code == 0 and out.startswith("# nlcone ") and "alpha:" in out

    def test_table1_csv_layout(self):
        cells = [{"m": m, "n": n, "H": cli.num(m + n / 10), "A0_squared": cli.num(-m - n / 10)}
                 for m in cli.TABLE_M for n in range(1, m + 1)]
        rows = cli._table1_csv(cells)
        assert rows[0][:4] == ["m", "quantity", "n1", "n1_error"] and len(rows) == 13
        assert rows[1][:3] == [2, "H", 2.1] and rows[2][:3] == [2, "A0^2", -2.1]
        assert rows[1][6] == "" and rows[-1][-2] == -7.7

    def test_nan_becomes_null(self):
        assert cli.num(math.nan, 0.1) == {"value": None, "error": 0.1}


class TestTolerances:
    def test_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_ABS, "1e-8")
        monkeypatch.setenv(cli.ENV_REL, "1e-7")
        doc = run_json(capsys, "alpha0", "--m", "2", "--n", "1")
        assert doc["meta"]["defaults"]["quad_abs_tol"] == 1e-8 and doc["meta"]["defaults"]["quad_rel_tol"] == 1e-7
        assert doc["meta"]["defaults"]["inner_abs_tol"] == pytest.approx(1e-10)

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_ABS, "1e-8")
        doc = run_json(capsys, "alpha0", "--m", "2", "--n", "1", "--abs-tol", "1e-5")
        assert doc["meta"]["defaults"]["quad_abs_tol"] == 1e-5

    def test_bad_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_REL, "fast")
        code, _, err = run(capsys, "alpha0", "--m", "2", "--n", "1")
        assert code == 2 and cli.ENV_REL in err


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["alpha", "--m", "1", "--n", "2", "--s", "0.2"],
        ["alpha", "--m", "1", "--n", "1", "--s", "0.2"],
        ["stability", "--m", "3", "--n", "2", "--s", "1.2"],
        ["alpha", "--m", "4", "--n", "3", "--s", "0.95"],
        ["scan", "--m", "4", "--n", "3", "--s-from", "0.4", "--s-to", "0.1", "--steps", "4"],
        ["mc-check", "--m", "3", "--n", "2", "--s", "0.3", "--alpha", "0.7", "--samples", "100"],
        ["mc-check", "--m", "3", "--n", "2", "--s", "0.3", "--alpha", "0.7", "--integrand", "hardy-weight"],
        ["jacobi-probe", "--m", "3", "--n", "2", "--s", "0.3", "--alpha", "0.7", "--beta", "9"],
    ])
    def test_invalid_arguments(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and err.startswith("nlcone: error")

    def test_argparse_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["alpha", "--m", "3"])
        assert exc.value.code == 2
        capsys.readouterr()

    def test_non_convergence(self, capsys):
        with pytest.warns(RuntimeWarning):
            code, _, err = run(capsys, "stability", "--m", "3", "--n", "2", "--s", "0.2", "--alpha", "0.7",
                               "--abs-tol", "1e-300", "--rel-tol", "1e-300")
        assert code == 3 and "stability_report" in err

    def test_convergence_error_mapped(self, capsys, monkeypatch):
        def boom(cfg):
            raise ConvergenceError("solve_alpha", "no bracket")
        monkeypatch.setitem(cli.COMMANDS, "alpha", boom)
        code, _, err = run(capsys, "alpha", "--m", "4", "--n", "3", "--s", "0.2")
        assert code == 3 and "solve_alpha" in err

    def test_inconsistency(self, capsys, monkeypatch):
        def boom(cfg):
            exc = InconsistencyError("self-check failed: x")
            exc.result = {"checks": [], "all_ok": False}
            raise exc
        monkeypatch.setitem(cli.COMMANDS, "self-check", boom)
        code, out, err = run(capsys, "self-check", "--format", "json")
        assert code == 4 and json.loads(out)["result"]["all_ok"] is False


def test_parallel_map_keeps_order():
    assert cli._map(abs, [-3, 1, -2, 5], 2) == [3, 1, 2, 5]
