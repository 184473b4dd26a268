"""
End-to-end tests for the cvms-fixpoint command line
"""

import json

import pytest

from cli import DEFAULTS, main, setup_parser
from complex_order import parse_complex
from errors import ConeViolationError
from named_maps import COMPLEX_MAPS, resolve_map
from result_storage import ResultStore, read_trace_csv


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    report = json.loads(out) if out else None
    return code, report, err


class TestIterate:
    def test_halfshift_converges_to_i(self, capsys):
        code, report, _ = run_cli(capsys, "iterate", "--map", "halfshift", "--start", "0+0i", "--tol", "1e-10")
        assert code == 0
        assert report["schema"] == 1
        assert report["command"] == "iterate"
        assert report["passed"] is True
        point = parse_complex(report["result"]["point"]).to_complex()
        assert abs(point - 1j) <= 1e-9

    def test_divergent_map_reports_failure(self, capsys):
        code, report, _ = run_cli(capsys, "iterate", "--map", "double_plus_one")
        assert code == 1
        assert report["diverged"] is True
        assert report["passed"] is False

    def test_power_flag(self, capsys):
        code, report, _ = run_cli(capsys, "iterate", "--map", "swap_double", "--start", "3+4i", "--power", "2")
        assert code == 0
        assert parse_complex(report["result"]["point"]).to_complex() == 0j

    def test_trace_csv(self, capsys, tmp_path):
        path = tmp_path / "trace.csv"
        code, report, _ = run_cli(capsys, "iterate", "--map", "halfshift", "--output", str(path))
        rows = read_trace_csv(path)
        assert code == 0
        assert len(rows) == report["result"]["iterations"]
        assert list(rows[0]) == ["iter", "delta", "point"]
        assert float(rows[0]["delta"]) == 0.5

    def test_bad_start_names_flag(self, capsys):
        code, report, err = run_cli(capsys, "iterate", "--start", "abc")
        assert code == 2
        assert report is None
        assert "--start" in err

    def test_unknown_map(self, capsys):
        code, _, err = run_cli(capsys, "iterate", "--map", "nope")
        assert code == 2
        assert "--map" in err

    def test_grid_map_on_periodic_problem(self, capsys):
        code, report, _ = run_cli(capsys, "iterate", "--map", "drift", "--grid", "201")
        assert code == 0
        assert report["result"]["point"]["nodes"] == 201


class TestCheckers:
    def test_check_metric_passes(self, capsys):
        code, report, _ = run_cli(capsys, "check-metric", "--metric", "d3", "--samples", "500", "--seed", "42")
        assert code == 0
        assert report["report"]["samples_tested"] == 500
        assert report["seed"] == 42

    def test_broken_metric_fails(self, capsys):
        code, report, _ = run_cli(capsys, "check-metric", "--metric", "broken", "--samples", "200")
        assert code == 1
        assert report["report"]["witness"] is not None

    def test_check_simulation(self, capsys):
        code, report, _ = run_cli(capsys, "check-simulation", "--xi", "xi3", "--samples", "1000", "--tail", "100")
        assert code == 0
        assert report["report"]["failed_clauses"] == []

    def test_check_simulation_bad_xi(self, capsys):
        code, _, err = run_cli(capsys, "check-simulation", "--xi", "xi9")
        assert code == 2
        assert "--xi" in err

    def test_contraction_config_file(self, capsys, tmp_path):
        config = tmp_path / "contraction.json"
        config.write_text(json.dumps({
            "variant": "m_type", "lambda": 0.5, "xi": "xi1:lambda=0.9", "alpha": "one",
            "metric": "d1", "map": "double", "samples": 1000, "seed": 3,
        }))
        code, report, _ = run_cli(capsys, "check-contraction", "--config", str(config))
        assert code == 1
        assert report["seed"] == 3
        assert report["spec"]["lambda"] == 0.5
        assert report["report"]["witness"]["clause"] in {"clause_ii", "clause_iii"}

    def test_flags_override_config(self, capsys, tmp_path):
        config = tmp_path / "contraction.json"
        config.write_text(json.dumps({"map": "double", "samples": 200}))
        code, report, _ = run_cli(capsys, "check-contraction", "--config", str(config), "--map", "halfshift")
        assert code == 0
        assert report["config"]["map"] == "halfshift"

    def test_metric_outside_cone_is_a_failure(self, capsys):
        code, report, _ = run_cli(capsys, "check-contraction", "--alpha", "zero", "--metric", "d2", "--k", "2",
                                  "--samples", "100")
        assert code == 1
        assert report["report"]["witness"]["clause"] == "clause_ii"

    def test_m_type_needs_lambda(self, capsys):
        code, _, err = run_cli(capsys, "check-contraction", "--variant", "m_type", "--samples", "10")
        assert code == 2
        assert "--lambda" in err

    def test_unknown_config_key(self, capsys, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"maps": "double"}))
        code, _, err = run_cli(capsys, "check-contraction", "--config", str(config))
        assert code == 2
        assert "maps" in err

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "check-metric", "--config", str(tmp_path / "missing.json"))
        assert code == 2
        assert "--config" in err


class TestSolvers:
    def test_kernel_mass(self, capsys):
        code, report, _ = run_cli(capsys, "kernel-mass", "--t", "0.5", "--a", "1", "--eta", "2")
        assert code == 0
        assert report["value"] == pytest.approx(0.5, abs=1e-6)

    def test_eta_must_exceed_one(self, capsys):
        code, _, err = run_cli(capsys, "solve-periodic", "--eta", "1")
        assert code == 2
        assert "--eta" in err

    def test_grid_too_small(self, capsys):
        code, _, err = run_cli(capsys, "solve-integral", "--grid", "2")
        assert code == 2
        assert "--grid" in err

    def test_solve_integral_writes_solution(self, capsys, tmp_path):
        path = tmp_path / "x.csv"
        code, report, _ = run_cli(capsys, "solve-integral", "--grid", "201", "--solution-output", str(path))
        assert code == 0
        assert report["result"]["converged"] is True
        assert path.read_text().splitlines()[0] == "t,u_1"

    def test_solve_periodic_from_config(self, capsys, tmp_path):
        config = tmp_path / "periodic.json"
        config.write_text(json.dumps({
            "problem": "periodic", "f": "example32", "eta": 1.5, "a": 1.0, "n": 1, "grid": 401, "tol": 1e-10,
        }))
        code, report, _ = run_cli(capsys, "solve-periodic", "--config", str(config))
        assert code == 0
        assert report["result"]["problem"]["f"] == "drift"

    def test_solve_periodic_log_damped(self, capsys):
        code, report, _ = run_cli(capsys, "solve-periodic", "--f", "log_damped", "--grid", "401")
        assert code == 0
        assert report["result"]["lipschitz"]["passed"] is True

    def test_zero_left_endpoint_rejected(self, capsys):
        code, report, err = run_cli(capsys, "solve-integral", "--a", "0", "--b", "1", "--grid", "11")
        assert code == 2
        assert report is None
        assert "--a" in err

    def test_volterra_map_needs_positive_endpoint(self, capsys):
        code, _, err = run_cli(capsys, "iterate", "--map", "volterra(0,1)", "--grid", "11")
        assert code == 2
        assert "--map" in err

    def test_unknown_problem_kind_in_config(self, capsys, tmp_path):
        config = tmp_path / "periodic.json"
        config.write_text(json.dumps({"problem": "dirichlet", "f": "drift"}))
        code, _, err = run_cli(capsys, "solve-periodic", "--config", str(config))
        assert code == 2
        assert "problem" in err
        assert "--config" in err

    def test_computation_error_is_a_failure(self, capsys, monkeypatch):
        import cli

        def broken(*args):
            raise ConeViolationError("value left the cone")

        monkeypatch.setattr(cli, "kernel_mass", broken)
        code, report, err = run_cli(capsys, "kernel-mass", "--eta", "2")
        assert code == 1
        assert report["passed"] is False
        assert report["error_type"] == "ConeViolationError"
        assert "left the cone" in err


class TestReproducibility:
    def test_rerun_is_byte_identical(self, capsys):
        argv = ["check-contraction", "--map", "halve", "--samples", "300", "--seed", "9"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out
        assert first == second

    def test_store_archives_run(self, capsys, tmp_path):
        store_dir = tmp_path / "results"
        code = main(["iterate", "--map", "halfshift", "--store", str(store_dir)])
        out = capsys.readouterr().out
        assert code == 0

        store = ResultStore(store_dir)
        run_ids = store.search_runs(command="iterate")
        assert len(run_ids) == 1
        stored = store.get_run(run_ids[0])
        assert stored["report"] == json.loads(out)
        assert (store_dir / "runs" / run_ids[0] / "trace.csv").exists()
        assert stored["metadata"]["passed"] is True

    def test_store_rerun_overwrites(self, capsys, tmp_path):
        argv = ["kernel-mass", "--eta", "2", "--store", str(tmp_path)]
        main(argv)
        main(argv)
        capsys.readouterr()
        assert len(ResultStore(tmp_path).search_runs()) == 1


@pytest.mark.parametrize("verb", sorted(DEFAULTS))
def test_every_verb_parses_without_flags(verb):
    args = setup_parser().parse_args([verb])
    assert args.command == verb


def test_unknown_verb_exits_with_usage_status():
    with pytest.raises(SystemExit) as info:
        setup_parser().parse_args(["solve-everything"])
    assert info.value.code == 2


class TestNamedMaps:
    def test_builtin_maps(self):
        assert resolve_map("halfshift")(1j) == 1j
        assert set(COMPLEX_MAPS) >= {"halfshift", "identity", "double"}

    def test_translate(self):
        assert resolve_map("translate(1+2i)")(0j) == 1 + 2j

    def test_grid_maps_carry_metric_and_start(self):
        volterra = resolve_map("volterra(1,2)", grid=51)
        assert volterra.on_grid
        assert volterra.start.node_count == 51
        assert not resolve_map("halve").on_grid

    def test_unknown(self):
        with pytest.raises(ValueError):
            resolve_map("rotate(3)")

    def test_volterra_interval_checked(self):
        with pytest.raises(ValueError):
            resolve_map("volterra(0,1)")
        with pytest.raises(ValueError):
            resolve_map("volterra(2,1)")
