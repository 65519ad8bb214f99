import csv
import io
import json
import math

import numpy as np
import pytest

from exitbound import ConfigurationError, to_sde
from exitbound.cli import (RunConfig, _parse_starts, build_problem, default_t_max,
                           format_csv, format_json, format_table, main, render, run)


def test_build_problem_presets():
    for name in ("interval01", "ou-interval", "disk-bm"):
        assert build_problem(name).name == name


def test_build_problem_inline_expressions():
    problem = build_problem({"interval": [-1, 1], "a": "1", "V": "0.5*x^2"})
    field = to_sde(problem)
    drift = field.drift(np.array([[0.2]]))[0, 0]
    assert drift == pytest.approx(-0.2, abs=1e-5)
    assert field.noise_scale(np.array([[0.0]]))[0] == pytest.approx(math.sqrt(2.0))


def test_build_problem_rejects_bad_specs():
    with pytest.raises(ConfigurationError):
        build_problem(42)
    with pytest.raises(ConfigurationError):
        build_problem({"a": "1"})


def test_parse_starts():
    assert _parse_starts("auto") == "auto"
    assert _parse_starts("0.5") == ((0.5,),)
    assert _parse_starts("0.25;0.75") == ((0.25,), (0.75,))
    assert _parse_starts("0,0") == ((0.0, 0.0),)
    with pytest.raises(ConfigurationError):
        _parse_starts(" ; ")


def test_run_dv_interval():
    result = run(RunConfig(problem="interval01", method="dv", mesh_h=1e-3))
    assert result.status == 0
    row = result.rows[0]
    assert row["dv_bound"] == pytest.approx(8.0, abs=1e-4)
    assert row["sup_w"] == pytest.approx(0.125, abs=1e-6)


def test_run_dv_disk_uses_closed_form():
    result = run(RunConfig(problem="disk-bm", method="dv"))
    assert result.rows[0]["dv_bound"] == 2.0


def test_run_oracle_interval():
    result = run(RunConfig(problem="interval01", method="oracle", p_list=(0.5, 0.01)))
    by_p = {r.p: r.bound for r in result.reports}
    assert by_p[0.5] == pytest.approx(7.32041, abs=1e-4)
    assert by_p[0.01] == pytest.approx(9.37770, abs=1e-4)
    assert len(result.summaries) == 2
    roles = [row["role"] for row in result.rows]
    assert roles.count("sup") == 2


def test_run_oracle_custom_problem_via_pde():
    config = RunConfig(problem={"interval": [-1, 1], "a": "1", "V": "0.5*x^2"},
                       method="oracle", p_list=(0.2,), starts=((0.0,),))
    result = run(config)
    assert result.reports[0].d_p == pytest.approx(0.903108, abs=5e-4)


def test_run_quantile_single_start_sup_matches_report():
    config = RunConfig(problem="interval01", method="quantile", p_list=(0.5,),
                       n_paths=500, dt=1e-3, t_max=2.0, master_seed=4)
    result = run(config)
    assert result.status == 0
    assert len(result.reports) == 1
    assert result.summaries[0] == result.reports[0]


def test_run_quantile_multi_start_sup_is_max():
    config = RunConfig(problem="interval01", method="quantile", p_list=(0.5,),
                       starts=((0.25,), (0.5,), (0.75,)),
                       n_paths=800, dt=1e-3, t_max=2.0, master_seed=4)
    result = run(config)
    assert len(result.reports) == 3
    assert result.summaries[0].d_p == max(r.d_p for r in result.reports)


def test_auto_starts_grid_for_custom_problem():
    config = RunConfig(problem={"interval": [0, 1], "a": "1", "V": "0"},
                       method="oracle", p_list=(0.5,))
    result = run(config)
    assert len(result.reports) == 9
    # midpoint start carries the maximal quantile by symmetry
    assert result.summaries[0].start[0] == pytest.approx(0.5, abs=1e-12)


def test_undersampled_rows_flag_but_exit_zero(capsys):
    code = main(["--problem", "interval01", "--method", "quantile", "--p", "0.02",
                 "--paths", "300", "--dt", "1e-3", "--tmax", "3", "--seed", "9"])
    out = capsys.readouterr().out
    assert code == 0
    assert "flagged rows" in out


def test_horizon_error_exit_code(capsys):
    code = main(["--problem", "interval01", "--method", "quantile", "--p", "0.1",
                 "--paths", "200", "--dt", "1e-3", "--tmax", "0.05", "--seed", "1"])
    assert code == 3
    assert "t_max" in capsys.readouterr().err


def test_unknown_preset_exit_code(capsys):
    assert main(["--problem", "annulus", "--method", "dv"]) == 2


def test_bad_expression_in_config_exit_code(tmp_path, capsys):
    config = {"problem": {"interval": [0, 1], "a": "1", "V": "0.5*"}, "method": "dv"}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(config))
    assert main(["--config", str(path)]) == 2


def test_missing_problem_exit_code(capsys):
    assert main(["--method", "dv"]) == 2


def test_dump_config_roundtrip(tmp_path, capsys):
    dump = tmp_path / "run.json"
    argv = ["--problem", "interval01", "--method", "quantile", "--p", "0.5,0.2",
            "--paths", "400", "--dt", "1e-3", "--seed", "123", "--output", "json",
            "--dump-config", str(dump)]
    assert main(argv) == 0
    first = capsys.readouterr().out
    saved = json.loads(dump.read_text())
    assert saved["master_seed"] == 123
    assert saved["t_max"] is not None  # heuristic horizon is resolved before dumping
    assert main(["--config", str(dump)]) == 0
    second = capsys.readouterr().out
    assert first == second


def test_output_formats_carry_identical_numbers():
    config = RunConfig(problem="interval01", method="quantile", p_list=(0.5, 0.2),
                       n_paths=400, dt=1e-3, t_max=2.0, master_seed=77)
    result = run(config)
    parsed_json = json.loads(format_json(result))
    json_rows = [(r["role"], r["p"], r["d_p"], r["bound"]) for r in parsed_json["rows"]]
    reader = csv.DictReader(io.StringIO(format_csv(result)))
    csv_rows = [(r["role"], float(r["p"]), float(r["d_p"]), float(r["bound"]))
                for r in reader]
    assert json_rows == csv_rows
    table = format_table(result)
    for _, p, d_p, bound in json_rows:
        assert f"{bound:.4g}" in table
        assert f"{d_p:.4g}" in table


def test_dump_samples_file(tmp_path, capsys):
    path = tmp_path / "samples.tsv"
    argv = ["--problem", "interval01", "--method", "quantile", "--p", "0.5",
            "--paths", "50", "--dt", "1e-3", "--tmax", "2", "--seed", "3",
            "--dump-samples", str(path)]
    assert main(argv) == 0
    lines = path.read_text().strip().split("\n")
    assert lines[0].startswith("# problem=interval01")
    assert len(lines) == 51


def test_workers_flag_preserves_output(capsys):
    argv = ["--problem", "interval01", "--method", "quantile", "--p", "0.5",
            "--paths", "300", "--dt", "1e-3", "--tmax", "2", "--seed", "5",
            "--output", "json"]
    assert main(argv) == 0
    serial = capsys.readouterr().out
    assert main(argv + ["--workers", "4"]) == 0
    parallel = capsys.readouterr().out
    assert serial == parallel


def test_default_t_max_heuristic():
    problem = build_problem("interval01")
    assert default_t_max(problem, 1e-3) == pytest.approx(50.0 / 8.0, rel=1e-4)
    disk = build_problem("disk-bm")
    assert default_t_max(disk, 1e-3) == pytest.approx(25.0, rel=1e-12)


def test_render_dispatch():
    result = run(RunConfig(problem="disk-bm", method="dv"))
    assert "dv_bound" in render(result, "json")
    assert "dv_bound" in render(result, "csv")
    assert "mean-exit" in render(result, "table")


def test_run_rejects_bad_method_and_output():
    with pytest.raises(ConfigurationError):
        run(RunConfig(problem="interval01", method="bogus"))
    with pytest.raises(ConfigurationError):
        run(RunConfig(problem="interval01", method="dv", output="yaml"))
    with pytest.raises(ConfigurationError):
        run(RunConfig(problem="interval01", method="oracle", p_list=()))
    with pytest.raises(ConfigurationError):
        run(RunConfig(problem="interval01", method="oracle", p_list=(1.2,)))


def test_start_outside_domain_rejected():
    config = RunConfig(problem="interval01", method="oracle", p_list=(0.5,),
                       starts=((1.25,),))
    with pytest.raises(ConfigurationError):
        run(config)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"problem": "interval01", "pths": 7})
