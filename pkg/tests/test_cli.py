"""End-to-end exercises of the command line front end.

Everything goes through cli.main(argv), so the exit code contract is
checked exactly as a shell would see it: 0 all pass, 1 a tolerance or
hard invariant failed, 2 the invocation could not be parsed or built.
"""

import json
import math

import pytest

from nullrig import cli, spacetime


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = cli.main([*argv, "-o", str(out)])
    text = out.read_text() if out.exists() else None
    return code, text


def run_json(tmp_path, *argv):
    code, text = run(tmp_path, *argv)
    return code, (json.loads(text) if text else None)


# ---- catalog -----------------------------------------------------------------


def test_catalog_lists_surfaces_and_metrics(tmp_path):
    code, rep = run_json(tmp_path, "catalog")
    assert code == 0
    assert rep["schema"] == cli.SCHEMA
    assert rep["command"] == "catalog"
    for name in ("schwarzschild_horizon", "nullcone", "monge", "warped6d_plane"):
        assert name in rep["surfaces"]
    entry = rep["surfaces"]["nullcone"]
    assert entry["ambient"] == "minkowski:4"
    assert any(ax.startswith("s[") for ax in entry["axes"])
    assert rep["metrics"] == ["minkowski", "schwarzschild_ef", "warped_product_6d"]


def test_catalog_stdout_is_deterministic(capsys):
    assert cli.main(["catalog"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["catalog"]) == 0
    assert capsys.readouterr().out == first
    json.loads(first)


# ---- analyze -----------------------------------------------------------------


@pytest.fixture(scope="module")
def horizon_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "horizon.json"
    code = cli.main([
        "analyze", "--surface", "schwarzschild_horizon",
        "--grid", "t=5,theta=6,phi=8", "-o", str(out),
    ])
    return code, json.loads(out.read_text())


def test_analyze_horizon_exit_and_schema(horizon_report):
    code, rep = horizon_report
    assert code == 0
    assert rep["schema"] == cli.SCHEMA
    assert rep["command"] == "analyze"
    assert rep["config"]["surface"] == "schwarzschild_horizon"
    assert rep["config"]["grid"] == {"t": 5, "theta": 6, "phi": 8}


def test_analyze_horizon_classifies_every_point(horizon_report):
    _, rep = horizon_report
    assert rep["aggregates"]["points"] == len(rep["points"]) == 5 * 6 * 8
    assert rep["aggregates"]["class_histogram"] == {"MTS": 240}
    lo, hi = rep["aggregates"]["theta_out_range"]
    assert max(abs(lo), abs(hi)) < 1e-10


def test_analyze_horizon_verdict(horizon_report):
    _, rep = horizon_report
    labels = rep["verdict"]["labels"]
    for want in ("TRAPPING_HORIZON", "FUTURE", "OUTER", "FOTH", "MINIMAL"):
        assert want in labels


def test_analyze_aggregates_recomputable(horizon_report):
    # the stored aggregates must follow from the per-point records alone
    _, rep = horizon_report
    hist: dict = {}
    for p in rep["points"]:
        hist[p["label"]] = hist.get(p["label"], 0) + 1
    assert hist == rep["aggregates"]["class_histogram"]
    worst = {}
    for p in rep["points"]:
        for k, v in p["residuals"].items():
            worst[k] = max(worst.get(k, 0.0), abs(v))
    for k, v in rep["aggregates"]["max_residuals"].items():
        assert v == pytest.approx(worst[k], abs=1e-15)
    thetas = [p["theta_in"] for p in rep["points"]]
    assert rep["aggregates"]["theta_in_range"] == [min(thetas), max(thetas)]


def test_analyze_metric_flag_sets_graph_dimension(tmp_path):
    # a bare monge expression in u1, u2 lifted to a 4d ambient by the flag
    code, rep = run_json(
        tmp_path, "analyze", "--metric", "minkowski:4",
        "--surface", "monge:(u1+u2)/sqrt(2)")
    assert code == 0
    assert rep["aggregates"]["class_histogram"] == {"MTS": 125}
    assert rep["verdict"]["kind"] == "graph"
    assert rep["verdict"]["labels"] == ["TRAPPING_HORIZON"]
    assert rep["verdict"]["trapping_horizon"] is True


def test_analyze_rejects_non_null_graph(capsys):
    assert cli.main(["analyze", "--surface", "monge:u1^2"]) == 2
    assert "null" in capsys.readouterr().err


def test_analyze_metric_dimension_mismatch(capsys):
    code = cli.main(["analyze", "--metric", "minkowski:5",
                     "--surface", "nullcone"])
    assert code == 2
    assert "dim" in capsys.readouterr().err


def test_analyze_metric_value_disagreement(capsys):
    # right dimension, wrong geometry: the probe comparison must refuse
    code = cli.main(["analyze", "--metric", "schwarzschild_ef:m=2",
                     "--surface", "schwarzschild_horizon"])
    assert code == 2


def test_analyze_csv_flavor(tmp_path):
    code, text = run(tmp_path, "analyze", "--surface", "nullcone",
                     "--grid", "s=5,theta=5,phi=5", "--format", "csv",
                     name="out.csv")
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("# schema: nullrig-report-v1")
    assert lines[1].startswith("u,")
    assert len(lines) == 2 + 125


# ---- verify ------------------------------------------------------------------


def test_verify_requires_suite(capsys):
    assert cli.main(["verify", "--surface", "nullcone"]) == 2
    assert "suite" in capsys.readouterr().err


def test_verify_rigging_suite_passes(tmp_path):
    code, rep = run_json(tmp_path, "verify", "--suite", "rigging",
                         "--surface", "nullcone:3", "--seed", "7")
    assert code == 0
    checks = rep["checks"]
    assert len(checks) == 8
    assert all(c["status"] == "PASS" for c in checks)
    assert all(c["value"] < c["tolerance"] for c in checks)
    assert rep["aggregates"]["failed"] == 0


def test_verify_umbilic_skips_totally_geodesic(tmp_path):
    code, rep = run_json(tmp_path, "verify", "--suite", "umbilic",
                         "--surface", "schwarzschild_horizon")
    assert code == 0
    (row,) = rep["checks"]
    assert row["status"] == "SKIPPED"
    assert row["note"].startswith("NOT_UMBILIC")


def test_verify_umbilic_rejects_sheared_surface(capsys):
    # the warped plane has anisotropic B, so the ODE does not apply
    code = cli.main(["verify", "--suite", "umbilic",
                     "--surface", "warped6d_plane"])
    assert code == 2


def test_verify_umbilic_cone_passes(tmp_path):
    code, rep = run_json(tmp_path, "verify", "--suite", "umbilic",
                         "--surface", "nullcone")
    assert code == 0
    assert all(c["status"] == "PASS" for c in rep["checks"])


def test_verify_monge_oracle_requires_graph(capsys):
    assert cli.main(["verify", "--suite", "monge-oracle",
                     "--surface", "nullcone"]) == 2


def test_verify_monge_oracle_passes(tmp_path):
    code, rep = run_json(tmp_path, "verify", "--suite", "monge-oracle",
                         "--surface", "monge_plane")
    assert code == 0
    names = {c["name"] for c in rep["checks"]}
    assert "oracle_theta_sum" in names and "never_trapped" in names
    assert all(c["status"] == "PASS" for c in rep["checks"])


def test_verify_variation_requires_leaves(capsys):
    assert cli.main(["verify", "--suite", "variation",
                     "--surface", "monge_plane"]) == 2


def test_verify_fails_with_exit_1(tmp_path):
    code, rep = run_json(tmp_path, "verify", "--suite", "raychaudhuri",
                         "--surface", "nullcone", "--curvature-tol", "1e-15")
    assert code == 1
    assert any(c["status"] == "FAIL" for c in rep["checks"])
    assert rep["aggregates"]["failed"] > 0


def test_verify_reruns_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "verify", "--suite", "rigging",
               "--surface", "nullcone:3", "--seed", "5", name="a.json")
    _, b = run(tmp_path, "verify", "--suite", "rigging",
               "--surface", "nullcone:3", "--seed", "5", name="b.json")
    assert a == b


# ---- drag --------------------------------------------------------------------


@pytest.fixture(scope="module")
def horizon_drag_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "drag.csv"
    code = cli.main([
        "drag", "--surface", "schwarzschild_horizon",
        "--grid", "t=5,theta=6,phi=8",
        "--epsilons", "0.01,-0.01,0.005,-0.005", "-o", str(out),
    ])
    return code, out.read_text()


def test_drag_csv_layout(horizon_drag_csv):
    code, text = horizon_drag_csv
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("# schema: nullrig-report-v1")
    assert lines[1] == "epsilon,area,theta_out,theta_in"
    eps = [float(row.split(",")[0]) for row in lines[2:]]
    assert eps == sorted(eps) and len(eps) == 4


def test_drag_csv_area_monotone_in_epsilon(horizon_drag_csv):
    # flowing along N shrinks the horizon spheres
    _, text = horizon_drag_csv
    areas = [float(row.split(",")[1]) for row in text.splitlines()[2:]]
    assert areas == sorted(areas, reverse=True)


def test_drag_json_aggregates(tmp_path):
    code, rep = run_json(tmp_path, "drag", "--surface", "schwarzschild_horizon",
                         "--grid", "t=5,theta=6,phi=8",
                         "--epsilons", "0.01,-0.01,0.005,-0.005",
                         "--format", "json")
    assert code == 0
    agg = rep["aggregates"]
    assert agg["delta_theta_out"] == pytest.approx(-0.25, abs=1e-3)
    av = agg["area_variation"]
    assert av["rel_gap"] < 1e-2
    assert av["variation_integrand"] == "theta_in"
    assert av["dA_deps"] == pytest.approx(-16.0 * math.pi, rel=1e-2)


def test_drag_epsilon_zero_recovers_leaf_area(tmp_path):
    code, text = run(tmp_path, "drag", "--surface", "schwarzschild_horizon",
                     "--epsilons", "0", name="out.csv")
    assert code == 0
    row = text.splitlines()[2].split(",")
    assert float(row[0]) == 0.0
    assert float(row[1]) == pytest.approx(16.0 * math.pi, rel=1e-6)


def test_drag_without_leaves_marks_rows_skipped(tmp_path):
    code, text = run(tmp_path, "drag", "--surface", "monge_plane",
                     name="out.csv")
    assert code == 0
    for row in text.splitlines()[2:]:
        assert row.split(",")[1:] == ["skipped", "skipped", "skipped"]


def test_drag_reruns_are_byte_identical(tmp_path):
    argv = ("drag", "--surface", "schwarzschild_horizon",
            "--grid", "t=5,theta=6,phi=8", "--epsilons", "0.01,-0.01")
    _, a = run(tmp_path, *argv, name="a.csv")
    _, b = run(tmp_path, *argv, name="b.csv")
    assert a == b


# ---- configuration -----------------------------------------------------------


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"surface": "nullcone", "suite": "rigging",
                               "seed": 3, "tol_null": 1e-7}))
    code, rep = run_json(tmp_path, "verify", "--config", str(cfg))
    assert code == 0
    assert rep["config"]["seed"] == 3
    assert rep["config"]["tol_null"] == 1e-7


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"surface": "nullcone", "suite": "rigging",
                               "seed": 3}))
    code, rep = run_json(tmp_path, "verify", "--config", str(cfg),
                         "--seed", "11")
    assert code == 0
    assert rep["config"]["seed"] == 11


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"surface": "nullcone", "sujte": "rigging"}))
    assert cli.main(["verify", "--config", str(cfg)]) == 2
    assert "sujte" in capsys.readouterr().err


def test_metric_file_round_trip(tmp_path):
    path = tmp_path / "mink3.metric"
    path.write_text(spacetime.dumps_metric(spacetime.minkowski(3)))
    code, rep = run_json(tmp_path, "verify", "--suite", "rigging",
                         "--surface", "nullcone:3", "--metric", str(path))
    assert code == 0
    assert rep["aggregates"]["failed"] == 0


def test_metric_file_parse_error_is_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.metric"
    path.write_text("chart: t x\ng[0 0]: -1\n")
    assert cli.main(["analyze", "--surface", "nullcone",
                     "--metric", str(path)]) == 2


# ---- invocation errors -------------------------------------------------------


def test_unknown_surface_is_exit_2(capsys):
    assert cli.main(["analyze", "--surface", "klein_bottle"]) == 2
    assert "klein_bottle" in capsys.readouterr().err


def test_grid_below_minimum_is_exit_2(capsys):
    assert cli.main(["analyze", "--surface", "nullcone",
                     "--grid", "s=3"]) == 2
    assert "5" in capsys.readouterr().err


def test_nonpositive_tolerance_is_exit_2(capsys):
    assert cli.main(["analyze", "--surface", "nullcone",
                     "--tol-null=-1e-8"]) == 2


def test_bad_epsilon_list_is_exit_2(capsys):
    assert cli.main(["drag", "--surface", "schwarzschild_horizon",
                     "--epsilons", "a,b"]) == 2


def test_bad_grid_axis_name_is_exit_2(capsys):
    assert cli.main(["analyze", "--surface", "nullcone",
                     "--grid", "x0=8"]) == 2


def test_argparse_rejections_exit_2():
    with pytest.raises(SystemExit) as err:
        cli.main(["verify", "--surface", "nullcone", "--suite", "nosuch"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main([])
    assert err.value.code == 2
