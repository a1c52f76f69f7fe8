import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from quotspec import cli, harness
from quotspec.errors import InputError, NearlyDependentNodesError

SCENARIOS = Path(__file__).resolve().parents[1] / "demos" / "scenarios"


def test_sphere_points_are_unit_and_seeded():
    a = harness.sphere_points(100, 3, seed=2)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-14)
    np.testing.assert_array_equal(a, harness.sphere_points(100, 3, seed=2))
    assert not np.array_equal(a, harness.sphere_points(100, 3, seed=3))


def test_grid_spec_validation_and_points():
    g = harness.GridSpec(radii=(0.0, 0.5, 1.0), points_per_sphere=10, extra_points=((0.1, 0.2j),))
    pts = g.points(2)
    assert pts.shape == (1 + 10 + 10 + 1, 2)
    np.testing.assert_allclose(np.linalg.norm(pts[1:11], axis=1), 0.5)
    with pytest.raises(InputError):
        harness.GridSpec(radii=(0.5, 0.2))
    with pytest.raises(InputError):
        harness.GridSpec(radii=(0.5, 1.2))
    with pytest.raises(InputError):
        harness.GridSpec(points_per_sphere=0)
    back = harness.GridSpec.from_json(json.loads(json.dumps(g.to_json())))
    np.testing.assert_array_equal(back.points(2), pts)


@pytest.mark.parametrize(
    "name, expected",
    [("fix_a", [[0, 0]]), ("fix_b", [[0, 0], [0.5, 0]])],
)
def test_compare_spectra_fixtures(name, expected, request):
    cmp = harness.compare_spectra(request.getfixturevalue(name))
    assert cmp.passed
    for got in (cmp.oracle, cmp.koszul, cmp.margin_zero):
        np.testing.assert_allclose(got, expected, atol=1e-7)


def test_compare_spectra_diagonal_three_points():
    pts = np.array([[0.1, 0.2], [-0.3, 0.0], [0.2j, 0.4]])
    model = harness.Model.from_tuple(harness.diagonal_tuple(pts))
    cmp = harness.compare_spectra(model)
    assert cmp.passed and len(cmp.margin_zero) == 3


def test_scan_fix_a_margin_is_norm(fix_a):
    rows = harness.scan_margins(fix_a, harness.GridSpec(points_per_sphere=32))
    for r in rows:
        assert r["margin"] == pytest.approx(np.linalg.norm(r["z"]), abs=1e-12)
        assert r["in_extension_domain"] == 1


def test_scan_fix_b_small_margins_only_near_spectrum(fix_b):
    grid = harness.GridSpec(radii=(0.05, 0.1, 0.2, 0.3, 0.45, 0.55, 0.7, 1.0), points_per_sphere=64)
    extra = np.array([[0.5, 0], [0.52, 0.01j], [0.5, 0.05]])
    rows = harness.scan_margins(fix_b, np.concatenate([grid.points(2), extra]))
    spec_pts = np.array([[0, 0], [0.5, 0]])
    small = [r["z"] for r in rows if r["margin"] < 0.05]
    dist = [np.min(np.linalg.norm(spec_pts - z, axis=1)) for z in small]
    assert small and max(dist) <= 0.1 + 1e-12


def test_scan_fix_b_boundary_margins_positive(fix_b):
    rows = harness.scan_margins(fix_b, harness.sphere_points(256, 2, 9))
    delta0 = min(r["margin"] for r in rows)
    assert delta0 > 0.5


def test_scan_flags_points_outside_domain():
    model = harness.Model.from_tuple(harness.diagonal_tuple([[0.5]]))
    rows = harness.scan_margins(model, np.array([[2.0], [0.3]]))
    assert rows[0]["in_extension_domain"] == 0 and np.isnan(rows[0]["margin"])
    assert rows[1]["in_extension_domain"] == 1
    text = harness.margins_csv(rows, 1)
    assert text.splitlines()[0] == "re_z1,im_z1,margin,dual_residual,in_extension_domain"


def test_random_kernel_spec_constraints():
    spec = harness.random_kernel_spec(3, d=3, k=4, m=2, max_radius=0.6)
    assert spec.max_radius <= 0.6 + 1e-12
    # With m = 2 the last node repeats the first point.
    np.testing.assert_array_equal(spec.points[-1], spec.points[0])
    assert abs(np.vdot(spec.vectors[0], spec.vectors[-1])) < 1e-12


@pytest.mark.parametrize("name", ["fix_a", "fix_b"])
def test_run_scenario_fixtures_pass(name):
    report = harness.run_scenario(SCENARIOS / f"{name}.json")
    assert report.passed, [c.line() for c in report.checks if not c.passed]
    names = {c.name for c in report.checks}
    assert {"three_way_spectra", "dual_identity", "beurling_identity", "approximate_zero_sets"} <= names
    for c in report.checks:
        assert c.module and c.operation and c.tolerance >= 0


def test_run_scenario_fix_a_summary():
    report = harness.run_scenario(SCENARIOS / "fix_a.json")
    np.testing.assert_allclose(report.candidates, [[0, 0]])
    # Margin equals |z|, so the smallest off-spectrum margin is the smallest grid radius.
    assert report.grid_summary["min_margin_off_spectrum"] >= 0.9 * 0.25


def test_report_is_byte_identical():
    a = harness.run_scenario(SCENARIOS / "fix_b.json").dumps()
    b = harness.run_scenario(SCENARIOS / "fix_b.json").dumps()
    assert a == b


def test_degenerate_scenario_rejected():
    with pytest.raises(NearlyDependentNodesError):
        harness.run_scenario(SCENARIOS / "degenerate.json")


def test_malformed_scenarios(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "model": {\n')
    with pytest.raises(InputError, match="line 3"):
        harness.load_scenario(bad)
    with pytest.raises(InputError, match="model"):
        harness.Scenario.from_json({"grid": {}})
    base = json.loads((SCENARIOS / "fix_a.json").read_text())
    with pytest.raises(InputError, match="tolerance"):
        harness.Scenario.from_json({**base, "tolerances": {"nonsense": 1}})
    with pytest.raises(InputError, match="checks"):
        harness.Scenario.from_json({**base, "checks": ["nonsense"]})


def test_check_subset_runs_only_requested(tmp_path):
    base = json.loads((SCENARIOS / "fix_b.json").read_text())
    base["checks"] = ["chain", "spectra"]
    report = harness.run_scenario(harness.Scenario.from_json(base))
    assert [c.name for c in report.checks] == ["koszul_chain", "three_way_spectra"]


def test_failed_clause_is_reported(tmp_path):
    base = json.loads((SCENARIOS / "fix_b.json").read_text())
    base["checks"] = ["dilation"]
    base["tolerances"] = {"dilation_N": 4}
    report = harness.run_scenario(harness.Scenario.from_json(base))
    (check,) = report.checks
    assert not report.passed and not check.passed
    assert "FAIL dilation_isometry: charfn.canonical_dilation" in check.line()


# -- command line -----------------------------------------------------------


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_verify_pass(capsys):
    code, out, _ = run_cli(["verify", "--scenario", str(SCENARIOS / "fix_a.json")], capsys)
    assert code == 0 and json.loads(out)["passed"] is True


def test_cli_verify_failure_exit_code(tmp_path, capsys):
    base = json.loads((SCENARIOS / "fix_b.json").read_text())
    base.update(checks=["dilation"], tolerances={"dilation_N": 4})
    path = tmp_path / "s.json"
    path.write_text(json.dumps(base))
    code, _, _ = run_cli(["verify", "--scenario", str(path), "--format", "csv"], capsys)
    assert code == 1


def test_cli_input_errors(tmp_path, capsys):
    code, _, err = run_cli(["verify", "--scenario", str(SCENARIOS / "degenerate.json")], capsys)
    assert code == 2 and "parallel" in err
    code, _, err = run_cli(["koszul", "--scenario", str(SCENARIOS / "fix_b.json"), "--lambda", "1,2,3"], capsys)
    assert code == 2
    code, _, err = run_cli(["charfun", "--scenario", str(SCENARIOS / "fix_b.json"), "--z", "2,0"], capsys)
    assert code == 2 and "extension domain" in err
    code, _, err = run_cli(["spectrum", "--scenario", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_cli_koszul_and_charfun(capsys):
    s = str(SCENARIOS / "fix_b.json")
    code, out, _ = run_cli(["koszul", "--scenario", s, "--lambda", "0.5,0"], capsys)
    res = json.loads(out)
    assert code == 0 and res["h_vector"] == [1, 2, 1] and res["right"] is True
    code, out, _ = run_cli(["charfun", "--scenario", s, "--z", "0.6,0.8j"], capsys)
    res = json.loads(out)
    assert res["shape"] == [1, 3] and res["surjectivity_margin"] > 0


def test_cli_scan_csv_and_out(tmp_path, capsys):
    target = tmp_path / "scan.csv"
    code, out, _ = run_cli(
        ["scan", "--scenario", str(SCENARIOS / "fix_a.json"), "--format", "csv", "--seed", "4", "--out", str(target)],
        capsys,
    )
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[0].startswith("re_z1,im_z1,re_z2,im_z2,margin")
    assert len(lines) == 1 + 5 * 64


def test_cli_spectrum(capsys):
    code, out, _ = run_cli(["spectrum", "--scenario", str(SCENARIOS / "fix_b.json")], capsys)
    res = json.loads(out)
    assert code == 0 and res["passed"] and len(res["oracle"]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "quotspec", "koszul", "--scenario", str(SCENARIOS / "fix_a.json"), "--lambda", "0,0"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["h_vector"] == [1, 2, 1]
