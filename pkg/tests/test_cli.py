import csv
import json
from pathlib import Path

import numpy as np
import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from pointdist.cli import main
from pointdist.elasticity import IsotropicModuli, kelvin_stress
from pointdist.field_algebra import SingularField, SmoothTerm, eval_smooth
from pointdist.scenario import (
    ScenarioError,
    dump_fields,
    field_from_record,
    parse_scenarios,
    render_grid,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(tmp_path, task, text, *extra):
    src = tmp_path / "in.yaml"
    src.write_text(text)
    out = tmp_path / "out"
    return main([task, "--scenario", str(src), "--out", str(out), *extra]), out


@pytest.mark.parametrize(
    "fname, task",
    [
        ("kelvin_like.yaml", "check-equilibrium"),
        ("sdeg_delta.yaml", "sdeg"),
        ("solve_point_sources.yaml", "solve"),
        ("force_dislocation.yaml", "force"),
        ("batch.yaml", "run"),
    ],
)
def test_shipped_scenarios_exit_zero(tmp_path, fname, task):
    assert main([task, "--scenario", str(SCENARIOS / fname), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.txt").exists()
    assert json.loads((tmp_path / "result.json").read_text())["all_ok"]


def test_kelvin_like_report_says_satisfied(tmp_path):
    main(["check-equilibrium", "--scenario", str(SCENARIOS / "kelvin_like.yaml"), "--out", str(tmp_path)])
    assert "verdict: satisfied" in (tmp_path / "report.txt").read_text()


def test_sdeg_of_delta(tmp_path):
    main(["sdeg", "--scenario", str(SCENARIOS / "sdeg_delta.yaml"), "--out", str(tmp_path)])
    rec = json.loads((tmp_path / "result.json").read_text())["scenarios"][0]
    assert rec["degree_of_divergence"] == 0
    assert abs(rec["empirical_degree_of_divergence"]) <= 0.1


KELVIN_WRONG_FORCE = """
name: wrong
fields:
  sigma:
    codomain: sym-tensor
    terms:
      - {coeff: 1, k: -1, mode_n: 1, parity: cos, comp: [r, r]}
task: check-equilibrium
params: {sigma: sigma}
"""


def test_violated_verdict_exits_one(tmp_path):
    code, out = run(tmp_path, "check-equilibrium", KELVIN_WRONG_FORCE)
    assert code == 1
    assert "verdict: violated" in (out / "report.txt").read_text()


def test_non_integer_k_is_a_validation_error(tmp_path, capsys):
    text = KELVIN_WRONG_FORCE.replace("k: -1", "k: -1.5")
    code, _ = run(tmp_path, "check-equilibrium", text)
    assert code == 2
    err = capsys.readouterr().err
    assert "'sigma'" in err and "line 5" in err


def test_yaml_syntax_error_has_position():
    with pytest.raises(ScenarioError) as exc:
        parse_scenarios("name: x\nfields: {a: [1, 2}\n")
    assert exc.value.line == 2 and exc.value.column is not None


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("name: x\ntask: nope\n", "unknown task"),
        ("name: x\ntask: sdeg\nparams: {field: missing}\n", "unknown field"),
        ("name: x\nfields: {a: {terms: [{coeff: 1}]}}\ntask: sdeg\nparams: {field: a}\n", "missing radial exponent"),
        ("name: x\nfields: {a: {builtin: moon}}\ntask: sdeg\nparams: {field: a}\n", "unknown builtin"),
        ("", "empty"),
    ],
)
def test_validation_errors(text, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        parse_scenarios(text)


def test_subcommand_must_match_task():
    with pytest.raises(ScenarioError, match="does not match"):
        parse_scenarios(KELVIN_WRONG_FORCE, default_task="sdeg")


def test_missing_file_exits_two(tmp_path):
    assert main(["sdeg", "--scenario", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 2


def test_result_records_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out, jobs in ((a, "1"), (b, "2")):
        assert main(["run", "--scenario", str(SCENARIOS / "batch.yaml"), "--out", str(out), "--jobs", jobs]) == 0
    for name in ("result.json", "report.txt", "dilatation-grid_sigma.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


small_q = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def fields(draw):
    codomain = draw(st.sampled_from(["scalar", "vector", "sym-tensor"]))
    comps = {"scalar": [()], "vector": [(1,), (2,)], "sym-tensor": [(1, 1), (2, 2)]}[codomain]
    terms = []
    for _ in range(draw(st.integers(0, 3))):
        n = draw(st.integers(0, 3))
        parity = "cos" if n == 0 else draw(st.sampled_from(["cos", "sin"]))
        terms.append(SmoothTerm(draw(small_q), draw(st.integers(-3, 3)), draw(st.integers(0, 2)), n, parity, draw(st.sampled_from(comps))))
    point = {}
    for _ in range(draw(st.integers(0, 2))):
        comp = tuple(i - 1 for i in draw(st.sampled_from(comps)))
        point[(comp, (draw(st.integers(0, 2)), draw(st.integers(0, 2))))] = draw(small_q)
    return SingularField(codomain, terms, point)


@given(fields())
def test_serialization_round_trip(F):
    rec = yaml.safe_load(dump_fields({"F": F}))["fields"]["F"]
    assert field_from_record("F", rec) == F


def test_render_constant_field():
    F = SingularField("scalar", [SmoothTerm(3, 0)])
    rows = render_grid(F, 2, 2, 0.5, 0.1)
    assert len(rows) == 4
    assert {row[2] for row in rows} == {3.0}
    assert [(row[0], row[1]) for row in rows] == [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)]


def test_render_point_only_field_is_zero():
    F = SingularField("vector", (), {((0,), (0, 0)): 1})
    rows = np.array(render_grid(F, 3, 2, 0.5, 0.1))
    assert np.all(rows[:, 2:] == 0)


def test_render_matches_direct_evaluation():
    F = kelvin_stress(IsotropicModuli())
    rows = np.array(render_grid(F, 4, 4, 0.3, 0.05))
    r = np.hypot(rows[:, 0], rows[:, 1])
    th = np.arctan2(rows[:, 1], rows[:, 0])
    direct = np.asarray(eval_smooth(F, r, th)).reshape(len(rows), -1)
    np.testing.assert_allclose(rows[:, 2:], direct, rtol=1e-14)


@pytest.mark.parametrize("guard", [0.0, -1.0])
def test_render_rejects_bad_guard(guard):
    with pytest.raises(ValueError):
        render_grid(SingularField("scalar"), 2, 2, 0.5, guard)


def test_render_grid_touching_origin_rejected(tmp_path):
    text = "name: g\nfields: {f: {builtin: kelvin}}\ntask: render\nparams: {field: f, grid: {nx: 3, ny: 3}}\n"
    code, _ = run(tmp_path, "render", text)
    assert code == 2


def test_render_writes_csv(tmp_path):
    text = "name: g\nfields: {f: {builtin: kelvin}}\ntask: render\nparams: {field: f, grid: {nx: 2, ny: 2}}\n"
    code, out = run(tmp_path, "render", text)
    assert code == 0
    with open(out / "g_f.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "c11", "c12", "c21", "c22"]
    assert len(rows) == 5
