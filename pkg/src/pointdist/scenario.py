"""YAML scenario files: field definitions, one task per scenario, result records.

A scenario is a mapping::

    name: kelvin-like
    domain_radius: 1.0
    moduli: {youngs: 1, poisson: 0.25}
    fields:
      sigma:
        codomain: sym-tensor
        terms:
          - {coeff: 1, k: -1, mode_n: 1, parity: cos, comp: [r, r]}
      B:
        codomain: vector
        point:
          - {alpha: [0, 0], value: ["-pi", 0]}
    task: check-equilibrium
    params: {sigma: sigma, body_force: B}

A file holds one scenario or a ``scenarios:`` list of them.  Coefficients
may be numbers or strings such as ``"-1/(2*pi)"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import checkers, defect_force, elasticity
from .coef import Coef, as_coef, parse_coef
from .field_algebra import (
    Codomain,
    FieldError,
    PointPart,
    SingularField,
    SmoothTerm,
    degree_of_divergence,
    eval_smooth,
    rotate_quarter,
    scaling_degree,
)
from .quadrature import QuadratureSpec, estimate_scaling_degree

__all__ = [
    "TASKS",
    "VERDICT_TASKS",
    "ScenarioError",
    "Scenario",
    "ScenarioResult",
    "load_scenarios",
    "parse_scenarios",
    "field_to_record",
    "field_from_record",
    "dump_fields",
    "run_scenario",
    "render_grid",
    "write_artifacts",
]

TASKS = (
    "check-equilibrium",
    "check-compatibility",
    "check-incompatibility",
    "solve",
    "force",
    "sdeg",
    "render",
)
VERDICT_TASKS = ("check-equilibrium", "check-compatibility", "check-incompatibility", "force")


class ScenarioError(ValueError):
    """Parse or validation failure; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class Scenario:
    name: str
    task: str
    fields: dict
    params: dict = field(default_factory=dict)
    moduli: elasticity.IsotropicModuli = field(default_factory=elasticity.IsotropicModuli)
    domain_radius: float = 1.0
    rho: float | None = None
    quadrature: QuadratureSpec | None = None


@dataclass
class ScenarioResult:
    name: str
    task: str
    verdict: str | None
    report: str
    record: dict
    grids: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.task not in VERDICT_TASKS or self.verdict == checkers.SATISFIED


# field records


def _coef_value(v, where: str) -> Coef:
    if isinstance(v, bool):
        raise ScenarioError(f"{where}: boolean is not a coefficient")
    if isinstance(v, str):
        try:
            return parse_coef(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ScenarioError(f"{where}: cannot parse coefficient {v!r} ({exc})") from None
    if isinstance(v, (int, float, Fraction)):
        if isinstance(v, float) and not math.isfinite(v):
            raise ScenarioError(f"{where}: coefficient must be finite")
        return as_coef(v)
    raise ScenarioError(f"{where}: coefficient must be a number or string, got {type(v).__name__}")


def _int_value(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ScenarioError(f"{where}: expected an integer, got {v!r}")
    return v


def _comp_label(c, where: str):
    if isinstance(c, str):
        if c in ("1", "2"):
            return int(c)
        return c
    return _int_value(c, where)


def _point_entries(codomain: Codomain, entries, label: str) -> dict:
    out = {}
    if entries is None:
        return out
    if not isinstance(entries, list):
        raise ScenarioError(f"field {label!r}: point must be a list")
    for idx, entry in enumerate(entries):
        where = f"field {label!r} point entry {idx}"
        if not isinstance(entry, dict) or "alpha" not in entry or "value" not in entry:
            raise ScenarioError(f"{where}: needs 'alpha' and 'value'")
        alpha = entry["alpha"]
        if not isinstance(alpha, list) or len(alpha) != 2:
            raise ScenarioError(f"{where}: alpha must be a pair")
        alpha = tuple(_int_value(a, where) for a in alpha)
        if min(alpha) < 0:
            raise ScenarioError(f"{where}: alpha entries must be non-negative")
        value = entry["value"]
        if "comp" in entry:
            comp = tuple(_int_value(c, where) - 1 for c in entry["comp"])
            vals = {comp: _coef_value(value, where)}
        else:
            vals = {}
            for comp in codomain.components:
                v = value
                try:
                    for i in comp:
                        v = v[i]
                except (TypeError, IndexError, KeyError):
                    raise ScenarioError(f"{where}: value shape does not match codomain {codomain.value}") from None
                if isinstance(v, list):
                    raise ScenarioError(f"{where}: value shape does not match codomain {codomain.value}")
                vals[comp] = _coef_value(v, where)
        for comp, c in vals.items():
            if comp not in codomain.components:
                raise ScenarioError(f"{where}: component {comp} invalid for {codomain.value}")
            key = (comp, alpha)
            out[key] = out.get(key, Coef()) + c
    return out


_BUILTINS = {
    "kelvin": lambda m, R, rho, spec: elasticity.kelvin_stress(m, R, rho),
    "kelvin-e2": lambda m, R, rho, spec: rotate_quarter(elasticity.kelvin_stress(m, R, rho)),
    "incompatibility": lambda m, R, rho, spec: elasticity.incompatibility_stress(m, R, rho),
    "dilatation": lambda m, R, rho, spec: elasticity.dilatation_stress(m, R, rho),
    "dipole-body-force": lambda m, R, rho, spec: elasticity.dipole_body_force_stress(m, R, rho),
    "defect-strain": lambda m, R, rho, spec: checkers.defect_strain(
        spec.get("burgers", (0, 0)), spec.get("disclination", 0), R, rho
    ),
    "airy": lambda m, R, rho, spec: defect_force.airy_stress(_airy_poly(spec.get("phi", [])), R, rho),
}


def _airy_poly(entries) -> dict:
    out = {}
    for idx, e in enumerate(entries):
        where = f"airy monomial {idx}"
        if not isinstance(e, dict) or "power" not in e or "coeff" not in e:
            raise ScenarioError(f"{where}: needs 'power' and 'coeff'")
        a, b = (_int_value(x, where) for x in e["power"])
        out[(a, b)] = out.get((a, b), Coef()) + _coef_value(e["coeff"], where)
    return out


def field_from_record(label: str, rec, moduli=None, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Build a field from its scenario record; errors name the field label."""
    if not isinstance(rec, dict):
        raise ScenarioError(f"field {label!r}: definition must be a mapping")
    moduli = moduli or elasticity.IsotropicModuli()
    try:
        if "builtin" in rec:
            kind = rec["builtin"]
            if kind not in _BUILTINS:
                raise ScenarioError(f"field {label!r}: unknown builtin {kind!r}; choose from {sorted(_BUILTINS)}")
            F = _BUILTINS[kind](moduli, domain_radius, rho, rec)
            scale = rec.get("scale")
            return F if scale is None else F * _coef_value(scale, f"field {label!r} scale")
        codomain = Codomain(rec.get("codomain", "scalar"))
        terms = []
        for idx, t in enumerate(rec.get("terms") or []):
            where = f"field {label!r} term {idx}"
            if not isinstance(t, dict):
                raise ScenarioError(f"{where}: term must be a mapping")
            unknown = set(t) - {"coeff", "k", "p", "mode_n", "parity", "comp"}
            if unknown:
                raise ScenarioError(f"{where}: unknown keys {sorted(unknown)}")
            if "k" not in t:
                raise ScenarioError(f"{where}: missing radial exponent 'k'")
            comp = tuple(_comp_label(c, where) for c in t.get("comp", []))
            try:
                terms.append(
                    SmoothTerm(
                        _coef_value(t.get("coeff", 1), where),
                        _int_value(t["k"], f"{where} k"),
                        _int_value(t.get("p", 0), f"{where} p"),
                        _int_value(t.get("mode_n", 0), f"{where} mode_n"),
                        t.get("parity", "cos"),
                        comp,
                    )
                )
            except FieldError as exc:
                raise ScenarioError(f"{where}: {exc}") from None
        point = _point_entries(codomain, rec.get("point"), label)
        return SingularField(codomain, terms, point, domain_radius, rho)
    except ScenarioError:
        raise
    except (FieldError, ValueError, TypeError) as exc:
        raise ScenarioError(f"field {label!r}: {exc}") from None


def field_to_record(F: SingularField) -> dict:
    """Scenario record with Cartesian components; inverse of field_from_record."""
    terms = []
    for (comp, k, p, n, s), c in sorted(F.smooth.items()):
        terms.append(
            {
                "coeff": str(c),
                "k": k,
                "p": p,
                "mode_n": n,
                "parity": "cos" if s == 0 else "sin",
                "comp": [i + 1 for i in comp],
            }
        )
    point = [
        {"alpha": list(alpha), "comp": [i + 1 for i in comp], "value": str(c)}
        for (comp, alpha), c in sorted(F.point.items())
    ]
    rec = {"codomain": F.codomain.value, "terms": terms}
    if point:
        rec["point"] = point
    return rec


def dump_fields(fields: dict) -> str:
    return yaml.safe_dump({"fields": {k: field_to_record(v) for k, v in fields.items()}}, sort_keys=True)


# parsing


def _parse_moduli(rec) -> elasticity.IsotropicModuli:
    if rec is None:
        return elasticity.IsotropicModuli()
    if not isinstance(rec, dict):
        raise ScenarioError("moduli must be a mapping with youngs and poisson")
    try:
        return elasticity.IsotropicModuli(
            _coef_value(rec.get("youngs", 1), "moduli youngs").rational_value(),
            _coef_value(rec.get("poisson", Fraction(1, 4)), "moduli poisson").rational_value(),
        )
    except ValueError as exc:
        raise ScenarioError(f"moduli: {exc}") from None


def _parse_quadrature(rec):
    if rec is None:
        return None
    if not isinstance(rec, dict):
        raise ScenarioError("quadrature overrides must be a mapping")
    try:
        return QuadratureSpec(**{k: int(v) if k != "fit_rtol" else float(v) for k, v in rec.items()})
    except TypeError as exc:
        raise ScenarioError(f"quadrature: {exc}") from None


def _parse_one(doc, default_task: str | None, marks: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    name = str(doc.get("name", "scenario"))
    task = doc.get("task", default_task)
    if task is None:
        raise ScenarioError(f"scenario {name!r}: no task given")
    if task not in TASKS:
        raise ScenarioError(f"scenario {name!r}: unknown task {task!r}; choose from {list(TASKS)}")
    if default_task is not None and task != default_task:
        raise ScenarioError(f"scenario {name!r}: task {task!r} does not match the subcommand {default_task!r}")
    R = float(doc.get("domain_radius", 1.0))
    rho = doc.get("rho")
    rho = None if rho is None else float(rho)
    moduli = _parse_moduli(doc.get("moduli"))
    raw_fields = doc.get("fields") or {}
    if not isinstance(raw_fields, dict):
        raise ScenarioError(f"scenario {name!r}: fields must be a mapping")
    fields = {}
    for label, rec in raw_fields.items():
        try:
            fields[str(label)] = field_from_record(str(label), rec, moduli, R, rho)
        except ScenarioError as exc:
            line, col = marks.get(("fields", str(label)), (None, None))
            raise ScenarioError(str(exc), line, col) from None
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise ScenarioError(f"scenario {name!r}: params must be a mapping")
    for key, val in params.items():
        if key in _LABEL_PARAMS and val is not None and str(val) not in fields:
            raise ScenarioError(f"scenario {name!r}: parameter {key!r} refers to unknown field {val!r}")
    return Scenario(name, task, fields, params, moduli, R, rho, _parse_quadrature(params.get("quadrature")))


_LABEL_PARAMS = ("sigma", "body_force", "strain", "stress", "incompatibility", "field", "sigma2", "A")


def _field_marks(node) -> dict:
    """Source positions (1-based) of each field definition in a composed YAML node."""
    marks = {}
    if not isinstance(node, yaml.MappingNode):
        return marks
    for k, v in node.value:
        if k.value == "fields" and isinstance(v, yaml.MappingNode):
            for fk, fv in v.value:
                marks[("fields", fk.value)] = (fv.start_mark.line + 1, fv.start_mark.column + 1)
    return marks


def parse_scenarios(text: str, default_task: str | None = None) -> list:
    """Parse YAML text into scenarios; raises ScenarioError with line/column."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        raise ScenarioError(f"YAML parse error: {getattr(exc, 'problem', exc)}", line, col) from None
    if doc is None:
        raise ScenarioError("empty scenario file")
    if isinstance(doc, dict) and "scenarios" in doc:
        items = doc["scenarios"]
        if not isinstance(items, list):
            raise ScenarioError("'scenarios' must be a list")
        seq = next(v for k, v in node.value if k.value == "scenarios")
        return [_parse_one(d, default_task, _field_marks(n)) for d, n in zip(items, seq.value)]
    return [_parse_one(doc, default_task, _field_marks(node))]


def load_scenarios(path, default_task: str | None = None) -> list:
    return parse_scenarios(Path(path).read_text(), default_task)


# tasks


def _get(sc: Scenario, key: str, required: bool = True):
    label = sc.params.get(key)
    if label is None:
        if required:
            raise ScenarioError(f"scenario {sc.name!r}: task {sc.task} needs parameter {key!r}")
        return None
    return sc.fields[str(label)]


def _vector_param(sc: Scenario, key: str, default=None):
    v = sc.params.get(key, default)
    if v is None:
        raise ScenarioError(f"scenario {sc.name!r}: missing parameter {key!r}")
    if not isinstance(v, list) or len(v) != 2:
        raise ScenarioError(f"scenario {sc.name!r}: {key} must be a pair")
    return tuple(_coef_value(x, key) for x in v)


def _coef_list(v) -> list:
    return [str(c) for c in v]


def _float_list(v) -> list:
    return [float(c) for c in v]


def _task_check(sc: Scenario):
    spec = sc.quadrature
    if sc.task == "check-equilibrium":
        sigma = _get(sc, "sigma")
        B = _get(sc, "body_force", required=False)
        if sc.params.get("restricted"):
            rep = checkers.check_equilibrium_restricted(sigma, B, spec=spec)
        else:
            rep = checkers.check_equilibrium(sigma, B, spec=spec)
    elif sc.task == "check-compatibility":
        rep = checkers.check_compatibility(_get(sc, "strain"), spec=spec)
    else:
        strain = _get(sc, "strain", required=False)
        if strain is None:
            strain = elasticity.compliance_apply(_get(sc, "stress"), sc.moduli)
        rep = checkers.check_incompatibility(strain, _get(sc, "incompatibility", required=False), spec=spec)
    return rep.verdict, rep.to_text(), {"report": rep.to_record()}


def _task_solve(sc: Scenario):
    B = _get(sc, "body_force", required=False)
    N = _get(sc, "incompatibility", required=False)
    for label, F in (("body_force", B), ("incompatibility", N)):
        if F is not None and F.smooth:
            raise ScenarioError(f"scenario {sc.name!r}: {label} must be point supported")
    problem = elasticity.PointSourceProblem(
        B.point_part if B is not None else PointPart("vector"),
        N.point_part if N is not None else PointPart("scalar"),
        sc.moduli,
    )
    sigma = elasticity.general_point_solution(problem, sc.domain_radius, sc.rho)
    eq, inc = elasticity.verify_solution(sigma, problem, spec=sc.quadrature)
    text = "\n".join(["solution:", sigma.describe(), eq.to_text(), inc.to_text()])
    record = {
        "solution": field_to_record(sigma),
        "degree": _deg(degree_of_divergence(sigma)),
        "equilibrium": eq.to_record(),
        "incompatibility": inc.to_record(),
    }
    sc.fields.setdefault("solution", sigma)
    return None, text, record


def _deg(v: float):
    return "-inf" if v == -math.inf else v


def _task_sdeg(sc: Scenario):
    F = _get(sc, "field")
    sd = scaling_degree(F)
    deg = degree_of_divergence(F)
    lines = [f"field: {sc.params['field']}", f"scaling degree (analytic): {_deg(sd)}", f"degree of divergence: {_deg(deg)}"]
    record = {"scaling_degree": _deg(sd), "degree_of_divergence": _deg(deg)}
    if sd != -math.inf:
        kwargs = {} if sc.quadrature is None else {"spec": sc.quadrature}
        est = estimate_scaling_degree(F, **kwargs)
        record["empirical_scaling_degree"] = est
        record["empirical_degree_of_divergence"] = est - 2
        record["agrees_within_0_1"] = abs(est - sd) <= 0.1
        lines.append(f"scaling degree (empirical): {est:.6f}")
        lines.append(f"degree of divergence (empirical): {est - 2:.6f}")
    return None, "\n".join(lines), record


def _task_force(sc: Scenario):
    case = sc.params.get("case", "dislocation")
    convention = sc.params.get("convention", "paper")
    sigma2 = _get(sc, "sigma2")
    m = sc.moduli
    R, rho = sc.domain_radius, sc.rho
    record = {"case": case, "convention": convention}
    if case == "dislocation":
        b = _vector_param(sc, "b")
        A = SingularField("vector", (), {((0,), (0, 0)): b[0], ((1,), (0, 0)): b[1]}, R, rho)
        s0 = defect_force.stress_at_origin(sigma2)
        closed = defect_force.peach_koehler(b, s0, convention)
        loop_closed = defect_force.peach_koehler(b, s0, "right-hand")
        builder = lambda: defect_force.dislocation_distortion(b, m, R, rho)  # noqa: E731
    elif case == "dipole":
        b, v = _vector_param(sc, "b"), _vector_param(sc, "v")
        A = defect_force.dipole_density(b, v, R, rho)
        closed, couple = defect_force.dipole_force_couple(b, v, sigma2, convention)
        loop_closed, _ = defect_force.dipole_force_couple(b, v, sigma2, "right-hand")
        record["couple"] = {f"{a[0]},{a[1]}": _coef_list(c) for a, c in couple.items()}
        builder = lambda: defect_force.dipole_distortion(b, v, m, R, rho)  # noqa: E731
    elif case == "dilation":
        a = _coef_value(sc.params.get("a", 1), "a")
        A = defect_force.dilation_density(a, R, rho)
        closed = defect_force.dilation_force(a, sigma2, sc.params.get("normalization", "loop"))
        loop_closed = defect_force.dilation_force(a, sigma2, "loop")
        builder = lambda: defect_force.dilation_distortion(a, m, R, rho)  # noqa: E731
    else:
        raise ScenarioError(f"scenario {sc.name!r}: unknown force case {case!r}")
    gf = defect_force.generalized_force(A, sigma2, convention)
    record["closed_form"] = _coef_list(closed)
    record["generalized_force"] = gf.to_record()
    lines = [f"force case: {case} (convention {convention})", f"closed form: {_coef_list(closed)}"]
    lines.append(f"generalized force: {gf.to_record()}")
    verdict = None
    if sc.params.get("oracle", True):
        beta1, sigma1 = builder()
        beta2 = defect_force.smooth_distortion(sigma2, m)
        J = defect_force.interaction_eshelby(beta1, sigma1, beta2, sigma2, m)
        oracle = defect_force.force_loop_oracle(J)
        target = np.array(_float_list(loop_closed))
        err = float(np.max(np.abs(oracle - target)))
        tol = 1e-6 * max(1.0, float(np.max(np.abs(target))))
        verdict = checkers.SATISFIED if err <= tol else checkers.VIOLATED
        record.update({"oracle": [float(x) for x in oracle], "oracle_error": err, "oracle_tolerance": tol})
        lines.append(f"loop oracle: {[float(x) for x in oracle]} (error {err:.2e}, tol {tol:.1e})")
        lines.append(f"verdict: {verdict}")
    return verdict, "\n".join(lines), record


def render_grid(F: SingularField, nx: int, ny: int, half_width: float, guard: float) -> list:
    """Rows (x, y, components...) on an nx by ny grid over [-w, w]^2, row-major in y then x.

    Only the smooth part is evaluated; the grid must stay ``guard`` away from O.
    """
    if not guard > 0:
        raise ValueError("guard radius must be positive")
    if nx < 1 or ny < 1:
        raise ValueError("grid needs at least one point per axis")
    xs = np.linspace(-half_width, half_width, nx) if nx > 1 else np.array([half_width])
    ys = np.linspace(-half_width, half_width, ny) if ny > 1 else np.array([half_width])
    X, Y = np.meshgrid(xs, ys)
    r = np.hypot(X, Y)
    if np.any(r < guard):
        raise ValueError(f"grid point within guard radius {guard} of O")
    vals = np.asarray(eval_smooth(F, r.ravel(), np.arctan2(Y, X).ravel()), dtype=float)
    vals = vals.reshape(r.size, -1)
    return [[float(x), float(y), *map(float, row)] for x, y, row in zip(X.ravel(), Y.ravel(), vals)]


def _component_names(F: SingularField) -> list:
    if F.codomain.rank == 0:
        return ["value"]
    return ["c" + "".join(str(i + 1) for i in comp) for comp in F.codomain.components]


def _task_render(sc: Scenario):
    F = _get(sc, "field")
    g = sc.params.get("grid") or {}
    try:
        rows = render_grid(
            F, int(g.get("nx", 21)), int(g.get("ny", 21)), float(g.get("half_width", 0.5)), float(g.get("guard", 0.01))
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario {sc.name!r}: {exc}") from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", *_component_names(F)])
    for row in rows:
        w.writerow([repr(v) for v in row])
    fname = f"{_slug(sc.name)}_{_slug(str(sc.params['field']))}.csv"
    return None, f"rendered {len(rows)} points to {fname}", {"grid_file": fname, "points": len(rows)}, {fname: buf.getvalue()}


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in s)


def run_scenario(sc: Scenario) -> ScenarioResult:
    grids = {}
    try:
        if sc.task in ("check-equilibrium", "check-compatibility", "check-incompatibility"):
            verdict, text, record = _task_check(sc)
        elif sc.task == "solve":
            verdict, text, record = _task_solve(sc)
        elif sc.task == "sdeg":
            verdict, text, record = _task_sdeg(sc)
        elif sc.task == "force":
            verdict, text, record = _task_force(sc)
        else:
            verdict, text, record, grids = _task_render(sc)
    except (FieldError, ArithmeticError) as exc:
        raise ScenarioError(f"scenario {sc.name!r}: {type(exc).__name__}: {exc}") from None
    header = f"scenario: {sc.name}\ntask: {sc.task}"
    record = {"name": sc.name, "task": sc.task, "verdict": verdict, **record}
    return ScenarioResult(sc.name, sc.task, verdict, header + "\n" + text, record, grids)


def write_artifacts(results: list, out_dir) -> dict:
    """Write report.txt, result.json and grid CSVs; returns the result record."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = {
        "all_ok": all(r.ok for r in results),
        "scenarios": [r.record for r in results],
    }
    (out / "report.txt").write_text("\n\n".join(r.report for r in results) + "\n")
    (out / "result.json").write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
    for r in results:
        for fname, text in r.grids.items():
            (out / fname).write_text(text)
    return record
