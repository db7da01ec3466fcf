"""JSON instance documents and analysis reports.

Instance document::

    {
      "points": ["0", "1", "4", "5", "6"],
      "metric": {"kind": "line", "coordinates": ["0", "1", "4", "5", "6"]},
      "map": {"0": ["0"], "1": ["1"], "4": ["0", "1"], "5": ["0", "1"], "6": ["0", "1"]}
    }

``metric.kind`` is ``"matrix"`` (with ``"distances"``, a square matrix),
``"line"`` (with ``"coordinates"``, absolute-difference metric) or
``"parity"`` (labels must be integers; 0 if equal, 2 if same parity, 1
otherwise).  Rationals may be written as JSON integers, ``"p/q"`` strings or
decimal strings/numbers; decimals are converted exactly.  Everything emitted
uses ``"p/q"`` or bare-integer strings.

The Hausdorff distance between point sets A and B is
``max(max_{a in A} d(a, B), max_{b in B} d(b, A))`` with
``d(p, S) = min_{s in S} d(p, s)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from perimfix.analysis import LambdaReport, PropertyReport
from perimfix.iteration import BoundCheck, IterationTrace
from perimfix.metric import (
    EmptyImage,
    FiniteMetricSpace,
    InstanceError,
    MultiMap,
    as_rational,
    validate_metric,
)
from perimfix.search import REGIMES, ClassifiedInstance, HuntReport, parity_distance

METRIC_KINDS = ("matrix", "line", "parity")


class InstanceSyntaxError(InstanceError):
    def __init__(self, msg: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{msg} (line {line}, column {column})")


class SchemaError(InstanceError):
    pass


class UnknownLabel(InstanceError):
    pass


def rational_text(x: Fraction) -> str:
    return str(Fraction(x))


def _load_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(exc.msg, exc.lineno, exc.colno) from None


def _rational(value, where: str) -> Fraction:
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _expect_keys(obj, required: set[str], where: str, optional: frozenset = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    missing = required - obj.keys()
    extra = obj.keys() - required - optional
    if missing:
        raise SchemaError(f"{where} is missing {sorted(missing)}")
    if extra:
        raise SchemaError(f"{where} has unexpected fields {sorted(extra)}")


@dataclass(frozen=True)
class InstanceDocument:
    points: tuple[str, ...]
    metric_kind: str
    metric_data: tuple = ()  # matrix rows or coordinates, as Fractions; empty for parity
    map: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @classmethod
    def from_json(cls, obj) -> "InstanceDocument":
        _expect_keys(obj, {"points", "metric", "map"}, "instance")
        points = obj["points"]
        if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
            raise SchemaError("points must be a list of label strings")
        metric = obj["metric"]
        if not isinstance(metric, dict) or metric.get("kind") not in METRIC_KINDS:
            raise SchemaError(f"metric.kind must be one of {METRIC_KINDS}")
        kind = metric["kind"]
        if kind == "matrix":
            _expect_keys(metric, {"kind", "distances"}, "metric")
            rows = metric["distances"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise SchemaError("metric.distances must be a list of rows")
            data = tuple(
                tuple(_rational(v, f"metric.distances[{i}][{j}]") for j, v in enumerate(r)) for i, r in enumerate(rows)
            )
        elif kind == "line":
            _expect_keys(metric, {"kind", "coordinates"}, "metric")
            coords = metric["coordinates"]
            if not isinstance(coords, list):
                raise SchemaError("metric.coordinates must be a list")
            data = tuple(_rational(v, f"metric.coordinates[{i}]") for i, v in enumerate(coords))
        else:
            _expect_keys(metric, {"kind"}, "metric")
            data = ()
        fmap = obj["map"]
        if not isinstance(fmap, dict):
            raise SchemaError("map must be an object from label to label list")
        pairs = []
        for key, img in fmap.items():
            if not isinstance(img, list) or not all(isinstance(v, str) for v in img):
                raise SchemaError(f"map[{key!r}] must be a list of label strings")
            pairs.append((key, tuple(img)))
        return cls(tuple(points), kind, data, tuple(pairs))

    def to_json(self) -> dict:
        metric: dict[str, Any] = {"kind": self.metric_kind}
        if self.metric_kind == "matrix":
            metric["distances"] = [[rational_text(v) for v in row] for row in self.metric_data]
        elif self.metric_kind == "line":
            metric["coordinates"] = [rational_text(v) for v in self.metric_data]
        return {
            "points": list(self.points),
            "metric": metric,
            "map": {k: list(v) for k, v in self.map},
        }

    def distances(self) -> list[list[Fraction]]:
        n = len(self.points)
        if self.metric_kind == "matrix":
            return [list(r) for r in self.metric_data]
        if self.metric_kind == "line":
            if len(self.metric_data) != n:
                raise SchemaError(f"{len(self.metric_data)} coordinates for {n} points")
            return [[abs(a - b) for b in self.metric_data] for a in self.metric_data]
        try:
            vals = [int(p) for p in self.points]
        except ValueError:
            raise SchemaError("the parity metric needs integer labels") from None
        return [[Fraction(parity_distance(a, b)) for b in vals] for a in vals]

    def build(self) -> tuple[FiniteMetricSpace, MultiMap]:
        space = validate_metric(self.points, self.distances())
        images: dict[str, tuple[str, ...]] = dict(self.map)
        if len(images) != len(self.map):
            raise SchemaError("map lists a point more than once")
        for lab in images:
            if lab not in space.labels:
                raise UnknownLabel(f"map has an entry for unknown point {lab!r}")
        out = []
        for lab in space.labels:
            if lab not in images:
                raise SchemaError(f"map has no entry for point {lab!r}")
            img = images[lab]
            if not img:
                raise EmptyImage(f"image of {lab!r} is empty")
            try:
                out.append(tuple(space.index(v) for v in img))
            except KeyError as exc:
                raise UnknownLabel(f"image of {lab!r}: {exc.args[0]}") from None
        return space, MultiMap(tuple(out))


def document_for(space: FiniteMetricSpace, fmap: MultiMap) -> InstanceDocument:
    """Matrix-form document for an arbitrary instance."""
    labs = space.labels
    return InstanceDocument(
        points=labs,
        metric_kind="matrix",
        metric_data=space.dist,
        map=tuple((labs[i], tuple(labs[j] for j in img)) for i, img in enumerate(fmap.images)),
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_instance_document(text: str) -> InstanceDocument:
    return InstanceDocument.from_json(_load_json(text))


def parse_instance(text: str) -> tuple[FiniteMetricSpace, MultiMap]:
    return load_instance_document(text).build()


def emit_instance(doc: InstanceDocument | tuple[FiniteMetricSpace, MultiMap]) -> str:
    if not isinstance(doc, InstanceDocument):
        doc = document_for(*doc)
    return canonical_json(doc.to_json())


# -- reports ------------------------------------------------------------------

# trace/cauchy fields holding rationals
_TRACE_RATIONALS = {"lambda", "step_distance", "hausdorff_prev", "slack", "separation", "lhs", "rhs"}


@dataclass
class ReportDocument:
    points: list[str]
    metric_kind: str
    lambda_min_mlc: Fraction
    mlc_witness: list[str]
    lambda_min_mlcp: Fraction
    mlcp_witness: list[str]
    fixed_points: list[str]
    prime_period_2_points: list[str]
    forming_triangle: bool
    forming_triangle_failure: list[str] | None
    lemma1: dict[str, bool]
    regime: str
    prime_period_points: dict[str, list[str]] = field(default_factory=dict)
    trace: dict | None = None

    def to_json(self) -> dict:
        out = {
            "instance": {"points": list(self.points), "metric": self.metric_kind},
            "lambda_min_mlc": rational_text(self.lambda_min_mlc),
            "mlc_witness": list(self.mlc_witness),
            "lambda_min_mlcp": rational_text(self.lambda_min_mlcp),
            "mlcp_witness": list(self.mlcp_witness),
            "fixed_points": list(self.fixed_points),
            "prime_period_2_points": list(self.prime_period_2_points),
            "forming_triangle": self.forming_triangle,
            "forming_triangle_failure": self.forming_triangle_failure,
            "lemma1": dict(self.lemma1),
            "regime": self.regime,
        }
        if self.prime_period_points:
            out["prime_period_points"] = {k: list(v) for k, v in self.prime_period_points.items()}
        if self.trace is not None:
            out["trace"] = _map_rationals(self.trace, rational_text)
        return out

    @classmethod
    def from_json(cls, obj) -> "ReportDocument":
        required = {
            "instance", "lambda_min_mlc", "mlc_witness", "lambda_min_mlcp", "mlcp_witness", "fixed_points",
            "prime_period_2_points", "forming_triangle", "forming_triangle_failure", "lemma1", "regime",
        }  # fmt: skip
        _expect_keys(obj, required, "report", frozenset({"prime_period_points", "trace"}))
        trace = obj.get("trace")
        return cls(
            points=list(obj["instance"]["points"]),
            metric_kind=obj["instance"]["metric"],
            lambda_min_mlc=_rational(obj["lambda_min_mlc"], "lambda_min_mlc"),
            mlc_witness=list(obj["mlc_witness"]),
            lambda_min_mlcp=_rational(obj["lambda_min_mlcp"], "lambda_min_mlcp"),
            mlcp_witness=list(obj["mlcp_witness"]),
            fixed_points=list(obj["fixed_points"]),
            prime_period_2_points=list(obj["prime_period_2_points"]),
            forming_triangle=bool(obj["forming_triangle"]),
            forming_triangle_failure=obj["forming_triangle_failure"],
            lemma1=dict(obj["lemma1"]),
            regime=obj["regime"],
            prime_period_points={k: list(v) for k, v in obj.get("prime_period_points", {}).items()},
            trace=None if trace is None else _map_rationals(trace, lambda v: _rational(v, "trace")),
        )


def _map_rationals(obj, fn, key=None):
    if isinstance(obj, dict):
        return {k: _map_rationals(v, fn, k) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_map_rationals(v, fn, key) for v in obj]
    if key in _TRACE_RATIONALS and obj is not None:
        return fn(obj)
    return obj


def trace_dict(space: FiniteMetricSpace, trace: IterationTrace, check: BoundCheck | None, start: int) -> dict:
    lab = space.labels
    oc = trace.outcome
    outcome: dict[str, Any] = {"kind": oc.kind}
    if oc.point is not None:
        outcome["point"] = lab[oc.point]
    if oc.pair is not None:
        outcome["pair"] = [lab[i] for i in oc.pair]
    out: dict[str, Any] = {
        "start": lab[start],
        "lambda": trace.lam,
        "policy": trace.policy,
        "points": [lab[i] for i in trace.points],
        "steps": [
            {
                "n": s.n,
                "point": lab[s.point],
                "step_distance": s.step_distance,
                "hausdorff_prev": s.hausdorff_prev,
                "slack": s.slack,
                "separation": s.separation,
            }
            for s in trace.steps
        ],
        "outcome": outcome,
    }
    if check is not None:
        out["cauchy"] = {
            "ok": check.ok,
            "checked": check.checked,
            "index": check.index,
            "bound": check.bound,
            "lhs": check.lhs,
            "rhs": check.rhs,
        }
    return out


def build_report(
    ci: ClassifiedInstance,
    metric_kind: str = "matrix",
    trace: dict | None = None,
) -> ReportDocument:
    lab = ci.space.labels
    lr: LambdaReport = ci.lambdas
    pr: PropertyReport = ci.properties

    def names(idx):
        return [lab[i] for i in sorted(idx)]

    extra = {str(n): names(pts) for n, pts in pr.prime_period_points.items() if n != 2}
    lemma = pr.lemma1
    return ReportDocument(
        points=list(lab),
        metric_kind=metric_kind,
        lambda_min_mlc=lr.lambda_min_mlc,
        mlc_witness=[lab[i] for i in lr.mlc_witness],
        lambda_min_mlcp=lr.lambda_min_mlcp,
        mlcp_witness=[lab[i] for i in lr.mlcp_witness],
        fixed_points=names(pr.fixed_points),
        prime_period_2_points=names(pr.prime_period_points[2]),
        forming_triangle=pr.forming_triangle,
        forming_triangle_failure=None if pr.forming_triangle_failure is None else [lab[i] for i in pr.forming_triangle_failure],
        lemma1={
            "antecedent": lemma.antecedent,
            "consequent": lemma.consequent,
            "vacuous": lemma.vacuous,
            "verdict": lemma.verdict,
        },
        regime=ci.regime,
        prime_period_points=extra,
        trace=trace,
    )


def parse_report(text: str) -> ReportDocument:
    return ReportDocument.from_json(_load_json(text))


def _fmt_set(labels) -> str:
    return "{" + ", ".join(labels) + "}" if labels else "(none)"


def emit_report(report: ReportDocument, mode: str = "json") -> str:
    if mode == "json":
        return canonical_json(report.to_json())
    if mode != "human":
        raise ValueError(f"unknown report mode {mode!r}")
    rows = [
        ("points", f"{len(report.points)} ({report.metric_kind} metric)"),
        ("lambda_min_mlc", f"{rational_text(report.lambda_min_mlc)}  at {tuple(report.mlc_witness)}"),
        ("lambda_min_mlcp", f"{rational_text(report.lambda_min_mlcp)}  at {tuple(report.mlcp_witness)}"),
        ("regime", report.regime),
        ("fixed points", _fmt_set(report.fixed_points)),
        ("prime period 2", _fmt_set(report.prime_period_2_points)),
    ]
    for n, pts in sorted(report.prime_period_points.items(), key=lambda kv: int(kv[0])):
        rows.append((f"prime period {n}", _fmt_set(pts)))
    ft = "yes" if report.forming_triangle else f"no, fails at {tuple(report.forming_triangle_failure)}"
    rows.append(("forming triangle", ft))
    lm = report.lemma1
    rows.append(
        ("lemma 1", f"antecedent={lm['antecedent']} consequent={lm['consequent']} "
                    f"{'vacuous' if lm['vacuous'] else 'non-vacuous'} verdict={lm['verdict']}")
    )  # fmt: skip
    width = max(len(k) for k, _ in rows)
    lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
    if report.trace is not None:
        tr = report.trace
        lines.append("")
        lines.append(
            f"iteration from {tr['start']} (lambda {rational_text(tr['lambda'])}, {tr['policy']}): "
            + " -> ".join(tr["points"])
        )
        oc = tr["outcome"]
        lines.append(f"outcome: {oc['kind']}" + (f" {oc['point']}" if "point" in oc else ""))
        if tr["steps"]:
            lines.append(f"  {'n':>3}  {'point':>6}  {'dist':>8}  {'H prev':>8}  {'slack':>10}  {'sep':>8}")
            for s in tr["steps"]:
                lines.append(
                    f"  {s['n']:>3}  {s['point']:>6}  {rational_text(s['step_distance']):>8}  "
                    f"{rational_text(s['hausdorff_prev']):>8}  {rational_text(s['slack']):>10}  "
                    f"{rational_text(s['separation']):>8}"
                )
        if "cauchy" in tr:
            c = tr["cauchy"]
            if c["ok"]:
                lines.append(f"cauchy bounds: hold ({c['checked']} checked)")
            else:
                lines.append(
                    f"cauchy bounds: {c['bound']} bound fails at n={c['index']}: "
                    f"{rational_text(c['lhs'])} > {rational_text(c['rhs'])}"
                )
    return "\n".join(lines) + "\n"


# -- hunt reports -------------------------------------------------------------


def hunt_to_json(report: HuntReport, gen) -> dict:
    findings = []
    for f in report.findings:
        ci = f.instance
        findings.append(
            {
                "index": f.index,
                "regime": ci.regime,
                "lambda_min_mlc": rational_text(ci.lambdas.lambda_min_mlc),
                "lambda_min_mlcp": rational_text(ci.lambdas.lambda_min_mlcp),
                "instance": document_for(ci.space, ci.map).to_json(),
            }
        )
    return {
        "mode": report.mode,
        "filter": report.filter,
        "config": {
            "n_points": gen.n_points,
            "weight_max": gen.weight_max,
            "image_size_min": gen.image_size_min,
            "image_size_max": gen.image_size_max,
            "seed": gen.seed,
            "count": gen.count,
        },
        "total": report.total,
        "regime_counts": {r: report.regime_counts.get(r, 0) for r in REGIMES},
        "theorem4_violations": report.theorem4_violations,
        "findings": findings,
    }
