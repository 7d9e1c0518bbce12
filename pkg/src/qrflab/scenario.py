"""JSON scenarios: a frame setup, an initial state and an ordered list of actions.

Schema ``qrflab.scenario/1``::

    {
      "schema": "qrflab.scenario/1",
      "name": "example2",
      "description": "...",
      "group": "Z2"                       # or {"table": [[...]], "name": "..."}
      "frames": 2,
      "physical": [{"name": "A", "rep": "qubit"}, ...],
                                          # rep: "regular" | "qubit" | "trivial(d)"
                                          #      | {"matrices": [[[[re, im], ...], ...], ...]}
      "state": "example2",                # or {"amplitudes": [[re, im], ...], "frame": 1}
                                          # or {"basis": [0, 1, 0, 0], "frame": 1}
      "actions": [
        {"transform": {"from": 1, "to": 2, "kind": "perspectival"}},
        {"check": "state", "expect": "example2_final", "tol": 1e-12},
        {"check": "concurrence", "systems": ["A", "B"], "expect": 1, "tol": 1e-9},
        {"check": "negativity", "systems": ["A", "B"], "cut": ["A"], "max": 1e-12},
        {"check": "standard_form", "frame": 2, "expect": true},
        {"check": "conditionals", "expect": "some_entangled"},
        {"check": "suite", "suite": {"kind": "theorem", "trials": 50, "seed": 1}}
      ]
    }

Measure checks (``negativity``, ``concurrence``, ``purity``) accept ``max``,
``min`` or ``expect`` with ``tol``. Omitting ``cut`` for negativity takes the
largest value over every bipartition of ``systems``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .entanglement import Bipartition, concurrence, is_pure_fully_separable, max_negativity, negativity
from .errors import (
    CheckFailure,
    ConfigError,
    GroupError,
    ParseError,
    RepresentationError,
    TransformError,
    ValidationError,
)
from .group import FiniteGroup, group_from_table, named_group
from .hilbert import (
    NORM_TOL,
    PureState,
    canonical_phase,
    conditional_decomposition,
    from_pairs,
    ket_string,
    pairs,
    partial_trace,
)
from .qrf import (
    FrameConfig,
    apply_transform,
    build_passive_transform,
    build_perspectival_transform,
    standard_form_check,
)
from .representation import Representation, named_representation, representation_from_matrices
from .verify import SuiteSpec, VerificationReport, run_suite
from .worked import NAMED_STATES

SCENARIO_SCHEMA = "qrflab.scenario/1"
RUN_SCHEMA = "qrflab.report/1"
CHECK_KINDS = ("state", "negativity", "concurrence", "purity", "standard_form", "conditionals", "suite")
MEASURES = ("negativity", "concurrence", "purity")
STATE_TOL = 1e-12
SEPARABLE_TOL = 1e-9

_TOP_FIELDS = {"schema", "name", "description", "group", "frames", "physical", "state", "actions"}


# ---------------------------------------------------------------- model

@dataclass(frozen=True)
class TransformAction:
    source: int
    target: int
    kind: str


@dataclass(frozen=True)
class CheckAction:
    check: str
    params: dict


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    description: str
    config: FrameConfig
    rep_labels: tuple[str, ...]
    state: PureState
    actions: tuple

    @property
    def labels(self) -> tuple[str, ...]:
        return self.config.spec.labels


@dataclass(frozen=True)
class Overrides:
    """Command-line values that replace the matching fields of suite actions."""

    seed: int | None = None
    trials: int | None = None
    tol: float | None = None
    workers: int = 1


@dataclass
class RunReport:
    scenario: str
    group: str
    frames: int
    physical: list
    initial: dict
    outcomes: list = field(default_factory=list)
    schema: str = RUN_SCHEMA

    @property
    def passed(self) -> bool:
        return all(o.get("passed", True) for o in self.outcomes)

    def failed_actions(self) -> list[int]:
        return [o["index"] for o in self.outcomes if o.get("passed") is False]

    def raise_for_failure(self):
        bad = self.failed_actions()
        if bad:
            o = self.outcomes[bad[0]]
            raise CheckFailure(bad[0], o.get("message") or f"{o['kind']} check failed")

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "scenario": self.scenario,
            "group": self.group,
            "frames": self.frames,
            "physical": self.physical,
            "initial": self.initial,
            "outcomes": self.outcomes,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        if d.get("schema") != RUN_SCHEMA:
            raise ParseError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["scenario"], d["group"], d["frames"], d["physical"], d["initial"],
                   list(d["outcomes"]), d["schema"])


# ---------------------------------------------------------------- loading

def builtin_names() -> list[str]:
    root = resources.files("qrflab") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_text(name: str) -> str:
    path = resources.files("qrflab") / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise ValidationError("scenario", f"no builtin scenario {name!r}; have {builtin_names()}")
    return path.read_text()


def load_scenario(source: str | Path | dict) -> Scenario:
    """Accept a builtin name, a path to a JSON file, or an already-decoded dict."""
    if isinstance(source, dict):
        return validate_scenario(source)
    text_source = str(source)
    if isinstance(source, str) and source in builtin_names():
        return parse_scenario(builtin_text(source))
    path = Path(text_source)
    if not path.is_file():
        raise ValidationError("scenario", f"{text_source!r} is neither a file nor a builtin scenario")
    return parse_scenario(path.read_text())


def parse_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    return validate_scenario(data)


def validate_scenario(data: dict) -> Scenario:
    schema = data.get("schema", SCENARIO_SCHEMA)
    if schema != SCENARIO_SCHEMA:
        raise ValidationError("schema", f"expected {SCENARIO_SCHEMA!r}, got {schema!r}")
    extra = set(data) - _TOP_FIELDS
    if extra:
        raise ValidationError(sorted(extra)[0], "unknown field")
    group = _group(data.get("group", "Z2"))
    frames = data.get("frames", 2)
    if not isinstance(frames, int) or isinstance(frames, bool) or frames < 1:
        raise ValidationError("frames", f"must be a positive integer, got {frames!r}")
    reps, names, rep_labels = _physical(group, data.get("physical", []))
    try:
        config = FrameConfig(group, frames, reps, names)
    except ValueError as exc:
        raise ValidationError("physical", str(exc)) from None
    if len(set(config.spec.labels)) != len(config.spec.labels):
        raise ValidationError("physical", f"factor labels {config.spec.labels} are not unique")
    state = _state(config, data.get("state"))
    actions = _actions(config, state.frame, data.get("actions", []))
    return Scenario(str(data.get("name", "scenario")), str(data.get("description", "")),
                    config, rep_labels, state, actions)


def _group(spec) -> FiniteGroup:
    if isinstance(spec, str):
        try:
            return named_group(spec)
        except KeyError as exc:
            raise ValidationError("group", str(exc.args[0])) from None
    if isinstance(spec, dict) and "table" in spec:
        try:
            return group_from_table(spec["table"], spec.get("name"))
        except (GroupError, TypeError, ValueError) as exc:
            raise ValidationError("group.table", str(exc)) from None
    raise ValidationError("group", "expected a builtin name or {\"table\": [...]}")


def _physical(group: FiniteGroup, items):
    if not isinstance(items, list):
        raise ValidationError("physical", "expected a list of systems")
    reps: list[Representation] = []
    names, labels = [], []
    for j, item in enumerate(items):
        where = f"physical[{j}]"
        if isinstance(item, str):
            item = {"rep": item}
        if not isinstance(item, dict) or "rep" not in item:
            raise ValidationError(where, "expected {\"name\": ..., \"rep\": ...}")
        rep = item["rep"]
        try:
            if isinstance(rep, str):
                r = named_representation(group, rep)
            elif isinstance(rep, dict) and "matrices" in rep:
                mats = [np.array([from_pairs(row) for row in m]) for m in rep["matrices"]]
                r = representation_from_matrices(group, mats, label="custom")
            else:
                raise ValidationError(f"{where}.rep", "expected a name or {\"matrices\": [...]}")
        except KeyError as exc:
            raise ValidationError(f"{where}.rep", str(exc.args[0])) from None
        except (RepresentationError, TypeError, ValueError) as exc:
            raise ValidationError(f"{where}.rep", str(exc)) from None
        reps.append(r)
        names.append(item.get("name"))
        labels.append(r.label)
    return tuple(reps), tuple(names), tuple(labels)


def _state(config: FrameConfig, spec) -> PureState:
    if spec is None:
        raise ValidationError("state", "missing initial state")
    if isinstance(spec, str):
        spec = {"named": spec}
    if not isinstance(spec, dict):
        raise ValidationError("state", "expected a name or an object")
    frame = spec.get("frame", 1)
    if not isinstance(frame, int) or not 1 <= frame <= config.m:
        raise ValidationError("state.frame", f"must be a frame index in 1..{config.m}")
    if "named" in spec:
        vec = _named_vector(config, spec["named"], "state")
    elif "amplitudes" in spec:
        try:
            vec = from_pairs(spec["amplitudes"])
        except (TypeError, ValueError) as exc:
            raise ValidationError("state.amplitudes", f"expected [re, im] pairs ({exc})") from None
    elif "basis" in spec:
        labels = spec["basis"]
        dims = config.spec.dims
        if len(labels) != len(dims) or any(not 0 <= int(x) < d for x, d in zip(labels, dims)):
            raise ValidationError("state.basis", f"need one label per factor within dims {dims}")
        vec = np.zeros(config.dim, dtype=complex)
        vec[np.ravel_multi_index(tuple(int(x) for x in labels), dims)] = 1
    else:
        raise ValidationError("state", "expected one of 'named', 'amplitudes', 'basis'")
    if vec.shape[0] != config.dim:
        raise ValidationError("state", f"state has {vec.shape[0]} amplitudes, setup needs {config.dim}")
    norm = np.linalg.norm(vec)
    if spec.get("normalize", False) and norm > 0:
        vec = vec / norm
    elif abs(norm - 1) > NORM_TOL:
        raise ValidationError("state", f"amplitudes have norm {norm:.6g}; set \"normalize\": true to rescale")
    return PureState(vec, config.spec, frame)


def _named_vector(config: FrameConfig, name, where: str) -> np.ndarray:
    if name not in NAMED_STATES:
        raise ValidationError(where, f"unknown named state {name!r}; have {sorted(NAMED_STATES)}")
    psi = NAMED_STATES[name]()
    if psi.spec.dims != config.spec.dims or config.group.order != 2:
        raise ValidationError(where, f"named state {name!r} needs group Z2, 2 frames and two qubits")
    return psi.amplitudes


def _actions(config: FrameConfig, frame: int, items) -> tuple:
    if not isinstance(items, list):
        raise ValidationError("actions", "expected a list")
    out = []
    for i, item in enumerate(items):
        where = f"actions[{i}]"
        if not isinstance(item, dict) or ("transform" in item) == ("check" in item):
            raise ValidationError(where, "each action needs exactly one of 'transform' or 'check'")
        if "transform" in item:
            t = item["transform"]
            kind = t.get("kind", "perspectival")
            src, dst = t.get("from"), t.get("to")
            if kind not in ("perspectival", "passive"):
                raise ValidationError(f"{where}.kind", f"unknown transform kind {kind!r}")
            for key, val in (("from", src), ("to", dst)):
                if not isinstance(val, int) or not 1 <= val <= config.m:
                    raise ValidationError(f"{where}.{key}", f"must be a frame index in 1..{config.m}")
            if src == dst:
                raise ValidationError(f"{where}.to", "source and target frame coincide")
            if src != frame:
                raise ValidationError(f"{where}.from", f"state is described relative to frame {frame}, not {src}")
            out.append(TransformAction(src, dst, kind))
            frame = dst
        else:
            out.append(_check_action(config, item, where))
    return tuple(out)


def _check_action(config: FrameConfig, item: dict, where: str) -> CheckAction:
    kind = item["check"]
    if kind not in CHECK_KINDS:
        raise ValidationError(f"{where}.check", f"unknown check {kind!r}; expected one of {CHECK_KINDS}")
    params = {k: v for k, v in item.items() if k != "check"}
    labels = config.spec.labels
    if kind in MEASURES:
        systems = params.setdefault("systems", [labels[p] for p in config.spec.phys_positions])
        for s in systems:
            if s not in labels:
                raise ValidationError(f"{where}.systems", f"no factor labelled {s!r}; have {list(labels)}")
        if not systems:
            raise ValidationError(f"{where}.systems", "need at least one factor")
        for s in params.get("cut", []):
            if s not in systems:
                raise ValidationError(f"{where}.cut", f"{s!r} is not among systems {systems}")
        if not any(k in params for k in ("max", "min", "expect")):
            raise ValidationError(where, "measure checks need 'max', 'min' or 'expect'")
        if kind == "concurrence" and len(systems) != 2:
            raise ValidationError(f"{where}.systems", "concurrence needs exactly two systems")
    elif kind == "state":
        exp = params.get("expect")
        if isinstance(exp, str):
            params["_vector"] = _named_vector(config, exp, f"{where}.expect")
        elif isinstance(exp, list):
            vec = from_pairs(exp)
            if vec.shape[0] != config.dim:
                raise ValidationError(f"{where}.expect", f"expected {config.dim} amplitudes")
            params["_vector"] = vec / np.linalg.norm(vec)
        else:
            raise ValidationError(f"{where}.expect", "expected a named state or [re, im] pairs")
    elif kind == "standard_form":
        k = params.get("frame")
        if k is not None and (not isinstance(k, int) or not 1 <= k <= config.m):
            raise ValidationError(f"{where}.frame", f"must be a frame index in 1..{config.m}")
    elif kind == "conditionals":
        if params.get("expect", "all_separable") not in ("all_separable", "some_entangled"):
            raise ValidationError(f"{where}.expect", "expected 'all_separable' or 'some_entangled'")
    elif kind == "suite":
        try:
            params["_spec"] = SuiteSpec.from_dict(params.get("suite", {}))
        except (ConfigError, TypeError) as exc:
            raise ValidationError(f"{where}.suite", str(exc)) from None
    return CheckAction(kind, params)


# ---------------------------------------------------------------- running

def state_summary(psi: PureState) -> dict:
    """Phase-fixed description of a state, stable across runs."""
    canon = psi.amplitudes / canonical_phase(psi.amplitudes)
    canon = np.where(np.abs(canon) < 1e-15, 0, canon)
    return {"frame": psi.frame, "ket": ket_string(PureState(canon, psi.spec)), "amplitudes": pairs(canon)}


def run_scenario(scenario: Scenario | str | Path | dict, overrides: Overrides = Overrides()) -> RunReport:
    """Execute every action in order, threading the state through transforms."""
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    cfg = scenario.config
    physical = [{"name": cfg.spec.labels[p], "rep": r}
                for p, r in zip(cfg.spec.phys_positions, scenario.rep_labels)]
    report = RunReport(scenario.name, cfg.group.name, cfg.m, physical, state_summary(scenario.state))
    psi = scenario.state
    transforms: dict = {}
    for i, action in enumerate(scenario.actions):
        if isinstance(action, TransformAction):
            key = (action.kind, action.source, action.target)
            if key not in transforms:
                build = build_perspectival_transform if action.kind == "perspectival" else build_passive_transform
                transforms[key] = build(cfg, action.source, action.target)
            outcome = {"index": i, "action": "transform", "kind": action.kind,
                       "from": action.source, "to": action.target}
            try:
                psi = apply_transform(transforms[key], psi)
            except TransformError as exc:
                outcome.update(passed=False, message=str(exc))
                report.outcomes.append(outcome)
                break
            outcome["state"] = state_summary(psi)
            report.outcomes.append(outcome)
        else:
            outcome = {"index": i, "action": "check", "kind": action.check, "frame": psi.frame}
            outcome.update(_CHECKS[action.check](scenario, psi, action.params, overrides))
            report.outcomes.append(outcome)
    return report


def _bounds(params: dict) -> tuple[float | None, float | None]:
    lo, hi = params.get("min"), params.get("max")
    if "expect" in params:
        tol = params.get("tol", SEPARABLE_TOL)
        lo, hi = params["expect"] - tol, params["expect"] + tol
    return lo, hi


def _bound_text(lo, hi) -> str:
    if lo is not None and hi is not None:
        return f"[{lo:.6g}, {hi:.6g}]"
    return f">= {lo:.6g}" if lo is not None else f"<= {hi:.6g}"


def _measure(scenario, psi, params, _overrides):
    labels = scenario.labels
    keep = [labels.index(s) for s in params["systems"]]
    rho = partial_trace(psi, keep)
    kind = params["_kind"]
    out: dict[str, Any] = {"systems": list(params["systems"])}
    if kind == "negativity":
        local = [params["systems"].index(s) for s in params.get("cut", [])]
        if local:
            cut = Bipartition.of(len(keep), local)
            value = negativity(rho, cut)
        elif len(keep) > 1:
            value, cut = max_negativity(rho)
        else:
            value, cut = 0.0, None
        out["cut"] = _cut_text(cut, params["systems"])
    elif kind == "concurrence":
        value = concurrence(rho)
    else:
        value = rho.purity()
    lo, hi = _bounds(params)
    ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    if "expect" in params:
        bound = f"{params['expect']:.6g} +- {params.get('tol', SEPARABLE_TOL):.1g}"
    else:
        bound = _bound_text(lo, hi)
    out.update(value=float(value), bound=bound, passed=bool(ok))
    return out


def _cut_text(cut, names) -> str:
    if cut is None:
        return "-"
    a = ",".join(names[i] for i in sorted(cut.side_a))
    b = ",".join(names[i] for i in sorted(cut.side_b))
    return f"{a}|{b}"


def _measure_check(kind):
    def check(scenario, psi, params, overrides):
        return _measure(scenario, psi, {**params, "_kind": kind}, overrides)
    return check


def _check_state(scenario, psi, params, _overrides):
    target = PureState(params["_vector"], psi.spec)
    tol = params.get("tol", STATE_TOL)
    value = psi.phase_distance(target)
    expect = params["expect"] if isinstance(params["expect"], str) else "explicit"
    return {"expect": expect, "value": value, "bound": _bound_text(None, tol), "passed": bool(value <= tol)}


def _check_standard(scenario, psi, params, _overrides):
    k = params.get("frame") or psi.frame
    want = params.get("expect", True)
    res = standard_form_check(psi, scenario.config, k, params.get("tol", SEPARABLE_TOL))
    out = {"axis": k, "standard": bool(res), "expect": bool(want), "passed": bool(res) == bool(want)}
    if res:
        out["residual"] = float(res.residual)
    else:
        out["reason"] = res.reason
    return out


def _check_conditionals(scenario, psi, params, _overrides):
    tol = params.get("tol", SEPARABLE_TOL)
    rows = []
    for g, entry in conditional_decomposition(psi).nonzero().items():
        rows.append({
            "tuple": list(g),
            "weight": [float(entry.weight.real), float(entry.weight.imag)],
            "ket": ket_string(entry.state),
            "separable": is_pure_fully_separable(entry.state, tol=tol),
        })
    expect = params.get("expect", "all_separable")
    all_sep = all(r["separable"] for r in rows)
    ok = all_sep if expect == "all_separable" else not all_sep
    return {"expect": expect, "conditionals": rows, "passed": bool(ok)}


def _check_suite(scenario, psi, params, overrides: Overrides):
    spec: SuiteSpec = params["_spec"]
    changes = {k: v for k, v in (("seed", overrides.seed), ("trials", overrides.trials),
                                 ("tol", overrides.tol)) if v is not None}
    if changes:
        spec = SuiteSpec.from_dict({**spec.to_dict(), **changes})
    rep = run_suite(spec, workers=overrides.workers)
    return {"suite": rep.to_dict(), "value": len(rep.failures), "bound": "== 0", "passed": rep.passed}


_CHECKS = {
    "state": _check_state,
    "negativity": _measure_check("negativity"),
    "concurrence": _measure_check("concurrence"),
    "purity": _measure_check("purity"),
    "standard_form": _check_standard,
    "conditionals": _check_conditionals,
    "suite": _check_suite,
}


# ---------------------------------------------------------------- emitting

def emit_report(report: RunReport | VerificationReport, fmt: str = "human") -> str:
    """Render a report; ``machine`` output is sorted-key JSON with no timings."""
    if fmt == "machine":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    if fmt != "human":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(report, VerificationReport):
        return _human_suite(report)
    return _human_run(report)


def parse_report(text: str) -> RunReport | VerificationReport:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if d.get("schema") == RUN_SCHEMA:
        return RunReport.from_dict(d)
    return VerificationReport.from_dict(d)


def _status(ok) -> str:
    return "-" if ok is None else ("PASS" if ok else "FAIL")


def _fmt_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return "-" if v is None else str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _table(header, rows) -> list[str]:
    widths = [max(len(str(r[c])) for r in [header] + rows) for c in range(len(header))]
    line = lambda r: "  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip()  # noqa: E731
    return [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]


def _human_run(report: RunReport) -> str:
    systems = ", ".join(f"{p['name']}:{p['rep']}" for p in report.physical) or "none"
    out = [f"scenario {report.scenario}",
           f"group {report.group}, {report.frames} frames, physical {systems}",
           f"initial state (frame {report.initial['frame']}): {report.initial['ket']}", ""]
    rows, notes = [], []
    for o in report.outcomes:
        if o["action"] == "transform":
            detail = f"{o['kind']} {o['from']}->{o['to']}"
            rows.append([o["index"], "transform", detail, "-", "-", _status(o.get("passed", True))])
            if "state" in o:
                notes.append(f"after action {o['index']} (frame {o['to']}): {o['state']['ket']}")
            else:
                notes.append(f"action {o['index']}: {o.get('message', '')}")
            continue
        kind = o["kind"]
        if kind in MEASURES:
            detail = ",".join(o["systems"]) + (f" cut {o['cut']}" if "cut" in o else "")
            value, bound = o["value"], o["bound"]
        elif kind == "state":
            detail, value, bound = f"vs {o['expect']}", o["value"], o["bound"]
        elif kind == "standard_form":
            detail = f"axis {o['axis']}"
            value, bound = o["standard"], f"== {str(o['expect']).lower()}"
        elif kind == "conditionals":
            detail = o["expect"]
            value = f"{sum(not r['separable'] for r in o['conditionals'])} entangled"
            bound = "-"
            for r in o["conditionals"]:
                w = complex(*r["weight"])
                tag = "separable" if r["separable"] else "entangled"
                notes.append(f"action {o['index']} conditional {tuple(r['tuple'])}: "
                             f"weight {w.real:+.4f}{w.imag:+.4f}i  {r['ket']}  [{tag}]")
        else:
            s = o["suite"]
            detail = f"{s['kind']} {s['spec']['group']} x{s['trials']}"
            value, bound = o["value"], o["bound"]
        rows.append([o["index"], kind, detail, _fmt_value(value), bound, _status(o["passed"])])
    out += _table(["#", "action", "detail", "value", "bound", "result"], rows)
    if notes:
        out += [""] + notes
    n_checks = sum(1 for o in report.outcomes if o["action"] == "check")
    out += ["", f"overall: {_status(report.passed)} ({n_checks} checks)"]
    return "\n".join(out) + "\n"


def _human_suite(report: VerificationReport) -> str:
    s = report.spec
    out = [f"suite {report.kind}: group {s.group}, {s.frames} frames, physical {','.join(s.physical)}",
           f"seed {s.seed}, tolerance {s.tolerance:g}, trials {report.trials}", ""]
    rows = [[k, _fmt_value(v)] for k, v in sorted(report.stats.items())]
    out += _table(["statistic", "value"], rows)
    if report.failures:
        out += ["", f"{len(report.failures)} failures ({report.failures[0].note}):"]
        frows = [[f.offset, f"{f.frames[0]}->{f.frames[1]}", f.predicate, f"{f.value:.6g}", f"{f.bound:.6g}"]
                 for f in report.failures[:20]]
        out += _table(["offset", "frames", "predicate", "value", "bound"], frows)
    out += ["", f"overall: {_status(report.passed)} ({len(report.failures)} failures)"]
    return "\n".join(out) + "\n"


__all__ = [
    "Scenario", "RunReport", "Overrides", "TransformAction", "CheckAction",
    "builtin_names", "load_scenario", "parse_scenario", "validate_scenario",
    "run_scenario", "emit_report", "parse_report", "state_summary",
]
