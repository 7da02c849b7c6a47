"""Bit-exact text formats: knowledge documents, scenarios, trace emission.

Line-oriented grammar, ``#`` comments, whitespace-separated ``key=value``
pairs.  Forward references are forbidden, parse order is declaration order,
and parse -> serialize -> parse is an identity.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

from .core import (
    CognitiveNetwork,
    Concept,
    ConditionalProbabilityPair,
    DcnetError,
    Gaussian,
    Interval,
    Relation,
    RelationKind,
    Status,
    classify_tree_network,
)
from .growth import ConceptSpec, FitTask, RelationSpec, make_task
from .probability import EngineConfig, Mode
from .trace import Trace, TraceEvent


class ParseError(DcnetError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# token helpers


def _split_statement(line: str) -> list[str]:
    return line.split()


def _strip_comment(raw_line: str) -> str:
    """Drop a trailing comment; a hash inside a token (instance ids) is not one."""
    if raw_line.lstrip().startswith("#"):
        return ""
    idx = 0
    while True:
        idx = raw_line.find("#", idx)
        if idx == -1:
            return raw_line
        if idx == 0 or raw_line[idx - 1] in " \t":
            return raw_line[:idx]
        idx += 1


def _column_of(line: str, token: str) -> int:
    pos = line.find(token)
    return pos + 1 if pos >= 0 else 1


def _parse_float(token: str, line_no: int, line: str, label: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{label}: not a number: {token}", line_no, _column_of(line, token))


def parse_param_value(raw: str, line_no: int = 0, line: str = "") -> Union[float, str, Interval, Gaussian]:
    if raw.startswith("gauss:"):
        mu, _, sigma = raw[6:].partition(",")
        return Gaussian(_parse_float(mu, line_no, line, "gauss mu"),
                        _parse_float(sigma, line_no, line, "gauss sigma"))
    if raw.startswith("interval:"):
        lo, _, hi = raw[9:].partition(",")
        return Interval(_parse_float(lo, line_no, line, "interval lo"),
                        _parse_float(hi, line_no, line, "interval hi"))
    try:
        return float(raw)
    except ValueError:
        return raw


def format_param_value(value) -> str:
    if isinstance(value, Gaussian):
        return f"gauss:{value.mu!r},{value.sigma!r}"
    if isinstance(value, Interval):
        return f"interval:{value.lo!r},{value.hi!r}"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return repr(float(value))
    return str(value)


def _parse_prob_spec(raw: str, line_no: int, line: str):
    value = parse_param_value(raw, line_no, line)
    if isinstance(value, Gaussian):
        return value
    if isinstance(value, float):
        if not 0.0 <= value <= 1.0:
            raise ParseError(
                f"probability out of range: {raw}", line_no, _column_of(line, raw)
            )
        return value
    raise ParseError(f"bad probability spec: {raw}", line_no, _column_of(line, raw))


def _kind(raw: str, line_no: int, line: str) -> RelationKind:
    try:
        return RelationKind(raw)
    except ValueError:
        raise ParseError(f"unknown kind {raw}", line_no, _column_of(line, raw))


def _kv(tokens: list[str], line_no: int, line: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        key, eq, value = tok.partition("=")
        if not eq:
            raise ParseError(f"expected key=value, got {tok}", line_no, _column_of(line, tok))
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# knowledge documents


def parse_kb(text: str) -> CognitiveNetwork:
    net = CognitiveNetwork()
    for line_no, raw_line in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        tokens = _split_statement(line)
        head = tokens[0]
        try:
            if head == "concept":
                _parse_concept_line(net, tokens, line_no, line)
            elif head == "belong":
                _parse_belong_line(net, tokens, line_no, line)
            elif head == "relation":
                _parse_relation_line(net, tokens, line_no, line)
            elif head == "tree":
                _parse_tree_line(net, tokens, line_no, line)
            else:
                raise ParseError(f"unknown statement {head}", line_no, 1)
        except ParseError:
            raise
        except DcnetError as err:
            raise ParseError(str(err), line_no) from err
    net.validate()
    return net


def _parse_concept_line(net, tokens, line_no, line) -> Concept:
    if len(tokens) < 2:
        raise ParseError("concept needs an id", line_no)
    concept = Concept(id=tokens[1])
    for key, value in _kv(tokens[2:], line_no, line).items():
        if key == "value":
            parsed = parse_param_value(value, line_no, line)
            if isinstance(parsed, float):
                concept.value = parsed
            else:
                concept.params["value"] = parsed
        elif key == "interval":
            lo, _, hi = value.partition(",")
            concept.value = Interval(
                _parse_float(lo, line_no, line, "interval lo"),
                _parse_float(hi, line_no, line, "interval hi"),
            )
        elif key == "name":
            concept.name = value
        elif key == "state":
            concept.state = _parse_state(value, line_no, line)
        else:
            concept.params[key] = parse_param_value(value, line_no, line)
    return net.add_concept(concept)


def _parse_belong_line(net, tokens, line_no, line) -> None:
    if len(tokens) < 3:
        raise ParseError("belong needs derived and base ids", line_no)
    backward = 1.0
    state = None
    for key, value in _kv(tokens[3:], line_no, line).items():
        if key == "pab":
            backward = _parse_float(value, line_no, line, "pab")
        elif key == "state":
            state = _parse_state(value, line_no, line)
    rel = net.add_belong(tokens[1], tokens[2], backward=backward)
    if state is not None:
        rel.state = state


def _parse_relation_line(net, tokens, line_no, line) -> Relation:
    if len(tokens) < 2:
        raise ParseError("relation needs an id", line_no)
    kv = _kv(tokens[2:], line_no, line)
    for required in ("kind", "a", "b"):
        if required not in kv:
            raise ParseError(f"relation {tokens[1]} missing {required}=", line_no)
    relation = Relation(
        id=tokens[1],
        kind=_kind(kv.pop("kind"), line_no, line),
        a=kv.pop("a"),
        b=kv.pop("b"),
        cond=ConditionalProbabilityPair(
            forward=_parse_prob_spec(kv.pop("pba", "1.0"), line_no, line),
            backward=_parse_prob_spec(kv.pop("pab", "1.0"), line_no, line),
        ),
        base=kv.pop("base", None),
    )
    if "state" in kv:
        relation.state = _parse_state(kv.pop("state"), line_no, line)
    for key, value in kv.items():
        relation.params[key] = parse_param_value(value, line_no, line)
    return net.add_relation(relation)


def _parse_tree_line(net, tokens, line_no, line) -> None:
    if len(tokens) < 3:
        raise ParseError("tree needs a root and members=", line_no)
    kv = _kv(tokens[2:], line_no, line)
    root = tokens[1]
    members = [m for m in kv.get("members", "").split(",") if m]
    scope = {root, *members}
    for rel in net.relations.values():
        if rel.a in scope and rel.b in scope and rel.kind is not RelationKind.XOR:
            scope.add(rel.id)
    try:
        net.trees[root] = classify_tree_network(net, root, restrict=scope)
    except DcnetError as err:
        raise ParseError(str(err), line_no) from err


def _parse_state(raw: str, line_no: int, line: str) -> "ProbabilityState":
    from .core import ProbabilityState

    parts = raw.split(",")
    if len(parts) != 4:
        raise ParseError(f"bad state spec {raw}", line_no, _column_of(line, raw))
    return ProbabilityState(
        input_prob=_parse_float(parts[0], line_no, line, "input"),
        result_prob=_parse_float(parts[1], line_no, line, "result"),
        status=Status(parts[2]),
        launched=parts[3] == "1",
    )


def _format_state(state) -> str:
    return f"{state.input_prob!r},{state.result_prob!r},{state.status.value},{1 if state.launched else 0}"


def serialize_kb(net: CognitiveNetwork, with_state: bool = False) -> str:
    """Canonical text: concepts, then relations, then trees, in insertion order."""
    out: list[str] = []
    for concept in net.concepts.values():
        parts = [f"concept {concept.id}"]
        if isinstance(concept.value, Interval):
            parts.append(f"interval={concept.value.lo!r},{concept.value.hi!r}")
        elif concept.value is not None:
            parts.append(f"value={concept.value!r}")
        if concept.name and concept.name != concept.id:
            parts.append(f"name={concept.name}")
        for key in concept.params:
            parts.append(f"{key}={format_param_value(concept.params[key])}")
        if with_state:
            parts.append(f"state={_format_state(concept.state)}")
        out.append(" ".join(parts))
    for rel in net.relations.values():
        if rel.kind is RelationKind.BELONG_TO and rel.id == f"belong:{rel.a}:{rel.b}":
            parts = [f"belong {rel.a} {rel.b}"]
            if rel.cond.backward != 1.0:
                parts.append(f"pab={rel.cond.backward!r}")
            if with_state:
                parts.append(f"state={_format_state(rel.state)}")
            out.append(" ".join(parts))
            continue
        parts = [
            f"relation {rel.id}",
            f"kind={rel.kind.value}",
            f"a={rel.a}",
            f"b={rel.b}",
            f"pba={format_param_value(rel.cond.forward)}",
            f"pab={format_param_value(rel.cond.backward)}",
        ]
        if rel.base is not None:
            parts.append(f"base={rel.base}")
        for key in rel.params:
            parts.append(f"{key}={format_param_value(rel.params[key])}")
        if with_state:
            parts.append(f"state={_format_state(rel.state)}")
        out.append(" ".join(parts))
    for root, view in net.trees.items():
        members = [c for c in view.concepts if c != root]
        out.append(f"tree {root} members={','.join(members)}")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Expectation:
    element: str
    p: float
    status: Optional[Status] = None


@dataclass
class ScenarioDoc:
    config: dict[str, str] = field(default_factory=dict)
    concepts: list[ConceptSpec] = field(default_factory=list)
    relations: list[RelationSpec] = field(default_factory=list)
    expects: list[Expectation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


_CONFIG_KEYS = {
    "collapse": "collapse_threshold",
    "activation": "activation_threshold",
    "epsilon": "decay_epsilon",
    "mode": "mode",
    "k": "default_k",
    "max_hops": "max_hops",
    "branch_limit": "branch_limit",
    "depth_limit": "match_depth_limit",
    "discard_floor": "discard_floor",
    "merge_overlap": "merge_overlap",
    "confirm_count": "confirm_count",
}


def parse_scenario(text: str) -> ScenarioDoc:
    doc = ScenarioDoc()
    for line_no, raw_line in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        tokens = _split_statement(line)
        head = tokens[0]
        if head == "config":
            for key, value in _kv(tokens[1:], line_no, line).items():
                if key not in _CONFIG_KEYS:
                    raise ParseError(f"unknown config key {key}", line_no, _column_of(line, key))
                if key in doc.config:
                    doc.warnings.append(f"line {line_no}: duplicate config key {key}; last wins")
                doc.config[key] = value
        elif head == "input":
            if len(tokens) < 2:
                raise ParseError("input needs a base id", line_no)
            kv = _kv(tokens[2:], line_no, line)
            spec = ConceptSpec(
                base=tokens[1],
                p=_parse_float(kv.pop("p", "0.0"), line_no, line, "p"),
                as_id=kv.pop("as", None),
                var=kv.pop("var", "false").lower() == "true",
            )
            if not 0.0 <= spec.p <= 1.0:
                raise ParseError(f"input probability out of range: {spec.p}", line_no)
            if "value" in kv:
                parsed = parse_param_value(kv.pop("value"), line_no, line)
                if isinstance(parsed, float):
                    spec.value = parsed
                else:
                    spec.params["value"] = parsed
            if "interval" in kv:
                lo, _, hi = kv.pop("interval").partition(",")
                spec.value = Interval(
                    _parse_float(lo, line_no, line, "lo"), _parse_float(hi, line_no, line, "hi")
                )
            for key, value in kv.items():
                spec.params[key] = parse_param_value(value, line_no, line)
            doc.concepts.append(spec)
        elif head == "relation":
            if len(tokens) < 2:
                raise ParseError("relation needs an id", line_no)
            kv = _kv(tokens[2:], line_no, line)
            for required in ("kind", "a", "b"):
                if required not in kv:
                    raise ParseError(f"relation {tokens[1]} missing {required}=", line_no)
            spec = RelationSpec(
                rel_id=tokens[1],
                kind=_kind(kv.pop("kind"), line_no, line),
                a=kv.pop("a"),
                b=kv.pop("b"),
                pba=_parse_prob_spec(kv.pop("pba", "1.0"), line_no, line),
                pab=_parse_prob_spec(kv.pop("pab", "1.0"), line_no, line),
                p=_parse_float(kv.pop("p", "0.0"), line_no, line, "p"),
                base=kv.pop("base", None),
            )
            for key, value in kv.items():
                spec.params[key] = parse_param_value(value, line_no, line)
            doc.relations.append(spec)
        elif head == "expect":
            if len(tokens) < 2:
                raise ParseError("expect needs an element id", line_no)
            kv = _kv(tokens[2:], line_no, line)
            status = None
            if "status" in kv:
                raw = kv.pop("status")
                try:
                    status = Status(raw)
                except ValueError:
                    raise ParseError(f"unknown status {raw}", line_no, _column_of(line, raw))
            doc.expects.append(
                Expectation(
                    element=tokens[1],
                    p=_parse_float(kv.pop("p", "1.0"), line_no, line, "p"),
                    status=status,
                )
            )
        else:
            raise ParseError(f"unknown statement {head}", line_no, 1)
    return doc


def engine_config(doc: ScenarioDoc, base: Optional[EngineConfig] = None) -> EngineConfig:
    """Scenario overrides applied over engine defaults."""
    config = base if base is not None else EngineConfig()
    kw = {
        "collapse_threshold": config.collapse_threshold,
        "activation_threshold": config.activation_threshold,
        "decay_epsilon": config.decay_epsilon,
        "mode": config.mode,
        "default_k": config.default_k,
        "max_hops": config.max_hops,
        "branch_limit": config.branch_limit,
        "match_depth_limit": config.match_depth_limit,
        "discard_floor": config.discard_floor,
        "merge_overlap": config.merge_overlap,
        "confirm_count": config.confirm_count,
    }
    for key, raw in doc.config.items():
        field_name = _CONFIG_KEYS[key]
        if field_name == "mode":
            kw["mode"] = Mode(raw.lower())
        elif field_name == "max_hops":
            kw[field_name] = None if raw in ("", "none") else int(raw)
        elif field_name in ("branch_limit", "match_depth_limit", "confirm_count"):
            kw[field_name] = int(raw)
        else:
            kw[field_name] = float(raw)
    return EngineConfig(**kw)


def build_task(kb: CognitiveNetwork, doc: ScenarioDoc, base_config: Optional[EngineConfig] = None) -> FitTask:
    config = engine_config(doc, base_config)
    return make_task(kb, config, doc.concepts, doc.relations)


def check_expectations(net: CognitiveNetwork, expects: Iterable[Expectation], tol: float = 1e-9) -> list[str]:
    failures: list[str] = []
    for exp in expects:
        if not net.has(exp.element):
            failures.append(f"{exp.element}: missing from the result network")
            continue
        state = net.state(exp.element)
        if abs(state.result_prob - exp.p) > tol:
            failures.append(
                f"{exp.element}: probability {state.result_prob!r} != expected {exp.p!r}"
            )
        if exp.status is not None and state.status is not exp.status:
            failures.append(
                f"{exp.element}: status {state.status.value} != expected {exp.status.value}"
            )
    return failures


# ---------------------------------------------------------------------------
# trace emission


def emit_trace(events: Iterable[TraceEvent], sink: TextIO) -> None:
    """One canonical line per event."""
    for event in events:
        sink.write(event.format())
        sink.write("\n")


def trace_text(trace: Trace) -> str:
    buffer = io.StringIO()
    emit_trace(trace.events, buffer)
    return buffer.getvalue()
