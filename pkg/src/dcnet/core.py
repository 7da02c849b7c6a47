"""Element store and structural substrate of the cognitive network.

Concepts and relations are both first-class elements with identities, so a
relation may end on another relation without special cases.  Derivation in
the set dimension (belong-to / equal) is what every other module leans on:
matching, growth and learning all reduce to questions about which elements
belong to which.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Union


class DcnetError(Exception):
    """Base class for all engine errors."""


class LookupMissing(DcnetError):
    """An element id did not resolve."""


class StructureError(DcnetError):
    """A network fragment violates a structural definition."""


class ParameterError(DcnetError):
    """A numeric argument is outside its admissible range."""


class KindError(DcnetError):
    """Relation kinds or lineages are incompatible."""


class ConflictError(DcnetError):
    """Mutually exclusive certainty: collapse requested against a suppressed or opposing fact."""


class GrowthBlockedError(DcnetError):
    """Growth requested from a suppressed element."""


class DepthError(DcnetError):
    """Nested matching exceeded the configured recursion depth."""


# ---------------------------------------------------------------------------
# relation taxonomy


class Dimension(Enum):
    SET = "set"
    DOMAIN = "domain"


class Orientation(Enum):
    LONGITUDINAL = "longitudinal"
    LATERAL = "lateral"
    NONE = "none"


class RelationKind(Enum):
    BELONG_TO = "BELONG_TO"
    EQUAL = "EQUAL"
    HAS_COMPONENT = "HAS_COMPONENT"
    HAS_PART = "HAS_PART"
    HAS_ATTRIBUTE = "HAS_ATTRIBUTE"
    HAS_FORM = "HAS_FORM"
    HAS_CONTENT = "HAS_CONTENT"
    ADJOINING = "ADJOINING"
    COMPARISON = "COMPARISON"
    CONVERSION = "CONVERSION"
    CAUSALITY = "CAUSALITY"
    CHANGE = "CHANGE"
    MOVE = "MOVE"
    XOR = "XOR"


_LONGITUDINAL = {
    RelationKind.HAS_COMPONENT,
    RelationKind.HAS_PART,
    RelationKind.HAS_ATTRIBUTE,
    RelationKind.HAS_FORM,
    RelationKind.HAS_CONTENT,
}

_LATERAL = {
    RelationKind.ADJOINING,
    RelationKind.COMPARISON,
    RelationKind.CONVERSION,
    RelationKind.CAUSALITY,
    RelationKind.CHANGE,
    RelationKind.MOVE,
    RelationKind.EQUAL,
}

_SET_DIM = {RelationKind.BELONG_TO, RelationKind.EQUAL}


def kind_dimension(kind: RelationKind) -> Dimension:
    # EQUAL sits in both dimensions; report SET, orientation() still says lateral.
    return Dimension.SET if kind in _SET_DIM else Dimension.DOMAIN


def kind_orientation(kind: RelationKind) -> Orientation:
    if kind in _LONGITUDINAL:
        return Orientation.LONGITUDINAL
    if kind in _LATERAL:
        return Orientation.LATERAL
    return Orientation.NONE


def is_longitudinal(kind: RelationKind) -> bool:
    return kind in _LONGITUDINAL


def is_lateral(kind: RelationKind) -> bool:
    return kind in _LATERAL


LATERAL_KINDS = frozenset(_LATERAL - {RelationKind.EQUAL})


# ---------------------------------------------------------------------------
# values and parameters


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ParameterError(f"interval requires lo < hi, got ({self.lo}, {self.hi})")

    def contains_scalar(self, x: float) -> bool:
        return self.lo < x < self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ParameterError(f"gaussian sigma must be positive, got {self.sigma}")


ValueTerm = Union[float, Interval]
ParamValue = Union[float, str, Interval, Gaussian]
ProbSpec = Union[float, Gaussian]


def value_contained(candidate: ValueTerm, base: ValueTerm) -> bool:
    """Containment of value terms: scalar in open interval, interval in interval."""
    if isinstance(base, Interval):
        if isinstance(candidate, Interval):
            return base.contains_interval(candidate)
        return base.contains_scalar(float(candidate))
    if isinstance(candidate, Interval):
        return False
    return float(candidate) == float(base)


# ---------------------------------------------------------------------------
# probability state (element payload; the algebra lives in dcnet.probability)


class Status(Enum):
    SUPERPOSED = "superposed"
    COLLAPSED = "collapsed"
    SUPPRESSED = "suppressed"


@dataclass
class ProbabilityState:
    input_prob: float = 0.0
    result_prob: float = 0.0
    status: Status = Status.SUPERPOSED
    launched: bool = False

    def copy(self) -> "ProbabilityState":
        return ProbabilityState(self.input_prob, self.result_prob, self.status, self.launched)


@dataclass
class ConditionalProbabilityPair:
    """forward = P(B|A), backward = P(A|B) of a relation with ends A and B."""

    forward: ProbSpec = 1.0
    backward: ProbSpec = 1.0

    def copy(self) -> "ConditionalProbabilityPair":
        return ConditionalProbabilityPair(self.forward, self.backward)


def _check_prob_spec(spec: ProbSpec, label: str) -> None:
    if isinstance(spec, Gaussian):
        return
    p = float(spec)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{label} must lie in [0, 1], got {p}")


# fixed conditional probabilities demanded by basic kinds
_KIND_FIXED: dict[RelationKind, tuple[Optional[float], Optional[float]]] = {
    RelationKind.BELONG_TO: (1.0, None),
    RelationKind.EQUAL: (1.0, 1.0),
    RelationKind.XOR: (0.0, 0.0),
}


# ---------------------------------------------------------------------------
# elements


@dataclass
class Concept:
    id: str
    name: str = ""
    value: Optional[ValueTerm] = None
    params: dict[str, ParamValue] = field(default_factory=dict)
    state: ProbabilityState = field(default_factory=ProbabilityState)


@dataclass
class Relation:
    id: str
    kind: RelationKind
    a: str
    b: str
    cond: ConditionalProbabilityPair = field(default_factory=ConditionalProbabilityPair)
    base: Optional[str] = None
    params: dict[str, ParamValue] = field(default_factory=dict)
    state: ProbabilityState = field(default_factory=ProbabilityState)

    def other_end(self, end: str) -> str:
        if end == self.a:
            return self.b
        if end == self.b:
            return self.a
        raise LookupMissing(f"{end} is not an endpoint of relation {self.id}")


Element = Union[Concept, Relation]


@dataclass
class TreeNetworkView:
    """Rooted view over a connected subnetwork.

    ``longitudinal`` relations lie on top-down chains whose top is the root
    (or a root-relation endpoint); everything else attached is ``additional``.
    """

    root: str
    longitudinal: list[str] = field(default_factory=list)
    additional: list[str] = field(default_factory=list)
    concepts: list[str] = field(default_factory=list)

    def element_ids(self) -> list[str]:
        return self.concepts + self.longitudinal + self.additional


@dataclass
class DerivedMapping:
    """Injective, total-on-base correspondence base element -> derived element."""

    pairs: dict[str, str] = field(default_factory=dict)

    def image(self, base_id: str) -> Optional[str]:
        return self.pairs.get(base_id)


@dataclass
class TreeInstance:
    """A grown derived tree: where it came from and which elements realize it."""

    base_root: str
    root: str
    mapping: dict[str, str] = field(default_factory=dict)

    def element_ids(self) -> list[str]:
        return list(self.mapping.values())


# ---------------------------------------------------------------------------
# network


class CognitiveNetwork:
    """Heterogeneous element store with referential integrity.

    Insertion order is preserved and meaningful: it is the deterministic
    tie-break everywhere the engine scans elements.
    """

    def __init__(self) -> None:
        self.concepts: dict[str, Concept] = {}
        self.relations: dict[str, Relation] = {}
        self.globals: dict[str, str] = {}
        self.trees: dict[str, TreeNetworkView] = {}
        self.tree_instances: list[TreeInstance] = []
        self.counters: dict[str, int] = {}
        self._incident: dict[str, list[str]] = {}

    # -- element access ----------------------------------------------------

    def has(self, element_id: str) -> bool:
        return element_id in self.concepts or element_id in self.relations

    def element(self, element_id: str) -> Element:
        el = self.concepts.get(element_id) or self.relations.get(element_id)
        if el is None:
            raise LookupMissing(f"unknown element: {element_id}")
        return el

    def state(self, element_id: str) -> ProbabilityState:
        return self.element(element_id).state

    def element_ids(self) -> list[str]:
        return list(self.concepts) + list(self.relations)

    def incident(self, element_id: str) -> list[str]:
        """Relations touching an element, in insertion order."""
        return list(self._incident.get(element_id, ()))

    def element_count(self) -> int:
        return len(self.concepts) + len(self.relations)

    # -- mutation ----------------------------------------------------------

    def add_concept(self, concept: Concept) -> Concept:
        if self.has(concept.id):
            raise StructureError(f"duplicate element id: {concept.id}")
        self.concepts[concept.id] = concept
        return concept

    def add_relation(self, relation: Relation) -> Relation:
        if self.has(relation.id):
            raise StructureError(f"duplicate element id: {relation.id}")
        if not self.has(relation.a):
            raise LookupMissing(f"relation {relation.id}: unknown endpoint {relation.a}")
        if not self.has(relation.b):
            raise LookupMissing(f"relation {relation.id}: unknown endpoint {relation.b}")
        if relation.a == relation.b:
            raise StructureError(f"relation {relation.id} ends on itself")
        self._check_conds(relation)
        if relation.base is not None:
            self._check_derived_overloading(relation)
        if relation.kind is RelationKind.BELONG_TO and self._would_cycle(relation.a, relation.b):
            raise StructureError(
                f"belong-to relation {relation.id} would make {relation.a} belong to itself"
            )
        self.relations[relation.id] = relation
        self._incident.setdefault(relation.a, []).append(relation.id)
        self._incident.setdefault(relation.b, []).append(relation.id)
        return relation

    def add_belong(self, derived: str, base: str, backward: float = 1.0) -> Relation:
        """Belong-to edge derived -> base with the fixed forward probability."""
        rel_id = f"belong:{derived}:{base}"
        if rel_id in self.relations:
            return self.relations[rel_id]
        return self.add_relation(
            Relation(
                id=rel_id,
                kind=RelationKind.BELONG_TO,
                a=derived,
                b=base,
                cond=ConditionalProbabilityPair(forward=1.0, backward=backward),
            )
        )

    def remove_element(self, element_id: str) -> None:
        """Remove an element and, for concepts, every relation touching it."""
        if element_id in self.relations:
            rel = self.relations.pop(element_id)
            for end in (rel.a, rel.b):
                bucket = self._incident.get(end)
                if bucket and element_id in bucket:
                    bucket.remove(element_id)
            self._incident.pop(element_id, None)
            return
        if element_id in self.concepts:
            for rel_id in list(self._incident.get(element_id, ())):
                self.remove_element(rel_id)
            self._incident.pop(element_id, None)
            del self.concepts[element_id]
            return
        raise LookupMissing(f"unknown element: {element_id}")

    def next_id(self, base: str) -> str:
        n = self.counters.get(base, 0) + 1
        self.counters[base] = n
        candidate = f"{base}#{n}"
        while self.has(candidate):
            n += 1
            self.counters[base] = n
            candidate = f"{base}#{n}"
        return candidate

    def copy(self) -> "CognitiveNetwork":
        return copy.deepcopy(self)

    # -- validation --------------------------------------------------------

    def _check_conds(self, relation: Relation) -> None:
        _check_prob_spec(relation.cond.forward, f"relation {relation.id} pba")
        _check_prob_spec(relation.cond.backward, f"relation {relation.id} pab")
        fixed = _KIND_FIXED.get(relation.kind)
        if fixed is None:
            return
        fwd, bwd = fixed
        if fwd is not None and not isinstance(relation.cond.forward, Gaussian):
            if float(relation.cond.forward) != fwd:
                raise ParameterError(
                    f"relation {relation.id}: kind {relation.kind.value} fixes P(B|A)={fwd}"
                )
        if bwd is not None and not isinstance(relation.cond.backward, Gaussian):
            if float(relation.cond.backward) != bwd:
                raise ParameterError(
                    f"relation {relation.id}: kind {relation.kind.value} fixes P(A|B)={bwd}"
                )
        if relation.kind in (RelationKind.BELONG_TO,) and not isinstance(
            relation.cond.backward, Gaussian
        ):
            if not 0.0 < float(relation.cond.backward) <= 1.0:
                raise ParameterError(
                    f"relation {relation.id}: belong-to requires 0 < P(A|B) <= 1"
                )

    def _check_derived_overloading(self, relation: Relation) -> None:
        base = self.relations.get(relation.base or "")
        if base is None:
            raise LookupMissing(f"relation {relation.id}: unknown base relation {relation.base}")
        if base.kind is not relation.kind:
            raise KindError(
                f"relation {relation.id}: kind {relation.kind.value} does not match "
                f"base {base.id} kind {base.kind.value}"
            )
        # Overloaded parameter values must stay inside ranges the base declares.
        for name, spec in base.params.items():
            own = relation.params.get(name)
            if own is None or isinstance(own, (Gaussian, Interval)) or isinstance(own, str):
                continue
            if isinstance(spec, Interval) and not spec.contains_scalar(float(own)):
                raise ParameterError(
                    f"relation {relation.id}: parameter {name}={own} outside base range "
                    f"({spec.lo}, {spec.hi})"
                )

    def _would_cycle(self, derived: str, base: str) -> bool:
        # Adding derived -> base closes a cycle iff base already belongs to derived
        # through belong-to edges alone (equal 2-cycles stay legal).
        seen = {base}
        frontier = [base]
        while frontier:
            cur = frontier.pop()
            if cur == derived:
                return True
            for rel_id in self._incident.get(cur, ()):
                rel = self.relations[rel_id]
                if rel.kind is not RelationKind.BELONG_TO or rel.a != cur:
                    continue
                if rel.b not in seen:
                    seen.add(rel.b)
                    frontier.append(rel.b)
        return False

    def validate(self) -> None:
        for rel in self.relations.values():
            if not self.has(rel.a) or not self.has(rel.b):
                raise LookupMissing(f"relation {rel.id} has a dangling endpoint")
        for view in self.trees.values():
            classify_tree_network(self, view.root, restrict=set(view.element_ids()))


# ---------------------------------------------------------------------------
# belong-to


def _as_value(net: Optional[CognitiveNetwork], term: Union[str, ValueTerm]) -> Optional[ValueTerm]:
    if isinstance(term, (float, int)) and not isinstance(term, bool):
        return float(term)
    if isinstance(term, Interval):
        return term
    if net is not None and isinstance(term, str):
        el = net.element(term)
        if isinstance(el, Concept):
            return el.value
    return None


def lineage(net: CognitiveNetwork, rel_id: str) -> list[str]:
    """Base chain of a relation, from itself up to the basic relation."""
    chain = [rel_id]
    seen = {rel_id}
    cur = net.relations.get(rel_id)
    while cur is not None and cur.base is not None and cur.base not in seen:
        chain.append(cur.base)
        seen.add(cur.base)
        cur = net.relations.get(cur.base)
    return chain


def belongs_to(
    net: Optional[CognitiveNetwork],
    candidate: Union[str, ValueTerm],
    base: Union[str, ValueTerm],
) -> bool:
    """Reflexive-transitive belong-to over edges, base chains and value containment."""
    if isinstance(candidate, str) and isinstance(base, str):
        if net is None:
            raise LookupMissing("cannot resolve element ids without a network")
        if candidate == base:
            net.element(candidate)  # raise on unresolved ids even in the trivial case
            return True
        net.element(base)
        seen = {candidate}
        frontier = [candidate]
        while frontier:
            cur = frontier.pop()
            if cur == base:
                return True
            for nxt in _up_neighbors(net, cur):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        # fall through to value containment between the two payloads
        cval = _as_value(net, candidate)
        bval = _as_value(net, base)
        if cval is not None and bval is not None:
            return value_contained(cval, bval)
        return False

    cval = _as_value(net, candidate)
    bval = _as_value(net, base)
    if cval is None or bval is None:
        return False
    return value_contained(cval, bval)


def _up_neighbors(net: CognitiveNetwork, element_id: str) -> Iterator[str]:
    rel = net.relations.get(element_id)
    if rel is not None and rel.base is not None:
        yield rel.base
    for rel_id in net.incident(element_id):
        edge = net.relations[rel_id]
        if edge.kind is RelationKind.BELONG_TO and edge.a == element_id:
            yield edge.b
        elif edge.kind is RelationKind.EQUAL:
            yield edge.other_end(element_id)


def kind_compatible(net: CognitiveNetwork, instance_rel_id: str, base_rel_id: str) -> bool:
    """Lineage-ancestor test: same basic kind, honoring explicit base chains."""
    inst = net.relations.get(instance_rel_id)
    base = net.relations.get(base_rel_id)
    if inst is None or base is None:
        return False
    if base_rel_id in lineage(net, instance_rel_id):
        return True
    return inst.kind is base.kind


def relation_subsumes(net: CognitiveNetwork, derived_id: str, base_id: str) -> bool:
    """Implicit relation-level belong-to: lineage, or same kind with contained params."""
    derived = net.relations.get(derived_id)
    base = net.relations.get(base_id)
    if derived is None or base is None:
        return False
    if base_id in lineage(net, derived_id):
        return True
    if derived.kind is not base.kind:
        return False
    for name, spec in base.params.items():
        own = derived.params.get(name)
        if own is None:
            continue
        if isinstance(spec, Gaussian):
            continue
        if isinstance(spec, Interval):
            if isinstance(own, Interval):
                if not spec.contains_interval(own):
                    return False
            elif isinstance(own, (int, float)) and not spec.contains_scalar(float(own)):
                return False
        elif isinstance(spec, (int, float)) and isinstance(own, (int, float)):
            if float(own) != float(spec):
                return False
        elif isinstance(spec, str) and own != spec:
            return False
    return True


# ---------------------------------------------------------------------------
# tree networks


def classify_tree_network(
    net: CognitiveNetwork,
    root: str,
    restrict: Optional[set[str]] = None,
) -> TreeNetworkView:
    """Split a subnetwork's relations into longitudinal chains from the root and the rest.

    ``restrict`` limits the view to the given element ids; by default the whole
    connected component around ``root`` is classified.  Raises StructureError
    when an element has no longitudinal path defining its membership.
    """
    root_el = net.element(root)
    members = _component(net, root, restrict)

    tops: set[str] = set()
    if isinstance(root_el, Relation):
        tops.update(e for e in (root_el.a, root_el.b) if e in members)
    else:
        tops.add(root)

    longitudinal: list[str] = []
    covered: set[str] = set(tops)
    frontier = list(tops)
    while frontier:
        cur = frontier.pop(0)
        for rel_id in net.incident(cur):
            if rel_id not in members or rel_id in longitudinal:
                continue
            rel = net.relations[rel_id]
            if not is_longitudinal(rel.kind) or rel.a != cur:
                continue
            longitudinal.append(rel_id)
            if rel.b not in covered:
                covered.add(rel.b)
                frontier.append(rel.b)

    additional: list[str] = []
    for el_id in members:
        if el_id in net.relations and el_id not in longitudinal and el_id != root:
            additional.append(el_id)

    concepts = [e for e in members if e in net.concepts]
    for cid in concepts:
        if cid not in covered:
            raise StructureError(
                f"tree rooted at {root}: no longitudinal path defines membership of {cid}"
            )
    for rel_id in additional:
        rel = net.relations[rel_id]
        for end in (rel.a, rel.b):
            if end in members and end in net.concepts and end not in covered:
                raise StructureError(
                    f"tree rooted at {root}: additional relation {rel_id} hangs on "
                    f"uncovered element {end}"
                )

    ordered_concepts = [root] if root in net.concepts else []
    for rel_id in longitudinal:
        rel = net.relations[rel_id]
        for end in (rel.a, rel.b):
            if end in net.concepts and end not in ordered_concepts:
                ordered_concepts.append(end)
    for cid in concepts:
        if cid not in ordered_concepts:
            ordered_concepts.append(cid)

    return TreeNetworkView(
        root=root,
        longitudinal=longitudinal,
        additional=sorted(additional),
        concepts=ordered_concepts,
    )


def _component(net: CognitiveNetwork, root: str, restrict: Optional[set[str]]) -> list[str]:
    allowed = restrict
    members: list[str] = []
    seen: set[str] = set()
    frontier = [root]
    while frontier:
        cur = frontier.pop(0)
        if cur in seen:
            continue
        seen.add(cur)
        members.append(cur)
        neighbors: list[str] = []
        if cur in net.relations:
            rel = net.relations[cur]
            neighbors.extend((rel.a, rel.b))
        neighbors.extend(net.incident(cur))
        for nxt in neighbors:
            if nxt in seen:
                continue
            if allowed is not None and nxt not in allowed:
                continue
            frontier.append(nxt)
    if allowed is not None:
        missing = [e for e in allowed if e not in seen and net.has(e)]
        if missing:
            raise StructureError(
                f"tree rooted at {root}: disconnected elements {sorted(missing)}"
            )
    return members


# ---------------------------------------------------------------------------
# derived network check


def check_derived_network(
    net: CognitiveNetwork,
    derived_ids: Iterable[str],
    base_ids: Iterable[str],
    wildcards: frozenset[str] = frozenset(),
    enumerate_all: bool = False,
) -> Union[Optional[DerivedMapping], list[DerivedMapping]]:
    """Search for an injective, topology-preserving, belong-to-respecting mapping.

    Every base element must receive an image among ``derived_ids``; extra
    derived elements are allowed.  ``wildcards`` names base elements whose
    belong-to requirement is waived (query variables).  Exhaustive backtracking,
    intended for desk-scale fragments.
    """
    derived_pool = list(dict.fromkeys(derived_ids))
    base_pool = list(dict.fromkeys(base_ids))
    base_concepts = sorted(b for b in base_pool if b in net.concepts)
    base_relations = sorted(b for b in base_pool if b in net.relations)
    for missing in (b for b in base_pool if not net.has(b)):
        raise LookupMissing(f"unknown base element: {missing}")

    derived_concepts = [d for d in derived_pool if d in net.concepts]
    derived_relations = [d for d in derived_pool if d in net.relations]

    order = base_concepts + base_relations
    solutions: list[DerivedMapping] = []
    assignment: dict[str, str] = {}
    used: set[str] = set()

    def concept_ok(b: str, d: str) -> bool:
        return b in wildcards or belongs_to(net, d, b)

    def relation_ok(b: str, d: str) -> bool:
        b_rel = net.relations[b]
        d_rel = net.relations[d]
        if b_rel.kind is not d_rel.kind and b not in lineage(net, d):
            return False
        im_a, im_b = assignment.get(b_rel.a), assignment.get(b_rel.b)
        pairs = [(d_rel.a, d_rel.b)]
        if b_rel.kind in (RelationKind.EQUAL, RelationKind.XOR):
            pairs.append((d_rel.b, d_rel.a))
        end_ok = any(
            (im_a is None or im_a == da) and (im_b is None or im_b == db) for da, db in pairs
        )
        if not end_ok:
            return False
        if b in wildcards:
            return True
        return relation_subsumes(net, d, b) or belongs_to(net, d, b)

    def extend(idx: int) -> bool:
        if idx == len(order):
            solutions.append(DerivedMapping(dict(assignment)))
            return not enumerate_all
        b = order[idx]
        pool = derived_concepts if b in net.concepts else derived_relations
        check = concept_ok if b in net.concepts else relation_ok
        for d in pool:
            if d in used or not check(b, d):
                continue
            assignment[b] = d
            used.add(d)
            if extend(idx + 1):
                return True
            del assignment[b]
            used.discard(d)
        return False

    extend(0)
    if enumerate_all:
        return solutions
    return solutions[0] if solutions else None


def element_count(net: CognitiveNetwork) -> int:
    """Total number of concepts and relations."""
    return net.element_count()
