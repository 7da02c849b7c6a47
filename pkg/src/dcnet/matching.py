"""Membership of known fragments against base knowledge trees.

Matching is pure: it never mutates the knowledge network or the fragment.
Structure placement is an exhaustive backtracking search; membership is then
computed by propagating per-element memberships over a scratch copy of the
base tree and reading the root's result.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (
    CognitiveNetwork,
    Concept,
    ConditionalProbabilityPair,
    DepthError,
    DerivedMapping,
    Gaussian,
    Interval,
    Relation,
    StructureError,
    TreeNetworkView,
    ValueTerm,
    belongs_to,
    check_derived_network,
    kind_compatible,
)
from .probability import (
    ContributionLedger,
    EngineConfig,
    gaussian_membership,
    param_membership,
    pps_launch,
    superpose,
)
from .trace import NullTrace


@dataclass
class MatchResult:
    base: str
    mapping: DerivedMapping = field(default_factory=DerivedMapping)
    membership: float = 0.0


def match_concept(
    net: Optional[CognitiveNetwork],
    candidate: Union[str, ValueTerm],
    base: Union[str, ValueTerm],
) -> float:
    """Membership of a single concept: crisp belong-to, or a value against a distribution."""
    base_spec = None
    cand_value: Optional[ValueTerm] = None
    if net is not None and isinstance(base, str):
        base_el = net.element(base)
        if isinstance(base_el, Concept):
            base_spec = base_el.params.get("value")
    if isinstance(candidate, (int, float)) and not isinstance(candidate, bool):
        cand_value = float(candidate)
    elif net is not None and isinstance(candidate, str):
        cand_el = net.element(candidate)
        if isinstance(cand_el, Concept):
            cand_value = cand_el.value

    if isinstance(base_spec, Gaussian) and isinstance(cand_value, (int, float)):
        return gaussian_membership(float(cand_value), base_spec.mu, base_spec.sigma)
    return 1.0 if belongs_to(net, candidate, base) else 0.0


# ---------------------------------------------------------------------------
# structure placement


def _concept_candidates(net: CognitiveNetwork, fragment_el: str, tree: TreeNetworkView) -> list[str]:
    return sorted(
        base_id for base_id in tree.concepts if match_concept(net, fragment_el, base_id) > 0.0
    )


def _placements(
    net: CognitiveNetwork,
    fragment_ids: list[str],
    tree: TreeNetworkView,
) -> list[dict[str, str]]:
    """All structure-consistent assignments fragment element -> base element.

    Fragment elements may stay unplaced (they are then simply not evidence) and
    several fragment elements may land on one base element, since a derived
    network may extend its base.  A fragment relation whose two endpoints are
    both placed is a hard constraint: some compatible base relation must
    connect their images, otherwise that combination of placements is invalid.
    """
    concepts = sorted(f for f in fragment_ids if f in net.concepts)
    relations = sorted(f for f in fragment_ids if f in net.relations)
    tree_relations = sorted(tree.longitudinal + tree.additional)
    results: list[dict[str, str]] = []
    assignment: dict[str, str] = {}

    def place_relation(idx: int) -> None:
        if idx == len(relations):
            results.append(dict(assignment))
            return
        f = relations[idx]
        frel = net.relations[f]
        im_a, im_b = assignment.get(frel.a), assignment.get(frel.b)
        if im_a is None or im_b is None:
            place_relation(idx + 1)
            return
        for base_rel_id in tree_relations:
            if not kind_compatible(net, f, base_rel_id):
                continue
            brel = net.relations[base_rel_id]
            if im_a == brel.a and im_b == brel.b:
                assignment[f] = base_rel_id
                place_relation(idx + 1)
                del assignment[f]

    def place_concept(idx: int) -> None:
        if idx == len(concepts):
            place_relation(0)
            return
        f = concepts[idx]
        for opt in [None, *_concept_candidates(net, f, tree)]:
            if opt is None:
                place_concept(idx + 1)
            else:
                assignment[f] = opt
                place_concept(idx + 1)
                del assignment[f]

    place_concept(0)
    return results


# ---------------------------------------------------------------------------
# membership evaluation


def _scratch_tree(
    net: CognitiveNetwork,
    tree: TreeNetworkView,
    degrees: Optional[dict[str, float]] = None,
) -> CognitiveNetwork:
    """Zero-state copy of the tree; relation degrees fold into the copied conditionals."""
    scratch = CognitiveNetwork()
    for cid in tree.concepts:
        src = net.concepts[cid]
        scratch.add_concept(Concept(id=cid, name=src.name, value=src.value, params=dict(src.params)))
    for rel_id in tree.longitudinal + tree.additional:
        src = net.relations[rel_id]
        if not (scratch.has(src.a) and scratch.has(src.b)):
            continue
        rel = scratch.add_relation(
            Relation(
                id=rel_id,
                kind=src.kind,
                a=src.a,
                b=src.b,
                cond=src.cond.copy(),
                params=dict(src.params),
            )
        )
        degree = 1.0 if degrees is None else degrees.get(rel_id, 1.0)
        if degree != 1.0:
            fwd = rel.cond.forward
            bwd = rel.cond.backward
            rel.cond = ConditionalProbabilityPair(
                forward=fwd if isinstance(fwd, Gaussian) else float(fwd) * degree,
                backward=bwd if isinstance(bwd, Gaussian) else float(bwd) * degree,
            )
    return scratch


def _propagate_membership(
    net: CognitiveNetwork,
    tree: TreeNetworkView,
    inputs: dict[str, float],
    degrees: dict[str, float],
    config: EngineConfig,
) -> float:
    scratch = _scratch_tree(net, tree, degrees)
    ledger = ContributionLedger()
    trace = NullTrace()
    for base_el in sorted(inputs):
        p = inputs[base_el]
        if p <= 0.0 or not scratch.has(base_el):
            continue
        state = scratch.state(base_el)
        state.input_prob = p
        state.result_prob = p
    for base_el in sorted(inputs):
        if inputs[base_el] > 0.0 and scratch.has(base_el):
            pps_launch(scratch, base_el, inputs[base_el], config, ledger, trace)
    return scratch.state(tree.root).result_prob


def _placement_inputs(
    net: CognitiveNetwork, placement: dict[str, str]
) -> tuple[dict[str, float], dict[str, float]]:
    inputs: dict[str, float] = {}
    degrees: dict[str, float] = {}
    for frag_el in sorted(placement):
        base_el = placement[frag_el]
        if frag_el in net.concepts:
            p = match_concept(net, frag_el, base_el)
            inputs[base_el] = superpose(inputs.get(base_el, 0.0), p)
        else:
            frel = net.relations[frag_el]
            brel = net.relations[base_el]
            degree = 1.0
            for name, spec in brel.params.items():
                value = frel.params.get(name)
                if isinstance(value, (Gaussian, Interval)):
                    value = None  # declarations are not observations
                degree *= param_membership(spec, value)
            degrees[base_el] = degrees.get(base_el, 1.0) * degree
    return inputs, degrees


def match_tree(
    net: CognitiveNetwork,
    fragment_ids: list[str],
    base_tree: TreeNetworkView,
    config: EngineConfig,
) -> MatchResult:
    """Two steps: structure match by backtracking, then membership by propagation.

    Among structurally valid placements the one maximizing membership wins;
    ties resolve to the lexicographically smallest assignment.
    """
    if not net.has(base_tree.root):
        raise StructureError(f"base tree root {base_tree.root} does not resolve")
    best = MatchResult(base=base_tree.root, membership=0.0)
    best_score = (-1.0, -1)
    for placement in _placements(net, list(fragment_ids), base_tree):
        if not placement:
            continue
        inputs, degrees = _placement_inputs(net, placement)
        membership = _propagate_membership(net, base_tree, inputs, degrees, config)
        # equal membership prefers the placement explaining more of the fragment
        score = (membership, len(placement))
        if score > best_score:
            best_score = score
            best = MatchResult(
                base=base_tree.root, mapping=_invert(placement), membership=membership
            )
    return best


def _invert(placement: dict[str, str]) -> DerivedMapping:
    pairs: dict[str, str] = {}
    for frag_el in sorted(placement):
        pairs.setdefault(placement[frag_el], frag_el)
    return DerivedMapping(pairs)


def match_nested(
    net: CognitiveNetwork,
    fragment_ids: list[str],
    base_tree: TreeNetworkView,
    config: EngineConfig,
    _depth: int = 0,
) -> MatchResult:
    """Recursive matching: inner trees first, their memberships feeding the outer level."""
    if _depth > config.match_depth_limit:
        raise DepthError(f"nested matching exceeded depth {config.match_depth_limit}")

    inner_inputs: dict[str, float] = {}
    inner_used: set[str] = set()
    inner_maps: dict[str, str] = {}
    for member in base_tree.concepts:
        if member == base_tree.root or member not in net.trees:
            continue
        inner = match_nested(net, fragment_ids, net.trees[member], config, _depth + 1)
        if inner.membership > 0.0:
            inner_inputs[member] = inner.membership
            inner_used.update(inner.mapping.pairs.values())
            inner_maps.update(inner.mapping.pairs)

    remaining = [f for f in fragment_ids if f not in inner_used]
    flat = match_tree(net, remaining, base_tree, config)
    if not inner_inputs:
        return flat

    placement = {frag: base for base, frag in flat.mapping.pairs.items()}
    inputs, degrees = _placement_inputs(net, placement)
    for member, p in inner_inputs.items():
        inputs[member] = superpose(inputs.get(member, 0.0), p)

    mapping = DerivedMapping(dict(flat.mapping.pairs))
    mapping.pairs.update(inner_maps)
    return MatchResult(
        base=base_tree.root,
        mapping=mapping,
        membership=_propagate_membership(net, base_tree, inputs, degrees, config),
    )


def match_complete(
    net: CognitiveNetwork,
    fragment_ids: list[str],
    base_ids: list[str],
    wildcards: frozenset[str] = frozenset(),
) -> bool:
    """True iff a total derived-network mapping of the base onto the fragment exists."""
    return check_derived_network(net, fragment_ids, base_ids, wildcards=wildcards) is not None
