"""Shared network builders for the test suite."""
from __future__ import annotations

from dcnet.core import (
    CognitiveNetwork,
    Concept,
    ConditionalProbabilityPair,
    Relation,
    RelationKind,
    classify_tree_network,
)
from dcnet.growth import ConceptSpec, FitTask, make_task
from dcnet.probability import EngineConfig


def concept(net: CognitiveNetwork, cid: str, **kw) -> Concept:
    return net.add_concept(Concept(id=cid, **kw))


def relation(
    net: CognitiveNetwork,
    rid: str,
    kind: RelationKind,
    a: str,
    b: str,
    pba=1.0,
    pab=1.0,
    base=None,
    params=None,
) -> Relation:
    return net.add_relation(
        Relation(
            id=rid,
            kind=kind,
            a=a,
            b=b,
            cond=ConditionalProbabilityPair(forward=pba, backward=pab),
            base=base,
            params=params or {},
        )
    )


def declare_tree(net: CognitiveNetwork, root: str, element_ids: list[str]) -> None:
    net.trees[root] = classify_tree_network(net, root, restrict=set(element_ids) | {root})


def face_kb() -> CognitiveNetwork:
    """Face/egg/cup knowledge: four face members, one cup member, two exclusive readings."""
    kb = CognitiveNetwork()
    for cid in ("face", "eye", "nose", "mouth", "ear", "egg", "cup_handle", "cup"):
        concept(kb, cid)
    relation(kb, "r_fe", RelationKind.HAS_COMPONENT, "face", "eye")
    relation(kb, "r_fn", RelationKind.HAS_COMPONENT, "face", "nose")
    relation(kb, "r_fm", RelationKind.HAS_COMPONENT, "face", "mouth")
    relation(kb, "r_fr", RelationKind.HAS_COMPONENT, "face", "ear")
    relation(kb, "r_ch", RelationKind.HAS_COMPONENT, "cup", "cup_handle")
    relation(kb, "x_fe", RelationKind.XOR, "face", "egg", pba=0.0, pab=0.0)
    relation(kb, "x_ec", RelationKind.XOR, "ear", "cup_handle", pba=0.0, pab=0.0)
    declare_tree(kb, "face", ["face", "eye", "nose", "mouth", "ear", "r_fe", "r_fn", "r_fm", "r_fr"])
    declare_tree(kb, "cup", ["cup", "cup_handle", "r_ch"])
    return kb


FACE_INPUTS = [
    ("eye", 0.6, "eye1"),
    ("nose", 0.5, "nose1"),
    ("mouth", 0.4, "mouth1"),
    ("ear", 0.1, "ear1"),
    ("face", 0.3, "face1"),
    ("egg", 0.5, "egg1"),
    ("cup_handle", 0.4, "ch1"),
]


def face_task(order: list[tuple[str, float, str]] | None = None, **config_kw) -> FitTask:
    kb = face_kb()
    config = EngineConfig(**config_kw)
    specs = [
        ConceptSpec(base=base, p=p, as_id=as_id)
        for base, p, as_id in (order if order is not None else FACE_INPUTS)
    ]
    return make_task(kb, config, specs)


def member_tree_kb(n_members: int = 5, pba=1.0, pab=1.0) -> CognitiveNetwork:
    """One root with n direct members, all conditionals alike."""
    kb = CognitiveNetwork()
    concept(kb, "root")
    ids = ["root"]
    for i in range(1, n_members + 1):
        concept(kb, f"m{i}")
        relation(kb, f"r{i}", RelationKind.HAS_COMPONENT, "root", f"m{i}", pba=pba, pab=pab)
        ids += [f"m{i}", f"r{i}"]
    declare_tree(kb, "root", ids)
    return kb
