"""Queries over a dialogue: complete matching first, conversion reasoning second.

Two speakers meet; one states a nationality, the other merely says "so am I".
The explicit fact answers its question by direct template matching.  The echo
answers only after one conversion step grows the missing nationality relation
on a scratch overlay, and the answer carries the relation it used, so every
reasoning step can be displayed and explained.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dcnet import (
    CognitiveNetwork,
    Concept,
    ConditionalProbabilityPair,
    QueryTemplate,
    Relation,
    RelationKind,
    TemplateElement,
    TemplateRelation,
    query_match,
    query_reason,
)


def build_store():
    net = CognitiveNetwork()
    for cid in ("person", "american", "echo_act"):
        net.add_concept(Concept(id=cid))
    net.add_relation(Relation(id="r_nat", kind=RelationKind.HAS_ATTRIBUTE, a="person", b="american"))
    net.add_relation(Relation(id="r_echo", kind=RelationKind.HAS_FORM, a="person", b="echo_act"))
    net.add_relation(
        Relation(
            id="conv",
            kind=RelationKind.CONVERSION,
            a="r_echo",
            b="r_nat",
            cond=ConditionalProbabilityPair(1.0, 1.0),
        )
    )
    for cid in ("tom", "jerry"):
        net.add_concept(Concept(id=cid))
        net.add_belong(cid, "person")
    net.add_concept(Concept(id="american1"))
    net.add_belong("american1", "american")
    net.add_relation(
        Relation(id="tom_nat", kind=RelationKind.HAS_ATTRIBUTE, a="tom", b="american1", base="r_nat")
    )
    net.add_concept(Concept(id="echo1"))
    net.add_belong("echo1", "echo_act")
    net.add_relation(
        Relation(id="jerry_echo", kind=RelationKind.HAS_FORM, a="jerry", b="echo1", base="r_echo")
    )
    return net


def country_template(person):
    return QueryTemplate(
        elements=[
            TemplateElement(id="qp", base=person),
            TemplateElement(id="qx", var=True, base="american"),
        ],
        relations=[
            TemplateRelation(id="qr", kind=RelationKind.HAS_ATTRIBUTE, a="qp", b="qx")
        ],
    )


def main():
    store = build_store()

    print("which country is Tom from?  (stated outright)")
    for binding in query_match(country_template("tom"), store):
        print("  binding:", binding.values)

    print("\nwhich country is Jerry from?  (only 'so am I' was said)")
    print("  direct match:", query_match(country_template("jerry"), store) or "nothing")

    outcome = query_reason(country_template("jerry"), store, max_steps=1)
    for answer in outcome.answers:
        print("  after one conversion step:", answer.binding.values)
        print("  explained by:", ", ".join(answer.explanation))

    print("\nbudget zero reduces to the direct match:",
          query_reason(country_template("jerry"), store, max_steps=0).answers == [])
    print("the store itself was never modified:",
          not any("#" in c for c in store.concepts))


if __name__ == "__main__":
    main()
