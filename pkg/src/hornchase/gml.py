"""GML LinearRing normal forms: a position list and its set of positions."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from functools import lru_cache
from importlib import resources

from .chase import ChaseConfig, ChaseResult, chase, load_theory
from .evaluator import hom_equivalent
from .instance import Instance
from .logic import Const, sym, string
from .tptp import parse_tptp

GML_NS = "http://www.opengis.net/gml"


class GmlError(ValueError):
    pass


@lru_cache(maxsize=None)
def _rules():
    text = resources.files("hornchase").joinpath("data/gml_rules.p").read_text()
    return tuple(load_theory(parse_tptp(text)))


def gml_rules() -> list:
    """posList -> pos and the reverse direction over four distinct points."""
    return list(_rules())


def gml_to_facts(xml_text: str) -> Instance:
    """Encode every ``gml:LinearRing`` of a document as linearRing/pos/posList facts.

    Rings are named ``lr1, lr2, ...`` and their position lists ``pl1, pl2, ...``
    in document order.  A bare fragment using the ``gml:`` prefix without
    declaring it is accepted.
    """
    if "xmlns:gml" not in xml_text:
        xml_text = f'<root xmlns:gml="{GML_NS}">{xml_text}</root>'
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise GmlError(f"malformed GML: {exc}") from None
    inst = Instance()
    for rel, arity in (("linearRing", 2), ("pos", 2), ("posList", 2)):
        inst.declare(rel, arity)
    rings = [root] if root.tag == f"{{{GML_NS}}}LinearRing" else []
    rings += root.findall(f".//{{{GML_NS}}}LinearRing")
    for k, ring in enumerate(rings, start=1):
        lr, pl = sym(f"lr{k}"), sym(f"pl{k}")
        inst.add("linearRing", (lr, pl))
        for child in ring:
            text = " ".join((child.text or "").split())
            if child.tag == f"{{{GML_NS}}}pos":
                inst.add("pos", (pl, string(text)))
            elif child.tag == f"{{{GML_NS}}}posList":
                inst.add("posList", (pl, string(text)))
            else:
                raise GmlError(f"unsupported LinearRing child {child.tag}")
    return inst


def _tokens(value) -> list:
    if not (isinstance(value, Const) and isinstance(value.value, str)):
        raise GmlError(f"coordinates must be a string, got {value!r}")
    return value.value.split()


def validate_rings(inst: Instance):
    """Reject rings the normalization rules cannot handle.

    Every ring must be a closed quadrilateral: a posList of five points whose
    last repeats the first, or pos facts naming exactly four distinct points.
    """
    rings = [pl for _, pl in inst.tuples("linearRing")]
    if not rings:
        raise GmlError("no linearRing facts")
    for pl in rings:
        positions = {t[1] for t in inst.lookup("pos", 0, pl)}
        lists = [t[1] for t in inst.lookup("posList", 0, pl)]
        if not positions and not lists:
            raise GmlError(f"ring {pl!r} has neither pos nor posList facts")
        for value in lists:
            toks = _tokens(value)
            if len(toks) != 10 or toks[:2] != toks[8:]:
                raise GmlError(f"ring {pl!r}: posList must hold a closed ring of 4 points")
            if len({tuple(toks[i:i + 2]) for i in range(0, 8, 2)}) != 4:
                raise GmlError(f"ring {pl!r}: posList points are not distinct")
        for value in positions:
            if len(_tokens(value)) != 2:
                raise GmlError(f"ring {pl!r}: pos {value!r} is not a 2D point")
        if positions and len(positions) != 4:
            raise GmlError(f"ring {pl!r} has {len(positions)} distinct points; only quadrilaterals are supported")


def gml_normalize(inst: Instance, config: ChaseConfig | None = None) -> ChaseResult:
    """Chase both conversion rules so the ring carries both representations."""
    validate_rings(inst)
    return chase(inst, gml_rules(), config)


def gml_equivalent(a: Instance, b: Instance, config: ChaseConfig | None = None) -> bool:
    """Whether two encodings describe the same rings, judged on normal forms."""
    ra, rb = gml_normalize(a, config), gml_normalize(b, config)
    for r in (ra, rb):
        if not r.ok:
            raise GmlError(f"normalization ended in {r.outcome}")
    return hom_equivalent(ra.instance, rb.instance)
