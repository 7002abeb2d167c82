"""Encoding of binary structures into a single ternary relation over an arithmetic spine.

Elements 0..K-1 form the spine and stand for the numbers 0..K-1; the core
elements follow. The spine carries the addition triples x + y = z with
(1, 0, 1) removed and (1, 0, 0) added, and a core pair (x, y) in relation
R_z becomes the triple (x, y, z).
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from finite_ages.backend.structures import is_embedding, iter_embeddings
from finite_ages.data.formats import dump_structure, parse_structure
from finite_ages.data.types import ElementMap, Signature, Structure, binary_signature
from finite_ages.errors import DecodeError, InputError, ResourceLimitError

log = logging.getLogger(__name__)

TERNARY_SIGNATURE = Signature((("T", 3),))

# Bijection scans between encodings are exhaustive beyond this core size
MAX_RIGIDITY_CORE = 4

Triple = Tuple[int, int, int]


def spine_triples(k: int) -> FrozenSet[Triple]:
    """Addition triples on 0..k-1 without (1, 0, 1), plus (1, 0, 0)."""
    triples = {(x, y, x + y) for x in range(k) for y in range(k) if x + y < k}
    triples.discard((1, 0, 1))
    if k >= 2:
        triples.add((1, 0, 0))
    return frozenset(triples)


@dataclass(frozen=True)
class TernaryStructure:
    """An encoded structure: spine 0..K-1, core K..K+core_size-1."""

    spine_size: int
    core_size: int
    triples: FrozenSet[Triple]
    core_signature: Optional[Signature] = field(default=None, compare=False)

    def to_structure(self) -> Structure:
        """The plain T/3 structure."""
        return Structure(TERNARY_SIGNATURE, self.spine_size + self.core_size, (self.triples,))


def _check_binary(signature: Signature) -> None:
    if any(arity != 2 for arity in signature.arities):
        raise InputError(f"codering vereist een binaire signatuur, kreeg [{signature}]")


def encode(a: Structure, spine: int) -> TernaryStructure:
    """Encode a binary structure whose i-th relation is R_i."""
    _check_binary(a.signature)
    if spine < 3:
        raise InputError("ruggengraat moet >= 3 zijn")
    if len(a.signature) > spine:
        raise InputError(f"{len(a.signature)} relaties passen niet op een ruggengraat van {spine}")
    used = [z for z, table in enumerate(a.tables) if table]
    if used and max(used) + 2 > spine:
        raise InputError(f"relatie-index {max(used)} vereist een ruggengraat van >= {max(used) + 2}")
    triples = set(spine_triples(spine))
    for z, table in enumerate(a.tables):
        for x, y in table:
            triples.add((spine + x, spine + y, z))
    return TernaryStructure(spine, a.size, frozenset(triples), a.signature)


def _unique(candidates: List[int], what: str) -> int:
    if len(candidates) != 1:
        raise DecodeError(f"{what} is niet eenduidig bepaald ({len(candidates)} kandidaten)")
    return candidates[0]


def decode_structure(s: Structure, signature: Optional[Signature] = None) -> Structure:
    """Recover the core of a T/3 structure.

    Zero is the unique x with T(x, x, x), one the unique x ≠ 0 with
    T(x, 0, 0), and the successor of n the unique x with T(n, 1, x).
    Core elements keep their relative order.
    """
    if s.signature != TERNARY_SIGNATURE:
        raise DecodeError(f"signatuur T/3 verwacht, kreeg [{s.signature}]")
    t = s.tables[0]
    zero = _unique([x for x in range(s.size) if (x, x, x) in t], "zero")
    one = _unique([x for x in range(s.size) if x != zero and (x, zero, zero) in t], "one")
    chain = [zero, one]
    while True:
        nxt = [x for x in range(s.size) if (chain[-1], one, x) in t]
        if not nxt:
            break
        x = _unique(nxt, f"successor of {len(chain) - 1}")
        if x in chain:
            raise DecodeError(f"opvolgerketen loopt rond bij {len(chain) - 1}")
        chain.append(x)
    k = len(chain)
    if k < 3:
        raise DecodeError("ruggengraat is korter dan 3")
    value = {x: n for n, x in enumerate(chain)}
    spine = {(chain[x], chain[y], chain[z]) for x, y, z in spine_triples(k)}
    spine_found = {triple for triple in t if all(e in value for e in triple)}
    if spine_found != spine:
        raise DecodeError("drietallen van de ruggengraat volgen het optelpatroon niet")
    core = [x for x in range(s.size) if x not in value]
    position = {x: i for i, x in enumerate(core)}
    if signature is None:
        signature = binary_signature(k - 1)
    _check_binary(signature)
    tables: List[set] = [set() for _ in signature.entries]
    for x, y, z in t - spine_found:
        if x not in position or y not in position or z not in value:
            raise DecodeError(f"drietal ({x}, {y}, {z}) hoort niet bij ruggengraat of kern")
        if value[z] >= len(signature):
            raise DecodeError(f"relatie-index {value[z]} valt buiten [{signature}]")
        tables[value[z]].add((position[x], position[y]))
    return Structure(signature, len(core), tuple(frozenset(table) for table in tables))


def decode(t: TernaryStructure) -> Structure:
    """Inverse of encode."""
    return decode_structure(t.to_structure(), t.core_signature)


CORE_HEADER = "# core-signature"


def dump_encoding(t: TernaryStructure) -> str:
    """The T/3 structure text, with the core signature kept in a comment line."""
    text = dump_structure(t.to_structure())
    if t.core_signature is None:
        return text
    return f"{CORE_HEADER} {t.core_signature}".rstrip() + "\n" + text


def decode_text(text: str, signature: Optional[Signature] = None) -> Structure:
    """Decode the text dump_encoding wrote; plain T/3 files work too.

    An explicit signature wins over the comment line.
    """
    if signature is None:
        for line in text.splitlines():
            if line.startswith(CORE_HEADER + " ") or line == CORE_HEADER:
                signature = Signature.parse(line[len(CORE_HEADER):])
                break
    return decode_structure(parse_structure(text), signature)


def lift(f: ElementMap, spine: int) -> ElementMap:
    """F(f): identity on the spine, f on the core."""
    return ElementMap(tuple(range(spine)) + tuple(spine + y for y in f.images))


@dataclass(frozen=True)
class RigidityReport:
    """Isomorphisms between two cores compared with those between their encodings."""

    core_isomorphisms: int
    encoding_isomorphisms: int
    spine_fixed: bool
    restrictions_are_isomorphisms: bool
    lifts_are_isomorphisms: bool

    @property
    def holds(self) -> bool:
        return (
            self.core_isomorphisms == self.encoding_isomorphisms
            and self.spine_fixed
            and self.restrictions_are_isomorphisms
            and self.lifts_are_isomorphisms
        )


def rigidity_check(a: Structure, a2: Structure, spine: int) -> RigidityReport:
    """Enumerate all isomorphisms encode(a) → encode(a2) and match them with core isomorphisms."""
    if a.signature != a2.signature:
        raise InputError("kernen moeten dezelfde signatuur hebben")
    if max(a.size, a2.size) > MAX_RIGIDITY_CORE:
        raise ResourceLimitError(f"starheidscontrole is beperkt tot kernen van grootte {MAX_RIGIDITY_CORE}")
    e1, e2 = encode(a, spine).to_structure(), encode(a2, spine).to_structure()
    core_isos = list(iter_embeddings(a, a2)) if a.size == a2.size else []
    enc_isos = list(iter_embeddings(e1, e2)) if e1.size == e2.size else []
    spine_fixed = all(g.images[:spine] == tuple(range(spine)) for g in enc_isos)
    restricted = True
    for g in enc_isos:
        core = g.images[spine:]
        if any(y < spine for y in core):
            restricted = False
            break
        if not is_embedding(ElementMap(tuple(y - spine for y in core)), a, a2):
            restricted = False
            break
    lifts = all(is_embedding(lift(f, spine), e1, e2) for f in core_isos)
    log.debug("rigidity: %d core and %d encoding isomorphisms", len(core_isos), len(enc_isos))
    return RigidityReport(len(core_isos), len(enc_isos), spine_fixed, restricted, lifts)
