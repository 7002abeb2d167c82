"""Finite relational structures: restriction, reducts, embeddings, canonical forms and ages."""

import itertools
import logging
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from finite_ages.backend.workers import ordered_map
from finite_ages.data.types import ElementMap, IsoType, RelTuple, Signature, Structure
from finite_ages.errors import InputError, ResourceLimitError

log = logging.getLogger(__name__)

# Exhaustive enumeration refuses to walk more than 2**MAX_ENUMERATION_BITS structures
MAX_ENUMERATION_BITS = 20


def _same_signature(a: Structure, b: Structure) -> None:
    if a.signature != b.signature:
        raise InputError(f"signaturen verschillen: [{a.signature}] tegen [{b.signature}]")


def restrict(s: Structure, subset: Iterable[int]) -> Structure:
    """Induced substructure on ``subset``, renumbered by increasing original index."""
    points = sorted(set(subset))
    for p in points:
        if p < 0 or p >= s.size:
            raise InputError(f"element {p} buiten bereik 0..{s.size - 1}")
    position = {p: i for i, p in enumerate(points)}
    tables = tuple(
        frozenset(tuple(position[e] for e in t) for t in table if all(e in position for e in t))
        for table in s.tables
    )
    return Structure(s.signature, len(points), tables)


def reduct(s: Structure, names: Iterable[str]) -> Structure:
    """Forget every relation not in ``names``; signature order is kept."""
    sub = s.signature.restrict(names)
    return Structure(sub, s.size, tuple(s.table(name) for name in sub.names))


def relabel(s: Structure, perm: Sequence[int]) -> Structure:
    """Rename element x to ``perm[x]``; perm must be a permutation of 0..n-1."""
    if sorted(perm) != list(range(s.size)):
        raise InputError(f"geen permutatie van 0..{s.size - 1}: {list(perm)}")
    tables = tuple(frozenset(tuple(perm[e] for e in t) for t in table) for table in s.tables)
    return Structure(s.signature, s.size, tables)


def disjoint_union(a: Structure, b: Structure) -> Structure:
    """a on 0..|a|-1 followed by b shifted by |a|, no cross tuples."""
    _same_signature(a, b)
    shift = a.size
    tables = tuple(
        ta | frozenset(tuple(e + shift for e in t) for t in tb) for ta, tb in zip(a.tables, b.tables)
    )
    return Structure(a.signature, a.size + b.size, tables)


def compose(f: ElementMap, g: ElementMap) -> ElementMap:
    """g ∘ f."""
    return f.then(g)


def is_embedding(f: ElementMap, a: Structure, b: Structure) -> bool:
    """Whether f is an isomorphism from a onto the substructure of b on f's image."""
    _same_signature(a, b)
    if f.domain_size != a.size:
        raise InputError(f"afbeelding heeft {f.domain_size} beelden, structuur heeft {a.size} elementen")
    if any(y < 0 or y >= b.size for y in f.images):
        raise InputError(f"beeld van de afbeelding buiten bereik 0..{b.size - 1}")
    if not f.is_injective:
        return False
    for arity, ta, tb in zip(a.signature.arities, a.tables, b.tables):
        for t in itertools.product(range(a.size), repeat=arity):
            if (t in ta) != (tuple(f(e) for e in t) in tb):
                return False
    return True


def _checks(a: Structure) -> List[List[Tuple[int, RelTuple, bool]]]:
    """For each element i, the tuples over 0..i that mention i."""
    result = []
    for i in range(a.size):
        checks = []
        for r, (arity, table) in enumerate(zip(a.signature.arities, a.tables)):
            for t in itertools.product(range(i + 1), repeat=arity):
                if i in t:
                    checks.append((r, t, t in table))
        result.append(checks)
    return result


def iter_embeddings(a: Structure, b: Structure) -> Iterator[ElementMap]:
    """All embeddings of a into b in lexicographic order of image lists."""
    _same_signature(a, b)
    if a.size > b.size:
        return
    checks = _checks(a)
    tables = b.tables
    images: List[int] = []
    used = [False] * b.size

    def extend(i: int) -> Iterator[ElementMap]:
        if i == a.size:
            yield ElementMap(tuple(images))
            return
        for y in range(b.size):
            if used[y]:
                continue
            images.append(y)
            if all((tuple(images[e] for e in t) in tables[r]) == expected for r, t, expected in checks[i]):
                used[y] = True
                yield from extend(i + 1)
                used[y] = False
            images.pop()

    yield from extend(0)


def find_embedding(a: Structure, b: Structure) -> Optional[ElementMap]:
    """The lexicographically least embedding of a into b, if any."""
    return next(iter_embeddings(a, b), None)


def embeds(a: Structure, b: Structure) -> bool:
    """Whether a ≤ b."""
    return find_embedding(a, b) is not None


def is_isomorphic(a: Structure, b: Structure) -> Optional[ElementMap]:
    """An isomorphism a → b, if any."""
    _same_signature(a, b)
    if a.size != b.size or a.tuple_count != b.tuple_count:
        return None
    return find_embedding(a, b)


# Canonical form


def _incidence(s: Structure) -> List[List[Tuple[int, RelTuple, Tuple[int, ...]]]]:
    incident: List[List[Tuple[int, RelTuple, Tuple[int, ...]]]] = [[] for _ in range(s.size)]
    for r, table in enumerate(s.tables):
        for t in table:
            for x in set(t):
                positions = tuple(i for i, e in enumerate(t) if e == x)
                incident[x].append((r, t, positions))
    return incident


def _refine(colors: List[int], incident) -> List[int]:
    """Colour refinement until the number of classes is stable.

    Signatures start with the old colour and unique signatures are ranked in
    sorted order, so refinement never reorders existing classes.
    """
    while True:
        signatures = []
        for x, edges in enumerate(incident):
            around = sorted((r, positions, tuple(colors[e] for e in t)) for r, t, positions in edges)
            signatures.append((colors[x], tuple(around)))
        rank = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
        refined = [rank[sig] for sig in signatures]
        if len(rank) == len(set(colors)):
            return refined
        colors = refined


def _certificate(s: Structure, labels: Sequence[int]) -> Tuple[Tuple[RelTuple, ...], ...]:
    return tuple(tuple(sorted(tuple(labels[e] for e in t) for t in table)) for table in s.tables)


def _swap_is_automorphism(s: Structure, v: int, w: int) -> bool:
    def swap(e: int) -> int:
        return w if e == v else v if e == w else e

    return all(frozenset(tuple(swap(e) for e in t) for t in table) == table for table in s.tables)


def canonical_labeling(s: Structure) -> Tuple[Tuple[int, ...], Tuple[Tuple[RelTuple, ...], ...]]:
    """Labeling x -> label[x] whose relabeled tables are minimal.

    Colour refinement with individualization of the first smallest
    non-singleton cell; branches related by a transposition automorphism are
    pruned.
    """
    incident = _incidence(s)
    best: List = [None, None]

    def search(colors: List[int]) -> None:
        colors = _refine(colors, incident)
        if len(set(colors)) == s.size:
            cert = _certificate(s, colors)
            if best[1] is None or cert < best[1]:
                best[0], best[1] = tuple(colors), cert
            return
        cells: Dict[int, List[int]] = {}
        for x, c in enumerate(colors):
            cells.setdefault(c, []).append(x)
        target = min(c for c, members in cells.items() if len(members) > 1)
        tried: List[int] = []
        for v in cells[target]:
            if any(_swap_is_automorphism(s, v, w) for w in tried):
                continue
            tried.append(v)
            search([2 * c if x == v else 2 * c + 1 for x, c in enumerate(colors)])

    search([0] * s.size)
    if best[0] is None:
        return (), _certificate(s, ())
    return best[0], best[1]


def canonical_form(s: Structure) -> IsoType:
    """Isomorphism-invariant code of a structure."""
    _, cert = canonical_labeling(s)
    body = ";".join(",".join(".".join(str(e) for e in t) for t in table) for table in cert)
    return IsoType(s.size, f"{s.signature}|{s.size}|{body}".encode("utf-8"))


def canonical_structure(s: Structure) -> Structure:
    """The representative of s's isomorphism class with canonical numbering."""
    labels, _ = canonical_labeling(s)
    return relabel(s, labels)


# Ages


def skeleton(s: Structure, max_size: int) -> List[Structure]:
    """All restrictions to subsets of size ≤ max_size, in subset order."""
    if max_size < 0:
        raise InputError("max_size moet >= 0 zijn")
    return [
        restrict(s, subset)
        for k in range(min(max_size, s.size) + 1)
        for subset in itertools.combinations(range(s.size), k)
    ]


def age(s: Structure, max_size: int, jobs: int = 1) -> FrozenSet[IsoType]:
    """Canonical codes of all induced substructures of size ≤ max_size."""
    family = skeleton(s, max_size)
    log.debug("age: %d restrictions of a %d-element structure", len(family), s.size)
    return frozenset(ordered_map(canonical_form, family, jobs))


def enumeration_bits(signature: Signature, n: int) -> int:
    """Number of independent 0/1 entries of a structure on n points."""
    return sum(n**arity for arity in signature.arities)


def enumerate_structures(signature: Signature, n: int) -> Iterator[Structure]:
    """All labeled structures on n points."""
    bits = enumeration_bits(signature, n)
    if bits > MAX_ENUMERATION_BITS:
        raise ResourceLimitError(f"{bits} relatie-entries op {n} punten overschrijden de limiet {MAX_ENUMERATION_BITS}")
    slots = [(r, t) for r, arity in enumerate(signature.arities) for t in itertools.product(range(n), repeat=arity)]
    for mask in range(1 << bits):
        tables: List[set] = [set() for _ in signature.entries]
        for bit, (r, t) in enumerate(slots):
            if mask >> bit & 1:
                tables[r].add(t)
        yield Structure(signature, n, tuple(frozenset(t) for t in tables))


def enumerate_isotypes(signature: Signature, n: int) -> List[Structure]:
    """One canonical representative per isomorphism type on n points, sorted by code."""
    seen: Dict[IsoType, Structure] = {}
    for s in enumerate_structures(signature, n):
        code = canonical_form(s)
        if code not in seen:
            seen[code] = canonical_structure(s)
    return [seen[code] for code in sorted(seen)]
