"""Ideals of isomorphism types: oracles, ideality checks, extension and amalgamation searches.

Every existential search here is bounded. A negative answer always means
"not found within the bound", never "does not exist".
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from finite_ages.backend.structures import (
    canonical_form,
    canonical_structure,
    find_embedding,
    iter_embeddings,
    is_embedding,
    reduct,
    relabel,
    restrict,
    skeleton,
)
from finite_ages.backend.workers import ordered_map
from finite_ages.data.formats import dump_structure
from finite_ages.data.types import ElementMap, IsoType, RelTuple, Signature, Structure, binary_signature
from finite_ages.errors import InputError, ResourceLimitError

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 200_000
DEFAULT_MAX_FREE_TUPLES = 20


@dataclass(frozen=True, eq=False)
class IdealOracle:
    """An effective presentation of a set of isomorphism types.

    ``member`` decides membership of a structure's type and must be
    isomorphism invariant. ``generator(n)`` lists candidate structures on n
    points; together with ``member`` it must produce every member of size n
    for n up to ``complete_up_to`` (None: every size).

    With ``scan_hosts`` set, joint extensions are looked up among the
    generated members instead of glued; meant for oracles whose members
    are few but carry many tuples.
    """

    name: str
    signature: Signature
    member: Callable[[Structure], bool]
    generator: Callable[[int], Iterable[Structure]]
    complete_up_to: Optional[int] = None
    scan_hosts: bool = False
    _cache: Dict[int, List[Structure]] = field(default_factory=dict, repr=False)

    def members(self, size: int) -> List[Structure]:
        """Canonical representatives of the members on ``size`` points, sorted by code."""
        if self.complete_up_to is not None and size > self.complete_up_to:
            raise ResourceLimitError(f"orakel {self.name} is alleen volledig tot grootte {self.complete_up_to}")
        if size not in self._cache:
            found: Dict[IsoType, Structure] = {}
            for s in self.generator(size):
                if self.member(s):
                    code = canonical_form(s)
                    if code not in found:
                        found[code] = canonical_structure(s)
            self._cache[size] = [found[code] for code in sorted(found)]
            log.debug("oracle %s: %d members of size %d", self.name, len(found), size)
        return self._cache[size]

    def members_up_to(self, max_size: int) -> List[Structure]:
        """Members of size ≤ max_size, size first then code."""
        return [s for n in range(max_size + 1) for s in self.members(n)]

    def member_codes(self, max_size: int) -> FrozenSet[IsoType]:
        """Canonical codes of the members of size ≤ max_size."""
        return frozenset(canonical_form(s) for s in self.members_up_to(max_size))


@dataclass(frozen=True)
class JointExtension:
    """A structure with embeddings of two given structures.

    The left map is always the identity onto 0..|left|-1.
    """

    structure: Structure
    left: ElementMap
    right: ElementMap


@dataclass(frozen=True)
class AmalgamInstance:
    """Two embeddings f1: base → left and f2: base → right."""

    base: Structure
    left: Structure
    right: Structure
    left_map: ElementMap
    right_map: ElementMap


@dataclass(frozen=True)
class SegmentReport:
    """Outcome of an initial-segment check."""

    holds: bool
    checked: int = 0
    member: Optional[Structure] = None
    subset: Optional[Tuple[int, ...]] = None


@dataclass
class DirectedReport:
    """Outcome of an up-directedness check."""

    holds: bool
    witnesses: Dict[Tuple[IsoType, IsoType], Structure] = field(default_factory=dict)
    failure: Optional[Tuple[Structure, Structure]] = None


@dataclass(frozen=True)
class AmalgamationReport:
    """Outcome of a one-point amalgamation sweep."""

    holds: bool
    checked: int = 0
    failure: Optional[AmalgamInstance] = None


# Gluing search


@dataclass(frozen=True)
class _Placement:
    size: int
    images: Tuple[int, ...]
    tables: Tuple[FrozenSet[RelTuple], ...]
    free: Tuple[Tuple[int, RelTuple], ...]


def _placements(a: Structure, b: Structure, size: int, fixed: Mapping[int, int]) -> Iterator[_Placement]:
    """Ways to lay a on 0..|a|-1 and b so that the two images cover 0..size-1.

    ``fixed`` forces some b elements onto given a elements. Free tuples are
    the tuples mixing an a-only point with a b-only point.
    """
    m, n = a.size, b.size
    overlap = m + n - size
    if overlap < len(fixed) or overlap > min(m, n):
        return
    rest_b = [y for y in range(n) if y not in fixed]
    rest_a = [x for x in range(m) if x not in set(fixed.values())]
    for chosen in itertools.combinations(rest_b, overlap - len(fixed)):
        for targets in itertools.permutations(rest_a, len(chosen)):
            glue = dict(fixed)
            glue.update(zip(chosen, targets))
            images = []
            fresh = m
            for y in range(n):
                if y in glue:
                    images.append(glue[y])
                else:
                    images.append(fresh)
                    fresh += 1
            shared = sorted(glue)
            consistent = all(
                (t in tb) == (tuple(images[e] for e in t) in ta)
                for arity, ta, tb in zip(a.signature.arities, a.tables, b.tables)
                for t in itertools.product(shared, repeat=arity)
            )
            if not consistent:
                continue
            tables = tuple(
                ta | frozenset(tuple(images[e] for e in t) for t in tb) for ta, tb in zip(a.tables, b.tables)
            )
            a_only = set(range(m)) - set(glue.values())
            b_only = set(range(m, size))
            free = tuple(
                (r, t)
                for r, arity in enumerate(a.signature.arities)
                for t in itertools.product(range(size), repeat=arity)
                if a_only.intersection(t) and b_only.intersection(t)
            )
            yield _Placement(size, tuple(images), tables, free)


def _with_tuples(signature: Signature, p: _Placement, extra: Iterable[Tuple[int, RelTuple]]) -> Structure:
    tables = [set(t) for t in p.tables]
    for r, t in extra:
        tables[r].add(t)
    return Structure(signature, p.size, tuple(frozenset(t) for t in tables))


def _glue_search(
    a: Structure,
    b: Structure,
    o: IdealOracle,
    bound: int,
    fixed: Mapping[int, int],
    budget: int,
) -> Optional[JointExtension]:
    """Smallest member gluing of a and b, free tuples added breadth-first by count."""
    checked = 0
    for size in range(max(a.size, b.size), min(a.size + b.size, bound) + 1):
        placements = list(_placements(a, b, size, fixed))
        if not placements:
            continue
        most = max(len(p.free) for p in placements)
        for count in range(most + 1):
            for p in placements:
                for extra in itertools.combinations(p.free, count):
                    checked += 1
                    if checked > budget:
                        log.warning("gluing search for sizes %d and %d gave up after %d candidates", a.size, b.size, budget)
                        return None
                    candidate = _with_tuples(a.signature, p, extra)
                    if o.member(candidate):
                        log.debug("glued %d + %d into %d points, %d cross tuples", a.size, b.size, size, count)
                        return JointExtension(candidate, ElementMap.identity(a.size), ElementMap(p.images))
    return None


def _normalized(host: Structure, f: ElementMap, g: ElementMap) -> JointExtension:
    """Renumber host so that f becomes the identity prefix."""
    rest = [y for y in range(host.size) if y not in set(f.images)]
    order = list(f.images) + rest
    perm = [0] * host.size
    for new, old in enumerate(order):
        perm[old] = new
    moved = ElementMap(tuple(perm))
    return JointExtension(relabel(host, perm), ElementMap.identity(f.domain_size), g.then(moved))


def joint_extension(
    a: Structure,
    b: Structure,
    o: IdealOracle,
    bound: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[JointExtension]:
    """A member of size ≤ bound into which both a and b embed.

    Tries b itself and a itself first, then gluings over increasing size.
    Only structures covered by the images of a and b are searched, which is
    enough for hereditary oracles. Oracles with ``scan_hosts`` are searched
    through their members first; gluing only covers sizes the scan could
    not reach.
    """
    if a.signature != b.signature or a.signature != o.signature:
        raise InputError("structuren en orakel moeten dezelfde signatuur hebben")
    if b.size <= bound:
        f = find_embedding(a, b)
        if f is not None and o.member(b):
            return _normalized(b, f, ElementMap.identity(b.size))
    if a.size <= bound:
        g = find_embedding(b, a)
        if g is not None and o.member(a):
            return JointExtension(a, ElementMap.identity(a.size), g)
    if o.scan_hosts:
        found, covered = _host_scan(a, b, o, bound)
        if found is not None or covered:
            return found
    return _glue_search(a, b, o, bound, {}, budget)


def _host_scan(a: Structure, b: Structure, o: IdealOracle, bound: int) -> Tuple[Optional[JointExtension], bool]:
    """First member of size ≤ bound holding both a and b; the flag says every size was scanned."""
    limit = bound if o.complete_up_to is None else min(bound, o.complete_up_to)
    for size in range(max(a.size, b.size), limit + 1):
        for host in o.members(size):
            f = find_embedding(a, host)
            if f is None:
                continue
            g = find_embedding(b, host)
            if g is not None:
                log.debug("host of %d points found by member scan", size)
                return _normalized(host, f, g), True
    return None, limit == bound


# Ideality checks


def is_initial_segment(o: IdealOracle, max_size: int) -> SegmentReport:
    """Whether every restriction of a member of size ≤ max_size is a member."""
    checked = 0
    for s in o.members_up_to(max_size):
        for k in range(s.size - 1, -1, -1):
            for subset in itertools.combinations(range(s.size), k):
                checked += 1
                if not o.member(restrict(s, subset)):
                    return SegmentReport(False, checked, s, subset)
    return SegmentReport(True, checked)


def is_up_directed(
    o: IdealOracle,
    max_size: int,
    search_bound: int,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> DirectedReport:
    """Search a common member extension for every pair of members of size ≤ max_size."""
    if search_bound < 2 * max_size:
        raise InputError(f"zoekgrens {search_bound} ligt onder 2 * max_size = {2 * max_size}")
    members = o.members_up_to(max_size)
    pairs = list(itertools.combinations_with_replacement(members, 2))
    found = ordered_map(lambda pair: joint_extension(pair[0], pair[1], o, search_bound, budget), pairs, jobs)
    report = DirectedReport(True)
    for (a, b), ext in zip(pairs, found):
        if ext is None:
            report.holds = False
            report.failure = (a, b)
            return report
        report.witnesses[(canonical_form(a), canonical_form(b))] = ext.structure
    return report


def hat_closure_member(s: Structure, o: IdealOracle, index_subsets: Sequence[Iterable[str]]) -> bool:
    """Whether every listed reduct of s is the reduct of some member of the same size."""
    members = o.members(s.size)
    for names in index_subsets:
        names = list(names)
        target = canonical_form(reduct(s, names))
        shapes = {canonical_form(reduct(m, names)) for m in members}
        if target not in shapes:
            log.debug("reduct on %s is not a member shape", names)
            return False
    return True


def is_extendable(
    s: Structure,
    b: Structure,
    o: IdealOracle,
    search_bound: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[Structure]:
    """A member of size ≤ search_bound extending both s and b.

    Raises InputError when a restriction of s, or b itself, is not a member.
    """
    for sub in skeleton(s, s.size):
        if not o.member(sub):
            raise InputError("beperking van de eerste structuur is geen lid:\n" + dump_structure(sub))
    if not o.member(b):
        raise InputError("tweede structuur is geen lid:\n" + dump_structure(b))
    ext = joint_extension(s, b, o, search_bound, budget)
    return ext.structure if ext is not None else None


def amalgamate(
    inst: AmalgamInstance,
    o: IdealOracle,
    search_bound: int,
    budget: int = DEFAULT_BUDGET,
) -> Optional[Tuple[Structure, ElementMap, ElementMap]]:
    """Amalgam B with g1 ∘ f1 = g2 ∘ f2, searched up to search_bound points."""
    for name, host, f in (("left", inst.left, inst.left_map), ("right", inst.right, inst.right_map)):
        if inst.base.signature != host.signature or f.domain_size != inst.base.size:
            raise InputError(f"afbeelding {name} past niet op de basis")
        if not is_embedding(f, inst.base, host):
            raise InputError(f"afbeelding {name} is geen inbedding van de basis")
    fixed = {inst.right_map(x): inst.left_map(x) for x in range(inst.base.size)}
    ext = _glue_search(inst.left, inst.right, o, search_bound, fixed, budget)
    if ext is None:
        return None
    return ext.structure, ext.left, ext.right


def check_amalgamation(
    o: IdealOracle,
    max_size: int,
    search_bound: int,
    budget: int = DEFAULT_BUDGET,
) -> AmalgamationReport:
    """Try every one-point amalgamation instance with sides of size ≤ max_size."""
    checked = 0
    for base_size in range(max_size):
        for base in o.members(base_size):
            sides = [(s, f) for s in o.members(base_size + 1) for f in iter_embeddings(base, s)]
            for (left, f1), (right, f2) in itertools.product(sides, repeat=2):
                inst = AmalgamInstance(base, left, right, f1, f2)
                checked += 1
                if amalgamate(inst, o, search_bound, budget) is None:
                    return AmalgamationReport(False, checked, inst)
    return AmalgamationReport(True, checked)


def check_member_invariance(
    o: IdealOracle,
    max_size: int,
    samples: int = 20,
    seed: int = 0,
) -> Optional[Tuple[Structure, Tuple[int, ...]]]:
    """Spot-check that random relabelings keep the member verdict.

    Returns a structure and a permutation on which the verdict changes.
    """
    rng = random.Random(seed)
    for n in range(max_size + 1):
        candidates = list(itertools.islice(o.generator(n), samples))
        for s in candidates:
            perm = list(range(n))
            rng.shuffle(perm)
            if o.member(s) != o.member(relabel(s, perm)):
                return s, tuple(perm)
    return None


# Minimal amalgams


def _is_minimal(c: Structure, a: Structure, b: Structure) -> bool:
    for x in range(c.size):
        rest = restrict(c, [y for y in range(c.size) if y != x])
        if find_embedding(a, rest) is not None and find_embedding(b, rest) is not None:
            return False
    return True


def iter_minimal_amalgams(
    a: Structure,
    b: Structure,
    o: IdealOracle,
    max_free_tuples: int = DEFAULT_MAX_FREE_TUPLES,
) -> Iterator[Structure]:
    """Canonical representatives of the members C covered by copies of a and b
    that lose a or b whenever a point is deleted."""
    if a.signature != b.signature:
        raise InputError(f"signaturen verschillen: [{a.signature}] tegen [{b.signature}]")
    seen: Set[IsoType] = set()
    for size in range(max(a.size, b.size), a.size + b.size + 1):
        for p in _placements(a, b, size, {}):
            if len(p.free) > max_free_tuples:
                raise ResourceLimitError(f"{len(p.free)} vrije kruistupels overschrijden de limiet {max_free_tuples}")
            for count in range(len(p.free) + 1):
                for extra in itertools.combinations(p.free, count):
                    c = _with_tuples(a.signature, p, extra)
                    code = canonical_form(c)
                    if code in seen:
                        continue
                    seen.add(code)
                    if o.member(c) and _is_minimal(c, a, b):
                        yield canonical_structure(c)


def minimal_amalgams(
    a: Structure,
    b: Structure,
    o: IdealOracle,
    max_free_tuples: int = DEFAULT_MAX_FREE_TUPLES,
) -> FrozenSet[IsoType]:
    """Codes of all minimal joint extensions of a and b inside the oracle."""
    return frozenset(canonical_form(c) for c in iter_minimal_amalgams(a, b, o, max_free_tuples))


def all_loops_point(signature: Signature) -> Structure:
    """One point with every binary relation holding at (0, 0)."""
    return Structure(signature, 1, tuple(frozenset({(0,) * arity}) for arity in signature.arities))


def no_loops_point(signature: Signature) -> Structure:
    """One point with every relation false."""
    return Structure(signature, 1)


def claim2_family(k: int) -> List[Structure]:
    """The k two-point structures C_0..C_{k-1} over k binary relations.

    In C_n every relation holds at (0, 0); R_n also holds at (0, 1).
    """
    if k < 1:
        raise InputError("k moet >= 1 zijn")
    signature = binary_signature(k)
    family = []
    for n in range(k):
        tables = tuple(
            frozenset({(0, 0), (0, 1)}) if i == n else frozenset({(0, 0)}) for i in range(k)
        )
        family.append(Structure(signature, 2, tables))
    return family


def satisfies_minimality(c: Structure, a: Structure, b: Structure) -> bool:
    """Both conditions on a joint extension: a, b ≤ c and every point is needed."""
    if find_embedding(a, c) is None or find_embedding(b, c) is None:
        return False
    return _is_minimal(c, a, b)


# Signature transfer


def transfer_signature(s: Structure, target: Signature, phi: Mapping[str, str]) -> Structure:
    """Move binary relations into a wider signature.

    Relation R of s becomes relation ``phi[R]`` of ``target`` (arity ≥ 2),
    holding at (x1, ..., xk) iff R(x1, x2); relations outside the image of
    phi are empty.
    """
    if any(arity != 2 for arity in s.signature.arities):
        raise InputError("transfer_signature vereist een binaire signatuur")
    if set(phi) != set(s.signature.names):
        raise InputError("phi moet elke relatie van de bronsignatuur afbeelden")
    if len(set(phi.values())) != len(phi):
        raise InputError("phi moet injectief zijn")
    tables: Dict[str, Set[RelTuple]] = {name: set() for name in target.names}
    for source, name in phi.items():
        arity = target.arity(name)
        if arity < 2:
            raise InputError(f"doelrelatie {name} heeft ariteit {arity}, verwacht >= 2")
        for x, y in s.table(source):
            for tail in itertools.product(range(s.size), repeat=arity - 2):
                tables[name].add((x, y) + tail)
    return Structure(target, s.size, tuple(frozenset(tables[n]) for n in target.names))
