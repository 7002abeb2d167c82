"""Ashes and the edge-coloured graph classes they generate.

An ash is modelled on a finite ground set of colour tokens. Genuine ashes
need uncountable ground sets, so the axiom checks report the region in
which a finite surrogate can be trusted.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from finite_ages.backend.structures import disjoint_union
from finite_ages.data.types import MetricSpace, Signature, Structure
from finite_ages.errors import DataError, InputError, ResourceLimitError

log = logging.getLogger(__name__)

FLAVORS = ("standard", "graph", "poset")

DEFAULT_SUBSET_LIMIT = 12
DEFAULT_JOIN_BUDGET = 100_000


@dataclass(frozen=True, eq=False)
class Ash:
    """A family of finite subsets of ``ground`` given by a predicate.

    ``trusted_bound`` is the largest union size on which an axiom-2 failure
    is a genuine failure rather than exhaustion of the finite ground set
    (None: every size).
    """

    ground: Tuple[str, ...]
    member: Callable[[FrozenSet[str]], bool]
    flavor: str
    params: Dict[str, object] = field(default_factory=dict)
    downward_closed: bool = True
    trusted_bound: Optional[int] = None

    def signature(self) -> Signature:
        """One binary relation per colour."""
        return Signature(tuple((token, 2) for token in self.ground))

    def is_member(self, colors: Iterable[str]) -> bool:
        """Membership of a set of colours."""
        return self.member(frozenset(colors))


def standard_ash(parts: int, part_size: int, cap: int) -> Ash:
    """Sets meeting each of ``parts`` disjoint blocks in at most ``cap`` points."""
    if parts < 1 or part_size < 1 or cap < 1:
        raise InputError("delen, deelgrootte en cap moeten >= 1 zijn")
    ground = tuple(f"s{i}_{j}" for i in range(parts) for j in range(part_size))
    block = {token: int(token[1:].split("_")[0]) for token in ground}

    def member(colors: FrozenSet[str]) -> bool:
        counts: Dict[int, int] = {}
        for token in colors:
            if token not in block:
                return False
            counts[block[token]] = counts.get(block[token], 0) + 1
        return all(c <= cap for c in counts.values())

    return Ash(
        ground,
        member,
        "standard",
        {"parts": parts, "part_size": part_size, "cap": cap},
        downward_closed=True,
        trusted_bound=parts * min(part_size, cap) - 1,
    )


def _check_graph(g: Structure) -> FrozenSet[Tuple[int, int]]:
    if len(g.signature) != 1 or g.signature.arities[0] != 2:
        raise InputError("een graaf heeft precies één binaire relatie nodig")
    edges = g.tables[0]
    for x, y in edges:
        if x == y:
            raise InputError(f"graaf heeft een lus bij {x}")
        if (y, x) not in edges:
            raise InputError(f"graaf is gericht: ({x}, {y}) zonder ({y}, {x})")
    return edges


def graph_ash(g: Structure) -> Ash:
    """Sets of vertices containing a vertex adjacent to all the others."""
    edges = _check_graph(g)
    ground = tuple(f"v{i}" for i in range(g.size))
    index = {token: i for i, token in enumerate(ground)}

    def member(colors: FrozenSet[str]) -> bool:
        if any(token not in index for token in colors):
            return False
        vertices = [index[token] for token in colors]
        return not vertices or any(all(v == u or (v, u) in edges for u in vertices) for v in vertices)

    return Ash(ground, member, "graph", {"vertices": g.size}, downward_closed=False)


def _check_poset(p: Structure) -> FrozenSet[Tuple[int, int]]:
    if len(p.signature) != 1 or p.signature.arities[0] != 2:
        raise InputError("een partiële orde heeft precies één binaire relatie nodig")
    le = p.tables[0]
    for x in range(p.size):
        if (x, x) not in le:
            raise InputError(f"orde is niet reflexief bij {x}")
    for x, y in le:
        if x != y and (y, x) in le:
            raise InputError(f"orde is niet antisymmetrisch op {x}, {y}")
    for (x, y), (y2, z) in itertools.product(le, repeat=2):
        if y == y2 and (x, z) not in le:
            raise InputError(f"orde is niet transitief op {x}, {y}, {z}")
    return le


def poset_ash(p: Structure, labels: Optional[Sequence[str]] = None) -> Ash:
    """Sets of elements with a greatest element inside the set."""
    le = _check_poset(p)
    ground = tuple(f"p{i}" for i in range(p.size))
    index = {token: i for i, token in enumerate(ground)}

    def member(colors: FrozenSet[str]) -> bool:
        if any(token not in index for token in colors):
            return False
        elements = [index[token] for token in colors]
        return not elements or any(all((y, x) in le for y in elements) for x in elements)

    params: Dict[str, object] = {"elements": p.size}
    if labels is not None:
        params["labels"] = tuple(labels)
    return Ash(ground, member, "poset", params, downward_closed=False)


def subset_poset(n: int) -> Tuple[Structure, List[str]]:
    """Subsets of {0..n-1} ordered by inclusion, numbered by bitmask, with labels."""
    size = 1 << n
    le = frozenset((x, y) for x in range(size) for y in range(size) if x & y == x)
    labels = ["{" + ",".join(str(i) for i in range(n) if x >> i & 1) + "}" for x in range(size)]
    return Structure(Signature((("le", 2),)), size, (le,)), labels


def space_to_graph(m: MetricSpace) -> Structure:
    """Join two points when their distance is at least 1."""
    one = Fraction(1) if m.scalar_mode == "rational" else 1.0
    edges = frozenset(
        (x, y) for x in range(m.size) for y in range(m.size) if x != y and (m.d(x, y) >= one or m.close(m.d(x, y), one))
    )
    return Structure(Signature((("E", 2),)), m.size, (edges,))


def graph_to_space(g: Structure, scalar_mode: str = "rational") -> MetricSpace:
    """Distance 1 on edges and 1/2 on non-edges."""
    edges = _check_graph(g)
    rows = [
        [0 if x == y else (Fraction(1) if (x, y) in edges else Fraction(1, 2)) for y in range(g.size)]
        for x in range(g.size)
    ]
    return MetricSpace.from_matrix(rows, scalar_mode)


def space_graph_roundtrip(m: MetricSpace) -> Tuple[Structure, MetricSpace]:
    """The threshold graph of ``m`` and the {1/2, 1} space it gives back."""
    g = space_to_graph(m)
    return g, graph_to_space(g, m.scalar_mode)


# Axioms


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the finite axiom checks."""

    axiom1: bool
    axiom2: bool
    truncation: int
    trusted_bound: Optional[int]
    axiom1_failure: Optional[str] = None
    axiom2_failure: Optional[FrozenSet[str]] = None
    exhausted_at: Optional[FrozenSet[str]] = None
    axiom3_witness: Optional[FrozenSet[str]] = None
    axiom3_note: str = "not finitely checkable"


def _subsets(items: Sequence[str], max_size: Optional[int] = None) -> Iterator[FrozenSet[str]]:
    top = len(items) if max_size is None else min(max_size, len(items))
    for k in range(top + 1):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def _fresh_extender(a: Ash, union: FrozenSet[str]) -> Optional[str]:
    """A colour outside ``union`` that extends every member inside it."""
    family = [f for f in _subsets(sorted(union)) if a.member(f)]
    for s in a.ground:
        if s not in union and all(a.member(f | {s}) for f in family):
            return s
    return None


def _axiom3_witness(a: Ash) -> Optional[FrozenSet[str]]:
    if a.flavor == "standard":
        part_size, cap = a.params["part_size"], a.params["cap"]
        if part_size > cap:
            return frozenset(f"s0_{j}" for j in range(cap + 1))
        return None
    for pair in itertools.combinations(a.ground, 2):
        if not a.member(frozenset(pair)):
            return frozenset(pair)
    return None


def check_ash_axioms(a: Ash, truncation: int) -> AxiomReport:
    """Axiom 1 on the whole ground; axiom 2 on every union of size ≤ truncation.

    Axiom 2 for a union U is checked against the family of all members
    inside U, which is the hardest family with that union.
    """
    axiom1_failure = next((s for s in a.ground if not a.member(frozenset({s}))), None)
    failure = None
    exhausted = None
    for union in _subsets(a.ground, truncation):
        if _fresh_extender(a, union) is not None:
            continue
        if a.trusted_bound is not None and len(union) > a.trusted_bound:
            if exhausted is None:
                exhausted = union
                log.info("axiom 2 exhausts the finite ground at union size %d", len(union))
            continue
        failure = union
        break
    return AxiomReport(
        axiom1=axiom1_failure is None,
        axiom2=failure is None,
        truncation=truncation,
        trusted_bound=a.trusted_bound,
        axiom1_failure=axiom1_failure,
        axiom2_failure=failure,
        exhausted_at=exhausted,
        axiom3_witness=_axiom3_witness(a),
    )


# Coloured graphs


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of the five-condition membership test."""

    member: bool
    condition: Optional[int] = None
    detail: str = ""
    truncated: bool = False


def colored_graph(a: Ash, size: int, edges: Mapping[Tuple[int, int], str]) -> Structure:
    """Symmetric coloured graph from {(x, y): colour}."""
    tables: Dict[str, Set[Tuple[int, int]]] = {token: set() for token in a.ground}
    for (x, y), color in edges.items():
        if color not in tables:
            raise InputError(f"onbekende kleur {color}")
        tables[color].add((x, y))
        tables[color].add((y, x))
    return Structure(a.signature(), size, tuple(frozenset(tables[t]) for t in a.ground))


def color_sets(c: Structure) -> List[Set[str]]:
    """For each vertex, the colours of its edges."""
    sets: List[Set[str]] = [set() for _ in range(c.size)]
    for name, table in zip(c.signature.names, c.tables):
        for x, _ in table:
            sets[x].add(name)
    return sets


def _colors_ok(a: Ash, colors: FrozenSet[str], limit: int) -> Tuple[bool, bool]:
    """(every non-empty subset is a member, check was truncated)."""
    if a.downward_closed:
        return a.member(colors), False
    truncated = len(colors) > limit
    for subset in _subsets(sorted(colors), limit):
        if subset and not a.member(subset):
            return False, truncated
    return True, truncated


def as_membership(c: Structure, a: Ash, subset_limit: int = DEFAULT_SUBSET_LIMIT) -> MembershipReport:
    """Check the five conditions in order and report the first violated one."""
    if c.signature != a.signature():
        raise InputError("signatuur van de gekleurde graaf past niet bij de grondverzameling van de ash")
    named = list(zip(c.signature.names, c.tables))
    for name, table in named:
        for x, y in table:
            if x == y:
                return MembershipReport(False, 1, f"loop {name}({x},{x})")
    for name, table in named:
        for x, y in table:
            if (y, x) not in table:
                return MembershipReport(False, 2, f"{name}({x},{y}) without {name}({y},{x})")
    for x, y in itertools.combinations(range(c.size), 2):
        colors = [name for name, table in named if (x, y) in table]
        if len(colors) > 1:
            return MembershipReport(False, 3, f"pair ({x},{y}) has colours {', '.join(colors)}")
    for name, table in named:
        seen: Dict[int, int] = {}
        for x, y in sorted(table):
            if seen.setdefault(x, y) != y:
                return MembershipReport(False, 3, f"vertex {x} has two {name}-neighbours")
    for x, y in itertools.combinations(range(c.size), 2):
        if not any((x, y) in table for _, table in named):
            return MembershipReport(False, 4, f"pair ({x},{y}) has no colour")
    truncated = False
    for x, colors in enumerate(color_sets(c)):
        ok, cut = _colors_ok(a, frozenset(colors), subset_limit)
        truncated = truncated or cut
        if not ok:
            return MembershipReport(False, 5, f"colour set of vertex {x} is not a member", truncated)
    return MembershipReport(True, truncated=truncated)


class _Coloring:
    """Mutable colouring state for backtracking searches."""

    def __init__(self, a: Ash, size: int, subset_limit: int) -> None:
        self.a = a
        self.size = size
        self.subset_limit = subset_limit
        self.colors: List[Set[str]] = [set() for _ in range(size)]
        self.edges: Dict[Tuple[int, int], str] = {}

    def add_edge(self, x: int, y: int, color: str) -> None:
        self.edges[(x, y)] = color
        self.colors[x].add(color)
        self.colors[y].add(color)

    def remove_edge(self, x: int, y: int) -> None:
        color = self.edges.pop((x, y))
        self.colors[x].discard(color)
        self.colors[y].discard(color)

    def allowed(self, x: int, y: int, color: str) -> bool:
        if color in self.colors[x] or color in self.colors[y]:
            return False
        for v in (x, y):
            ok, _ = _colors_ok(self.a, frozenset(self.colors[v] | {color}), self.subset_limit)
            if not ok:
                return False
        return True

    def structure(self) -> Structure:
        return colored_graph(self.a, self.size, self.edges)


@dataclass(frozen=True)
class JoinResult:
    """A coloured graph containing both inputs, or the bare union when incomplete."""

    structure: Structure
    complete: bool


def directed_join(
    c1: Structure,
    c2: Structure,
    a: Ash,
    budget: int = DEFAULT_JOIN_BUDGET,
    subset_limit: int = DEFAULT_SUBSET_LIMIT,
) -> JoinResult:
    """Colour the cross pairs of the disjoint union, least colour first, backtracking."""
    for name, c in (("first", c1), ("second", c2)):
        report = as_membership(c, a, subset_limit)
        if not report.member:
            raise InputError(f"graaf {name} schendt voorwaarde {report.condition}: {report.detail}")
    union = disjoint_union(c1, c2)
    state = _Coloring(a, union.size, subset_limit)
    for name, table in zip(union.signature.names, union.tables):
        for x, y in table:
            if x < y:
                state.add_edge(x, y, name)
    cross = [(x, y) for x in range(c1.size) for y in range(c1.size, union.size)]
    steps = [0]

    def solve(i: int) -> bool:
        if i == len(cross):
            return True
        x, y = cross[i]
        for color in a.ground:
            steps[0] += 1
            if steps[0] > budget:
                return False
            if state.allowed(x, y, color):
                state.add_edge(x, y, color)
                if solve(i + 1):
                    return True
                state.remove_edge(x, y)
        return False

    if not solve(0):
        log.info("directed_join: no colouring of %d cross pairs found", len(cross))
        return JoinResult(union, complete=False)
    joined = state.structure()
    report = as_membership(joined, a, subset_limit)
    if not report.member:
        raise DataError(f"join schendt voorwaarde {report.condition}: {report.detail}")
    return JoinResult(joined, complete=True)


def enumerate_members(
    a: Ash,
    size: int,
    budget: Optional[int] = None,
    subset_limit: int = DEFAULT_SUBSET_LIMIT,
) -> Iterator[Structure]:
    """Every member coloured graph on ``size`` labelled vertices."""
    state = _Coloring(a, size, subset_limit)
    pairs = list(itertools.combinations(range(size), 2))
    steps = [0]

    def extend(i: int) -> Iterator[Structure]:
        if i == len(pairs):
            yield state.structure()
            return
        x, y = pairs[i]
        for color in a.ground:
            steps[0] += 1
            if budget is not None and steps[0] > budget:
                raise ResourceLimitError(f"opsomming van leden op {size} punten overschreed {budget} stappen")
            if state.allowed(x, y, color):
                state.add_edge(x, y, color)
                yield from extend(i + 1)
                state.remove_edge(x, y)

    yield from extend(0)


@dataclass(frozen=True)
class SizeBound:
    """Upper bound on member sizes, with an exhaustive certificate when feasible."""

    bound: int
    certified: bool
    checked_size: Optional[int] = None
    note: str = ""


def representation_size_bound(a: Ash, exhaustive_limit: int) -> SizeBound:
    """No member of a standard ash has more than parts·cap + 1 vertices.

    Each vertex sees its neighbours in pairwise distinct colours and its
    colour set meets each part at most cap times.
    """
    if a.flavor != "standard":
        raise InputError("representation_size_bound vereist een standaard-ash")
    bound = a.params["parts"] * a.params["cap"] + 1
    size = bound + 1
    if size > exhaustive_limit:
        return SizeBound(bound, False, None, f"certificate needs {size} vertices, limit is {exhaustive_limit}")
    witness = next(enumerate_members(a, size), None)
    if witness is not None:
        raise DataError(f"lid op {size} punten gevonden, boven de grens {bound}")
    return SizeBound(bound, True, size, f"no member on {size} vertices")
