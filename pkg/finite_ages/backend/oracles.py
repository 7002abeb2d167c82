"""Built-in ideal oracles, addressed by token."""

import itertools
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from finite_ages.backend.ash import as_membership, enumerate_members, standard_ash
from finite_ages.backend.ideals import IdealOracle
from finite_ages.backend.metric import (
    ThresholdEncoding,
    age_minus_A_member,
    age_t_member,
    decode_rel,
    embed_line,
    encode_rel,
    threshold_signature,
)
from finite_ages.backend.structures import MAX_ENUMERATION_BITS, enumerate_structures
from finite_ages.data.formats import parse_scalar
from finite_ages.data.types import MetricSpace, Signature, Structure, binary_signature
from finite_ages.errors import DataError, DecodeError, InputError, ResourceLimitError

DEFAULT_DIAMETER = 12

ORACLE_TOKENS = (
    "all",
    "all:<k>",
    "triangle-free",
    "linear-orders",
    "ash:<k>,<m>,<n>",
    "metric-line-t:<t>[@<D>]",
    "metric-omit:<a>,<b>,...[@<D>]",
)

GRAPH_SIGNATURE = Signature((("E", 2),))
ORDER_SIGNATURE = Signature((("lt", 2),))


def iter_graphs(n: int, signature: Signature = GRAPH_SIGNATURE) -> Iterator[Structure]:
    """All undirected loopless graphs on n labelled vertices."""
    pairs = list(itertools.combinations(range(n), 2))
    if len(pairs) > MAX_ENUMERATION_BITS:
        raise ResourceLimitError(f"{len(pairs)} puntparen overschrijden de limiet {MAX_ENUMERATION_BITS}")
    for mask in range(1 << len(pairs)):
        edges = set()
        for bit, (x, y) in enumerate(pairs):
            if mask >> bit & 1:
                edges.add((x, y))
                edges.add((y, x))
        yield Structure(signature, n, (frozenset(edges),))


def is_graph(s: Structure) -> bool:
    """Single symmetric irreflexive binary relation."""
    if len(s.signature) != 1 or s.signature.arities[0] != 2:
        return False
    edges = s.tables[0]
    return all(x != y and (y, x) in edges for x, y in edges)


def is_triangle_free(s: Structure) -> bool:
    """A graph without three pairwise adjacent vertices."""
    if not is_graph(s):
        return False
    edges = s.tables[0]
    return not any(
        (x, y) in edges and (y, z) in edges and (x, z) in edges
        for x, y, z in itertools.combinations(range(s.size), 3)
    )


def is_linear_order(s: Structure) -> bool:
    """A strict total order."""
    if len(s.signature) != 1 or s.signature.arities[0] != 2:
        return False
    lt = s.tables[0]
    for x in range(s.size):
        if (x, x) in lt:
            return False
    for x, y in itertools.combinations(range(s.size), 2):
        if ((x, y) in lt) == ((y, x) in lt):
            return False
    return all((x, z) in lt for (x, y), (y2, z) in itertools.product(lt, repeat=2) if y == y2)


def chain(n: int, signature: Signature = ORDER_SIGNATURE) -> Structure:
    """The order 0 < 1 < ... < n-1."""
    return Structure(signature, n, (frozenset(itertools.combinations(range(n), 2)),))


def full_oracle(k: int = 1) -> IdealOracle:
    """Every structure over k binary relations."""
    if k < 1:
        raise InputError("minstens één relatie nodig")
    signature = binary_signature(k)
    return IdealOracle(
        f"all:{k}",
        signature,
        member=lambda s: s.signature == signature,
        generator=lambda n: enumerate_structures(signature, n),
    )


def triangle_free_oracle() -> IdealOracle:
    """Finite triangle-free graphs."""
    return IdealOracle("triangle-free", GRAPH_SIGNATURE, member=is_triangle_free, generator=iter_graphs)


def linear_orders_oracle() -> IdealOracle:
    """Finite linear orders."""
    return IdealOracle("linear-orders", ORDER_SIGNATURE, member=is_linear_order, generator=lambda n: [chain(n)])


def ash_oracle(parts: int, part_size: int, cap: int) -> IdealOracle:
    """Coloured graphs satisfying the five membership conditions of a standard ash."""
    a = standard_ash(parts, part_size, cap)
    signature = a.signature()
    return IdealOracle(
        f"ash:{parts},{part_size},{cap}",
        signature,
        member=lambda s: s.signature == signature and as_membership(s, a).member,
        generator=lambda n: enumerate_members(a, n),
    )


def _line_thresholds(diameter: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(r) for r in range(1, diameter + 1))


def line_metric_oracle(name: str, predicate: Callable[[MetricSpace], bool], diameter: int = DEFAULT_DIAMETER) -> IdealOracle:
    """Integer subsets of the line with diameter ≤ ``diameter`` satisfying ``predicate``,
    encoded by thresholds 1..diameter."""
    if diameter < 1:
        raise InputError("diametergrens moet >= 1 zijn")
    thresholds = _line_thresholds(diameter)
    signature = threshold_signature(thresholds)

    def decode(s: Structure) -> Optional[MetricSpace]:
        if s.signature != signature:
            return None
        try:
            m = decode_rel(ThresholdEncoding(thresholds, s))
        except (DecodeError, DataError):
            return None
        if encode_rel(m, thresholds).structure != s or embed_line(m) is None:
            return None
        return m

    def member(s: Structure) -> bool:
        m = decode(s)
        return m is not None and predicate(m)

    def generator(n: int) -> Iterator[Structure]:
        if n == 0:
            yield Structure(signature, 0)
            return
        for rest in itertools.combinations(range(1, diameter + 1), n - 1):
            m = MetricSpace.from_points([0, *rest], "rational")
            yield encode_rel(m, thresholds).structure

    return IdealOracle(f"{name}@{diameter}", signature, member=member, generator=generator, scan_hosts=True)


def _split_diameter(body: str) -> Tuple[str, int]:
    if "@" in body:
        body, _, bound = body.partition("@")
        if not bound.isdigit():
            raise InputError(f"ongeldige diametergrens {bound!r}")
        return body, int(bound)
    return body, DEFAULT_DIAMETER


def _scalars(text: str) -> List[Fraction]:
    try:
        return [parse_scalar(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def get_oracle(token: str) -> IdealOracle:
    """Build the oracle named by ``token``."""
    token = token.strip()
    head, _, body = token.partition(":")
    if head == "all":
        if not body:
            return full_oracle(1)
        if not body.isdigit():
            raise InputError(f"ongeldig aantal relaties in {token!r}")
        return full_oracle(int(body))
    if token == "triangle-free":
        return triangle_free_oracle()
    if token == "linear-orders":
        return linear_orders_oracle()
    if head == "ash":
        values = body.split(",")
        if len(values) != 3 or not all(v.strip().isdigit() for v in values):
            raise InputError(f"ash:<k>,<m>,<n> verwacht, kreeg {token!r}")
        k, m, n = (int(v) for v in values)
        return ash_oracle(k, m, n)
    if head == "metric-line-t":
        body, diameter = _split_diameter(body)
        values = _scalars(body)
        if len(values) != 1 or not values[0] > 0:
            raise InputError(f"positieve t verwacht in {token!r}")
        t = values[0]
        return line_metric_oracle(f"metric-line-t:{body}", lambda m: age_t_member(m, t), diameter)
    if head == "metric-omit":
        body, diameter = _split_diameter(body)
        forbidden = _scalars(body)
        if any(not a > 0 for a in forbidden):
            raise InputError("verboden afstanden moeten positief zijn")
        return line_metric_oracle(f"metric-omit:{body}", lambda m: age_minus_A_member(m, forbidden), diameter)
    raise InputError(f"onbekend orakel {token!r}; bekend: {', '.join(ORACLE_TOKENS)}")


def oracle_table() -> Dict[str, str]:
    """Token -> one-line description, for help output."""
    return {
        "all": "alle structuren met één binaire relatie",
        "all:<k>": "alle structuren met k binaire relaties",
        "triangle-free": "driehoekvrije grafen",
        "linear-orders": "lineaire ordes",
        "ash:<k>,<m>,<n>": "gekleurde grafen van een standaard-as",
        "metric-line-t:<t>[@<D>]": "gehele deelverzamelingen van de lijn met afstanden >= t",
        "metric-omit:<a>,<b>,...[@<D>]": "gehele deelverzamelingen van de lijn zonder de gegeven afstanden",
    }
