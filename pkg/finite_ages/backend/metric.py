"""Finite metric spaces as relational structures.

Threshold encodings, spectra, separated subsets, line and Euclidean
embeddability, omit-distance growth and isometries of additive groups of
the line.
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from finite_ages.data.formats import format_scalar
from finite_ages.data.types import ElementMap, MetricSpace, Scalar, Signature, Structure
from finite_ages.errors import DataError, DecodeError, InputError

log = logging.getLogger(__name__)

# Recomputed Euclidean distances must match within this relative error
COORDINATE_CHECK = 1e-6


# Threshold encoding


@dataclass(frozen=True)
class ThresholdEncoding:
    """rel(M) at a finite threshold set: δ_r(x, y) iff d(x, y) ≤ r."""

    thresholds: Tuple[Scalar, ...]
    structure: Structure
    scalar_mode: str = "rational"


def threshold_name(r: Scalar) -> str:
    """Relation name for δ_r, e.g. ``d3_2`` for r = 3/2."""
    return "d" + format_scalar(r).replace("/", "_")


def threshold_signature(thresholds: Sequence[Scalar]) -> Signature:
    """Binary signature (δ_r) for the given thresholds."""
    return Signature(tuple((threshold_name(r), 2) for r in thresholds))


def _check_thresholds(thresholds: Sequence[Scalar]) -> None:
    if not thresholds:
        raise InputError("lijst met drempels is leeg")
    if any(not r > 0 for r in thresholds):
        raise InputError("drempels moeten positief zijn")
    if any(a >= b for a, b in zip(thresholds, thresholds[1:])):
        raise InputError("drempels moeten strikt stijgen")


def _at_most(m: MetricSpace, u: Scalar, v: Scalar) -> bool:
    return u <= v or m.close(u, v)


def encode_rel(m: MetricSpace, thresholds: Optional[Sequence[Scalar]] = None) -> ThresholdEncoding:
    """Encode m by threshold relations.

    Without thresholds the positive spectrum of m is used, which always
    decodes back to m.
    """
    if thresholds is None:
        thresholds = [r for r in spectrum(m) if r > 0]
    else:
        thresholds = list(thresholds)
        _check_thresholds(thresholds)
    tables = []
    for r in thresholds:
        tables.append(
            frozenset((x, y) for x in range(m.size) for y in range(m.size) if _at_most(m, m.d(x, y), r))
        )
    structure = Structure(threshold_signature(thresholds), m.size, tuple(tables))
    return ThresholdEncoding(tuple(thresholds), structure, m.scalar_mode)


def decode_rel(e: ThresholdEncoding, tolerance: float = 1e-9) -> MetricSpace:
    """Distance of a pair = least threshold whose relation holds on it."""
    s = e.structure
    n = s.size
    rows: List[List[Scalar]] = [[0] * n for _ in range(n)]
    for x, y in itertools.combinations(range(n), 2):
        found = None
        for r, table in zip(e.thresholds, s.tables):
            forward, backward = (x, y) in table, (y, x) in table
            if forward != backward:
                raise DecodeError(f"drempel {format_scalar(r)} is niet symmetrisch op ({x}, {y})")
            if forward:
                found = r
                break
        if found is None:
            raise DecodeError(f"geen drempel geldt op het paar ({x}, {y})")
        rows[x][y] = rows[y][x] = found
    return MetricSpace.from_matrix(rows, e.scalar_mode, tolerance)


def thresholds_from_signature(signature: Signature, scalar_mode: str = "rational") -> Tuple[Scalar, ...]:
    """Recover thresholds from relation names ``d<r>``."""
    values: List[Scalar] = []
    for name, arity in signature.entries:
        if arity != 2 or not name.startswith("d"):
            raise DecodeError(f"relatie {name}/{arity} is geen drempelrelatie")
        try:
            value = Fraction(name[1:].replace("_", "/"))
        except (ValueError, ZeroDivisionError):
            raise DecodeError(f"kan geen drempel lezen uit {name!r}") from None
        values.append(value if scalar_mode == "rational" else float(value))
    try:
        _check_thresholds(values)
    except InputError as exc:
        raise DecodeError(str(exc)) from None
    return tuple(values)


# Spectra and separated sets


def spectrum(m: MetricSpace, base: Optional[int] = None) -> List[Scalar]:
    """Sorted realized distances, from ``base`` only when given (0 included)."""
    if base is not None and not 0 <= base < m.size:
        raise InputError(f"basispunt {base} buiten bereik")
    if m.size == 0:
        return []
    bases = [base] if base is not None else range(m.size)
    values = sorted({m.d(a, x) for a in bases for x in range(m.size)})
    merged: List[Scalar] = []
    for v in values:
        if not merged or not m.close(merged[-1], v):
            merged.append(v)
    return merged


@dataclass(frozen=True)
class OmegaResult:
    """Size of the largest t-separated subset.

    When ``exact`` is false, ``value`` is a lower bound and ``upper`` an
    upper bound.
    """

    value: int
    witness: Tuple[int, ...]
    exact: bool = True
    upper: Optional[int] = None


def separation_graph(m: MetricSpace, t: Scalar) -> nx.Graph:
    """Graph joining points at distance ≥ t."""
    g = nx.Graph()
    g.add_nodes_from(range(m.size))
    g.add_edges_from((x, y) for x, y in m.pairs() if _at_most(m, t, m.d(x, y)))
    return g


def omega_t(m: MetricSpace, t: Scalar, exact_limit: int = 24) -> OmegaResult:
    """Largest subset with all pairwise distances ≥ t (a maximum clique)."""
    if not t > 0:
        raise InputError("t moet positief zijn")
    if m.size == 0:
        return OmegaResult(0, ())
    g = separation_graph(m, t)
    if m.size <= exact_limit:
        clique, _ = nx.max_weight_clique(g, weight=None)
        return OmegaResult(len(clique), tuple(sorted(clique)))
    clique: List[int] = []
    for x in sorted(g.nodes, key=lambda v: (-g.degree(v), v)):
        if all(g.has_edge(x, y) for y in clique):
            clique.append(x)
    colors = nx.greedy_color(g, strategy="largest_first")
    upper = len(set(colors.values()))
    log.info("omega_t: %d points exceed the exact limit, bounds %d..%d", m.size, len(clique), upper)
    return OmegaResult(len(clique), tuple(sorted(clique)), exact=len(clique) == upper, upper=upper)


def packing_bound(diameter: Scalar, t: Scalar, dim: int) -> float:
    """Volume packing bound (1 + 2·diameter/t)^dim on t-separated subsets of ℝ^dim."""
    return (1 + 2 * float(diameter) / float(t)) ** dim


def age_t_member(m: MetricSpace, t: Scalar) -> bool:
    """Whether all pairwise distances are ≥ t."""
    low = m.min_distance()
    return low is None or _at_most(m, t, low)


def age_minus_A_member(m: MetricSpace, forbidden: Iterable[Scalar]) -> bool:
    """Whether no pairwise distance lies in ``forbidden``."""
    forbidden = list(forbidden)
    return not any(m.close(m.d(x, y), a) for x, y in m.pairs() for a in forbidden)


# Line and Euclidean embeddings


def embed_line(m: MetricSpace) -> Optional[List[Scalar]]:
    """Coordinates on the line with x_0 = 0 and x_1 = d(0, 1), if any."""
    if m.size == 0:
        return []
    coords: List[Scalar] = [m.d(0, 0)]
    if m.size == 1:
        return coords
    x1 = m.d(0, 1)
    coords.append(x1)
    for k in range(2, m.size):
        d0 = m.d(0, k)
        if m.close(abs(d0 - x1), m.d(1, k)):
            coords.append(d0)
        else:
            coords.append(-d0)
    for x, y in m.pairs():
        if not m.close(abs(coords[x] - coords[y]), m.d(x, y)):
            return None
    return coords


def gram_matrix(m: MetricSpace) -> np.ndarray:
    """Gram matrix anchored at point 0, over points 1..n-1."""
    d = np.array([[float(v) for v in row] for row in m.dist], dtype=float)
    sq = d**2
    return (sq[0, 1:][:, None] + sq[0, 1:][None, :] - sq[1:, 1:]) / 2


@dataclass(frozen=True)
class GramReport:
    """Spectral summary of the anchored Gram matrix."""

    eigenvalues: Tuple[float, ...]
    psd: bool
    rank: int


def gram_report(m: MetricSpace) -> GramReport:
    """Eigenvalues (descending), PSD verdict and numerical rank."""
    if m.size <= 1:
        return GramReport((), True, 0)
    g = gram_matrix(m)
    evals = np.linalg.eigvalsh(g)[::-1]
    trace = float(np.trace(g))
    largest = float(evals[0]) if len(evals) else 0.0
    psd = bool(evals[-1] >= -m.tolerance * max(trace, 0.0))
    rank = int(np.sum(evals > m.tolerance * largest)) if largest > 0 else 0
    return GramReport(tuple(float(v) for v in evals), psd, rank)


def embed_euclid(m: MetricSpace, dim: int) -> Optional[List[Tuple[float, ...]]]:
    """Coordinates in ℝ^dim realizing m, with point 0 at the origin.

    Embeddable iff the anchored Gram matrix is positive semidefinite of rank
    ≤ dim; coordinates come from its eigendecomposition.
    """
    if dim < 1:
        raise InputError("dim moet >= 1 zijn")
    if m.size == 0:
        return []
    if m.size == 1:
        return [(0.0,) * dim]
    report = gram_report(m)
    if not report.psd or report.rank > dim:
        return None
    evals, evecs = np.linalg.eigh(gram_matrix(m))
    order = np.argsort(evals)[::-1][:dim]
    scale = np.sqrt(np.clip(evals[order], 0.0, None))
    body = evecs[:, order] * scale
    if body.shape[1] < dim:
        body = np.hstack([body, np.zeros((body.shape[0], dim - body.shape[1]))])
    points = np.vstack([np.zeros((1, dim)), body])
    for x, y in m.pairs():
        target = float(m.d(x, y))
        got = float(np.linalg.norm(points[x] - points[y]))
        if abs(got - target) > COORDINATE_CHECK * target:
            log.debug("embed_euclid: recomputed d(%d,%d)=%g differs from %g", x, y, got, target)
            return None
    return [tuple(float(v) for v in row) for row in points]


@dataclass(frozen=True)
class NPlus3Report:
    """Both sides of the n+3 criterion for one space."""

    dim: int
    subsets_embed: bool
    whole_embeds: bool
    failing_subset: Optional[Tuple[int, ...]] = None

    @property
    def consistent(self) -> bool:
        return self.subsets_embed == self.whole_embeds


def check_n_plus_3(m: MetricSpace, dim: int) -> NPlus3Report:
    """Compare "every subset of ≤ dim+3 points embeds in ℝ^dim" with "m embeds"."""
    k = min(m.size, dim + 3)
    failing = None
    for subset in itertools.combinations(range(m.size), k):
        if embed_euclid(m.restrict(subset), dim) is None:
            failing = subset
            break
    whole = embed_euclid(m, dim) is not None
    report = NPlus3Report(dim, failing is None, whole, failing)
    if not report.consistent:
        log.warning("n+3 criterion disagrees on a %d-point space at dim %d", m.size, dim)
    return report


def rectangle_space(a: Scalar, b: Scalar, scalar_mode: str = "rational") -> MetricSpace:
    """Four points with sides a, b, a, b and both diagonals a + b."""
    s = a + b
    rows = [
        [0, a, s, b],
        [a, 0, b, s],
        [s, b, 0, a],
        [b, s, a, 0],
    ]
    return MetricSpace.from_matrix(rows, scalar_mode)


def coset_line(a: Scalar, b: Scalar, copies: int, scalar_mode: str = "rational") -> MetricSpace:
    """Points k·a and b + k·a for 0 ≤ k < copies."""
    if not 0 < b < a / 2:
        raise InputError("vereist 0 < b < a/2")
    points = sorted([k * a for k in range(copies)] + [b + k * a for k in range(copies)])
    return MetricSpace.from_points(points, scalar_mode)


def is_isometry(f: ElementMap, m: MetricSpace, m2: MetricSpace) -> bool:
    """Whether f preserves all distances from m into m2."""
    if f.domain_size != m.size or any(y < 0 or y >= m2.size for y in f.images):
        raise InputError("afbeelding past niet op de ruimtes")
    return f.is_injective and all(m.close(m.d(x, y), m2.d(f(x), f(y))) for x, y in m.pairs())


def concatenate_line(m1: MetricSpace, m2: MetricSpace, gap: Scalar) -> MetricSpace:
    """Place a line copy of m2 at distance ``gap`` to the right of m1."""
    c1, c2 = embed_line(m1), embed_line(m2)
    if c1 is None or c2 is None:
        raise InputError("beide ruimtes moeten in de lijn inbedden")
    shift = (max(c1) if c1 else 0) + gap - (min(c2) if c2 else 0)
    return MetricSpace.from_points(list(c1) + [x + shift for x in c2], m1.scalar_mode, m1.tolerance)


# Omit-distance growth


@dataclass(frozen=True)
class PlacementStage:
    """One injected target copy."""

    index: int
    translation: Optional[Scalar]
    points: Tuple[Scalar, ...] = ()


@dataclass
class OmitGrowth:
    """Point set on the line grown while avoiding forbidden distances."""

    points: List[Scalar] = field(default_factory=list)
    stages: List[PlacementStage] = field(default_factory=list)
    complete: bool = True


def _candidates(window: Scalar, width: Scalar, seed: int, scalar_mode: str) -> List[Scalar]:
    """Translations in [0, window - width]: a seed-shifted grid, plus √2 offsets in float mode."""
    room = window - width
    if room < 0:
        return []
    rng = random.Random(seed)
    if scalar_mode == "rational":
        step = Fraction(window) / 64
        start = step * Fraction(rng.randrange(997), 997)
    else:
        step = float(window) / 64
        start = step * rng.random()
    result: List[Scalar] = []
    k = 0
    while start + k * step <= room:
        base = start + k * step
        result.append(base)
        if scalar_mode == "float":
            nudged = base + step * ((math.sqrt(2) * (k + 1)) % 1)
            if nudged <= room:
                result.append(nudged)
        k += 1
    if scalar_mode == "rational" and start > 0:
        result.insert(0, Fraction(0))
    elif scalar_mode == "float" and start > 0:
        result.insert(0, 0.0)
    return result


def omit_distance_grow(
    forbidden: Sequence[Scalar],
    targets: Sequence[MetricSpace],
    window: Scalar,
    seed: int = 0,
    dim: int = 1,
    scalar_mode: str = "rational",
    tolerance: float = 1e-9,
) -> OmitGrowth:
    """Greedily place translated copies of the targets inside [0, window].

    A copy is accepted when it hits no existing point and creates no
    distance in ``forbidden``. Targets that cannot be placed leave the
    result flagged incomplete.
    """
    if dim != 1:
        raise InputError("omit_distance_grow plaatst kopieën alleen op de lijn")
    if not window > 0:
        raise InputError("venster moet positief zijn")
    ruler = MetricSpace((), scalar_mode, tolerance)
    growth = OmitGrowth()
    for index, target in enumerate(targets):
        if not age_minus_A_member(target, forbidden):
            raise InputError(f"doel {index} bevat een verboden afstand")
        coords = embed_line(target)
        if coords is None:
            raise InputError(f"doel {index} bedt niet in in de lijn")
        low = min(coords) if coords else 0
        coords = [c - low for c in coords]
        width = max(coords) if coords else 0
        placed = None
        for shift in _candidates(window, width, seed + index, scalar_mode):
            new = [c + shift for c in coords]
            if all(
                not ruler.close(abs(p - q), 0) and not any(ruler.close(abs(p - q), a) for a in forbidden)
                for p in growth.points
                for q in new
            ):
                placed = (shift, new)
                break
        if placed is None:
            log.info("omit-grow: no placement for target %d inside the window", index)
            growth.complete = False
            growth.stages.append(PlacementStage(index, None))
            continue
        shift, new = placed
        growth.points.extend(new)
        growth.stages.append(PlacementStage(index, shift, tuple(new)))
        union = MetricSpace.from_points(growth.points, scalar_mode, tolerance)
        if not age_minus_A_member(union, forbidden):
            raise DataError(f"plaatsing van doel {index} gaf een verboden afstand")
    return growth


# Isometries of additive groups on the line


@dataclass(frozen=True)
class IsometryExtension:
    """g⁺(y) = x' + y - x (translation) or g⁻(y) = x' - y + x (reflection)."""

    kind: str
    anchor: Tuple[Fraction, Fraction]

    def __call__(self, y: Fraction) -> Fraction:
        x, x2 = self.anchor
        return x2 + y - x if self.kind == "translation" else x2 - y + x


def group_step(generators: Iterable[Scalar]) -> Fraction:
    """Positive generator of the additive group spanned by rational generators."""
    values = [Fraction(g) for g in generators if Fraction(g) != 0]
    if not values:
        raise InputError("minstens één voortbrenger ongelijk aan nul nodig")
    numerator = reduce(math.gcd, (abs(v.numerator) for v in values))
    denominator = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values))
    return Fraction(numerator, denominator)


def group_homogeneity_extend(
    generators: Iterable[Scalar],
    window: Scalar,
    partial: Sequence[Tuple[Scalar, Scalar]],
) -> Optional[IsometryExtension]:
    """Extend a partial isometry of G ∩ [-window, window] to g⁺ or g⁻."""
    step = group_step(generators)
    window = Fraction(window)
    pairs = [(Fraction(s), Fraction(t)) for s, t in partial]
    for s, t in pairs:
        for v in (s, t):
            if (v / step).denominator != 1 or abs(v) > window:
                raise InputError(f"{format_scalar(v)} ligt niet in de groep binnen het venster")
    mapping = {}
    for s, t in pairs:
        if mapping.setdefault(s, t) != t:
            raise InputError(f"{format_scalar(s)} heeft twee beelden")
    for (s1, t1), (s2, t2) in itertools.combinations(pairs, 2):
        if abs(s1 - s2) != abs(t1 - t2):
            raise InputError(f"geen isometrie: |{format_scalar(s1)} - {format_scalar(s2)}| != |{format_scalar(t1)} - {format_scalar(t2)}|")
    if not pairs:
        return IsometryExtension("translation", (Fraction(0), Fraction(0)))
    x, x2 = pairs[0]
    for kind in ("translation", "reflection"):
        g = IsometryExtension(kind, (x, x2))
        if all(g(s) == t for s, t in pairs):
            return g
    return None


def spectrum_closure_violations(values: Iterable[Scalar], window: Scalar) -> List[Tuple[Scalar, Scalar, str]]:
    """Pairs x ≤ y of V with y - x ∉ V, or x + y ∉ V while x + y ≤ window."""
    v = sorted(set(values))
    present = set(v)
    violations = []
    for x, y in itertools.combinations_with_replacement(v, 2):
        if y - x not in present:
            violations.append((x, y, "difference"))
        if x + y <= window and x + y not in present:
            violations.append((x, y, "sum"))
    return violations
