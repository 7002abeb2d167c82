"""Data types for finite-ages."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from finite_ages.errors import DataError, InputError

Scalar = Union[Fraction, float]
RelTuple = Tuple[int, ...]


def _valid_name(name: str) -> bool:
    return bool(name) and "/" not in name and not any(ch.isspace() for ch in name) and not name.startswith("#")


@dataclass(frozen=True)
class Signature:
    """Ordered relation names with their arities.

    The order of entries is part of the identity: canonical codes and file
    round-trips depend on it.
    """

    entries: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        entries = tuple((str(name), int(arity)) for name, arity in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for name, arity in entries:
            if not _valid_name(name):
                raise InputError(f"ongeldige relatienaam: {name!r}")
            if arity < 1:
                raise InputError(f"relatie {name} heeft ariteit {arity}, verwacht >= 1")
            if name in seen:
                raise InputError(f"dubbele relatienaam: {name}")
            seen.add(name)

    @classmethod
    def of(cls, *entries: Tuple[str, int]) -> "Signature":
        """Build a signature from (name, arity) pairs."""
        return cls(tuple(entries))

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Parse "E/2 F/3" into a signature."""
        entries = []
        for token in text.split():
            name, sep, arity = token.rpartition("/")
            if not sep or not arity.isdigit():
                raise InputError(f"ongeldig signatuurelement: {token!r}")
            entries.append((name, int(arity)))
        return cls(tuple(entries))

    @property
    def names(self) -> Tuple[str, ...]:
        """Relation names in signature order."""
        return tuple(name for name, _ in self.entries)

    @property
    def arities(self) -> Tuple[int, ...]:
        """Arities in signature order."""
        return tuple(arity for _, arity in self.entries)

    def index(self, name: str) -> int:
        """Position of a relation name."""
        for i, (entry, _) in enumerate(self.entries):
            if entry == name:
                return i
        raise InputError(f"onbekende relatie: {name}")

    def arity(self, name: str) -> int:
        """Arity of a relation name."""
        return self.entries[self.index(name)][1]

    def restrict(self, names: Iterable[str]) -> "Signature":
        """Sub-signature on the given names, keeping the original order."""
        wanted = set(names)
        unknown = wanted - set(self.names)
        if unknown:
            raise InputError(f"onbekende relatie(s): {', '.join(sorted(unknown))}")
        return Signature(tuple(e for e in self.entries if e[0] in wanted))

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return " ".join(f"{name}/{arity}" for name, arity in self.entries)


def binary_signature(k: int, prefix: str = "R") -> Signature:
    """Signature with k binary relations named R0..R{k-1}."""
    return Signature(tuple((f"{prefix}{i}", 2) for i in range(k)))


@dataclass(frozen=True)
class Structure:
    """A finite relational structure on the elements 0..size-1.

    Relations are stored sparsely: ``tables[i]`` holds the tuples at which
    the i-th relation of the signature is true, everything else is false.
    """

    signature: Signature
    size: int
    tables: Tuple[FrozenSet[RelTuple], ...] = ()

    def __post_init__(self) -> None:
        tables = tuple(frozenset(tuple(int(e) for e in t) for t in table) for table in self.tables)
        if not tables:
            tables = tuple(frozenset() for _ in self.signature.entries)
        object.__setattr__(self, "tables", tables)
        if self.size < 0:
            raise InputError(f"negatieve structuurgrootte: {self.size}")
        if len(tables) != len(self.signature):
            raise InputError("aantal tabellen past niet bij de signatuur")
        for (name, arity), table in zip(self.signature.entries, tables):
            for t in table:
                if len(t) != arity:
                    raise InputError(f"tupel {t} heeft lengte {len(t)}, relatie {name} heeft ariteit {arity}")
                if any(e < 0 or e >= self.size for e in t):
                    raise InputError(f"tupel {t} van {name} valt buiten 0..{self.size - 1}")

    @classmethod
    def build(
        cls,
        signature: Signature,
        size: int,
        relations: Optional[Mapping[str, Iterable[Sequence[int]]]] = None,
    ) -> "Structure":
        """Build a structure from a name -> tuples mapping."""
        relations = relations or {}
        for name in relations:
            signature.index(name)
        tables = tuple(frozenset(tuple(t) for t in relations.get(name, ())) for name in signature.names)
        return cls(signature, size, tables)

    @classmethod
    def empty(cls, signature: Signature, size: int = 0) -> "Structure":
        """Structure with every relation false."""
        return cls(signature, size)

    @property
    def elements(self) -> range:
        """The base set 0..size-1."""
        return range(self.size)

    def table(self, name: str) -> FrozenSet[RelTuple]:
        """True tuples of a relation."""
        return self.tables[self.signature.index(name)]

    def holds(self, name: str, t: Sequence[int]) -> bool:
        """Whether relation ``name`` holds at ``t``."""
        return tuple(t) in self.table(name)

    @property
    def relations(self) -> Dict[str, FrozenSet[RelTuple]]:
        """Name -> true tuples."""
        return dict(zip(self.signature.names, self.tables))

    @property
    def tuple_count(self) -> int:
        """Total number of true tuples."""
        return sum(len(table) for table in self.tables)


@dataclass(frozen=True, order=True)
class IsoType:
    """Canonical code of a structure, invariant under relabeling."""

    size: int
    code: bytes

    def hex(self) -> str:
        """Short printable form of the code."""
        return self.code.hex()

    def __str__(self) -> str:
        return self.code.decode("utf-8")


@dataclass(frozen=True)
class ElementMap:
    """A map from 0..n-1 given by its image list."""

    images: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))

    @classmethod
    def identity(cls, n: int) -> "ElementMap":
        """Identity on 0..n-1."""
        return cls(tuple(range(n)))

    @property
    def domain_size(self) -> int:
        """Number of elements in the domain."""
        return len(self.images)

    @property
    def is_injective(self) -> bool:
        """Whether the images are pairwise distinct."""
        return len(set(self.images)) == len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def then(self, other: "ElementMap") -> "ElementMap":
        """The composite ``other ∘ self``."""
        return ElementMap(tuple(other.images[i] for i in self.images))

    def __str__(self) -> str:
        return " ".join(f"{x}->{y}" for x, y in enumerate(self.images))


def _is_zero(value: Scalar) -> bool:
    return value == 0


@dataclass(frozen=True)
class MetricSpace:
    """A finite metric space given by its distance matrix.

    Scalars are exact ``Fraction`` values in rational mode and ``float`` in
    float mode; float comparisons use the relative ``tolerance``.
    """

    dist: Tuple[Tuple[Scalar, ...], ...] = ()
    scalar_mode: str = "rational"
    tolerance: float = field(default=1e-9, compare=False)

    def __post_init__(self) -> None:
        if self.scalar_mode not in ("rational", "float"):
            raise InputError(f"onbekende getalmodus: {self.scalar_mode}")
        convert = Fraction if self.scalar_mode == "rational" else float
        try:
            rows = tuple(tuple(convert(v) for v in row) for row in self.dist)
        except (TypeError, ValueError) as exc:
            raise DataError(f"ongeldige afstand: {exc}") from exc
        object.__setattr__(self, "dist", rows)
        self._validate()

    def _validate(self) -> None:
        n = len(self.dist)
        for x, row in enumerate(self.dist):
            if len(row) != n:
                raise DataError("afstandsmatrix is niet vierkant")
            if not _is_zero(row[x]):
                raise DataError(f"d({x},{x}) = {row[x]} is niet 0")
        for x, y in itertools.combinations(range(n), 2):
            dxy = self.dist[x][y]
            if dxy != self.dist[y][x]:
                raise DataError(f"d({x},{y}) != d({y},{x})")
            if not dxy > 0:
                raise DataError(f"d({x},{y}) = {dxy} is niet positief")
        scale = max((v for row in self.dist for v in row), default=0)
        slack = 0 if self.scalar_mode == "rational" else self.tolerance * max(1.0, float(scale))
        for x, y, z in itertools.permutations(range(n), 3):
            if self.dist[x][z] > self.dist[x][y] + self.dist[y][z] + slack:
                raise DataError(f"driehoeksongelijkheid faalt op ({x},{y},{z})")

    @classmethod
    def from_matrix(
        cls,
        rows: Sequence[Sequence[Union[Scalar, int, str]]],
        scalar_mode: str = "rational",
        tolerance: float = 1e-9,
    ) -> "MetricSpace":
        """Build a space from a full matrix."""
        return cls(tuple(tuple(row) for row in rows), scalar_mode, tolerance)

    @classmethod
    def from_pairs(
        cls,
        n: int,
        pairs: Mapping[Tuple[int, int], Union[Scalar, int, str]],
        scalar_mode: str = "rational",
        tolerance: float = 1e-9,
    ) -> "MetricSpace":
        """Build a space from one value per unordered pair."""
        rows: List[List[Union[Scalar, int, str]]] = [[0] * n for _ in range(n)]
        for (x, y), value in pairs.items():
            rows[x][y] = value
            rows[y][x] = value
        return cls.from_matrix(rows, scalar_mode, tolerance)

    @classmethod
    def from_points(
        cls,
        points: Sequence[Union[Sequence[float], float, Fraction, int]],
        scalar_mode: str = "float",
        tolerance: float = 1e-9,
    ) -> "MetricSpace":
        """Euclidean distances between points (scalars are points on the line).

        Rational mode is exact only on the line; higher dimensions need
        square roots and are rejected there.
        """
        coords = [tuple(p) if isinstance(p, (tuple, list)) else (p,) for p in points]
        dims = {len(c) for c in coords}
        if len(dims) > 1:
            raise InputError("punten hebben verschillende dimensies")
        dim = dims.pop() if dims else 1
        if scalar_mode == "rational" and dim != 1:
            raise InputError("rationale modus ondersteunt alleen punten op de lijn")
        n = len(coords)
        rows: List[List[Scalar]] = [[0] * n for _ in range(n)]
        for x, y in itertools.combinations(range(n), 2):
            if scalar_mode == "rational":
                value: Scalar = abs(Fraction(coords[x][0]) - Fraction(coords[y][0]))
            else:
                value = math.dist([float(c) for c in coords[x]], [float(c) for c in coords[y]])
            rows[x][y] = rows[y][x] = value
        return cls.from_matrix(rows, scalar_mode, tolerance)

    @property
    def size(self) -> int:
        """Number of points."""
        return len(self.dist)

    def d(self, x: int, y: int) -> Scalar:
        """Distance between two points."""
        return self.dist[x][y]

    def pairs(self) -> Iterator[Tuple[int, int]]:
        """Unordered pairs of distinct points."""
        return itertools.combinations(range(self.size), 2)

    def restrict(self, subset: Iterable[int]) -> "MetricSpace":
        """Subspace on the given points, renumbered increasingly."""
        points = sorted(set(subset))
        if any(p < 0 or p >= self.size for p in points):
            raise InputError(f"punt buiten bereik in {points}")
        rows = tuple(tuple(self.dist[x][y] for y in points) for x in points)
        return MetricSpace(rows, self.scalar_mode, self.tolerance)

    def diameter(self) -> Scalar:
        """Largest distance (0 for at most one point)."""
        return max((self.dist[x][y] for x, y in self.pairs()), default=self._zero())

    def min_distance(self) -> Optional[Scalar]:
        """Smallest positive distance; None stands for +inf (at most one point)."""
        return min((self.dist[x][y] for x, y in self.pairs()), default=None)

    def ball(self, a: int, r: Scalar) -> List[int]:
        """Points at distance at most r from a."""
        return [x for x in range(self.size) if self.dist[a][x] <= r]

    def sphere(self, a: int, r: Scalar) -> List[int]:
        """Points at distance exactly r from a."""
        return [x for x in range(self.size) if self.close(self.dist[a][x], r)]

    def close(self, u: Scalar, v: Scalar) -> bool:
        """Equality of scalars in this space's mode."""
        if self.scalar_mode == "rational":
            return u == v
        return math.isclose(float(u), float(v), rel_tol=self.tolerance, abs_tol=self.tolerance)

    def _zero(self) -> Scalar:
        return Fraction(0) if self.scalar_mode == "rational" else 0.0
