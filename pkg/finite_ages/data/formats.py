"""Text formats for structures (.rst) and distance matrices (.dmat).

Both formats are UTF-8, line oriented, and ignore blank lines and ``#``
comments. Parse errors carry the line and column of the offending token.
"""

import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

from finite_ages.data.types import MetricSpace, Scalar, Signature, Structure
from finite_ages.errors import AgesError, ParseError

_TOKEN = re.compile(r"\S+")

Token = Tuple[str, int]


def _lines(text: str) -> List[Tuple[int, List[Token]]]:
    """Non-empty lines as (line number, [(token, column)])."""
    result = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        tokens = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]
        if tokens:
            result.append((number, tokens))
    return result


def _int(token: Token, line: int, what: str) -> int:
    text, column = token
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"geheel getal verwacht voor {what}, kreeg {text!r}", line, column) from None
    if value < 0:
        raise ParseError(f"{what} mag niet negatief zijn", line, column)
    return value


def parse_scalar(text: str, scalar_mode: str = "rational") -> Scalar:
    """Parse a decimal or ``p/q`` value in the given scalar mode."""
    try:
        if scalar_mode == "rational":
            return Fraction(text)
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"ongeldig getal: {text!r}") from None


def format_scalar(value: Union[Scalar, int]) -> str:
    """Format a scalar so that ``parse_scalar`` gives it back."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# Structures


def parse_structure(text: str) -> Structure:
    """Parse the structure text format.

    Example::

        signature E/2
        elements 3
        rel E 0 1
    """
    signature: Optional[Signature] = None
    size: Optional[int] = None
    tables: Dict[str, Set[Tuple[int, ...]]] = {}

    for line, tokens in _lines(text):
        keyword, column = tokens[0]
        if keyword == "signature":
            if signature is not None:
                raise ParseError("dubbele signature-regel", line, column)
            entries = []
            for token, col in tokens[1:]:
                name, sep, arity = token.rpartition("/")
                if not sep or not name or not arity.isdigit() or int(arity) < 1:
                    raise ParseError(f"ongeldig signatuurelement {token!r}", line, col)
                entries.append((name, int(arity)))
            try:
                signature = Signature(tuple(entries))
            except AgesError as exc:
                raise ParseError(str(exc), line, column) from None
            tables = {name: set() for name in signature.names}
        elif keyword == "elements":
            if size is not None:
                raise ParseError("dubbele elements-regel", line, column)
            if len(tokens) != 2:
                raise ParseError("'elements <n>' verwacht", line, column)
            size = _int(tokens[1], line, "element count")
        elif keyword == "rel":
            if signature is None or size is None:
                raise ParseError("rel-regel vóór signature en elements", line, column)
            if len(tokens) < 2:
                raise ParseError("relatienaam verwacht", line, column)
            name, name_col = tokens[1]
            if name not in tables:
                raise ParseError(f"onbekende relatie {name!r}", line, name_col)
            arity = signature.arity(name)
            if len(tokens) - 2 != arity:
                raise ParseError(f"relatie {name} vereist {arity} elementen, kreeg {len(tokens) - 2}", line, name_col)
            t = []
            for token in tokens[2:]:
                element = _int(token, line, "element")
                if element >= size:
                    raise ParseError(f"element {element} buiten bereik 0..{size - 1}", line, token[1])
                t.append(element)
            if tuple(t) in tables[name]:
                raise ParseError(f"dubbel tupel {tuple(t)} voor {name}", line, column)
            tables[name].add(tuple(t))
        else:
            raise ParseError(f"onbekend sleutelwoord {keyword!r}", line, column)

    if signature is None:
        signature = Signature()
    if size is None:
        raise ParseError("'elements'-regel ontbreekt", 1)
    return Structure(signature, size, tuple(frozenset(tables.get(n, ())) for n in signature.names))


def dump_structure(s: Structure) -> str:
    """Render a structure in the text format (tuples sorted)."""
    lines = [f"signature {s.signature}".rstrip(), f"elements {s.size}"]
    for name, table in zip(s.signature.names, s.tables):
        for t in sorted(table):
            lines.append(f"rel {name} " + " ".join(str(e) for e in t))
    return "\n".join(lines) + "\n"


# Distance matrices


def parse_metric(text: str, scalar_mode: str = "rational", tolerance: float = 1e-9) -> MetricSpace:
    """Parse the distance-matrix text format.

    Example::

        points 3
        d 0 1 1
        d 0 2 3/2
        d 1 2 1/2
    """
    n: Optional[int] = None
    pairs: Dict[Tuple[int, int], Scalar] = {}

    for line, tokens in _lines(text):
        keyword, column = tokens[0]
        if keyword == "points":
            if n is not None:
                raise ParseError("dubbele points-regel", line, column)
            if len(tokens) != 2:
                raise ParseError("'points <n>' verwacht", line, column)
            n = _int(tokens[1], line, "point count")
        elif keyword == "d":
            if n is None:
                raise ParseError("d-regel vóór points", line, column)
            if len(tokens) != 4:
                raise ParseError("'d <i> <j> <waarde>' verwacht", line, column)
            i = _int(tokens[1], line, "point")
            j = _int(tokens[2], line, "point")
            for value, token in ((i, tokens[1]), (j, tokens[2])):
                if value >= n:
                    raise ParseError(f"punt {value} buiten bereik 0..{n - 1}", line, token[1])
            if i == j:
                raise ParseError("afstand van een punt tot zichzelf is impliciet", line, tokens[2][1])
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise ParseError(f"dubbel paar {key}", line, column)
            try:
                pairs[key] = parse_scalar(tokens[3][0], scalar_mode)
            except ValueError as exc:
                raise ParseError(str(exc), line, tokens[3][1]) from None
        else:
            raise ParseError(f"onbekend sleutelwoord {keyword!r}", line, column)

    if n is None:
        raise ParseError("'points'-regel ontbreekt", 1)
    missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in pairs]
    if missing:
        i, j = missing[0]
        raise ParseError(f"afstand voor paar ({i}, {j}) ontbreekt", 1)
    return MetricSpace.from_pairs(n, pairs, scalar_mode, tolerance)


def dump_metric(m: MetricSpace) -> str:
    """Render a metric space in the distance-matrix format."""
    lines = [f"points {m.size}"]
    for i, j in m.pairs():
        lines.append(f"d {i} {j} {format_scalar(m.d(i, j))}")
    return "\n".join(lines) + "\n"


def read_text(path: Union[str, Path]) -> str:
    """Read a UTF-8 input file; undecodable bytes are parse errors."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        column = exc.start - (data.rfind(b"\n", 0, exc.start) + 1) + 1
        raise ParseError(f"ongeldige UTF-8-byte 0x{data[exc.start]:02x}", line, column) from None


def read_structure(path: Union[str, Path]) -> Structure:
    """Read a structure file."""
    return parse_structure(read_text(path))


def read_metric(path: Union[str, Path], scalar_mode: str = "rational", tolerance: float = 1e-9) -> MetricSpace:
    """Read a distance-matrix file."""
    return parse_metric(read_text(path), scalar_mode, tolerance)


def write_text(path: Union[str, Path], text: str) -> None:
    """Write an output file, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
