"""Tests for the structure and distance-matrix text formats."""

from fractions import Fraction

import pytest

from finite_ages.data.formats import (
    dump_metric,
    dump_structure,
    format_scalar,
    parse_metric,
    parse_scalar,
    parse_structure,
    read_metric,
    read_structure,
    write_text,
)
from finite_ages.data.types import MetricSpace
from finite_ages.errors import DataError, ParseError

GRAPH = """# a path
signature E/2
elements 3
rel E 0 1
rel E 1 0   # back edge
rel E 1 2
rel E 2 1
"""


class TestParseStructure:
    """Test structure parsing."""

    def test_basic(self):
        """Comments and blank lines are ignored."""
        s = parse_structure(GRAPH)
        assert s.size == 3
        assert s.signature.names == ("E",)
        assert s.tables[0] == frozenset({(0, 1), (1, 0), (1, 2), (2, 1)})

    def test_dump_then_parse(self):
        """Dumped text parses back to the same structure."""
        s = parse_structure(GRAPH)
        assert parse_structure(dump_structure(s)) == s

    def test_dump_sorted(self):
        """Dumped tuples are sorted."""
        lines = dump_structure(parse_structure(GRAPH)).splitlines()
        assert lines[2:] == ["rel E 0 1", "rel E 1 0", "rel E 1 2", "rel E 2 1"]

    def test_out_of_range_position(self):
        """Out-of-range elements report line and column."""
        with pytest.raises(ParseError) as info:
            parse_structure("signature E/2\nelements 2\nrel E 0 5\n")
        assert info.value.line == 3
        assert info.value.column == 9

    def test_unknown_relation(self):
        """Unknown relation names are errors."""
        with pytest.raises(ParseError) as info:
            parse_structure("signature E/2\nelements 2\nrel F 0 1\n")
        assert info.value.column == 5

    def test_arity_mismatch(self):
        """Tuples must match the arity."""
        with pytest.raises(ParseError):
            parse_structure("signature E/2\nelements 2\nrel E 0\n")

    def test_duplicate_tuple(self):
        """Repeated tuples are errors."""
        with pytest.raises(ParseError) as info:
            parse_structure("signature E/2\nelements 2\nrel E 0 1\nrel E 0 1\n")
        assert info.value.line == 4

    def test_missing_elements(self):
        """The elements line is required."""
        with pytest.raises(ParseError):
            parse_structure("signature E/2\n")

    def test_unknown_keyword(self):
        """Unknown keywords are errors."""
        with pytest.raises(ParseError):
            parse_structure("signature E/2\nelements 1\nedge 0 0\n")

    def test_bad_signature_entry(self):
        """Signature entries need name/arity."""
        with pytest.raises(ParseError) as info:
            parse_structure("signature E/2 F\nelements 1\n")
        assert info.value.column == 15

    def test_empty_signature(self):
        """A structure may have no relations."""
        s = parse_structure("signature\nelements 4\n")
        assert s.size == 4
        assert len(s.signature) == 0


class TestParseMetric:
    """Test distance-matrix parsing."""

    TEXT = "points 3\nd 0 1 1\nd 0 2 3/2\nd 1 2 1/2\n"

    def test_rational(self):
        """Values parse exactly in rational mode."""
        m = parse_metric(self.TEXT)
        assert m.d(0, 2) == Fraction(3, 2)
        assert m.d(2, 0) == Fraction(3, 2)

    def test_float(self):
        """Values become floats in float mode."""
        m = parse_metric(self.TEXT, "float")
        assert m.d(1, 2) == 0.5

    def test_dump_then_parse(self):
        """Dumped text parses back."""
        m = parse_metric(self.TEXT)
        assert parse_metric(dump_metric(m)) == m

    def test_missing_pair(self):
        """Every pair needs a distance."""
        with pytest.raises(ParseError):
            parse_metric("points 3\nd 0 1 1\nd 0 2 1\n")

    def test_self_distance(self):
        """d i i is rejected."""
        with pytest.raises(ParseError):
            parse_metric("points 2\nd 1 1 0\n")

    def test_bad_value(self):
        """Bad scalars report their column."""
        with pytest.raises(ParseError) as info:
            parse_metric("points 2\nd 0 1 abc\n")
        assert info.value.line == 2
        assert info.value.column == 7

    def test_triangle_violation(self):
        """A triangle violation is a data error."""
        with pytest.raises(DataError):
            parse_metric("points 3\nd 0 1 1\nd 1 2 1\nd 0 2 3\n")

    def test_zero_distance(self):
        """Distinct points need positive distance."""
        with pytest.raises(DataError):
            MetricSpace.from_pairs(2, {(0, 1): 0})


class TestScalars:
    """Test scalar parsing and formatting."""

    def test_fraction_format(self):
        """Fractions print as p or p/q."""
        assert format_scalar(Fraction(3, 2)) == "3/2"
        assert format_scalar(Fraction(4)) == "4"

    def test_decimal_is_exact(self):
        """Decimals become exact fractions in rational mode."""
        assert parse_scalar("0.1") == Fraction(1, 10)

    def test_float_fraction_text(self):
        """p/q is accepted in float mode."""
        assert parse_scalar("1/4", "float") == 0.25

    def test_bad_scalar(self):
        """Bad text raises ValueError."""
        with pytest.raises(ValueError):
            parse_scalar("1/0")


class TestFiles:
    """Test file helpers."""

    def test_write_and_read(self, tmp_path):
        """write_text creates parent directories."""
        path = tmp_path / "out" / "g.rst"
        write_text(path, GRAPH)
        assert read_structure(path).size == 3

    def test_invalid_utf8(self, tmp_path):
        """Undecodable bytes are parse errors with a position."""
        path = tmp_path / "bad.rst"
        path.write_bytes(b"signature E/2\nelements \xff2\n")
        with pytest.raises(ParseError) as info:
            read_structure(path)
        assert info.value.line == 2
        assert info.value.column == 10

    def test_invalid_utf8_metric(self, tmp_path):
        """Distance files get the same check."""
        path = tmp_path / "bad.dmat"
        path.write_bytes(b"\xfe")
        with pytest.raises(ParseError) as info:
            read_metric(path)
        assert (info.value.line, info.value.column) == (1, 1)
