"""Data types and text formats."""

from finite_ages.data.types import (
    ElementMap,
    IsoType,
    MetricSpace,
    Scalar,
    Signature,
    Structure,
    binary_signature,
)
from finite_ages.data.formats import (
    dump_metric,
    dump_structure,
    parse_metric,
    parse_scalar,
    parse_structure,
    read_metric,
    read_structure,
)

__all__ = [
    "ElementMap",
    "IsoType",
    "MetricSpace",
    "Scalar",
    "Signature",
    "Structure",
    "binary_signature",
    "dump_metric",
    "dump_structure",
    "parse_metric",
    "parse_scalar",
    "parse_structure",
    "read_metric",
    "read_structure",
]
