"""Computational backends: structures, ideals, growth, metrics, ashes and the ternary encoding."""

from finite_ages.backend.structures import (
    age,
    canonical_form,
    find_embedding,
    is_embedding,
    reduct,
    restrict,
)
from finite_ages.backend.ideals import IdealOracle, minimal_amalgams
from finite_ages.backend.oracles import get_oracle

__all__ = [
    "age",
    "canonical_form",
    "find_embedding",
    "is_embedding",
    "reduct",
    "restrict",
    "IdealOracle",
    "minimal_amalgams",
    "get_oracle",
]
