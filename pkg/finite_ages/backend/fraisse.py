"""Stage-by-stage growth of a structure whose age matches an ideal on a truncation."""

import logging
import random
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from finite_ages.backend.ideals import DEFAULT_BUDGET, IdealOracle, is_initial_segment, is_up_directed, joint_extension
from finite_ages.backend.structures import age, canonical_form, find_embedding
from finite_ages.data.types import ElementMap, IsoType, Structure
from finite_ages.errors import DataError, InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthStage:
    """One stage: the member handled, the size after it and the maps that witness it."""

    index: int
    injected: IsoType
    size: int
    embedding: ElementMap
    witness: ElementMap


@dataclass
class GrowthLog:
    """All stages of a growth run; ``complete`` is false when some member was left out."""

    stages: List[GrowthStage] = field(default_factory=list)
    complete: bool = True
    skipped: List[IsoType] = field(default_factory=list)

    def render(self) -> str:
        """One line per stage."""
        lines = []
        for stage in self.stages:
            lines.append(
                f"stage {stage.index} size {stage.size} type {stage.injected.hex()} "
                f"prev [{stage.embedding}] via [{stage.witness}]"
            )
        for code in self.skipped:
            lines.append(f"skipped type {code.hex()}")
        lines.append("complete" if self.complete else "incomplete")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RealizationReport:
    """Comparison of a structure's truncated age with an oracle's members."""

    missing: FrozenSet[IsoType]
    extra: FrozenSet[IsoType]

    @property
    def equal(self) -> bool:
        return not self.missing and not self.extra


def member_order(o: IdealOracle, check_size: int, seed: int) -> List[Structure]:
    """Members of size ≤ check_size, size-then-code order shuffled by seed."""
    members = o.members_up_to(check_size)
    random.Random(seed).shuffle(members)
    return members


def grow(
    o: IdealOracle,
    target_size: int,
    check_size: int,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    check_ideal: bool = True,
    jobs: int = 1,
) -> Tuple[Structure, GrowthLog]:
    """Extend a structure by every member in turn, never beyond target_size points."""
    if target_size < 0 or check_size < 0:
        raise InputError("groottes moeten >= 0 zijn")
    g = Structure.empty(o.signature)
    if target_size == 0:
        return g, GrowthLog(complete=check_size == 0)
    if check_ideal:
        segment = is_initial_segment(o, check_size)
        if not segment.holds:
            raise InputError(f"orakel {o.name} is geen beginstuk tot grootte {check_size}")
        directed = is_up_directed(o, check_size, 2 * check_size, budget, jobs)
        if not directed.holds:
            raise InputError(f"orakel {o.name} is niet opwaarts gericht tot grootte {check_size}")
    allowed = o.member_codes(check_size)
    growth = GrowthLog()
    for index, b in enumerate(member_order(o, check_size, seed)):
        code = canonical_form(b)
        f = find_embedding(b, g)
        if f is not None:
            growth.stages.append(GrowthStage(index, code, g.size, ElementMap.identity(g.size), f))
            continue
        ext = joint_extension(g, b, o, target_size, budget)
        if ext is None:
            log.info("stage %d: no extension within %d points", index, target_size)
            growth.complete = False
            growth.skipped.append(code)
            continue
        g = ext.structure
        growth.stages.append(GrowthStage(index, code, g.size, ext.left, ext.right))
        log.debug("stage %d: %d points", index, g.size)
        unsound = age(g, check_size, jobs) - allowed
        if unsound:
            raise DataError(f"stap {index} gaf {len(unsound)} types buiten het orakel")
    return g, growth


def verify_realization(g: Structure, o: IdealOracle, check_size: int, jobs: int = 1) -> RealizationReport:
    """Missing and extra types of age(g) against the oracle, up to check_size."""
    if g.signature != o.signature:
        raise InputError("structuur en orakel moeten dezelfde signatuur hebben")
    seen = age(g, check_size, jobs)
    allowed = o.member_codes(check_size)
    return RealizationReport(missing=allowed - seen, extra=seen - allowed)
