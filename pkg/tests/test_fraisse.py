"""Tests for stage-by-stage growth."""

import pytest

from finite_ages.backend.fraisse import grow, member_order, verify_realization
from finite_ages.backend.ideals import IdealOracle
from finite_ages.backend.oracles import chain, linear_orders_oracle, triangle_free_oracle
from finite_ages.backend.structures import enumerate_structures
from finite_ages.data.types import Structure, binary_signature
from finite_ages.errors import InputError


class TestGrow:
    """Test growth runs."""

    def test_linear_orders(self):
        """Growing chains ends with a chain holding every smaller one."""
        o = linear_orders_oracle()
        g, growth = grow(o, 4, 3)
        assert growth.complete
        assert g.size == 3
        assert verify_realization(g, o, 3).equal

    def test_linear_orders_size_eight(self):
        """Chains up to size 4 are all realized within eight points."""
        o = linear_orders_oracle()
        g, growth = grow(o, 8, 4)
        assert growth.complete
        assert g.size <= 8
        assert verify_realization(g, o, 4).equal

    def test_triangle_free(self):
        """The triangle-free ideal is realized within ten points."""
        o = triangle_free_oracle()
        g, growth = grow(o, 10, 3, seed=1)
        assert growth.complete
        assert g.size <= 10
        assert verify_realization(g, o, 3).equal

    def test_stage_maps(self):
        """Each stage records embeddings of its member."""
        o = linear_orders_oracle()
        g, growth = grow(o, 4, 3)
        for stage, b in zip(growth.stages, member_order(o, 3, 0)):
            assert stage.witness.domain_size == b.size
        assert len(growth.stages) == 4

    def test_seed_determinism(self):
        """The same seed gives the same structure."""
        o = triangle_free_oracle()
        first, _ = grow(o, 10, 3, seed=7)
        second, _ = grow(o, 10, 3, seed=7)
        assert first == second

    def test_target_zero(self):
        """Target 0 returns the empty structure."""
        g, growth = grow(linear_orders_oracle(), 0, 0)
        assert g.size == 0
        assert growth.complete

    def test_target_too_small(self):
        """A tight target leaves the run incomplete."""
        g, growth = grow(linear_orders_oracle(), 2, 3)
        assert not growth.complete
        assert g.size <= 2
        assert growth.skipped

    def test_non_hereditary_rejected(self):
        """The precheck rejects oracles that are not initial segments."""
        sig = binary_signature(1)
        o = IdealOracle("no-points", sig, member=lambda s: s.size != 1, generator=lambda n: enumerate_structures(sig, n))
        with pytest.raises(InputError):
            grow(o, 4, 2)

    def test_negative_sizes(self):
        """Sizes must be non-negative."""
        with pytest.raises(InputError):
            grow(linear_orders_oracle(), -1, 2)

    def test_render(self):
        """The log renders one line per stage plus the verdict."""
        _, growth = grow(linear_orders_oracle(), 4, 2)
        lines = growth.render().splitlines()
        assert lines[-1] == "complete"
        assert len(lines) == len(growth.stages) + 1


class TestVerifyRealization:
    """Test age comparison against an oracle."""

    def test_missing_types(self):
        """A short chain misses the longer ones."""
        report = verify_realization(chain(2), linear_orders_oracle(), 3)
        assert not report.equal
        assert len(report.missing) == 1
        assert not report.extra

    def test_extra_types(self):
        """A non-order has types outside the oracle."""
        s = Structure.build(chain(2).signature, 2, {"lt": [(0, 1), (1, 0)]})
        report = verify_realization(s, linear_orders_oracle(), 2)
        assert report.extra

    def test_signature_mismatch(self):
        """Structure and oracle must share a signature."""
        with pytest.raises(InputError):
            verify_realization(Structure.empty(binary_signature(1), 1), linear_orders_oracle(), 1)
