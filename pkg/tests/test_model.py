import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaudin.model import (
    InvalidSpec,
    LengthMismatch,
    NotCanonical,
    RootSet,
    SystemSpec,
    canonicalize,
    momentum_labels,
    reduced_labels,
    same_physical_solution,
    validate_spec,
)


class TestValidateSpec:
    def test_ok(self):
        validate_spec(SystemSpec(3, 1.0, 1.0), (1, 2, 3))

    def test_zero_coupling(self):
        with pytest.raises(InvalidSpec, match="coupling"):
            validate_spec(SystemSpec(2, 1.0, 0.0), (1, 2))

    def test_length_mismatch(self):
        with pytest.raises(InvalidSpec, match="length 1"):
            validate_spec(SystemSpec(2, 1.0, 1.0), (1,))

    def test_reports_every_violation(self):
        with pytest.raises(InvalidSpec) as info:
            validate_spec(SystemSpec(0, -1.0, -2.0), ())
        msg = str(info.value)
        assert "n_particles" in msg and "length" in msg and "coupling" in msg


class TestCanonicalize:
    def test_identity(self):
        cf = canonicalize((1, 2, 3))
        assert cf.canonical_n == (1, 2, 3)
        assert cf.sign_map == (1, 1, 1)
        assert not cf.zero_reduced
        assert cf.permutation == (0, 1, 2)

    def test_negative_flipped(self):
        cf = canonicalize((-2, 3))
        assert cf.canonical_n == (2, 3)
        assert cf.sign_map == (-1, 1)

    def test_zero_pins_one_root(self):
        cf = canonicalize((0, 2))
        assert cf.canonical_n == (2,)
        assert cf.zero_reduced and cf.pinned_index == 0
        assert cf.n_unknowns == 1
        assert cf.excluded_by_physics

    def test_multiple_zeros_keep_one_pinned(self):
        cf = canonicalize((0, 3, 0))
        assert cf.pinned_index == 0
        assert cf.canonical_n == (0, 3)
        assert cf.zero_count == 2

    def test_unsorted_records_permutation(self):
        cf = canonicalize((3, -1, 2))
        assert cf.canonical_n == (1, 2, 3)
        assert cf.permutation == (1, 2, 0)

    def test_restore_applies_signs_and_order(self):
        cf = canonicalize((3, -1, 0, 2))
        out = cf.restore([10.0, 20.0, 30.0])
        np.testing.assert_array_equal(out, [30.0, -10.0, 0.0, 20.0])

    def test_equivalence_class_size(self):
        assert canonicalize((2, 2, 5, 5, 5)).equivalence_class_size == 2 * 6
        assert canonicalize((1, 2)).equivalence_class_size == 1

    @given(st.lists(st.integers(-20, 20).filter(bool), min_size=1, max_size=8))
    def test_idempotent(self, n):
        once = canonicalize(n)
        twice = canonicalize(once.canonical_n)
        assert twice.canonical_n == once.canonical_n
        assert twice.sign_map == (1,) * len(n)
        assert twice.permutation == tuple(range(len(n)))
        assert not twice.zero_reduced

    @given(st.lists(st.integers(-20, 20), min_size=1, max_size=8))
    def test_sign_map_marks_negatives(self, n):
        cf = canonicalize(n)
        assert all((s == -1) == (v < 0) for s, v in zip(cf.sign_map, n))
        assert list(cf.canonical_n) == sorted(cf.canonical_n)
        assert all(v >= 0 for v in cf.canonical_n)


class TestMomentumLabels:
    @pytest.mark.parametrize("n, expected", [
        ((1, 2, 3), (1, 3, 5)),
        ((1, 1, 1), (1, 2, 3)),
        ((5,), (5,)),
    ])
    def test_examples(self, n, expected):
        assert momentum_labels(n).labels == expected

    def test_rejects_unsorted(self):
        with pytest.raises(NotCanonical):
            momentum_labels((2, 1))

    def test_rejects_nonpositive(self):
        with pytest.raises(NotCanonical):
            momentum_labels((0, 1))

    def test_reduced_labels_start_at_second_slot(self):
        assert reduced_labels((2,)).labels == (3,)
        assert reduced_labels((0, 2, 2)).labels == (1, 4, 5)

    def test_strictly_increasing_exhaustive(self):
        for N in range(1, 5):
            for n in itertools.combinations_with_replacement(range(1, 6), N):
                I = momentum_labels(n).labels
                assert all(b > a for a, b in zip(I, I[1:]))
                assert min(I) >= 1


class TestSamePhysicalSolution:
    def test_permutation(self):
        assert same_physical_solution((1.0, 2.0), (2.0, 1.0), 1e-12)

    def test_sign(self):
        assert same_physical_solution((1.0, 2.0), (-1.0, 2.0), 1e-12)

    def test_distinct(self):
        assert not same_physical_solution((1.0, 2.0), (1.0, 2.1), 1e-6)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            same_physical_solution((1.0,), (1.0, 2.0), 1e-6)


def test_rootset_rejects_nonfinite():
    with pytest.raises(ValueError):
        RootSet((1.0, math.inf))
    assert RootSet((1.0, 2.0)).as_array().tolist() == [1.0, 2.0]
