import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballpark.core import (Bag, BagSet, Bound, ConstraintSet, Difference,
                           FeatureMatrix, Hyperparams, LabeledSet,
                           bag_proportion, derive_orderings,
                           estimated_proportion, sign, split_labeled,
                           validate)


def six_bag_setup():
    sizes = [200, 200, 50, 50, 100, 100]
    props = [.5, .5, .3, .3, .2, .2]
    bags, start = [], 0
    for k, s in enumerate(sizes):
        bags.append(Bag(f"B{k + 1}", range(start, start + s)))
        start += s
    bounds = [Bound(f"B{k + 1}", 0.5 * p, 0.5 if k == 0 else 1.0)
              for k, p in enumerate(props)]
    diffs = [Difference(f"B{a + 1}", f"B{b + 1}",
                        min(1.0, 1.33 * (props[a] - props[b])))
             for a in range(6) for b in range(6)
             if a != b and props[a] >= props[b]]
    return BagSet(bags), ConstraintSet(bounds, diffs), start


class TestSign:
    def test_tie_goes_positive(self):
        np.testing.assert_array_equal(sign([-2.0, 0.0, 3.0]), [-1, 1, 1])


class TestBagProportion:
    def test_half(self):
        assert bag_proportion([1, 1, -1, -1], Bag("b", range(4))) == 0.5

    def test_all_positive(self):
        assert bag_proportion([1, -1, 1], Bag("b", [0, 2])) == 1.0

    def test_unlabeled_member_errors(self):
        with pytest.raises(ValueError):
            bag_proportion([1, 0], Bag("b", [0, 1]))


class TestEstimatedProportion:
    def test_zero_is_midpoint(self):
        assert estimated_proportion(np.zeros(4), LabeledSet(),
                                    Bag("b", range(4))) == 0.5

    def test_all_ones(self):
        assert estimated_proportion(np.ones(4), LabeledSet(),
                                    Bag("b", range(4))) == 1.0

    def test_mixed_values(self):
        bag = Bag("b", range(4))
        # sum(y) = 0 -> midpoint
        assert estimated_proportion([1, -1, 0.5, -0.5], LabeledSet(),
                                    bag) == 0.5
        # sum(y) = 1 -> 1/8 + 1/2
        assert estimated_proportion([1, -1, 0.5, 0.5], LabeledSet(),
                                    bag) == 0.625

    def test_labeled_members_fixed(self):
        # y covers rows 0..1, rows 2..3 are labeled +1 and -1
        lab = LabeledSet([2, 3], [1, 1])
        p = estimated_proportion([-1, -1], lab, Bag("b", range(4)))
        assert p == 0.5

    def test_out_of_range_member(self):
        with pytest.raises(IndexError):
            estimated_proportion([0.0], LabeledSet(), Bag("b", [0, 5]))

    @given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=30))
    def test_matches_true_proportion_on_signs(self, labels):
        bag = Bag("b", range(len(labels)))
        assert estimated_proportion(np.array(labels, float), LabeledSet(),
                                    bag) == pytest.approx(
            bag_proportion(labels, bag), abs=1e-12)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-1, 1), min_size=2, max_size=20),
           st.integers(0, 19), st.floats(0, 1))
    def test_monotone_in_each_coordinate(self, y, j, bump):
        y = np.array(y)
        j = j % len(y)
        bag = Bag("b", range(len(y)))
        z = y.copy()
        z[j] = min(1.0, z[j] + bump)
        assert estimated_proportion(z, LabeledSet(), bag) >= \
            estimated_proportion(y, LabeledSet(), bag)


class TestValidate:
    def test_inverted_bound(self):
        out = validate(BagSet([Bag("a", [0])]),
                       ConstraintSet([Bound("a", 0.6, 0.4)]), 1)
        assert any("lower exceeds upper" in p for p in out)

    def test_self_difference(self):
        out = validate(BagSet([Bag("a", [0])]),
                       ConstraintSet(differences=[Difference("a", "a")]), 1)
        assert any("itself" in p for p in out)

    def test_six_bag_configuration_ok(self):
        bags, cons, n = six_bag_setup()
        assert validate(bags, cons, n) == []

    def test_reports_every_problem(self):
        out = validate(BagSet([Bag("a", [0, 7])]),
                       ConstraintSet([Bound("z", 0.2, 1.5)]), 2)
        assert len(out) == 3

    def test_empty_and_duplicate_bags(self):
        out = validate(BagSet([Bag("a", []), Bag("a", [0, 0])]),
                       ConstraintSet(), 1)
        assert len(out) == 3


class TestDeriveOrderings:
    def test_from_differences(self):
        cons = ConstraintSet(differences=[Difference("great", "good"),
                                          Difference("good", "bad")])
        assert derive_orderings(cons) == [("great", "good"), ("good", "bad")]

    def test_empty(self):
        assert derive_orderings(ConstraintSet()) == []

    def test_dedup(self):
        cons = ConstraintSet(differences=[Difference("A", "B")],
                             extra_orderings=[("A", "B")])
        assert derive_orderings(cons) == [("A", "B")]


class TestTypes:
    def test_labeled_labels_must_be_signed(self):
        with pytest.raises(ValueError):
            LabeledSet([0], [0])

    def test_labeled_unique(self):
        with pytest.raises(ValueError):
            LabeledSet([1, 1], [1, -1])

    def test_hyperparams_checks(self):
        with pytest.raises(ValueError):
            Hyperparams(C=-1)
        with pytest.raises(ValueError):
            Hyperparams(rel_tol=0)
        with pytest.raises(ValueError):
            Hyperparams(descent_mode="other")

    def test_feature_matrix_bias_checked(self):
        with pytest.raises(ValueError):
            FeatureMatrix.from_dense([[1.0, 0.5]], bias_index=1)

    def test_bagset_lookup(self):
        bags = BagSet([Bag("a", [2, 0]), Bag("b", [1])])
        assert set(bags["a"].members) == {0, 2}
        assert "b" in bags and "c" not in bags

    def test_split_labeled(self):
        unl, lab = split_labeled(Bag("b", [0, 3, 4, 1]), 3)
        np.testing.assert_array_equal(unl, [0, 1])
        np.testing.assert_array_equal(lab, [3, 4])
