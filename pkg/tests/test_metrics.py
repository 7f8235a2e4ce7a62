import math

import numpy as np
import pytest

from fairlists.errors import EmptyGroup, LabelsRequired, LengthMismatch, UndefinedRate
from fairlists.metrics import (
    MetricKind,
    group_counts,
    unfairness,
    unfairness_of,
    unfairness_or_nan,
)

from oracles import naive_unfairness

ALL_KINDS = list(MetricKind)


class TestMetricKind:
    def test_from_flag(self):
        assert MetricKind.from_flag("dp") is MetricKind.DEMOGRAPHIC_PARITY
        assert MetricKind.from_flag("sp") is MetricKind.STATISTICAL_PARITY
        assert MetricKind.from_flag("oae") is MetricKind.OVERALL_ACCURACY_EQUALITY
        assert MetricKind.from_flag("cpa") is MetricKind.CONDITIONAL_PROCEDURE_ACCURACY

    def test_unknown_flag(self):
        with pytest.raises(ValueError):
            MetricKind.from_flag("eo")

    def test_needs_labels(self):
        assert not MetricKind.DEMOGRAPHIC_PARITY.needs_labels
        assert not MetricKind.STATISTICAL_PARITY.needs_labels
        assert MetricKind.OVERALL_ACCURACY_EQUALITY.needs_labels
        assert MetricKind.CONDITIONAL_PROCEDURE_ACCURACY.needs_labels


class TestGroupCounts:
    def test_separable(self):
        gc = group_counts([1, 1, 0, 0], None, [1, 1, 0, 0])
        assert gc.n == (2, 2)
        assert gc.pos == (0, 2)
        assert not gc.has_labels

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            group_counts([1, 0], None, [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            group_counts([1, 0, 1], None, [1, 0])
        with pytest.raises(LengthMismatch):
            group_counts([1, 0], [1], [1, 0])

    def test_confusion_counts_vs_loop(self):
        rng = np.random.default_rng(2)
        preds = rng.integers(0, 2, size=20)
        labels = rng.integers(0, 2, size=20)
        s = np.array([0, 1] * 10)
        gc = group_counts(preds, labels, s)
        for g in (0, 1):
            rows = [i for i in range(20) if s[i] == g]
            assert gc.n[g] == len(rows)
            assert gc.pos[g] == sum(preds[i] for i in rows)
            assert gc.tp[g] == sum(1 for i in rows if preds[i] == 1 and labels[i] == 1)
            assert gc.fp[g] == sum(1 for i in rows if preds[i] == 1 and labels[i] == 0)
            assert gc.tn[g] == sum(1 for i in rows if preds[i] == 0 and labels[i] == 0)
            assert gc.fn[g] == sum(1 for i in rows if preds[i] == 0 and labels[i] == 1)
            assert gc.tp[g] + gc.fp[g] + gc.tn[g] + gc.fn[g] == gc.n[g]


class TestUnfairness:
    def test_constant_predictor_dp_zero(self):
        gc = group_counts([1, 1, 1, 1], None, [0, 0, 1, 1])
        assert unfairness(MetricKind.DEMOGRAPHIC_PARITY, gc) == 0.0

    def test_dp_half(self):
        gc = group_counts([1, 0, 1, 1], None, [1, 1, 0, 0])
        assert unfairness(MetricKind.DEMOGRAPHIC_PARITY, gc) == 0.5

    def test_sp_same_formula_as_dp(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            preds = rng.integers(0, 2, size=12)
            s = np.array([0, 1] * 6)
            gc = group_counts(preds, None, s)
            assert unfairness(MetricKind.STATISTICAL_PARITY, gc) == unfairness(
                MetricKind.DEMOGRAPHIC_PARITY, gc
            )

    def test_oae(self):
        preds = [1, 0, 1, 0]
        labels = [1, 1, 1, 1]
        s = [0, 0, 1, 1]
        gc = group_counts(preds, labels, s)
        # both groups 50% accurate
        assert unfairness(MetricKind.OVERALL_ACCURACY_EQUALITY, gc) == 0.0

    def test_cpa_max_of_gaps(self):
        preds = [1, 0, 1, 1, 0, 0]
        labels = [1, 0, 1, 1, 1, 0]
        s = [0, 0, 0, 1, 1, 1]
        gc = group_counts(preds, labels, s)
        # group0: TPR 1/1, TNR 1/1; group1: TPR 1/2, TNR 1/1
        assert unfairness(MetricKind.CONDITIONAL_PROCEDURE_ACCURACY, gc) == 0.5

    def test_labels_required(self):
        gc = group_counts([1, 0], None, [0, 1])
        with pytest.raises(LabelsRequired):
            unfairness(MetricKind.OVERALL_ACCURACY_EQUALITY, gc)
        with pytest.raises(LabelsRequired):
            unfairness_of([1, 0], MetricKind.CONDITIONAL_PROCEDURE_ACCURACY, [0, 1])

    def test_undefined_rate_strict_vs_lenient(self):
        # group 0 has no positive labels, so its TPR is undefined
        preds = [1, 0, 1, 0]
        labels = [0, 0, 1, 0]
        s = [0, 0, 1, 1]
        gc = group_counts(preds, labels, s)
        with pytest.raises(UndefinedRate):
            unfairness(MetricKind.CONDITIONAL_PROCEDURE_ACCURACY, gc, strict=True)
        # lenient mode scores only the defined TNR gap: |1/1 - 1/2| = 0.5
        assert unfairness(MetricKind.CONDITIONAL_PROCEDURE_ACCURACY, gc, strict=False) == 0.5


class TestProperties:
    def _random_case(self, rng, n=24):
        preds = rng.integers(0, 2, size=n)
        labels = rng.integers(0, 2, size=n)
        s = np.zeros(n, dtype=np.uint8)
        s[n // 2 :] = 1
        # populate every (group, label) cell so strict rates are defined
        labels[0] = 0
        labels[1] = 1
        labels[n // 2] = 0
        labels[n // 2 + 1] = 1
        return preds, labels, s

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_matches_naive_and_bounded(self, kind):
        rng = np.random.default_rng(42)
        for _ in range(100):
            preds, labels, s = self._random_case(rng)
            got = unfairness_of(preds, kind, s, labels=labels if kind.needs_labels else None)
            want = naive_unfairness(kind, preds, labels, s)
            assert abs(got - want) <= 1e-12
            assert 0.0 <= got <= 1.0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_group_swap_symmetry(self, kind):
        rng = np.random.default_rng(17)
        for _ in range(50):
            preds, labels, s = self._random_case(rng)
            lab = labels if kind.needs_labels else None
            assert unfairness_of(preds, kind, s, labels=lab) == unfairness_of(
                preds, kind, 1 - s, labels=lab
            )

    def test_constant_dp_exactly_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            s = rng.integers(0, 2, size=10)
            if s.min() == s.max():
                continue
            for c in (0, 1):
                assert unfairness_of(np.full(10, c), MetricKind.DEMOGRAPHIC_PARITY, s) == 0.0


class TestUnfairnessOrNan:
    def test_nan_on_one_group(self):
        assert math.isnan(unfairness_or_nan([1, 0], MetricKind.DEMOGRAPHIC_PARITY, [1, 1]))

    def test_lenient_on_undefined_rate(self):
        preds = [1, 0, 1, 0]
        labels = [0, 0, 1, 0]
        s = [0, 0, 1, 1]
        assert unfairness_or_nan(
            preds, MetricKind.CONDITIONAL_PROCEDURE_ACCURACY, s, labels=labels
        ) == 0.5

    def test_passthrough(self):
        assert unfairness_or_nan([1, 0, 1, 1], MetricKind.DEMOGRAPHIC_PARITY, [1, 1, 0, 0]) == 0.5
