"""Rationalization drivers: enumerate fairness-regularized surrogates of a
black-box classifier, globally over a suing group or locally around a single
subject's nearest-neighbor cohort, and select the model to show an auditor.

A surrogate "rationalizes" the black box when its unfairness on the audited
rows is strictly below the black box's own unfairness there.  Reports record
whether that inequality held; nothing is assumed.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .audit import flip_influence, lookup_oracle, rule_list_oracle
from .dataset import Dataset, mine_antecedents
from .enumeration import DEFAULT_MAX_MODELS, enumerate_models
from .errors import EmptyCohort, KOutOfRange, LengthMismatch, NoAntecedents
from .metrics import unfairness_of, unfairness_or_nan
from .rules import RuleList, fidelity, predict

LOCAL_UNFAIRNESS_THRESHOLD = 0.05
DEFAULT_NEIGHBORHOOD_FRACTION = 0.10


@dataclass(frozen=True)
class BlackBoxPredictions:
    preds: np.ndarray  # uint8 {0,1}, aligned with a Dataset's rows
    source: str = "blackbox"

    def aligned_with(self, d):
        if self.preds.shape[0] != d.n_rows:
            raise LengthMismatch(
                "%d predictions vs %d rows" % (self.preds.shape[0], d.n_rows)
            )
        return True


def load_predictions(path, source=None):
    """Single-column CSV (optional header) aligned to the dataset row order."""
    values = []
    with open(path) as fh:
        for line in fh:
            v = line.strip()
            if not v:
                continue
            if v not in ("0", "1"):
                if not values and not v.isdigit():
                    continue  # header line
                raise LengthMismatch("prediction cell %r is not 0/1" % v)
            values.append(int(v))
    return BlackBoxPredictions(
        preds=np.array(values, dtype=np.uint8), source=source or str(path)
    )


@dataclass(frozen=True)
class Neighborhood:
    center: int  # row position in the dataset
    members: np.ndarray  # row positions of the k nearest, center included
    k: int


@dataclass
class ModelRecord:
    model_id: int
    rule_list: RuleList
    objective: float
    misc: float
    unfairness: float
    fidelity: float
    K: int
    rationalizes: bool  # unfairness strictly below the black box baseline


@dataclass
class GlobalReport:
    models: list
    baseline_unfairness: float
    selected: int  # model_id, or None
    test_fidelity: float = None
    test_unfairness: float = None
    sensitive_rank_blackbox: int = None
    sensitive_rank_selected: int = None


@dataclass
class SubjectResult:
    row_id: int
    best_model: RuleList  # None when no enumerated model agrees at the subject
    best_unfairness: float
    best_fidelity: float
    baseline_unfairness: float  # black-box unfairness on the neighborhood


@dataclass
class LocalReport:
    subjects: list
    coverage: float  # fraction of subjects with an agreeing model


def select_best_global(report, baseline_unfairness):
    """Keep models at most half as unfair as the black box, then take the one
    with the highest fidelity (ties: lower objective, then lower id)."""
    candidates = [
        m
        for m in report.models
        if not math.isnan(m.unfairness) and m.unfairness <= baseline_unfairness / 2.0
    ]
    if not candidates:
        return None
    best = min(candidates, key=lambda m: (-m.fidelity, m.objective, m.model_id))
    return best.model_id


def _sensitive_rank(ranking, d):
    return int(ranking.ranks[d.sensitive_col]) if ranking is not None else None


def rationalize_global(
    X,
    b,
    cfg,
    max_models=DEFAULT_MAX_MODELS,
    min_support=0.05,
    include_negations=True,
    test_set=None,
    test_preds=None,
    audit_models=True,
):
    """Model rationalization over a suing group.

    Relabels `X` with the black box's predictions, mines antecedents,
    enumerates surrogates, and reports per-model fidelity and unfairness next
    to the black box's baseline unfairness on the same rows.  When a test set
    (plus black-box predictions on it) is supplied, the selected model is also
    evaluated there.
    """
    b.aligned_with(X)
    relabeled = X.with_labels(b.preds)
    baseline = unfairness_of(
        b.preds,
        cfg.metric,
        X.sensitive,
        labels=b.preds if cfg.metric.needs_labels else None,
    )
    ants = mine_antecedents(
        relabeled, min_support=min_support, include_negations=include_negations
    )
    models = enumerate_models(ants, relabeled, cfg, max_models=max_models)
    records = []
    for i, (rl, mm) in enumerate(models):
        records.append(
            ModelRecord(
                model_id=i,
                rule_list=rl,
                objective=mm.objective,
                misc=mm.misc,
                unfairness=mm.unfairness,
                fidelity=mm.fidelity,
                K=mm.K,
                rationalizes=(not math.isnan(mm.unfairness)) and mm.unfairness < baseline,
            )
        )
    report = GlobalReport(models=records, baseline_unfairness=baseline, selected=None)
    report.selected = select_best_global(report, baseline)

    if report.selected is not None and test_set is not None and test_preds is not None:
        test_preds.aligned_with(test_set)
        chosen = records[report.selected].rule_list
        preds = predict(chosen, ants, test_set)
        report.test_fidelity = fidelity(preds, test_preds.preds)
        report.test_unfairness = unfairness_or_nan(
            preds,
            cfg.metric,
            test_set.sensitive,
            labels=test_preds.preds if cfg.metric.needs_labels else None,
        )

    if audit_models:
        bb_ranking = flip_influence(
            lookup_oracle(X.features, b.preds), X, model_tag=b.source, missing_ok=True
        )
        report.sensitive_rank_blackbox = _sensitive_rank(bb_ranking, X)
        if report.selected is not None:
            chosen = records[report.selected].rule_list
            sur_ranking = flip_influence(
                rule_list_oracle(chosen, ants), X, model_tag="surrogate"
            )
            report.sensitive_rank_selected = _sensitive_rank(sur_ranking, X)
    return report, ants


def knn_neighborhood(x, T, k, exclude_sensitive=True):
    """The k rows of `T` nearest to row `x` in Hamming distance.

    The sensitive column is excluded from the distance by default.  Ties are
    broken by ascending row position; the center always belongs to its own
    neighborhood.
    """
    n = T.n_rows
    if not 1 <= k <= n:
        raise KOutOfRange("k=%d outside [1, %d]" % (k, n))
    cols = [c for c in range(T.n_cols) if not (exclude_sensitive and c == T.sensitive_col)]
    feats = T.features[:, cols]
    dist = np.count_nonzero(feats != feats[x], axis=1)
    not_center = np.ones(n, dtype=np.int64)
    not_center[x] = 0
    order = np.lexsort((np.arange(n), not_center, dist))
    members = np.sort(order[:k])
    return Neighborhood(center=x, members=members, k=k)


def default_k(n):
    """Neighborhood size: 10% of the group being explained, rounded up."""
    return max(1, math.ceil(DEFAULT_NEIGHBORHOOD_FRACTION * n))


def _best_k0_list(nb_data):
    """Fallback surrogate when no antecedent survives mining: the majority
    default-only list."""
    ones = int(nb_data.labels.sum())
    q0 = 1 if ones > nb_data.n_rows - ones else 0
    return RuleList(rules=(), default=q0)


def rationalize_local(
    x,
    T,
    b,
    cfg,
    k=None,
    max_models=DEFAULT_MAX_MODELS,
    min_support=0.05,
    include_negations=True,
):
    """Outcome rationalization for one subject.

    Enumerates surrogates on the subject's relabeled neighborhood and selects
    the one predicting the black box's outcome at the subject with the lowest
    neighborhood unfairness (ties: higher fidelity, then lower model id).
    Returns (SubjectResult, models) where models is the enumerated list.
    """
    b.aligned_with(T)
    if k is None:
        k = default_k(T.n_rows)
    nb = knn_neighborhood(x, T, k)
    nb_data = T.subset(nb.members, name=T.name + ":nbhd").with_labels(b.preds[nb.members])
    center_pos = int(np.searchsorted(nb.members, x))
    target = int(b.preds[x])
    baseline = unfairness_or_nan(
        b.preds[nb.members],
        cfg.metric,
        nb_data.sensitive,
        labels=b.preds[nb.members] if cfg.metric.needs_labels else None,
    )
    try:
        ants = mine_antecedents(
            nb_data, min_support=min_support, include_negations=include_negations
        )
        models = enumerate_models(ants, nb_data, cfg, max_models=max_models)
    except NoAntecedents:
        # every column is (near-)constant on the neighborhood: fall back to
        # the majority default-only surrogate
        ants = None
        models = []
    best = None  # (unfairness, -fidelity, model_id, rule_list)
    if ants is None:
        rl = _best_k0_list(nb_data)
        if rl.default == target:
            preds = np.full(nb_data.n_rows, rl.default, dtype=np.uint8)
            unf = unfairness_or_nan(
                preds,
                cfg.metric,
                nb_data.sensitive,
                labels=nb_data.labels if cfg.metric.needs_labels else None,
            )
            best = (unf, -fidelity(preds, nb_data.labels), 0, rl)
    else:
        for i, (rl, mm) in enumerate(models):
            preds = predict(rl, ants, nb_data)
            if int(preds[center_pos]) != target:
                continue
            # a one-group neighborhood has undefined unfairness; rank it last
            unf = mm.unfairness if not math.isnan(mm.unfairness) else math.inf
            key = (unf, -mm.fidelity, i, rl)
            if best is None or key[:3] < best[:3]:
                best = key
    result = SubjectResult(
        row_id=int(T.row_ids[x]),
        best_model=best[3] if best else None,
        best_unfairness=best[0] if best else math.nan,
        best_fidelity=-best[1] if best else math.nan,
        baseline_unfairness=baseline,
    )
    return result, models


def local_cohort(
    T,
    b,
    cfg,
    k=None,
    max_models=DEFAULT_MAX_MODELS,
    minority_value=None,
    negative_class=0,
    threshold=LOCAL_UNFAIRNESS_THRESHOLD,
    min_support=0.05,
    include_negations=True,
    threads=1,
):
    """Outcome rationalization for every cohort subject.

    The cohort is the set of rows the black box rejected
    (prediction == negative_class), belonging to the minority group
    (sensitive == minority_value; by default the less frequent sensitive
    value, ties going to 1), whose neighborhood black-box unfairness exceeds
    `threshold`.  Subjects are independent; processing order does not affect
    the report.
    """
    b.aligned_with(T)
    if k is None:
        k = default_k(T.n_rows)
    if minority_value is None:
        ones = int(T.sensitive.sum())
        minority_value = 1 if ones <= T.n_rows - ones else 0
    candidates = [
        x
        for x in range(T.n_rows)
        if int(b.preds[x]) == negative_class and int(T.sensitive[x]) == minority_value
    ]
    subjects = []
    for x in candidates:
        nb = knn_neighborhood(x, T, k)
        base = unfairness_or_nan(
            b.preds[nb.members],
            cfg.metric,
            T.features[nb.members, T.sensitive_col],
            labels=b.preds[nb.members] if cfg.metric.needs_labels else None,
        )
        if not math.isnan(base) and base > threshold:
            subjects.append(x)
    if not subjects:
        raise EmptyCohort(
            "no rejected minority subject has neighborhood unfairness > %g" % threshold
        )

    def run(x):
        result, _ = rationalize_local(
            x,
            T,
            b,
            cfg,
            k=k,
            max_models=max_models,
            min_support=min_support,
            include_negations=include_negations,
        )
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, subjects))
    else:
        results = [run(x) for x in subjects]
    results.sort(key=lambda r: r.row_id)
    covered = sum(1 for r in results if r.best_model is not None)
    return LocalReport(subjects=results, coverage=covered / len(results))
