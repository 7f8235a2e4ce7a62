"""Feature influence by bit flipping.

For each feature, the score is the mean over rows of the prediction with the
bit forced to 1 minus the prediction with it forced to 0.  Scores are signed
and lie in [-1, 1]; ranks order features by absolute score, 1 = most
influential.  This is a deliberately simple estimator whose job is to compare
the sensitive attribute's rank between a black box and its surrogate, and
reports label it as such.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OracleMissingRow
from .rules import predict_row

AUDIT_METHOD = "flip-influence"


@dataclass(frozen=True)
class InfluenceRanking:
    feature_names: list
    scores: np.ndarray  # signed, in [-1, 1]
    ranks: np.ndarray  # permutation of 1..n_features, by |score| descending
    model_tag: str
    method: str = AUDIT_METHOD


def rule_list_oracle(r, ants):
    """Row-prediction oracle for a rule list (total on the mined schema)."""
    by_id = ants.by_id()

    def fn(row):
        return predict_row(r, by_id, row)

    return fn


def lookup_oracle(features, preds):
    """Row-keyed lookup oracle from observed (features, prediction) pairs.

    Raises KeyError on rows never observed; flip_influence skips those rows.
    Conflicting duplicates keep the first observation.
    """
    table = {}
    feats = np.asarray(features, dtype=np.uint8)
    for i in range(feats.shape[0]):
        table.setdefault(feats[i].tobytes(), int(preds[i]))

    def fn(row):
        return table[np.asarray(row, dtype=np.uint8).tobytes()]

    return fn


def flip_influence(predict_fn, d, model_tag="model", missing_ok=False):
    """Score every feature of `d` by mean flip difference.

    Rows on which the oracle is undefined for either flip are skipped; a
    feature with no evaluable row raises OracleMissingRow (or, with
    `missing_ok`, the whole ranking degrades to None when no feature is
    evaluable).
    """
    n, m = d.features.shape
    scores = np.zeros(m)
    any_scored = False
    for j in range(m):
        total = 0.0
        evaluated = 0
        for i in range(n):
            row = d.features[i].copy()
            try:
                row[j] = 1
                hi = predict_fn(row)
                row[j] = 0
                lo = predict_fn(row)
            except KeyError:
                continue
            total += hi - lo
            evaluated += 1
        if evaluated == 0:
            if missing_ok:
                scores[j] = 0.0
                continue
            raise OracleMissingRow(
                "feature %r: oracle undefined on every perturbed row" % d.feature_names[j]
            )
        any_scored = True
        scores[j] = total / evaluated
    if not any_scored and missing_ok:
        return None
    order = np.lexsort((np.arange(m), -np.abs(scores)))
    ranks = np.empty(m, dtype=np.int64)
    ranks[order] = np.arange(1, m + 1)
    return InfluenceRanking(
        feature_names=list(d.feature_names), scores=scores, ranks=ranks, model_tag=model_tag
    )
