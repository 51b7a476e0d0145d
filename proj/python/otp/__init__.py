"""Optimal transport label propagation."""

import numpy as np

from ._otp import (
    ShapeError,
    accuracy,
    ari,
    certainty_scores,
    exact_ot_uniform_small,
    induce_labels,
    induce_values,
    load_csv,
    lp_propagate,
    make_split,
    nmi,
    pairwise_sq_dist,
    propagate,
    score_measure,
    sinkhorn,
)


def transduce_and_induce(labeled, labels, unlabeled, num_classes, points, **config):
    """Propagate labels, then label new points with the resulting anchors."""
    result = propagate(labeled, labels, unlabeled, num_classes, **config)
    anchors = np.vstack([labeled, unlabeled])
    anchor_labels = np.concatenate([np.asarray(labels, dtype=np.int32), result["labels"]])
    induced = induce_labels(anchors, anchor_labels, num_classes, result["kernel_scale"], points)
    return result, induced


__all__ = [
    "ShapeError",
    "accuracy",
    "ari",
    "certainty_scores",
    "exact_ot_uniform_small",
    "induce_labels",
    "induce_values",
    "load_csv",
    "lp_propagate",
    "make_split",
    "nmi",
    "pairwise_sq_dist",
    "propagate",
    "score_measure",
    "sinkhorn",
    "transduce_and_induce",
]
