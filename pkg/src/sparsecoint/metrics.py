"""Selection-accuracy metrics for covariate selection against a known truth."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyInputError


@dataclass(frozen=True)
class SelectionMetrics:
    """Confusion counts and rates for one selection.

    Rates follow the 0/0 = 0 convention, so an empty selection against a
    nonempty truth has fnr = 1 and fpr = fdr = 0.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    fpr: float
    fnr: float
    fdr: float


def _rate(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def score_selection(selected, true_active, p: int) -> SelectionMetrics:
    """Score a selected index set against the true active set.

    Both sets hold 0-based column indices in ``range(p)``.
    """
    sel = frozenset(selected)
    truth = frozenset(true_active)
    if any(not 0 <= j < p for j in sel | truth):
        raise ValueError("index out of range for p covariates")
    tp = len(sel & truth)
    fp = len(sel - truth)
    fn = len(truth - sel)
    tn = p - tp - fp - fn
    return SelectionMetrics(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        fpr=_rate(fp, fp + tn),
        fnr=_rate(fn, fn + tp),
        fdr=_rate(fp, tp + fp),
    )


@dataclass(frozen=True)
class AggregateMetrics:
    """Replication-mean rates with total counts for diagnostics."""

    replications: int
    mean_fpr: float
    mean_fnr: float
    mean_fdr: float
    total_tp: int
    total_fp: int
    total_tn: int
    total_fn: int


def aggregate(per_replication: list[SelectionMetrics]) -> AggregateMetrics:
    """Arithmetic mean of each rate across replications; counts are summed."""
    if not per_replication:
        raise EmptyInputError("cannot aggregate an empty list of metrics")
    r = len(per_replication)
    return AggregateMetrics(
        replications=r,
        mean_fpr=sum(m.fpr for m in per_replication) / r,
        mean_fnr=sum(m.fnr for m in per_replication) / r,
        mean_fdr=sum(m.fdr for m in per_replication) / r,
        total_tp=sum(m.tp for m in per_replication),
        total_fp=sum(m.fp for m in per_replication),
        total_tn=sum(m.tn for m in per_replication),
        total_fn=sum(m.fn for m in per_replication),
    )
