"""Validation and calibration diagnostics for a fitted LR system.

Enumerates same-source/different-source comparison plans from a repeated
dataset, evaluates them in batch, and summarises the resulting likelihood
ratios as misleading-evidence rates, Tippett curves and empirical
cross-entropy (ECE) curves with an optional PAV-calibrated reference.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyClass, InsufficientData
from .lr import BetweenModel, LrResult, WithinModel, batch_log_lr, TRUNCATION_FLOOR
from .pca import ScoreMatrix

_LN10 = math.log(10.0)

#: Default prior log10-odds grid: -2.5 .. 2.5 in steps of 0.05.
DEFAULT_PRIOR_GRID = (np.arange(101) - 50) * 0.05

SS, DS = "SS", "DS"


@dataclass(frozen=True)
class Comparison:
    query: tuple[str, str]
    reference: tuple[str, str]
    truth: str

    def __post_init__(self):
        if self.query == self.reference:
            raise ValueError("a comparison cannot pair an occasion with itself")
        same = self.query[0] == self.reference[0]
        if self.truth not in (SS, DS) or same != (self.truth == SS):
            raise ValueError(f"ground truth {self.truth!r} inconsistent with ids")


@dataclass(frozen=True)
class ComparisonPlan:
    """Unordered pairwise comparisons with ground truth."""

    comparisons: tuple[Comparison, ...]

    @property
    def n_ss(self) -> int:
        return sum(1 for c in self.comparisons if c.truth == SS)

    @property
    def n_ds(self) -> int:
        return sum(1 for c in self.comparisons if c.truth == DS)

    def __len__(self) -> int:
        return len(self.comparisons)


@dataclass(frozen=True)
class GroupedComparison:
    """One query occasion against a set of reference occasions."""

    query: tuple[str, str]
    references: tuple[tuple[str, str], ...]
    truth: str


def enumerate_comparisons(dataset) -> ComparisonPlan:
    """All unordered occasion pairs, labelled SS/DS by individual identity."""
    keys = dataset.row_keys()
    counts = dataset.counts if hasattr(dataset, "counts") else {}
    if len(set(k[0] for k in keys)) < 2 or not any(c >= 2 for c in counts.values()):
        raise InsufficientData(
            "need at least two individuals and one individual with repeats"
        )
    comps = []
    for (ind1, occ1), (ind2, occ2) in itertools.combinations(keys, 2):
        truth = SS if ind1 == ind2 else DS
        comps.append(Comparison((ind1, occ1), (ind2, occ2), truth))
    return ComparisonPlan(tuple(comps))


def enumerate_grouped_comparisons(dataset) -> tuple[GroupedComparison, ...]:
    """Each occasion as query against reference sets, per the grouping view.

    Same-source groups pit the query against all other occasions of the same
    individual; different-source groups against each other individual's full
    occasion set.
    """
    keys = dataset.row_keys()
    by_ind: dict[str, list[tuple[str, str]]] = {}
    for key in keys:
        by_ind.setdefault(key[0], []).append(key)
    groups = []
    for key in keys:
        own = tuple(k for k in by_ind[key[0]] if k != key)
        if own:
            groups.append(GroupedComparison(key, own, SS))
        for other, occs in by_ind.items():
            if other != key[0]:
                groups.append(GroupedComparison(key, tuple(occs), DS))
    return tuple(groups)


@dataclass(frozen=True)
class LrCollection:
    """Evaluated comparisons: one LrResult and ground truth per entry."""

    results: tuple[LrResult, ...]
    truths: tuple[str, ...]
    comparisons: tuple[Comparison, ...] | None = None
    within_provenance: str = ""

    def __post_init__(self):
        if len(self.results) != len(self.truths):
            raise ValueError("one truth label per result required")
        for res in self.results:
            if not np.all(np.isfinite(res.log_per_pc)):
                raise ValueError("log-LRs must be finite")

    def __len__(self) -> int:
        return len(self.results)

    @property
    def m_max(self) -> int:
        return min(res.m_max for res in self.results)

    def log10_lrs(self, m: int | None = None) -> np.ndarray:
        """Raw (untruncated) cumulative log10 LRs at m components."""
        return np.array([res.log_lr(m) / _LN10 for res in self.results])

    def reported_lrs(self, m: int | None = None) -> np.ndarray:
        return np.array([res.reported_lr(m)[0] for res in self.results])

    def mask(self, truth: str) -> np.ndarray:
        return np.array([t == truth for t in self.truths])

    @classmethod
    def from_lrs(cls, ss_lrs, ds_lrs) -> "LrCollection":
        """Wrap plain LR lists (no truncation) for diagnostics and tests."""
        results = []
        truths = []
        for lr in ss_lrs:
            results.append(LrResult(np.array([math.log(lr)]), None))
            truths.append(SS)
        for lr in ds_lrs:
            results.append(LrResult(np.array([math.log(lr)]), None))
            truths.append(DS)
        return cls(tuple(results), tuple(truths))

    def drop(self, index: int) -> "LrCollection":
        keep = [i for i in range(len(self.results)) if i != index]
        comps = None
        if self.comparisons is not None:
            comps = tuple(self.comparisons[i] for i in keep)
        return LrCollection(
            tuple(self.results[i] for i in keep),
            tuple(self.truths[i] for i in keep),
            comps,
            self.within_provenance,
        )


def evaluate_plan(plan: ComparisonPlan, scores: ScoreMatrix,
                  between: BetweenModel, within: WithinModel,
                  M: int, truncate: bool = True) -> LrCollection:
    """Batch-evaluate a pairwise comparison plan against fitted models."""
    index = {key: i for i, key in enumerate(scores.row_keys)}
    rows_q = np.array([index[c.query] for c in plan.comparisons])
    rows_r = np.array([index[c.reference] for c in plan.comparisons])
    logs = batch_log_lr(scores.scores[rows_q, :M], scores.scores[rows_r, :M],
                        between, within, M)
    floor = TRUNCATION_FLOOR if truncate else None
    results = tuple(LrResult(row, floor) for row in logs)
    truths = tuple(c.truth for c in plan.comparisons)
    return LrCollection(results, truths, plan.comparisons, within.provenance)


def evaluate_grouped(groups, scores: ScoreMatrix, between: BetweenModel,
                     within: WithinModel, M: int, mode: str = "separate",
                     truncate: bool = True) -> LrCollection:
    """Evaluate grouped comparisons.

    mode="separate": each reference occasion yields its own pairwise entry.
    mode="pooled": the reference occasions are averaged in score space first
    and each group yields a single entry.
    """
    if mode not in ("separate", "pooled"):
        raise ValueError(f"mode must be separate or pooled, got {mode!r}")
    index = {key: i for i, key in enumerate(scores.row_keys)}
    q_rows, r_scores, truths = [], [], []
    for g in groups:
        if mode == "separate":
            for ref in g.references:
                q_rows.append(index[g.query])
                r_scores.append(scores.scores[index[ref], :M])
                truths.append(g.truth)
        else:
            q_rows.append(index[g.query])
            block = np.stack([scores.scores[index[ref], :M] for ref in g.references])
            r_scores.append(block.mean(axis=0))
            truths.append(g.truth)
    Y1 = scores.scores[np.array(q_rows), :M]
    Y2 = np.stack(r_scores)
    logs = batch_log_lr(Y1, Y2, between, within, M)
    floor = TRUNCATION_FLOOR if truncate else None
    results = tuple(LrResult(row, floor) for row in logs)
    return LrCollection(results, tuple(truths), None, within.provenance)


# -- summaries -------------------------------------------------------------


def _require_both_classes(collection: LrCollection):
    if not collection.mask(SS).any() or not collection.mask(DS).any():
        raise EmptyClass("need at least one SS and one DS comparison")


def misleading_rates(collection: LrCollection, m: int | None = None) -> tuple[float, float]:
    """(P(LR > 1 | DS), P(LR < 1 | SS)); LR = 1 is misleading for neither."""
    _require_both_classes(collection)
    log_lrs = collection.log10_lrs(m)
    ss = collection.mask(SS)
    ds = ~ss
    rate_ds = float((log_lrs[ds] > 0).mean())
    rate_ss = float((log_lrs[ss] < 0).mean())
    return rate_ds, rate_ss


@dataclass(frozen=True)
class TippettCurves:
    thresholds: np.ndarray
    p_ss: np.ndarray
    p_ds: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["log10_lr_threshold", "p_ss_ge", "p_ds_ge"])
            for t, a, b in zip(self.thresholds, self.p_ss, self.p_ds):
                writer.writerow([f"{t:.10g}", f"{a:.10g}", f"{b:.10g}"])


def tippett(collection: LrCollection, thresholds=None,
            m: int | None = None) -> TippettCurves:
    """Proportion of each class with log10 LR >= t, per threshold t.

    At t = 0 the curves agree with :func:`misleading_rates` whenever no LR is
    exactly 1 (the rates count strict inequalities).
    """
    _require_both_classes(collection)
    log_lrs = collection.log10_lrs(m)
    if thresholds is None:
        lo = math.floor(log_lrs.min()) - 1.0
        hi = math.ceil(log_lrs.max()) + 1.0
        thresholds = np.linspace(lo, hi, 201)
    thresholds = np.asarray(thresholds, dtype=float)
    ss = collection.mask(SS)
    p_ss = (log_lrs[ss][None, :] >= thresholds[:, None]).mean(axis=1)
    p_ds = (log_lrs[~ss][None, :] >= thresholds[:, None]).mean(axis=1)
    return TippettCurves(thresholds, p_ss, p_ds)


# -- empirical cross entropy ------------------------------------------------


def pav_calibrate_lrs(lrs, labels) -> np.ndarray:
    """Pool-adjacent-violators calibration of LRs against binary labels.

    Returns the calibrated LR per entry: the isotonic posterior for the entry's
    score pool, converted to an LR against the collection's class proportions.
    Pools containing a single class yield 0 or +inf.
    """
    lrs = np.asarray(lrs, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    order = np.argsort(lrs, kind="stable")
    # blocks of tied scores so calibration is a function of the score
    blocks: list[list[float]] = []  # [weight, mean]
    bounds: list[float] = []
    for idx in order:
        score, y = lrs[idx], float(labels[idx])
        if bounds and bounds[-1] == score:
            w, mean = blocks[-1]
            blocks[-1] = [w + 1.0, (w * mean + y) / (w + 1.0)]
        else:
            blocks.append([1.0, y])
            bounds.append(score)
    # PAV merge to enforce a non-decreasing posterior in the score
    merged: list[list[float]] = []  # [weight, mean, count_of_source_blocks]
    counts: list[int] = []
    for w, mean in blocks:
        merged.append([w, mean])
        counts.append(1)
        while len(merged) > 1 and merged[-2][1] > merged[-1][1]:
            w2, m2 = merged.pop()
            c2 = counts.pop()
            w1, m1 = merged[-1]
            merged[-1] = [w1 + w2, (w1 * m1 + w2 * m2) / (w1 + w2)]
            counts[-1] += c2
        # counts mirrors how many tied-score blocks each pool spans
    posts = np.empty(len(blocks))
    pos = 0
    for (w, mean), c in zip(merged, counts):
        posts[pos:pos + c] = mean
        pos += c
    # broadcast pool posteriors back to entries
    entry_post = np.empty(len(lrs))
    pos = 0
    for b, (w, _) in enumerate(blocks):
        entry_post[order[pos:pos + int(w)]] = posts[b]
        pos += int(w)
    prior_odds = labels.sum() / (~labels).sum()
    with np.errstate(divide="ignore"):
        cal_odds = entry_post / (1.0 - entry_post)
    return cal_odds / prior_odds


@dataclass(frozen=True)
class EceCurve:
    """Observed, null and optional PAV-calibrated ECE over prior odds (bits)."""

    prior_log10_odds: np.ndarray
    observed: np.ndarray
    null: np.ndarray
    pav: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            header = ["prior_log10_odds", "observed_bits", "null_bits"]
            if self.pav is not None:
                header.append("pav_bits")
            writer.writerow(header)
            for i, x in enumerate(self.prior_log10_odds):
                row = [f"{x:.10g}", f"{self.observed[i]:.10g}", f"{self.null[i]:.10g}"]
                if self.pav is not None:
                    row.append(f"{self.pav[i]:.10g}")
                writer.writerow(row)


def _ece_values(ss_lrs, ds_lrs, odds) -> np.ndarray:
    ss = np.asarray(ss_lrs, dtype=float)[:, None]
    ds = np.asarray(ds_lrs, dtype=float)[:, None]
    p_p = odds / (1.0 + odds)
    p_d = 1.0 - p_p
    with np.errstate(divide="ignore"):
        loss_ss = np.log2(1.0 + 1.0 / (ss * odds[None, :])).mean(axis=0)
        loss_ds = np.log2(1.0 + ds * odds[None, :]).mean(axis=0)
    return p_p * loss_ss + p_d * loss_ds


def ece_null(grid=DEFAULT_PRIOR_GRID) -> np.ndarray:
    """Analytic ECE of the system that always reports LR = 1."""
    odds = 10.0 ** np.asarray(grid, dtype=float)
    p_p = odds / (1.0 + odds)
    return p_p * np.log2(1.0 + 1.0 / odds) + (1.0 - p_p) * np.log2(1.0 + odds)


def ece_curve(collection: LrCollection, m: int | None = None,
              with_pav: bool = False, grid=DEFAULT_PRIOR_GRID) -> EceCurve:
    """Empirical cross entropy of the reported LRs across prior odds."""
    _require_both_classes(collection)
    grid = np.asarray(grid, dtype=float)
    odds = 10.0 ** grid
    lrs = collection.reported_lrs(m)
    ss = collection.mask(SS)
    observed = _ece_values(lrs[ss], lrs[~ss], odds)
    null = ece_null(grid)
    pav = None
    if with_pav:
        cal = pav_calibrate_lrs(lrs, ss)
        pav = _ece_values(cal[ss], cal[~ss], odds)
    return EceCurve(grid, observed, null, pav)


# -- mis-specification experiment -------------------------------------------


@dataclass(frozen=True)
class MisspecCell:
    data_label: str
    preset_label: str
    rates: dict[int, tuple[float, float]]          # m -> (ds_gt1, ss_lt1)
    log10_lrs: dict[int, np.ndarray]
    truths: tuple[str, ...]


@dataclass(frozen=True)
class MisspecGrid:
    cells: dict[tuple[str, str], MisspecCell]

    def rate_table(self) -> list[tuple]:
        rows = []
        for (data, preset), cell in sorted(self.cells.items()):
            for m, (ds, ss) in sorted(cell.rates.items()):
                rows.append((data, preset, m, ds, ss))
        return rows

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["data", "variance_preset", "m",
                             "rate_ds_misleading", "rate_ss_misleading"])
            for row in self.rate_table():
                data, preset, m, ds, ss = row
                writer.writerow([data, preset, m, f"{ds:.6f}", f"{ss:.6f}"])


def misspecification_grid(score_fn, between: BetweenModel,
                          datasets: dict, presets: dict[str, WithinModel],
                          m_values=(1, 2), truncate: bool = True) -> MisspecGrid:
    """Cross every repeated dataset with every within-variance preset.

    ``score_fn`` maps a repeated dataset to a ScoreMatrix in the fitted PC
    space. Reports misleading rates and the log10 LRs (for histograms) for
    each requested component count.
    """
    m_max = max(m_values)
    cells = {}
    for data_label, dataset in datasets.items():
        plan = enumerate_comparisons(dataset)
        scores = score_fn(dataset)
        for preset_label, within in presets.items():
            coll = evaluate_plan(plan, scores, between, within, m_max, truncate)
            rates = {m: misleading_rates(coll, m) for m in m_values}
            lrs = {m: coll.log10_lrs(m) for m in m_values}
            cells[(data_label, preset_label)] = MisspecCell(
                data_label, preset_label, rates, lrs, coll.truths
            )
    return MisspecGrid(cells)
