"""PageRank prestige and comparison of rankings and reports."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, UndefinedStatisticError, ValidationError
from .graph import InstanceGraph

TIE_BREAK = "score desc, label asc"


@dataclass(frozen=True)
class RankedList:
    labels: tuple[str, ...]
    scores: Mapping[str, float]
    tie_break: str = TIE_BREAK
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_scores(cls, scores: Mapping[str, float], **meta) -> "RankedList":
        order = sorted(scores, key=lambda lab: (-scores[lab], lab))
        return cls(tuple(order), dict(scores), TIE_BREAK, meta)

    @classmethod
    def from_order(cls, labels: Sequence[str]) -> "RankedList":
        """A ranking given only by order; scores are descending ranks."""
        n = len(labels)
        return cls(tuple(labels), {lab: float(n - r) for r, lab in enumerate(labels)})

    def __len__(self):
        return len(self.labels)

    def top(self, k: int) -> tuple[str, ...]:
        return self.labels[:k]


def pagerank(g: InstanceGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 10_000, weighted: bool = True) -> RankedList:
    """Power iteration on the weighted transition matrix.

    Dangling nodes spread their mass uniformly.  Stops when the L1 change
    between iterates drops below ``tol``.
    """
    if not 0 < damping < 1:
        raise ValidationError("damping must lie in (0, 1)")
    n = g.n
    if n == 0:
        raise ValidationError("PageRank of an empty graph")
    w = g.weight if weighted else np.ones(g.m)
    out_w = np.bincount(g.src, weights=w, minlength=n)
    dangling = out_w == 0
    share = w / out_w[g.src]
    x = np.full(n, 1.0 / n)
    resid = math.inf
    for it in range(1, max_iter + 1):
        flow = np.bincount(g.dst, weights=x[g.src] * share, minlength=n)
        nxt = damping * (flow + x[dangling].sum() / n) + (1.0 - damping) / n
        nxt /= nxt.sum()
        resid = float(np.abs(nxt - x).sum())
        x = nxt
        if resid < tol:
            break
    else:
        raise ConvergenceError(f"PageRank did not converge in {max_iter} iterations "
                               f"(residual {resid:.3e})", residual=resid, iterations=max_iter)
    scores = dict(zip(g.labels, x.tolist()))
    return RankedList.from_scores(scores, damping=damping, tol=tol, iterations=it,
                                  weighted=weighted)


def _shared(r1: RankedList, r2: RankedList) -> tuple[list[str], list[str]]:
    common = set(r1.labels) & set(r2.labels)
    return ([x for x in r1.labels if x in common], [x for x in r2.labels if x in common])


def _count_inversions(seq: list[int]) -> int:
    inv = 0
    width = 1
    a = list(seq)
    n = len(a)
    while width < n:
        merged = []
        for lo in range(0, n, 2 * width):
            left = a[lo:lo + width]
            right = a[lo + width:lo + 2 * width]
            i = j = 0
            while i < len(left) and j < len(right):
                if left[i] <= right[j]:
                    merged.append(left[i])
                    i += 1
                else:
                    merged.append(right[j])
                    inv += len(left) - i
                    j += 1
            merged.extend(left[i:])
            merged.extend(right[j:])
        a = merged
        width *= 2
    return inv


def kendall_tau(r1: RankedList, r2: RankedList) -> float:
    """Kendall correlation over the labels both rankings share.

    ``1 - 2*Delta / (N(N-1))`` with ``Delta`` the size of the symmetric
    difference of the two ordered-pair sets (twice the discordant pairs).
    """
    a, b = _shared(r1, r2)
    n = len(a)
    if n < 2:
        raise UndefinedStatisticError("Kendall tau needs at least two shared labels")
    rank_b = {lab: i for i, lab in enumerate(b)}
    discordant = _count_inversions([rank_b[lab] for lab in a])
    delta = 2 * discordant
    pairs = n * (n - 1)
    return (pairs - 2 * delta) / pairs  # exact for hand-sized cases


def fagin_intersection(r1: RankedList, r2: RankedList, k: int) -> float:
    """Mean over depths q = 1..k of |top_q(r1) & top_q(r2)| / q."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > len(r1) or k > len(r2):
        raise ValidationError(f"k={k} exceeds ranking length ({len(r1)}, {len(r2)})")
    seen1: set = set()
    seen2: set = set()
    overlap = 0
    acc = 0.0
    for q in range(k):
        x, y = r1.labels[q], r2.labels[q]
        if x == y:
            overlap += 1
        else:
            overlap += (x in seen2) + (y in seen1)
        seen1.add(x)
        seen2.add(y)
        acc += overlap / (q + 1)
    return acc / k


def compare_rankings(r1: RankedList, r2: RankedList,
                     ks: Sequence[int] = (10, 100, 1000)) -> dict:
    """Kendall tau plus Fagin's F at each feasible depth."""
    out: dict = {"shared": len(set(r1.labels) & set(r2.labels))}
    try:
        out["kendall_tau"] = kendall_tau(r1, r2)
    except UndefinedStatisticError:
        out["kendall_tau"] = None
    limit = min(len(r1), len(r2))
    out["fagin"] = {str(k): fagin_intersection(r1, r2, k) for k in ks if k <= limit}
    return out


def compare_networks(report_a: Mapping, report_b: Mapping, decimals: int | None = 0) -> dict:
    """Percentage change ``100 * (a - b) / |b|`` per statistic.

    Keys missing or undefined on either side, non-numeric values and a
    zero baseline with a nonzero value are reported as ``"n/a"``.
    """
    out = {}
    for key in report_a:
        if key not in report_b:
            continue
        a, b = report_a[key], report_b[key]
        entry = {"a": a, "b": b, "pct_change": "n/a"}
        numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (a, b))
        if numeric and math.isfinite(a) and math.isfinite(b):
            if b == 0:
                pct = 0.0 if a == 0 else None
            else:
                pct = 100.0 * (a - b) / abs(b)
            if pct is not None:
                entry["pct_change"] = round(pct, decimals) if decimals is not None else pct
                if entry["pct_change"] == 0:
                    entry["pct_change"] = 0.0
        out[key] = entry
    return out


def write_ranking(r: RankedList, path, header=()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "score"])
        for lab in r.labels:
            w.writerow([lab, repr(float(r.scores[lab]))])


def read_ranking(path) -> RankedList:
    scores = {}
    with open(path, encoding="utf-8") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        for lineno, row in enumerate(rows, start=1):
            if not row or row == ["label", "score"]:
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}: ranking row {lineno} needs 2 columns")
            scores[row[0]] = float(row[1])
    return RankedList.from_scores(scores)
