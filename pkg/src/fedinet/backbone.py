"""Statistical backbones: directed disparity filter and marginal likelihood filter."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .errors import ValidationError
from .graph import InstanceGraph, induced_subgraph

MODELS = ("disparity", "mlf")


@dataclass(frozen=True)
class StrengthTable:
    s_in: np.ndarray
    s_out: np.ndarray
    k_in: np.ndarray
    k_out: np.ndarray
    total: float

    @classmethod
    def of(cls, g: InstanceGraph) -> "StrengthTable":
        return cls(g.in_strength, g.out_strength, g.in_degree, g.out_degree, g.total_weight)

    def heterogeneity(self, g: InstanceGraph) -> tuple[np.ndarray, np.ndarray]:
        """Per-node ``k * sum(p^2)`` over outgoing and incoming normalized weights."""
        p_out = g.weight / self.s_out[g.src]
        p_in = g.weight / self.s_in[g.dst]
        y_out = np.bincount(g.src, weights=p_out ** 2, minlength=g.n) * self.k_out
        y_in = np.bincount(g.dst, weights=p_in ** 2, minlength=g.n) * self.k_in
        return y_out, y_in


def _disparity_alpha(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    # uniform null on the simplex: P(share >= p) = (1 - p)^(k - 1); k == 1 never significant
    alpha = np.power(1.0 - p, k - 1.0)
    return np.where(k > 1, alpha, 1.0)


def disparity_pvalues(g: InstanceGraph, strengths: StrengthTable | None = None):
    """Out-side and in-side disparity p-values for every edge (arrays aligned with ``g.src``)."""
    st = strengths or StrengthTable.of(g)
    a_out = _disparity_alpha(g.weight / st.s_out[g.src], st.k_out[g.src])
    a_in = _disparity_alpha(g.weight / st.s_in[g.dst], st.k_in[g.dst])
    return a_out, a_in


def disparity_pvalue(g: InstanceGraph, i: int, j: int) -> tuple[float, float]:
    """(alpha_out, alpha_in) of edge (i, j)."""
    e = _edge_index(g, i, j)
    a_out, a_in = disparity_pvalues(g)
    return float(a_out[e]), float(a_in[e])


def _require_integer_weights(g: InstanceGraph):
    if not g.has_integer_weights:
        raise ValidationError("MLF needs integer edge weights (multiplicities)")


def mlf_pvalues(g: InstanceGraph, strengths: StrengthTable | None = None) -> np.ndarray:
    """P[Bin(T, s_out_i * s_in_j / T^2) >= w_ij] for every edge."""
    _require_integer_weights(g)
    st = strengths or StrengthTable.of(g)
    if g.m == 0:
        return np.zeros(0)
    T = st.total
    p = st.s_out[g.src] * st.s_in[g.dst] / (T * T)
    # sf(k) = P(X > k), so P(X >= w) = sf(w - 1)
    return binom.sf(g.weight - 1, T, p)


def mlf_pvalue(g: InstanceGraph, i: int, j: int, strengths: StrengthTable | None = None) -> float:
    e = _edge_index(g, i, j)
    return float(mlf_pvalues(g, strengths)[e])


def mlf_gamma(w: int, s_out: float, s_in: float, total: int) -> float:
    """MLF p-value for a single hypothetical edge weight."""
    if w != int(w) or total != int(total):
        raise ValidationError("MLF needs integer weights")
    if w <= 0:
        return 1.0
    return float(binom.sf(w - 1, total, s_out * s_in / (total * total)))


def _edge_index(g: InstanceGraph, i: int, j: int) -> int:
    lo, hi = g.out_ptr[i], g.out_ptr[i + 1]
    k = lo + int(np.searchsorted(g.dst[lo:hi], j))
    if k >= hi or g.dst[k] != j:
        raise ValidationError(f"no edge ({i}, {j})")
    return k


@dataclass(frozen=True)
class EdgeSignificance:
    model: str
    p_value: np.ndarray
    alpha_out: np.ndarray | None = None
    alpha_in: np.ndarray | None = None


def edge_significance(g: InstanceGraph, model: str) -> EdgeSignificance:
    if model == "disparity":
        a_out, a_in = disparity_pvalues(g)
        return EdgeSignificance(model, np.minimum(a_out, a_in), a_out, a_in)
    if model == "mlf":
        return EdgeSignificance(model, mlf_pvalues(g))
    raise ValidationError(f"unknown backbone model {model!r}")


def prune(g: InstanceGraph, model: str, alpha: float,
          significance: EdgeSignificance | None = None) -> InstanceGraph:
    """Keep edges with p-value below ``alpha``; drop nodes left isolated.

    For the disparity filter an edge is kept when it is significant from
    either endpoint, i.e. ``min(alpha_out, alpha_in) < alpha``.
    """
    if not 0 < alpha < 1:
        raise ValidationError("significance level must lie in (0, 1)")
    sig = significance or edge_significance(g, model)
    keep = sig.p_value < alpha
    pruned = InstanceGraph(g.labels, g.meta, g.src[keep], g.dst[keep], g.weight[keep])
    touched = np.zeros(g.n, dtype=bool)
    touched[pruned.src] = True
    touched[pruned.dst] = True
    return induced_subgraph(pruned, touched)


def write_significance(g: InstanceGraph, sig: EdgeSignificance, path, header=()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight", "model", "p_value"])
        for (i, j, wt), p in zip(g.edges(), sig.p_value.tolist()):
            w.writerow([g.labels[i], g.labels[j], _num(wt), sig.model, repr(float(p))])


def _num(w: float) -> str:
    return str(int(w)) if w == int(w) else repr(w)
