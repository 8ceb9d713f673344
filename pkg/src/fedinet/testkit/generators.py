"""Seeded synthetic graphs, user-level follow data and degree samples.

Randomness comes from counter-based Philox streams keyed by the spec seed,
so an identical spec always produces identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ..errors import ValidationError
from ..graph import EdgeRecord, InstanceGraph, NodeMeta, Platform, Status
from ..netmodel import UserEdgeRecord

GRAPH_FAMILIES = ("gnp_directed", "gnm_directed", "planted_partition")
SAMPLE_FAMILIES = ("powerlaw_sample", "lognormal_sample", "geometric_sample", "poisson_sample")
FAMILIES = GRAPH_FAMILIES + ("federated_sim",) + SAMPLE_FAMILIES


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``seed`` and an optional sub-stream path."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown generator family {self.family!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        raw = json.loads(text)
        return cls(raw["family"], dict(raw.get("params", {})), int(raw.get("seed", 0)))

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "params": self.params, "seed": self.seed},
                          sort_keys=True)


def _prob(name, p):
    if not 0 <= p <= 1:
        raise ValidationError(f"{name} must lie in [0, 1], got {p}")
    return float(p)


def _size(name, n, minimum=1):
    if int(n) != n or n < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {n}")
    return int(n)


def _labels(n: int, prefix: str = "n") -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


def _weights(rng, count, weight_p):
    if weight_p is None:
        return np.ones(count)
    return rng.geometric(_prob("weight_p", weight_p), count).astype(np.float64)


def gnp_directed(n: int, p: float, seed: int = 0, weight_p: float | None = None) -> InstanceGraph:
    """Each ordered pair (i, j), i != j, is an arc with probability ``p``.

    With ``weight_p`` arc weights are geometric(weight_p) multiplicities.
    """
    n = _size("n", n)
    p = _prob("p", p)
    rng = rng_for(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return InstanceGraph.from_arrays(_labels(n), src, dst, _weights(rng, len(src), weight_p))


def gnm_directed(n: int, m: int, seed: int = 0, weight_p: float | None = None) -> InstanceGraph:
    """About ``m`` distinct random arcs (duplicates and loops redrawn once, then dropped)."""
    n = _size("n", n, 2)
    m = _size("m", m, 0)
    if m > n * (n - 1):
        raise ValidationError("m exceeds the number of ordered pairs")
    rng = rng_for(seed)
    keys = np.zeros(0, dtype=np.int64)
    while len(keys) < m:
        need = int((m - len(keys)) * 1.1) + 16
        s = rng.integers(0, n, need)
        t = rng.integers(0, n, need)
        ok = s != t
        keys = np.unique(np.concatenate((keys, s[ok] * n + t[ok])))
    keys = rng.permutation(keys)[:m]
    keys.sort()
    return InstanceGraph.from_arrays(_labels(n), keys // n, keys % n,
                                     _weights(rng, len(keys), weight_p))


@dataclass(frozen=True)
class PlantedGraph:
    graph: InstanceGraph
    blocks: np.ndarray


def planted_partition(blocks: int, block_size: int, p_in: float, p_out: float,
                      seed: int = 0, weight_p: float | None = None) -> PlantedGraph:
    """Directed planted-partition graph with ground-truth block ids."""
    blocks = _size("blocks", blocks)
    block_size = _size("block_size", block_size)
    p_in, p_out = _prob("p_in", p_in), _prob("p_out", p_out)
    n = blocks * block_size
    truth = np.repeat(np.arange(blocks), block_size)
    rng = rng_for(seed)
    prob = np.where(truth[:, None] == truth[None, :], p_in, p_out)
    mask = rng.random((n, n)) < prob
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    g = InstanceGraph.from_arrays(_labels(n), src, dst, _weights(rng, len(src), weight_p))
    return PlantedGraph(g, truth)


@dataclass
class FederatedSim:
    users: list[UserEdgeRecord]
    meta: dict[str, NodeMeta]
    boundary: list[EdgeRecord]


def federated_sim(instances: int = 120, other_instances: int = 20, online_fraction: float = 0.7,
                  user_mu: float = 2.5, user_sigma: float = 1.2, follows_mean: float = 8.0,
                  local_bias: float = 0.4, popularity: float = 1.0,
                  boundary_edges: int = 200, seed: int = 0) -> FederatedSim:
    """User-level follow records over a simulated federation.

    Instance sizes are lognormal; each user follows a Poisson number of
    users, staying on its own instance with probability ``local_bias`` and
    otherwise picking a target instance with probability proportional to
    ``size ** popularity``.  Boundary edges link Mastodon instances with
    ``other_instances`` non-Mastodon servers.
    """
    instances = _size("instances", instances, 2)
    other_instances = _size("other_instances", other_instances, 0)
    online_fraction = _prob("online_fraction", online_fraction)
    local_bias = _prob("local_bias", local_bias)
    if user_sigma <= 0 or follows_mean < 0:
        raise ValidationError("user_sigma must be > 0 and follows_mean >= 0")
    rng = rng_for(seed)
    names = [f"inst{i:04d}.example" for i in range(instances)]
    sizes = np.maximum(1, np.rint(rng.lognormal(user_mu, user_sigma, instances))).astype(int)
    status = rng.random(instances) < online_fraction
    meta = {nm: NodeMeta(Status.ONLINE if on else Status.OFFLINE, Platform.MASTODON)
            for nm, on in zip(names, status)}
    attract = sizes.astype(np.float64) ** popularity
    attract /= attract.sum()
    users: list[UserEdgeRecord] = []
    for i, nm in enumerate(names):
        for u in range(sizes[i]):
            k = rng.poisson(follows_mean)
            if k == 0:
                continue
            local = rng.random(k) < local_bias
            tgt_inst = np.where(local, i, rng.choice(instances, size=k, p=attract))
            tgt_user = (rng.random(k) * sizes[tgt_inst]).astype(int)
            for j, v in zip(tgt_inst.tolist(), tgt_user.tolist()):
                if j == i and v == u:
                    continue
                users.append(UserEdgeRecord(f"u{i}_{u}", nm, f"u{j}_{v}", names[j]))
    others = [f"other{i:03d}.example" for i in range(other_instances)]
    boundary: list[EdgeRecord] = []
    if others and boundary_edges:
        m_side = rng.choice(instances, size=boundary_edges, p=attract)
        o_side = rng.integers(0, len(others), boundary_edges)
        outward = rng.random(boundary_edges) < 0.5
        w = rng.geometric(0.3, boundary_edges)
        for mi, oi, out, wt in zip(m_side.tolist(), o_side.tolist(), outward.tolist(), w.tolist()):
            a, b = names[mi], others[oi]
            boundary.append(EdgeRecord(a, b, float(wt)) if out else EdgeRecord(b, a, float(wt)))
    return FederatedSim(users, meta, boundary)


# -- degree samples ----------------------------------------------------------

def powerlaw_sample(alpha: float, xmin: int, n: int, seed: int = 0) -> np.ndarray:
    """Exact discrete power-law draws by integer inverse-CDF search.

    For each uniform ``r`` returns the ``x >= xmin`` with
    ``S(x + 1) < r <= S(x)``, ``S(x) = zeta(alpha, x) / zeta(alpha, xmin)``.
    """
    if alpha <= 1:
        raise ValidationError("alpha must exceed 1")
    xmin = _size("xmin", xmin)
    n = _size("n", n)
    rng = rng_for(seed)
    r = rng.random(n)
    z0 = special.zeta(alpha, xmin)

    def surv(x):
        return special.zeta(alpha, x.astype(np.float64)) / z0

    lo = np.full(n, xmin, dtype=np.int64)  # S(lo) >= r always
    hi = np.full(n, xmin + 1, dtype=np.int64)
    grow = surv(hi) >= r
    while grow.any():
        lo[grow] = hi[grow]
        hi[grow] = hi[grow] * 2
        grow = surv(hi) >= r
    # invariant: S(lo) >= r > S(hi)
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        up = surv(mid) >= r
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return lo


def lognormal_sample(mu: float, sigma: float, n: int, seed: int = 0) -> np.ndarray:
    """Lognormal variates rounded to the nearest integer, floored at 1."""
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    rng = rng_for(seed)
    return np.maximum(1, np.rint(rng.lognormal(mu, sigma, _size("n", n)))).astype(np.int64)


def geometric_sample(p: float, n: int, seed: int = 0) -> np.ndarray:
    return rng_for(seed).geometric(_prob("p", p), _size("n", n)).astype(np.int64)


def poisson_sample(lam: float, n: int, seed: int = 0) -> np.ndarray:
    if lam <= 0:
        raise ValidationError("lam must be positive")
    return rng_for(seed).poisson(lam, _size("n", n)).astype(np.int64)


def generate(spec: GeneratorSpec):
    """Run the generator named by ``spec``."""
    fn = {
        "gnp_directed": gnp_directed,
        "gnm_directed": gnm_directed,
        "planted_partition": planted_partition,
        "federated_sim": federated_sim,
        "powerlaw_sample": powerlaw_sample,
        "lognormal_sample": lognormal_sample,
        "geometric_sample": geometric_sample,
        "poisson_sample": poisson_sample,
    }[spec.family]
    try:
        return fn(**spec.params, seed=spec.seed)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {spec.family}: {exc}") from None


def gen_graph(spec: GeneratorSpec) -> InstanceGraph:
    out = generate(spec)
    if isinstance(out, PlantedGraph):
        return out.graph
    if not isinstance(out, InstanceGraph):
        raise ValidationError(f"{spec.family} does not produce an instance graph")
    return out
