"""Degree-distribution fitting with Kolmogorov-Smirnov bootstrap p-values.

All families are discrete, defined on the integers:

* ``powerlaw``: ``P(x) = x^-alpha / zeta(alpha, x_min)`` for ``x >= x_min``,
  with ``x_min`` chosen by minimum KS distance.
* ``lognormal``: a lognormal variate rounded to the nearest integer,
  ``P(x) = Phi((ln(x+1/2) - mu)/sigma) - Phi((ln(x-1/2) - mu)/sigma)``.
* ``exponential``: ``P(x) ~ exp(-rate * x)`` (geometric).
* ``poisson``.

The last three are truncated to an integer interval ``[lo, hi]`` and fitted
by maximum likelihood on the truncated sample.  KS distances are exact
suprema over the integer support.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .errors import FitError, ValidationError

FAMILIES = ("powerlaw", "lognormal", "exponential", "poisson")
DEFAULT_BOOTSTRAP = 1000
MIN_OBSERVATIONS = 50

_ALPHA_LO, _ALPHA_HI = 1.0 + 1e-6, 20.0
_TABLE_LEN = 100_000
_SAMPLE_CAP = float(2 ** 53)


@dataclass(frozen=True)
class FitResult:
    family: str
    params: dict
    interval: tuple[int, int]
    ks_statistic: float
    p_value: float
    sample_size: int
    bootstrap: int = 0
    seed: int | None = None
    notes: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = asdict(self)
        row["interval"] = list(self.interval)
        return row


def _as_int_sample(degrees) -> np.ndarray:
    x = np.asarray(degrees)
    if x.size == 0:
        raise FitError("empty sample")
    if not np.all(np.isfinite(x)) or not np.all(x == np.round(x)):
        raise ValidationError("degree samples must be integers")
    return x.astype(np.int64)


def _child_generators(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


# -- power law ---------------------------------------------------------------

def _golden_max(fun, lo: np.ndarray, hi: np.ndarray, iters: int = 64) -> np.ndarray:
    """Vectorised golden-section search for the maximiser of concave ``fun``."""
    r = (math.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c = b - r * (b - a)
    d = a + r * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc > fd
        # maximum in [a, d] where left, else in [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = b - r * (b - a)
        nd = a + r * (b - a)
        c_new = np.where(left, nc, d)
        d_new = np.where(left, c, nd)
        fc_new = np.where(left, np.nan, fd)
        fd_new = np.where(left, fc, np.nan)
        need_c = left
        need_d = ~left
        if need_c.any():
            fc_new[need_c] = fun(c_new[need_c], need_c)
        if need_d.any():
            fd_new[need_d] = fun(d_new[need_d], need_d)
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    return (a + b) / 2


def _powerlaw_scan(values: np.ndarray, counts: np.ndarray, fixed_xmin: int | None = None):
    """Return (xmin, alpha, ks, n_tail) minimising KS over candidate x_min.

    Candidates are every distinct value but the largest, or only
    ``fixed_xmin`` when given.
    """
    n_distinct = len(values)
    if fixed_xmin is not None:
        start = np.array([np.searchsorted(values, fixed_xmin)])
        xm = np.array([float(fixed_xmin)])
    else:
        start = np.arange(n_distinct - 1)
        xm = values[start].astype(np.float64)
    if not start.size or start[0] > n_distinct - 2:
        raise FitError("power law needs at least two distinct tail values")
    cum = np.concatenate(([0], np.cumsum(counts)))
    cum_log = np.concatenate(([0.0], np.cumsum(counts * np.log(values))))
    nt = (cum[-1] - cum[start]).astype(np.float64)
    sl = cum_log[-1] - cum_log[start]

    def loglik(alpha, mask=None):
        if mask is None:
            return -alpha * sl - nt * np.log(special.zeta(alpha, xm))
        return -alpha * sl[mask] - nt[mask] * np.log(special.zeta(alpha, xm[mask]))

    alpha = _golden_max(loglik, np.full(len(start), _ALPHA_LO), np.full(len(start), _ALPHA_HI))

    # flattened (candidate, tail value) pairs
    lens = n_distinct - start
    offsets = np.concatenate(([0], np.cumsum(lens)[:-1]))
    owner = np.repeat(np.arange(len(start)), lens)
    j = np.repeat(start, lens) + np.arange(lens.sum()) - np.repeat(offsets, lens)
    a_rep = alpha[owner]
    u = values[j].astype(np.float64)
    z_u = special.zeta(a_rep, u)
    z_min = special.zeta(alpha, xm)[owner]
    e_at = (cum[j + 1] - np.repeat(cum[start], lens)) / nt[owner]
    f_at = 1.0 - (z_u - u ** (-a_rep)) / z_min
    # below u_j the empirical CDF still holds its value at the previous tail point
    e_prev = np.roll(e_at, 1)
    e_prev[offsets] = 0.0
    f_prev = 1.0 - z_u / z_min
    gaps = np.maximum(np.abs(e_at - f_at), np.abs(e_prev - f_prev))
    ks = np.maximum.reduceat(gaps, offsets)
    best = int(np.argmin(ks))
    return int(xm[best]), float(alpha[best]), float(ks[best]), int(nt[best])


def powerlaw_ks(sample, alpha: float, xmin: int) -> float:
    """Exact KS distance between the tail ``sample >= xmin`` and a discrete power law."""
    x = _as_int_sample(sample)
    x = x[x >= xmin]
    values, counts = np.unique(x, return_counts=True)
    if len(values) == 0:
        raise FitError("no observations at or above x_min")
    z_min = special.zeta(alpha, xmin)
    u = values.astype(np.float64)
    z_u = special.zeta(alpha, u)
    e_at = np.cumsum(counts) / x.size
    f_at = 1.0 - (z_u - u ** (-alpha)) / z_min
    e_prev = np.concatenate(([0.0], e_at[:-1]))
    f_prev = 1.0 - z_u / z_min
    return float(max(np.abs(e_at - f_at).max(), np.abs(e_prev - f_prev).max()))


def _powerlaw_table(alpha: float, xmin: int) -> np.ndarray:
    support = np.arange(xmin, xmin + _TABLE_LEN, dtype=np.float64)
    return np.cumsum(support ** (-alpha) / special.zeta(alpha, xmin))


def _sample_powerlaw(rng: np.random.Generator, alpha: float, xmin: int, size: int,
                     cdf: np.ndarray | None = None) -> np.ndarray:
    """Discrete power-law draws: exact table inverse CDF, continuous approximation far out."""
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    if cdf is None:
        cdf = _powerlaw_table(alpha, xmin)
    r = rng.random(size)
    out = np.empty(size, dtype=np.int64)
    inside = r < cdf[-1]
    out[inside] = xmin + np.searchsorted(cdf, r[inside], side="right")
    far = ~inside
    if far.any():
        x0 = xmin + _TABLE_LEN
        tail = (1.0 - r[far]) / (1.0 - cdf[-1])
        with np.errstate(over="ignore"):
            draw = np.floor((x0 - 0.5) * np.clip(tail, 1e-300, 1.0) ** (-1.0 / (alpha - 1.0)) + 0.5)
        # alpha close to 1 can overflow int64; cap where doubles still hold integers exactly
        out[far] = np.minimum(draw, _SAMPLE_CAP)
    return out


def fit_powerlaw(degrees, bootstrap: int = DEFAULT_BOOTSTRAP, seed: int = 0,
                 xmin: int | None = None) -> FitResult:
    """Discrete power-law fit with KS-minimising ``x_min`` and bootstrap p-value.

    Non-positive values are discarded.  The p-value is the fraction of
    semi-parametric resamples (body resampled from the data below
    ``x_min``, tail drawn from the fitted law, whole fit repeated) whose KS
    distance is at least the observed one.
    """
    x = _as_int_sample(degrees)
    dropped = int(np.count_nonzero(x < 1))
    x = x[x >= 1]
    if x.size < MIN_OBSERVATIONS:
        raise FitError(f"power-law fit needs >= {MIN_OBSERVATIONS} positive observations, "
                       f"got {x.size}")
    values, counts = np.unique(x, return_counts=True)
    if len(values) < 2:
        raise FitError("all observations are equal; power-law fit is degenerate")
    x_min, alpha, ks, n_tail = _powerlaw_scan(values, counts, xmin)
    body = x[x < x_min]
    p_tail = n_tail / x.size
    table = _powerlaw_table(alpha, x_min)
    exceed = 0
    for rng in _child_generators(seed, bootstrap):
        k = rng.binomial(x.size, p_tail)
        synth = np.concatenate((
            rng.choice(body, size=x.size - k) if body.size else np.zeros(0, dtype=np.int64),
            _sample_powerlaw(rng, alpha, x_min, k, table)))
        sv, sc = np.unique(synth, return_counts=True)
        if len(sv) < 2:
            exceed += 1
            continue
        try:
            _, _, ks_b, _ = _powerlaw_scan(sv, sc, xmin)
        except FitError:
            exceed += 1
            continue
        if ks_b >= ks:
            exceed += 1
    p = exceed / bootstrap if bootstrap else float("nan")
    return FitResult("powerlaw", {"alpha": alpha, "xmin": x_min},
                     (int(x_min), int(values[-1])), ks, p, n_tail, bootstrap, seed,
                     {"non_positive_dropped": dropped, "observations": int(x.size)})


# -- interval-truncated families --------------------------------------------

class _Truncated:
    """A discrete family restricted to the integers ``lo..hi``."""

    name = ""
    n_params = 1

    def __init__(self, lo: int, hi: int):
        self.lo, self.hi = lo, hi
        self.grid = np.arange(lo, hi + 1, dtype=np.float64)

    # subclasses: log of unnormalised pmf on an array of integers
    def log_weights(self, x, theta) -> np.ndarray:
        raise NotImplementedError

    def initial(self, values, counts) -> np.ndarray:
        raise NotImplementedError

    def bounds(self, x0):
        return None

    def unpack(self, theta) -> dict:
        raise NotImplementedError

    def pmf(self, theta) -> np.ndarray:
        lw = self.log_weights(self.grid, theta)
        lw = lw - lw.max()
        p = np.exp(lw)
        return p / p.sum()

    def negloglik(self, theta, idx, counts) -> float:
        lw = self.log_weights(self.grid, theta)
        top = lw.max()
        if not np.isfinite(top):
            return np.inf
        log_z = top + math.log(np.exp(lw - top).sum())
        val = counts.sum() * log_z - float(counts @ lw[idx])
        return val if np.isfinite(val) else np.inf

    def fit(self, values, counts, x0=None) -> np.ndarray:
        idx = (np.asarray(values) - self.lo).astype(np.int64)
        counts = np.asarray(counts, dtype=np.float64)
        if x0 is None:
            x0 = self.initial(np.asarray(values, dtype=np.float64), counts)
        if self.n_params == 1:
            lo, hi = self.bounds(x0)
            res = optimize.minimize_scalar(lambda t: self.negloglik(np.array([t]), idx, counts),
                                           bounds=(lo, hi), method="bounded",
                                           options={"xatol": 1e-10})
            return np.array([res.x])
        grad = getattr(self, "negloglik_grad", None)
        res = optimize.minimize(grad or self.negloglik, x0, args=(idx, counts),
                                jac=grad is not None, method="L-BFGS-B",
                                options={"ftol": 1e-13, "gtol": 1e-9})
        return res.x

    def ks(self, theta, values, counts) -> float:
        cdf = np.cumsum(self.pmf(theta))
        hist = np.zeros(len(self.grid))
        np.add.at(hist, (np.asarray(values) - self.lo).astype(np.int64), counts)
        emp = np.cumsum(hist) / hist.sum()
        return float(np.abs(emp - cdf).max())


class _Lognormal(_Truncated):
    name = "lognormal"
    n_params = 2

    def __init__(self, lo: int, hi: int):
        super().__init__(lo, hi)
        # bin k covers (x - 1/2, x + 1/2] on the continuous scale
        self._log_edges = np.log(np.arange(lo, hi + 2, dtype=np.float64) - 0.5)

    def _bins(self, theta):
        mu, log_sigma = theta
        sigma = math.exp(log_sigma)
        z = (self._log_edges - mu) / sigma
        lower, upper = special.ndtr(z), special.ndtr(-z)
        # CDF difference on the side of the median that keeps precision
        mass = np.where(z[:-1] > 0, upper[:-1] - upper[1:], lower[1:] - lower[:-1])
        return z, np.maximum(mass, 1e-300)

    def log_weights(self, x, theta):
        if len(x) == len(self.grid) and x[0] == self.lo:
            return np.log(self._bins(theta)[1])
        mu, log_sigma = theta
        sigma = math.exp(log_sigma)
        a = (np.log(np.maximum(x - 0.5, 1e-300)) - mu) / sigma
        b = (np.log(x + 0.5) - mu) / sigma
        mass = np.where(a > 0, special.ndtr(-a) - special.ndtr(-b),
                        special.ndtr(b) - special.ndtr(a))
        return np.log(np.maximum(mass, 1e-300))

    def negloglik_grad(self, theta, idx, counts):
        """Negative log-likelihood and its gradient in (mu, log sigma)."""
        z, mass = self._bins(theta)
        sigma = math.exp(theta[1])
        with np.errstate(over="ignore", invalid="ignore"):
            phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
            zphi = np.where(np.isfinite(z), z * phi, 0.0)
        d_mu = -(phi[1:] - phi[:-1]) / sigma / mass
        d_ls = -(zphi[1:] - zphi[:-1]) / mass
        total = mass.sum()
        p = mass / total
        n = counts.sum()
        val = n * math.log(total) - float(counts @ np.log(mass[idx]))
        grad = np.array([n * float(p @ d_mu) - float(counts @ d_mu[idx]),
                         n * float(p @ d_ls) - float(counts @ d_ls[idx])])
        if not (np.isfinite(val) and np.all(np.isfinite(grad))):
            return np.inf, np.zeros(2)
        return val, grad

    def initial(self, values, counts):
        lv = np.log(values)
        mu = float(counts @ lv / counts.sum())
        var = float(counts @ (lv - mu) ** 2 / counts.sum())
        return np.array([mu, 0.5 * math.log(max(var, 1e-6))])

    def unpack(self, theta):
        return {"mu": float(theta[0]), "sigma": float(math.exp(theta[1]))}


class _Exponential(_Truncated):
    name = "exponential"

    def log_weights(self, x, theta):
        return -math.exp(theta[0]) * x

    def initial(self, values, counts):
        mean = float(counts @ values / counts.sum())
        gap = max(mean - self.lo, 1e-3)
        return np.array([math.log(math.log1p(1.0 / gap))])

    def bounds(self, x0):
        return float(x0[0]) - 8.0, float(x0[0]) + 8.0

    def unpack(self, theta):
        return {"rate": float(math.exp(theta[0]))}


class _Poisson(_Truncated):
    name = "poisson"

    def log_weights(self, x, theta):
        lam = math.exp(theta[0])
        return x * theta[0] - lam - special.gammaln(x + 1)

    def initial(self, values, counts):
        mean = float(counts @ values / counts.sum())
        return np.array([math.log(max(mean, 1e-3))])

    def bounds(self, x0):
        return float(x0[0]) - 5.0, float(x0[0]) + 5.0

    def unpack(self, theta):
        return {"mean": float(math.exp(theta[0]))}


_TRUNCATED = {"lognormal": _Lognormal, "exponential": _Exponential, "poisson": _Poisson}


def _resolve_interval(x: np.ndarray, interval) -> tuple[int, int]:
    if interval is None:
        return int(x.min()), int(x.max())
    lo, hi = interval
    lo = int(x.min()) if lo is None else int(lo)
    hi = int(x.max()) if hi is None else int(hi)
    if lo > hi:
        raise ValidationError(f"empty interval [{lo}, {hi}]")
    return lo, hi


def _fit_truncated(family: str, degrees, interval, bootstrap: int, seed: int) -> FitResult:
    x = _as_int_sample(degrees)
    if family == "lognormal":
        x = x[x >= 1]
        if x.size == 0:
            raise FitError("no positive observations for a lognormal fit")
    lo, hi = _resolve_interval(x, interval)
    if family == "lognormal" and lo < 1:
        lo = 1
    inside = x[(x >= lo) & (x <= hi)]
    if inside.size == 0:
        raise FitError(f"interval [{lo}, {hi}] excludes every observation")
    if inside.size < MIN_OBSERVATIONS:
        raise FitError(f"{family} fit needs >= {MIN_OBSERVATIONS} observations in "
                       f"[{lo}, {hi}], got {inside.size}")
    values, counts = np.unique(inside, return_counts=True)
    if len(values) < 2:
        raise FitError(f"all observations in [{lo}, {hi}] are equal; fit is degenerate")
    model = _TRUNCATED[family](lo, hi)
    theta = model.fit(values, counts)
    ks = model.ks(theta, values, counts)
    cdf = np.cumsum(model.pmf(theta))
    cdf[-1] = 1.0
    exceed = 0
    for rng in _child_generators(seed, bootstrap):
        draw = lo + np.searchsorted(cdf, rng.random(inside.size), side="right")
        sv, sc = np.unique(draw, return_counts=True)
        if len(sv) < 2:
            exceed += 1
            continue
        tb = model.fit(sv, sc, x0=theta if model.n_params > 1 else None)
        if model.ks(tb, sv, sc) >= ks:
            exceed += 1
    p = exceed / bootstrap if bootstrap else float("nan")
    return FitResult(family, model.unpack(theta), (lo, hi), ks, p, int(inside.size),
                     bootstrap, seed)


def fit_lognormal(degrees, interval=None, bootstrap: int = DEFAULT_BOOTSTRAP,
                  seed: int = 0) -> FitResult:
    """Lognormal fit on the observations inside ``interval`` (default: full range)."""
    return _fit_truncated("lognormal", degrees, interval, bootstrap, seed)


def fit_reference(degrees, family: str, interval=None, bootstrap: int = DEFAULT_BOOTSTRAP,
                  seed: int = 0) -> FitResult:
    """Exponential or Poisson reference fit."""
    if family not in ("exponential", "poisson"):
        raise ValidationError(f"reference family must be exponential or poisson, not {family!r}")
    return _fit_truncated(family, degrees, interval, bootstrap, seed)


def fit(degrees, family: str, interval=None, bootstrap: int = DEFAULT_BOOTSTRAP,
        seed: int = 0) -> FitResult:
    if family == "powerlaw":
        return fit_powerlaw(degrees, bootstrap, seed)
    if family == "lognormal":
        return fit_lognormal(degrees, interval, bootstrap, seed)
    return fit_reference(degrees, family, interval, bootstrap, seed)


def model_cdf(result: FitResult, x) -> np.ndarray:
    """P(X <= x) of a fitted model at integer points ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if result.family == "powerlaw":
        alpha, xmin = result.params["alpha"], result.params["xmin"]
        out = np.zeros_like(x)
        ok = x >= xmin
        out[ok] = 1.0 - special.zeta(alpha, x[ok] + 1) / special.zeta(alpha, xmin)
        return out
    lo, hi = result.interval
    model = _TRUNCATED[result.family](lo, hi)
    p = result.params
    if result.family == "lognormal":
        theta = np.array([p["mu"], math.log(p["sigma"])])
    elif result.family == "exponential":
        theta = np.array([math.log(p["rate"])])
    else:
        theta = np.array([math.log(p["mean"])])
    cdf = np.cumsum(model.pmf(theta))
    idx = np.clip(x - lo, -1, hi - lo).astype(np.int64)
    return np.where(idx < 0, 0.0, cdf[np.maximum(idx, 0)])


def ccdf(degrees, fits: Sequence[FitResult] = ()) -> dict:
    """Empirical CCDF points ``(x, P(X >= x))`` plus fitted curves.

    Fitted curves are scaled to the whole sample: the model CCDF inside the
    fitted range is weighted by the empirical mass of that range and
    offset by the mass above it.
    """
    x = _as_int_sample(degrees)
    values, counts = np.unique(x, return_counts=True)
    n = x.size
    at_least = np.cumsum(counts[::-1])[::-1] / n
    out = {"empirical": list(zip(values.tolist(), at_least.tolist()))}
    for res in fits:
        lo, hi = res.interval
        pts = values[(values >= lo) & (values <= hi)]
        if not pts.size:
            out[res.family] = []
            continue
        mass_in = np.count_nonzero((x >= lo) & (x <= hi)) / n
        above = np.count_nonzero(x > hi) / n
        model_ge = 1.0 - model_cdf(res, pts - 1)
        out[res.family] = list(zip(pts.tolist(), (above + mass_in * model_ge).tolist()))
    return out
