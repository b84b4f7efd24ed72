"""Kernel independence tests, p-value pooling and the graph oracle.

Columns are standardized before any kernel is built.  Kernel widths use
the median pairwise distance of the (standardized) points.
"""

from __future__ import annotations

import csv
import logging
import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.linalg import eigh, solve
from scipy.spatial.distance import pdist, squareform

from .graph import MixedGraph, m_separated

log = logging.getLogger(__name__)

#: sample cap for the median-distance heuristic
BANDWIDTH_SAMPLE = 1000
#: ridge added to the conditioning kernel in the conditional test
KCI_RIDGE = 1e-3
#: eigenvalues below this fraction of the largest are dropped from the null
EIG_CUTOFF = 1e-5
#: maximum number of eigen-components per side in the conditional null
EIG_MAX = 40


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True)
class Dataset:
    """Named columns of real-valued samples; ``samples`` has one row per sample."""

    variables: tuple[str, ...]
    samples: np.ndarray
    name: str = ""

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(self.variables):
            raise DataError("samples must be an (n, p) array matching the variable list")
        if data.shape[0] < 2:
            raise DataError("a dataset needs at least two samples")
        if len(set(self.variables)) != len(self.variables):
            raise DataError(f"duplicate variable names in {self.variables}")
        if not np.all(np.isfinite(data)):
            raise DataError("missing or non-finite values are not supported")
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "samples", data)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def column(self, v: str) -> np.ndarray:
        return self.samples[:, self.variables.index(v)]

    def columns(self, vs: Iterable[str]) -> np.ndarray:
        idx = [self.variables.index(v) for v in vs]
        return self.samples[:, idx]

    def subset(self, vs: Sequence[str], name: str | None = None) -> "Dataset":
        return Dataset(tuple(vs), self.columns(vs), self.name if name is None else name)


def read_csv(path, variables: Sequence[str] | None = None) -> Dataset:
    """Read a CSV with a header row of variable names and numeric columns."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    ds = Dataset(tuple(header), data, name=path.stem)
    if variables is not None:
        missing = set(variables) - set(header)
        if missing:
            raise DataError(f"{path}: columns {sorted(missing)} not found")
        ds = ds.subset(list(variables))
    return ds


def write_csv(ds: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ds.variables)
        for row in ds.samples:
            w.writerow([repr(float(x)) for x in row])


@dataclass(frozen=True)
class CiDecision:
    pvalue: float
    independent: bool
    statistic: float = float("nan")


def _decision(p: float, alpha: float, stat: float = float("nan")) -> CiDecision:
    p = float(min(max(p, 0.0), 1.0))
    return CiDecision(p, p > alpha, float(stat))


# --------------------------------------------------------------- kernels
def _as_points(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def standardize(a) -> np.ndarray:
    pts = _as_points(a)
    sd = pts.std(axis=0)
    sd[sd == 0] = 1.0
    return (pts - pts.mean(axis=0)) / sd


def median_bandwidth(points) -> float:
    """Median pairwise Euclidean distance; 1.0 when that median is zero."""
    pts = _as_points(points)
    if pts.shape[0] < 2:
        raise DataError("median bandwidth needs at least two points")
    d = pdist(pts[:BANDWIDTH_SAMPLE])
    med = float(np.median(d))
    return med if med > 0 else 1.0


def rbf_gram(points, width: float | None = None) -> np.ndarray:
    pts = _as_points(points)
    if width is None:
        width = median_bandwidth(pts)
    sq = squareform(pdist(pts, "sqeuclidean"))
    return np.exp(-sq / (2.0 * width * width))


def _center(k: np.ndarray) -> np.ndarray:
    return k - k.mean(axis=0) - k.mean(axis=1)[:, None] + k.mean()


def _is_constant(a) -> bool:
    pts = _as_points(a)
    return bool(np.all(pts.max(axis=0) - pts.min(axis=0) == 0))


# ------------------------------------------------------------------ HSIC
def hsic_gamma(kx: np.ndarray, ky: np.ndarray) -> tuple[float, float]:
    """Statistic ``n * HSIC_b`` and its gamma-approximation p-value from two Gram matrices."""
    n = kx.shape[0]
    kc, lc = _center(kx), _center(ky)
    stat = float(np.sum(kc * lc) / n)
    v = (kc * lc / 6.0) ** 2
    var = (v.sum() - np.trace(v)) / n / (n - 1)
    var = var * 72.0 * (n - 4) * (n - 5) / n / (n - 1) / (n - 2) / (n - 3)
    kx0 = kx - np.diag(np.diag(kx))
    ky0 = ky - np.diag(np.diag(ky))
    mu_x = kx0.sum() / n / (n - 1)
    mu_y = ky0.sum() / n / (n - 1)
    mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / n
    if var <= 0 or mean <= 0:
        return stat, 1.0
    shape = mean * mean / var
    scale = var * n / mean
    return stat, float(stats.gamma.sf(stat, shape, scale=scale))


def hsic_test(
    x,
    y,
    alpha: float = 0.05,
    *,
    permutations: int = 0,
    seed: int | None = None,
) -> CiDecision:
    """Marginal independence test with RBF kernels.

    The null distribution is the moment-matched gamma approximation, or an
    empirical permutation null when ``permutations`` is positive.
    """
    xs, ys = _as_points(x), _as_points(y)
    n = xs.shape[0]
    if ys.shape[0] != n:
        raise DataError("x and y differ in length")
    if n < 20:
        raise DataError("HSIC needs at least 20 samples")
    if _is_constant(xs) or _is_constant(ys):
        log.warning("constant column in HSIC test; declaring independence")
        return _decision(1.0, alpha)
    kx = rbf_gram(standardize(xs))
    ky = rbf_gram(standardize(ys))
    stat, p = hsic_gamma(kx, ky)
    if permutations > 0:
        rng = np.random.default_rng(seed)
        kc = _center(kx)
        exceed = 0
        for _ in range(permutations):
            perm = rng.permutation(n)
            lp = _center(ky[np.ix_(perm, perm)])
            if np.sum(kc * lp) / n >= stat:
                exceed += 1
        p = (exceed + 1) / (permutations + 1)
    return _decision(p, alpha, stat)


# ------------------------------------------------------------------- KCI
def _top_eig(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = eigh(k)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    keep = vals > vals[0] * EIG_CUTOFF
    keep[EIG_MAX:] = False
    return vals[keep], vecs[:, keep]


def kernel_ci_test(x, y, z, alpha: float = 0.05) -> CiDecision:
    """Kernel conditional independence test of ``x`` and ``y`` given ``z``.

    Residual kernels ``R K R`` with ``R = eps (K_z + eps I)^-1`` are formed for
    ``(x, z)`` and ``y``; the statistic is the trace of their product and the
    null is a gamma fit to the spectrum of the residual kernels.
    """
    xs, ys, zs = _as_points(x), _as_points(y), _as_points(z)
    n = xs.shape[0]
    if ys.shape[0] != n or zs.shape[0] != n:
        raise DataError("x, y and z differ in length")
    if zs.shape[1] == 0:
        return hsic_test(xs, ys, alpha)
    if n < 20:
        raise DataError("the conditional test needs at least 20 samples")
    if _is_constant(xs) or _is_constant(ys):
        log.warning("constant column in conditional test; declaring independence")
        return _decision(1.0, alpha)
    xz = standardize(np.hstack([xs, zs]))
    zz = standardize(zs)
    kx = _center(rbf_gram(xz))
    ky = _center(rbf_gram(standardize(ys)))
    kz = _center(rbf_gram(zz))
    rz = KCI_RIDGE * solve(kz + KCI_RIDGE * np.eye(n), np.eye(n), assume_a="pos")
    kxr = rz @ kx @ rz
    kyr = rz @ ky @ rz
    stat = float(np.sum(kxr * kyr))
    vx, ex = _top_eig((kxr + kxr.T) / 2)
    vy, ey = _top_eig((kyr + kyr.T) / 2)
    phi_x = ex * np.sqrt(vx)
    phi_y = ey * np.sqrt(vy)
    w = (phi_x[:, :, None] * phi_y[:, None, :]).reshape(n, -1)
    ww = w @ w.T if w.shape[1] > n else w.T @ w
    mean = float(np.trace(ww))
    var = 2.0 * float(np.sum(ww * ww.T))
    if mean <= 0 or var <= 0:
        return _decision(1.0, alpha, stat)
    shape = mean * mean / var
    scale = var / mean
    return _decision(float(stats.gamma.sf(stat, shape, scale=scale)), alpha, stat)


# -------------------------------------------------------------- pooling
_TINY = float(np.nextafter(0.0, 1.0))


def fisher_pool(pvalues: Sequence[float]) -> float:
    """Fisher's combination: survival of chi^2 with ``2k`` degrees of freedom at ``-2 sum ln p``.

    Zeros are clamped to the smallest positive double.
    """
    ps = np.asarray(list(pvalues), dtype=float)
    if ps.size == 0:
        raise ValueError("fisher_pool needs at least one p-value")
    if np.any(ps < 0) or np.any(ps > 1) or np.any(np.isnan(ps)):
        raise ValueError("p-values must lie in [0, 1]")
    ps = np.maximum(ps, _TINY)
    stat = -2.0 * float(np.sum(np.log(ps)))
    return float(stats.chi2.sf(stat, 2 * ps.size))


# --------------------------------------------------------------- oracle
def oracle_ci(truth: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> CiDecision:
    """Independence read off the truth graph: p-value 1 when m-separated, else 0."""
    sep = m_separated(truth, x, y, set(z))
    return CiDecision(1.0 if sep else 0.0, sep)


# -------------------------------------------------------------- backends
def _key(i: int, x: str, y: str, z: Iterable[str]) -> tuple:
    a, b = sorted((x, y))
    return (i, a, b, tuple(sorted(z)))


@dataclass
class OracleCi:
    """Answers every query from a truth graph; the dataset index is ignored."""

    truth: MixedGraph
    queries: int = 0

    def pvalue(self, i: int, x: str, y: str, z: Sequence[str]) -> float:
        self.queries += 1
        return oracle_ci(self.truth, x, y, z).pvalue


@dataclass
class KernelCi:
    """Kernel tests on the given datasets with a shared result cache."""

    datasets: Sequence[Dataset]
    max_samples: int | None = None
    cache: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def pvalue(self, i: int, x: str, y: str, z: Sequence[str]) -> float:
        key = _key(i, x, y, z)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        ds = self.datasets[i]
        rows = slice(None) if self.max_samples is None else slice(0, self.max_samples)
        xs = ds.column(key[1])[rows]
        ys = ds.column(key[2])[rows]
        if key[3]:
            p = kernel_ci_test(xs, ys, ds.columns(key[3])[rows]).pvalue
        else:
            p = hsic_test(xs, ys).pvalue
        with self._lock:
            self.cache[key] = p
        log.debug("CI %s: p=%.4g", key, p)
        return p
