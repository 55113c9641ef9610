"""Equidistributed sequences: generators, counting statistics and the quantile transport.

Uniform draws for the ``iid`` generator come from numpy's PCG64 bit generator.
Each raw 64-bit word ``w`` is mapped to ``((w >> 11) + 0.5) * 2**-53``, which
lies strictly inside ``(0, 1)``, and non-uniform laws are reached through
their quantile function. Output is therefore bit-reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._spec import check_keys
from .measures1d import DomainError, Measure1D, UniformMixture, measure_from_json

_TWO_M53 = 2.0 ** -53


def uniform_open(seed: int, n: int) -> np.ndarray:
    """``n`` reproducible uniforms strictly inside ``(0, 1)``."""
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    words = np.random.PCG64(seed).random_raw(n).astype(np.uint64)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def radical_inverse(k: np.ndarray, base: int) -> np.ndarray:
    k = np.asarray(k, dtype=np.int64).copy()
    out = np.zeros(k.shape, dtype=float)
    scale = 1.0 / base
    while np.any(k > 0):
        out += (k % base) * scale
        k //= base
        scale /= base
    return out


@dataclass(frozen=True)
class SequenceGenerator:
    """``van-der-corput`` (``base``), ``weyl`` (``alpha``) or ``iid`` (``measure``, ``seed``)."""

    kind: str
    base: int = 2
    alpha: float = 0.6180339887498949
    measure: Measure1D | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("van-der-corput", "weyl", "iid"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind == "van-der-corput" and (int(self.base) != self.base or self.base < 2):
            raise ValueError("van der Corput base must be an integer >= 2")
        if self.kind == "iid" and self.measure is None:
            raise ValueError("iid generator needs a measure")

    def to_json(self) -> dict[str, Any]:
        if self.kind == "van-der-corput":
            return {"kind": self.kind, "base": self.base}
        if self.kind == "weyl":
            return {"kind": self.kind, "alpha": self.alpha}
        return {"kind": self.kind, "measure": self.measure.to_json(), "seed": self.seed}


_GEN_KEYS = {"van-der-corput": {"base"}, "weyl": {"alpha"}, "iid": {"measure", "seed"}}


def generator_from_json(spec: dict[str, Any]) -> SequenceGenerator:
    kind = spec.get("kind")
    check_keys(spec, {"kind"} | _GEN_KEYS.get(kind, set()), f"generator {kind!r}")
    if kind == "van-der-corput":
        return SequenceGenerator(kind, base=int(spec.get("base", 2)))
    if kind == "weyl":
        return SequenceGenerator(kind, alpha=float(spec["alpha"]))
    if kind == "iid":
        measure = measure_from_json(spec.get("measure", {"family": "uniform-mixture"}))
        return SequenceGenerator(kind, measure=measure, seed=int(spec.get("seed", 0)))
    raise ValueError(f"unknown generator kind {kind!r}")


def generate(gen: SequenceGenerator, n: int) -> np.ndarray:
    """First ``n`` terms of the sequence (indices ``1..n``)."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    k = np.arange(1, n + 1)
    if gen.kind == "van-der-corput":
        return radical_inverse(k, gen.base)
    if gen.kind == "weyl":
        out = np.mod(k * gen.alpha, 1.0)
        if np.any(out == 0.0):
            raise ValueError("Weyl sequence hit 0: alpha behaves rationally at this length")
        return out
    return inverse_transform(uniform_open(gen.seed, n), gen.measure)


def interval_frequency(seq: Sequence[float], c: float, d: float) -> float:
    """Share of terms in the closed interval ``[c, d]``."""
    if c > d:
        raise ValueError(f"need c <= d, got [{c}, {d}]")
    x = np.asarray(seq, dtype=float)
    if x.size == 0:
        raise ValueError("sequence is empty")
    return int(np.count_nonzero((x >= c) & (x <= d))) / x.size


def _ks_from_cdf_values(f_sorted: np.ndarray) -> float:
    n = f_sorted.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f_sorted), np.max(f_sorted - (i - 1) / n)))


def star_discrepancy(seq: Sequence[float]) -> float:
    """``D*_n`` of points in ``(0, 1)`` by the sorted-order formula."""
    x = np.sort(np.asarray(seq, dtype=float))
    if x.size == 0:
        raise ValueError("sequence is empty")
    if x[0] <= 0.0 or x[-1] >= 1.0:
        raise DomainError("star discrepancy needs points strictly inside (0, 1)")
    return _ks_from_cdf_values(x)


def mu_equidist_stat(seq: Sequence[float], m: Measure1D) -> float:
    """Kolmogorov-Smirnov distance ``sup_x |F_n(x) - F(x)|`` between the sample and ``m``."""
    x = np.sort(np.asarray(seq, dtype=float))
    if x.size == 0:
        raise ValueError("sequence is empty")
    return _ks_from_cdf_values(np.asarray(m.cdf(x), dtype=float))


def inverse_transform(seq: Sequence[float], m: Measure1D) -> np.ndarray:
    """Push points of ``(0, 1)`` through the quantile function of ``m``."""
    u = np.asarray(seq, dtype=float)
    if u.size and (np.min(u) <= 0.0 or np.max(u) >= 1.0):
        raise DomainError("inverse transform needs values strictly inside (0, 1)")
    return np.asarray(m.quantile(u), dtype=float)


@dataclass
class CesaroPath:
    final_mean: float
    running_means: np.ndarray
    tol: float
    in_D: bool
    caveat: str = "finite-prefix heuristic"

    def to_json(self) -> dict[str, Any]:
        return {"n": int(self.running_means.size), "final_mean": self.final_mean,
                "tol": self.tol, "in_D": self.in_D, "caveat": self.caveat}


def cesaro_mean_path(seq: Sequence[float], tol: float = 0.02) -> CesaroPath:
    """Running means ``sum_{k<=j} x_k / j``; membership in the zero-mean set is a heuristic."""
    x = np.asarray(seq, dtype=float)
    if x.size == 0:
        raise ValueError("sequence is empty")
    means = np.cumsum(x) / np.arange(1, x.size + 1)
    final = float(means[-1])
    return CesaroPath(final, means, tol, abs(final) <= tol)


@dataclass
class EquidistReport:
    n: int
    statistic: float
    table: list[dict[str, float]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "statistic": self.statistic, "intervals": self.table}


def equidist_report(seq: Sequence[float], m: Measure1D | None = None,
                    intervals: Sequence[tuple[float, float]] = ()) -> EquidistReport:
    """Statistic plus a per-interval frequency table; ``m=None`` means uniform on (0, 1)."""
    x = np.asarray(seq, dtype=float)
    if m is None:
        stat = star_discrepancy(x)
        m = UniformMixture()
    else:
        stat = mu_equidist_stat(x, m)
    table = []
    for c, d in intervals:
        table.append({"c": float(c), "d": float(d), "frequency": interval_frequency(x, c, d),
                      "target": float(m.cdf(d) - m.cdf(c))})
    return EquidistReport(int(x.size), stat, table)
