"""Identify an unknown distribution from a finite sample prefix.

A :class:`CandidateFamily` holds finitely many validated laws with pairwise
distinct CDFs plus a sink label. The estimator picks the candidate with the
smallest Kolmogorov-Smirnov distance to the sample, provided that distance is
within ``tol``; samples close to no candidate (or equally close to two) go to
the sink class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._spec import check_keys
from .equidist import mu_equidist_stat, uniform_open
from .measures1d import Measure1D, measure_from_json, validate

GAP_FLOOR = 1e-6
DEFAULT_TOL = 0.05
TIE_EPS = 1e-12
_GRID_POINTS = 4001
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class IndistinguishableError(ValueError):
    """Two laws whose CDFs agree everywhere up to the gap floor."""


def _abs_cdf_gap(m1: Measure1D, m2: Measure1D, x):
    return np.abs(np.asarray(m1.cdf(x), dtype=float) - np.asarray(m2.cdf(x), dtype=float))


def _golden_max(f, a: float, b: float, xtol: float = 1e-12, max_iter: int = 200) -> float:
    """Maximiser of a unimodal ``f`` on ``[a, b]``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def separation_witness(m1: Measure1D, m2: Measure1D,
                       gap_floor: float = GAP_FLOOR) -> tuple[float, float]:
    """A point ``x0`` where the two CDFs differ most, and the gap ``|F1(x0) - F2(x0)|``.

    A coarse grid over the union of both bulks locates the best cell; golden
    section search then refines inside the neighbouring cells.
    """
    lo = min(m1.bulk()[0], m2.bulk()[0])
    hi = max(m1.bulk()[1], m2.bulk()[1])
    grid = np.linspace(lo, hi, _GRID_POINTS)
    extra = np.asarray(m1.breakpoints() + m2.breakpoints(), dtype=float)
    grid = np.unique(np.concatenate([grid, extra[(extra >= lo) & (extra <= hi)]]))
    vals = _abs_cdf_gap(m1, m2, grid)
    i = int(np.argmax(vals))
    x0, gap = float(grid[i]), float(vals[i])
    a, b = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid.size - 1)])
    if b > a:
        x_ref = _golden_max(lambda x: float(_abs_cdf_gap(m1, m2, x)), a, b)
        g_ref = float(_abs_cdf_gap(m1, m2, x_ref))
        if g_ref > gap:
            x0, gap = x_ref, g_ref
    if not gap > gap_floor:
        raise IndistinguishableError(
            f"indistinguishable within tolerance: max CDF gap {gap:.3g} <= {gap_floor:g}")
    return x0, gap


@dataclass
class CandidateFamily:
    members: list[tuple[str, Measure1D]]
    sink_id: str = "sink"
    gaps: dict[tuple[str, str], float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.members:
            raise ValueError("candidate family is empty")
        ids = [name for name, _ in self.members]
        if len(set(ids)) != len(ids):
            raise ValueError(f"candidate identifiers must be unique: {ids}")
        if self.sink_id in ids:
            raise ValueError(f"sink id {self.sink_id!r} clashes with a member id")
        for name, m in self.members:
            report = validate(m)
            if not report.usable:
                raise ValueError(f"member {name!r} failed validation: {'; '.join(report.reasons)}")
        for i, (a, ma) in enumerate(self.members):
            for b, mb in self.members[i + 1:]:
                try:
                    self.gaps[(a, b)] = separation_witness(ma, mb)[1]
                except IndistinguishableError as exc:
                    raise ValueError(f"members {a!r} and {b!r}: {exc}") from None

    @property
    def ids(self) -> list[str]:
        return [name for name, _ in self.members]

    def gap(self, a: str, b: str) -> float:
        return self.gaps[(a, b)] if (a, b) in self.gaps else self.gaps[(b, a)]

    def to_json(self) -> dict[str, Any]:
        return {"sink_id": self.sink_id,
                "members": [{"id": name, "measure": m.to_json()} for name, m in self.members]}


def family_from_json(spec: dict[str, Any]) -> CandidateFamily:
    check_keys(spec, {"sink_id", "members"}, "candidate family")
    for entry in spec.get("members", []):
        check_keys(entry, {"id", "measure"}, "family member")
    members = [(str(entry["id"]), measure_from_json(entry["measure"]))
               for entry in spec.get("members", [])]
    return CandidateFamily(members, str(spec.get("sink_id", "sink")))


@dataclass
class EstimateResult:
    chosen: str
    distances: dict[str, float]
    margin: float
    n: int

    def to_json(self) -> dict[str, Any]:
        return {"chosen": self.chosen, "distances": dict(self.distances),
                "margin": self.margin, "n": self.n}


def well_founded_estimate(sample: Sequence[float], fam: CandidateFamily,
                          tol: float = DEFAULT_TOL) -> EstimateResult:
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("sample is empty")
    distances = {name: mu_equidist_stat(x, m) for name, m in fam.members}
    ranked = sorted(distances.items(), key=lambda kv: (kv[1], fam.ids.index(kv[0])))
    best_id, best = ranked[0]
    margin = ranked[1][1] - best if len(ranked) > 1 else 1.0 - best
    tied = len(ranked) > 1 and margin < TIE_EPS
    chosen = best_id if best <= tol and not tied else fam.sink_id
    return EstimateResult(chosen, distances, max(margin, 0.0), int(x.size))


def partition_assign(samples: Sequence[Sequence[float]], fam: CandidateFamily,
                     tol: float = DEFAULT_TOL) -> dict[int, str]:
    """Class label for every sample; the sink absorbs whatever matches no candidate."""
    return {i: well_founded_estimate(s, fam, tol).chosen for i, s in enumerate(samples)}


@dataclass
class OrthogonalityReport:
    x0: float
    gap: float
    n: int
    seed: int
    empirical: float
    f1: float
    f2: float
    success: bool
    status: str

    def to_json(self) -> dict[str, Any]:
        return {"x0": self.x0, "gap": self.gap, "n": self.n, "seed": self.seed,
                "empirical": self.empirical, "F1_x0": self.f1, "F2_x0": self.f2,
                "success": self.success, "status": self.status}


def orthogonality_demo(m1: Measure1D, m2: Measure1D, n: int, seed: int) -> OrthogonalityReport:
    """Sample from ``m1`` and watch the frequency of ``(-inf, x0]`` settle at ``F1(x0)``, away from ``F2(x0)``.

    When ``2/sqrt(n)`` exceeds ``gap/4`` the sampling noise can swamp the
    separation, so the report says "inconclusive at this n" and never claims success.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    x0, gap = separation_witness(m1, m2)
    sample = m1.quantile(uniform_open(seed, int(n)))
    emp = int(np.count_nonzero(sample <= x0)) / n
    f1, f2 = float(m1.cdf(x0)), float(m2.cdf(x0))
    if 2.0 / math.sqrt(n) > gap / 4.0:
        return OrthogonalityReport(x0, gap, int(n), seed, emp, f1, f2, False,
                                   "inconclusive at this n")
    success = abs(emp - f1) <= gap / 4.0 and abs(emp - f2) >= gap / 2.0
    return OrthogonalityReport(x0, gap, int(n), seed, emp, f1, f2, success,
                               "success" if success else "failure")
