"""One-dimensional Borel probability measures given by densities.

Every family exposes vectorised ``density``, ``cdf``, ``sf`` (survival) and
``quantile``. Families whose density is positive on the whole line set
``positive_on_R``; the exponential and uniform-mixture families live on a
proper sub-interval and carry their support instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from scipy.special import erfc

from .quadrature import QuadratureConfig, QuadratureError, integrate

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the domain of a measure operation."""


def _as_output(x, scalar: bool):
    return float(x) if scalar else x


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("density is only defined at finite points")


def _check_open_unit(u: np.ndarray) -> None:
    if np.any(np.isnan(u)) or np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("quantile requires u strictly inside (0, 1)")


class Measure1D:
    """Base class. Subclasses are frozen dataclasses holding the family parameters."""

    family: ClassVar[str] = ""
    positive_on_R: ClassVar[bool] = True

    # -- subclass hooks (array in, array out) -------------------------------
    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(x)

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        return _solve_quantile(self, u)

    @property
    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def breakpoints(self) -> list[float]:
        """Points where the density has kinks or where its mass concentrates."""
        return []

    def bulk(self) -> tuple[float, float]:
        """A finite interval carrying all but a negligible amount of mass."""
        return float(self._ppf(np.array([1e-12]))[0]), float(self._ppf(np.array([1 - 1e-12]))[0])

    def params(self) -> dict[str, Any]:
        raise NotImplementedError

    # -- public surface -----------------------------------------------------
    def density(self, x):
        arr = np.asarray(x, dtype=float)
        _check_finite(arr)
        return _as_output(self._pdf(arr), arr.ndim == 0)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(np.isnan(arr)):
            raise DomainError("cdf is undefined at NaN")
        out = np.clip(self._cdf(arr), 0.0, 1.0)
        return _as_output(out, arr.ndim == 0)

    def sf(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(np.isnan(arr)):
            raise DomainError("sf is undefined at NaN")
        out = np.clip(self._sf(arr), 0.0, 1.0)
        return _as_output(out, arr.ndim == 0)

    def quantile(self, u):
        arr = np.asarray(u, dtype=float)
        _check_open_unit(arr)
        out = self._ppf(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def shifted(self, delta: float) -> "Measure1D":
        """The image measure under ``x -> x + delta``."""
        raise NotImplementedError(f"{self.family} does not support shifting")

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family, **self.params()}


@dataclass(frozen=True)
class Gaussian(Measure1D):
    mean: float = 0.0
    sd: float = 1.0

    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.sd) and self.sd > 0):
            raise ValueError(f"gaussian needs finite mean and sd > 0, got {self.mean}, {self.sd}")

    def _pdf(self, x):
        z = (x - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (_SQRT2PI * self.sd)

    def _cdf(self, x):
        return 0.5 * erfc(-(x - self.mean) / (self.sd * _SQRT2))

    def _sf(self, x):
        return 0.5 * erfc((x - self.mean) / (self.sd * _SQRT2))

    def _bracket(self):
        return self.mean - 40.0 * self.sd, self.mean + 40.0 * self.sd

    def breakpoints(self):
        return [self.mean + k * self.sd for k in (-8.0, -4.0, 0.0, 4.0, 8.0)]

    def bulk(self):
        return self.mean - 8.0 * self.sd, self.mean + 8.0 * self.sd

    def params(self):
        return {"mean": self.mean, "sd": self.sd}

    def shifted(self, delta):
        return Gaussian(self.mean + delta, self.sd)


@dataclass(frozen=True)
class Exponential(Measure1D):
    """Exponential law on the half-line ``[0, inf)``; not positive on all of R."""

    rate: float = 1.0

    family: ClassVar[str] = "exponential"
    positive_on_R: ClassVar[bool] = False

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"exponential needs rate > 0, got {self.rate}")

    @property
    def support(self):
        return (0.0, math.inf)

    def _pdf(self, x):
        inside = x >= 0
        return np.where(inside, self.rate * np.exp(-self.rate * np.where(inside, x, 0.0)), 0.0)

    def _cdf(self, x):
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _sf(self, x):
        return np.where(x > 0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0)

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate

    def breakpoints(self):
        return [k / self.rate for k in (1.0, 5.0, 20.0)]

    def bulk(self):
        return 0.0, 30.0 / self.rate

    def params(self):
        return {"rate": self.rate}


@dataclass(frozen=True)
class UniformMixture(Measure1D):
    """Piecewise-constant density: bin ``i`` of ``edges`` carries probability ``weights[i]``.

    With ``edges=(0, 1)`` and ``weights=(1,)`` this is the uniform law on (0, 1).
    Weights are normalised on construction.
    """

    edges: tuple[float, ...] = (0.0, 1.0)
    weights: tuple[float, ...] = (1.0,)

    family: ClassVar[str] = "uniform-mixture"
    positive_on_R: ClassVar[bool] = False

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        weights = tuple(float(w) for w in self.weights)
        if len(edges) < 2 or len(weights) != len(edges) - 1:
            raise ValueError("uniform-mixture needs len(weights) == len(edges) - 1 >= 1")
        if not all(math.isfinite(e) for e in edges) or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("uniform-mixture edges must be finite and strictly increasing")
        total = math.fsum(weights)
        if any(w < 0 for w in weights) or not total > 0:
            raise ValueError("uniform-mixture weights must be nonnegative with positive sum")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", tuple(w / total for w in weights))

    @property
    def support(self):
        return (self.edges[0], self.edges[-1])

    @property
    def _cum(self):
        return np.concatenate([[0.0], np.cumsum(self.weights)])

    def _pdf(self, x):
        e = np.asarray(self.edges)
        heights = np.asarray(self.weights) / np.diff(e)
        idx = np.clip(np.searchsorted(e, x, side="right") - 1, 0, len(heights) - 1)
        inside = (x >= e[0]) & (x < e[-1])
        return np.where(inside, heights[idx], 0.0)

    def _cdf(self, x):
        return np.interp(x, self.edges, self._cum)

    def _ppf(self, u):
        cum = self._cum
        cum[-1] = 1.0
        return np.interp(u, cum, self.edges)

    def breakpoints(self):
        return list(self.edges[1:-1])

    def bulk(self):
        return self.support

    def params(self):
        return {"edges": list(self.edges), "weights": list(self.weights)}

    def shifted(self, delta):
        return UniformMixture(tuple(e + delta for e in self.edges), self.weights)


@dataclass(frozen=True)
class Plateau(Measure1D):
    """Density equal to ``c`` on ``[loc, loc + 1]`` with symmetric exponential tails.

    Outside the plateau the density is ``c * exp(-beta * dist)`` where
    ``beta = 2c / (1 - c)`` is the unique rate making the total mass one.
    """

    c: float = 0.5
    loc: float = 0.0
    gap: float = field(default=math.nan, compare=False)

    family: ClassVar[str] = "plateau"

    def __post_init__(self):
        # gap = 1 - c, kept separately so c = exp(-s) with tiny s stays a valid density
        gap = 1.0 - self.c if math.isnan(self.gap) else self.gap
        if not (0.0 < self.c <= 1.0 and 0.0 < gap < 1.0):
            raise ValueError(f"plateau value must lie in (0, 1), got {self.c}")
        if not math.isfinite(self.loc):
            raise ValueError("plateau loc must be finite")
        object.__setattr__(self, "gap", gap)

    @classmethod
    def from_log(cls, s: float, loc: float = 0.0) -> "Plateau":
        """Plateau value ``exp(-s)``, accurate even when it rounds to 1.0."""
        if not s > 0:
            raise ValueError(f"plateau value must lie in (0, 1), got exp(-{s})")
        return cls(math.exp(-s), loc, -math.expm1(-s))

    @property
    def beta(self) -> float:
        return 2.0 * self.c / self.gap

    @property
    def tail_mass(self) -> float:
        # c / beta, the mass of each exponential tail
        return 0.5 * self.gap

    def _pdf(self, x):
        t = x - self.loc
        dist = np.maximum(-t, 0.0) + np.maximum(t - 1.0, 0.0)
        return self.c * np.exp(-self.beta * dist)

    def _cdf(self, x):
        t = x - self.loc
        left = self.tail_mass * np.exp(self.beta * np.minimum(t, 0.0))
        middle = self.tail_mass + self.c * np.clip(t, 0.0, 1.0)
        right = 1.0 - self.tail_mass * np.exp(-self.beta * np.maximum(t - 1.0, 0.0))
        return np.where(t < 0, left, np.where(t <= 1.0, middle, right))

    def _sf(self, x):
        t = x - self.loc
        left = 1.0 - self.tail_mass * np.exp(self.beta * np.minimum(t, 0.0))
        middle = self.tail_mass + self.c * (1.0 - np.clip(t, 0.0, 1.0))
        right = self.tail_mass * np.exp(-self.beta * np.maximum(t - 1.0, 0.0))
        return np.where(t < 0, left, np.where(t <= 1.0, middle, right))

    def _ppf(self, u):
        m = self.tail_mass
        lower = np.log(np.minimum(u, m) / m) / self.beta
        middle = (u - m) / self.c
        upper = 1.0 - np.log(np.minimum(1.0 - u, m) / m) / self.beta
        return self.loc + np.where(u < m, lower, np.where(u <= 1.0 - m, middle, upper))

    def breakpoints(self):
        return [self.loc, self.loc + 1.0]

    def params(self):
        return {"c": self.c, "loc": self.loc}

    def shifted(self, delta):
        return Plateau(self.c, self.loc + delta, self.gap)


@dataclass(frozen=True)
class UserTable(Measure1D):
    """Piecewise-linear density on ``grid`` with exponential tails beyond the edges.

    The tails start at the edge values and decay at ``max(edge log-slope, 1/span)``
    so they always decay. The table is normalised to unit mass on construction;
    nonpositive values are accepted here and rejected by :func:`validate`.
    """

    grid: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    _norm: float = field(default=1.0, init=False, repr=False, compare=False)
    _rates: tuple[float, float] = field(default=(1.0, 1.0), init=False, repr=False, compare=False)

    family: ClassVar[str] = "user-table"

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        if len(grid) < 2 or len(values) != len(grid):
            raise ValueError("user-table needs at least two grid points and one value per point")
        if any(b <= a for a, b in zip(grid, grid[1:])) or not all(map(math.isfinite, grid)):
            raise ValueError("user-table grid must be finite and strictly increasing")
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ValueError("user-table values must be finite and nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        span = grid[-1] - grid[0]

        def edge_rate(v_edge, v_next, step):
            if v_edge > 0 and v_next > 0:
                return max(math.log(v_next / v_edge) / step, 1.0 / span)
            return 1.0 / span

        left = edge_rate(values[0], values[1], grid[1] - grid[0])
        right = edge_rate(values[-1], values[-2], grid[-1] - grid[-2])
        body = math.fsum(0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i])
                         for i in range(len(grid) - 1))
        total = body + values[0] / left + values[-1] / right
        if not total > 0:
            raise ValueError("user-table has zero total mass")
        object.__setattr__(self, "_norm", total)
        object.__setattr__(self, "_rates", (left, right))

    def _pdf(self, x):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        rl, rr = self._rates
        body = np.interp(x, g, v)
        left = v[0] * np.exp(rl * np.minimum(x - g[0], 0.0))
        right = v[-1] * np.exp(-rr * np.maximum(x - g[-1], 0.0))
        return np.where(x < g[0], left, np.where(x > g[-1], right, body)) / self._norm

    def _cumulative_body(self):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        pieces = 0.5 * (v[:-1] + v[1:]) * np.diff(g)
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def _cdf(self, x):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        rl, rr = self._rates
        left_mass = v[0] / rl
        cum = self._cumulative_body()
        pieces = np.diff(cum)
        idx = np.clip(np.searchsorted(g, x, side="right") - 1, 0, len(g) - 2)
        t = np.clip(x - g[idx], 0.0, None)
        slope = (v[idx + 1] - v[idx]) / (g[idx + 1] - g[idx])
        # share of the segment's mass, clipped so segments meet without rounding overlap
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(pieces[idx] > 0, t * (v[idx] + 0.5 * slope * t) / pieces[idx], 0.0)
        body = left_mass + (cum[idx] + np.clip(w, 0.0, 1.0) * pieces[idx])
        left = left_mass * np.exp(rl * np.minimum(x - g[0], 0.0))
        right_tail = v[-1] / rr * np.exp(-rr * np.maximum(x - g[-1], 0.0))
        right = np.maximum(self._norm - right_tail, left_mass + cum[-1])
        out = np.where(x < g[0], left, np.where(x > g[-1], right, body))
        return out / self._norm

    def _sf(self, x):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        rr = self._rates[1]
        right_tail = v[-1] / rr * np.exp(-rr * np.maximum(x - g[-1], 0.0)) / self._norm
        return np.where(x > g[-1], right_tail, 1.0 - self._cdf(x))

    def _bracket(self):
        span = self.grid[-1] - self.grid[0]
        return self.grid[0] - span, self.grid[-1] + span

    def breakpoints(self):
        return list(self.grid)

    def bulk(self):
        rl, rr = self._rates
        return self.grid[0] - 30.0 / rl, self.grid[-1] + 30.0 / rr

    def params(self):
        return {"grid": list(self.grid), "values": list(self.values)}

    def shifted(self, delta):
        return UserTable(tuple(g + delta for g in self.grid), self.values)


def _solve_quantile(m: Measure1D, u: np.ndarray, max_iter: int = 200) -> np.ndarray:
    """Monotone bisection followed by bracket-safeguarded Newton on the CDF.

    For ``u > 1/2`` the equation is posed on the survival function so that
    upper-tail quantiles keep full relative accuracy.
    """
    u = np.asarray(u, dtype=float)
    lo_b, hi_b = m._bracket() if hasattr(m, "_bracket") else m.bulk()
    lo_b, hi_b = float(lo_b), float(hi_b)
    umin, umax = float(np.min(u)), float(np.max(u))
    width = hi_b - lo_b
    for _ in range(2000):
        if float(m._cdf(np.array([lo_b]))[0]) < umin:
            break
        lo_b -= width
        width *= 2.0
    width = hi_b - lo_b
    for _ in range(2000):
        if float(m._sf(np.array([hi_b]))[0]) < 1.0 - umax:
            break
        hi_b += width
        width *= 2.0

    upper = u > 0.5
    target = np.where(upper, 1.0 - u, u)

    def residual(x, up, tgt):
        # increasing in x in both branches
        return np.where(up, tgt - m._sf(x), m._cdf(x) - tgt)

    lo = np.full_like(u, lo_b)
    hi = np.full_like(u, hi_b)
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        r = residual(mid, upper, target)
        lo = np.where(r < 0, mid, lo)
        hi = np.where(r < 0, hi, mid)

    x = 0.5 * (lo + hi)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        r = residual(xa, upper[active], target[active])
        lo_a = np.where(r < 0, xa, lo[active])
        hi_a = np.where(r > 0, xa, hi[active])
        dens = m._pdf(xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dens > 0, r / dens, np.nan)
        cand = xa - step
        bad = ~np.isfinite(cand) | (cand <= lo_a) | (cand >= hi_a)
        cand = np.where(bad, 0.5 * (lo_a + hi_a), cand)
        done = (r == 0) | (np.abs(cand - xa) <= 2e-16 * np.maximum(1.0, np.abs(xa))) | (hi_a - lo_a <= 4e-16 * np.maximum(1.0, np.abs(xa)))
        newx = np.where(r == 0, xa, cand)
        lo[active] = lo_a
        hi[active] = hi_a
        x[active] = newx
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return x


FAMILIES: dict[str, type[Measure1D]] = {
    cls.family: cls for cls in (Gaussian, Exponential, UniformMixture, Plateau, UserTable)
}


def measure_from_json(spec: dict[str, Any]) -> Measure1D:
    """Build a measure from its JSON form, e.g. ``{"family": "gaussian", "mean": 0, "sd": 1}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError(f"measure spec must be an object with a 'family' key: {spec!r}")
    params = {k: v for k, v in spec.items() if k != "family"}
    family = spec["family"]
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown measure family {family!r}; expected one of {sorted(FAMILIES)}") from None
    if cls in (UniformMixture, UserTable):
        params = {k: tuple(v) for k, v in params.items()}
    try:
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {family}: {exc}") from None


# -- validation ---------------------------------------------------------------

@dataclass
class ValidationReport:
    family: str
    status: str  # "usable" | "rejected" | "unvalidated"
    normalization_defect: float | None
    min_density: float
    cdf_monotone: bool
    roundtrip_error: float
    positive_on_R: bool
    reasons: list[str] = field(default_factory=list)

    @property
    def usable(self) -> bool:
        return self.status == "usable"

    def to_json(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "status": self.status,
            "usable": self.usable,
            "normalization_defect": self.normalization_defect,
            "min_density": self.min_density,
            "cdf_monotone": self.cdf_monotone,
            "roundtrip_error": self.roundtrip_error,
            "positive_on_R": self.positive_on_R,
            "reasons": list(self.reasons),
        }


def total_mass(m: Measure1D, q: QuadratureConfig | None = None) -> tuple[float, float]:
    lo, hi = m.support
    return integrate(m._pdf, lo, hi, q, breakpoints=m.breakpoints())


def validate(m: Measure1D, q: QuadratureConfig | None = None) -> ValidationReport:
    """Check the standing hypotheses: unit mass, positive density, monotone invertible CDF."""
    q = q or QuadratureConfig()
    reasons: list[str] = []

    lo_b, hi_b = m.bulk()
    xs = np.linspace(lo_b, hi_b, 2001)
    xs = np.concatenate([xs, np.asarray(m.breakpoints(), dtype=float)])
    s_lo, s_hi = m.support
    xs = np.sort(xs[(xs >= s_lo) & (xs < s_hi)])
    dens = m._pdf(xs)
    min_density = float(np.min(dens))
    if not min_density > 0:
        reasons.append("strict positivity violated")

    cdf_vals = m._cdf(xs)
    monotone = bool(np.all(np.diff(cdf_vals) >= 0))
    us = np.linspace(1e-6, 1 - 1e-6, 999)
    inner = m._cdf(m._ppf(us))
    if monotone:
        monotone = bool(np.all(np.diff(m._ppf(us)) > 0))
    if not monotone:
        reasons.append("cdf not strictly increasing")
    roundtrip = float(np.max(np.abs(inner - us)))
    if not roundtrip <= 1e-10:
        reasons.append(f"quantile round trip error {roundtrip:.3g}")

    defect: float | None
    status = "usable"
    try:
        mass, _ = total_mass(m, q)
        defect = abs(mass - 1.0)
        if not defect <= max(q.abs_tol, q.rel_tol):
            reasons.append(f"normalization defect {defect:.3g}")
    except QuadratureError as exc:
        defect = None
        status = "unvalidated"
        reasons.append(f"quadrature did not converge: {exc}")

    if status != "unvalidated" and reasons:
        status = "rejected"
    return ValidationReport(
        family=m.family,
        status=status,
        normalization_defect=defect,
        min_density=min_density,
        cdf_monotone=monotone,
        roundtrip_error=roundtrip,
        positive_on_R=m.positive_on_R and min_density > 0,
        reasons=reasons,
    )


def require_positive_on_R(m: Measure1D, what: str = "this operation") -> None:
    if not m.positive_on_R:
        lo, hi = m.support
        raise DomainError(f"{what} needs a density positive on all of R; "
                          f"{m.family} lives on [{lo}, {hi}]")
