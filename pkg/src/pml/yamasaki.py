"""A product of plateau densities equivalent to the MYK measure on ``[0,1)^N``.

Coordinate ``k`` carries the plateau density with value ``c_k`` on ``[0, 1]``.
Writing ``c_k = exp(-s_k)``, the infinite product ``prod c_k`` is positive
exactly when ``sum s_k`` converges, and then the product density

    f(x) = prod_{k <= m} f_k(x_k) * prod_{k > m} c_k

is well defined and positive on every point whose coordinates beyond ``m``
lie in ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from ._spec import check_keys
from .measures1d import Plateau
from .quadrature import QuadratureConfig, QuadratureError, integrate
from .series import SeriesDescriptor, series_from_json

POSITIVE = "positive"
ZERO = "zero"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class CoefficientSequence:
    """``c_k = exp(-s_k)`` for a nonnegative series descriptor ``s``."""

    s: SeriesDescriptor

    @classmethod
    def from_values(cls, prefix: Sequence[float], tail: SeriesDescriptor) -> "CoefficientSequence":
        """Explicit ``c_1..c_n`` followed by ``c_k = exp(-tail_k)``."""
        for k, c in enumerate(prefix, start=1):
            if not (0.0 < c < 1.0):
                raise ValueError(f"c_{k} = {c!r} is not in (0, 1)")
        return cls(SeriesDescriptor.with_prefix([-math.log(c) for c in prefix], tail))

    def c(self, k: int) -> float:
        return math.exp(-self.s.term(k))

    def log_c(self, k: int) -> float:
        return -self.s.term(k)

    @property
    def product_class(self) -> str:
        summable = self.s.summable()
        if summable is None:
            return UNKNOWN
        return POSITIVE if summable else ZERO

    def log_tail_product(self, m: int) -> float:
        """``log prod_{k > m} c_k``."""
        return -self.s.tail_sum(m)

    def to_json(self) -> dict[str, Any]:
        return {"kind": "exp-series", "s": self.s.to_json()}


def coefficients_from_json(spec: dict[str, Any]) -> CoefficientSequence:
    """``{"c": {"kind": "exp-series", "s": {...}}, "prefix": [c_1, ...]}``; prefix optional."""
    if "c" in spec:
        check_keys(spec, {"c", "prefix"}, "coefficient sequence")
    c = spec.get("c", spec)
    if c.get("kind") != "exp-series":
        raise ValueError("coefficient sequences are given as {'kind': 'exp-series', 's': ...}")
    check_keys(c, {"kind", "s"} | ({"prefix"} if c is spec else set()), "exp-series")
    tail = series_from_json(c["s"])
    return CoefficientSequence.from_values(spec.get("prefix", ()), tail)


@dataclass(frozen=True)
class PlateauFamily:
    coefficients: CoefficientSequence
    flags: tuple[str, ...] = ()

    @property
    def product_class(self) -> str:
        return self.coefficients.product_class

    def member(self, k: int) -> Plateau:
        if k < 1:
            raise IndexError("family members are indexed from 1")
        return Plateau.from_log(self.coefficients.s.term(k))

    def members(self, n: int) -> list[Plateau]:
        return [self.member(k) for k in range(1, n + 1)]

    def product_of_c(self) -> float:
        """``prod_k c_k`` (0.0 when the product diverges to zero)."""
        return math.exp(self.coefficients.log_tail_product(0))

    def to_json(self) -> dict[str, Any]:
        return {"c": self.coefficients.to_json(), "product_class": self.product_class,
                "flags": list(self.flags)}


def build_family(coefficients: CoefficientSequence, check_terms: int = 64) -> PlateauFamily:
    """Validate ``c_k in (0, 1)`` and attach the product class.

    The explicit prefix and the first ``check_terms`` indices are checked term
    by term; the tail rule must be strictly positive for ``c_k < 1`` to hold.
    """
    s = coefficients.s
    n_check = max(check_terms, len(s.prefix))
    for k in range(1, n_check + 1):
        try:
            sk = s.term(k)
        except LookupError:
            break
        # c_k < 1 iff s_k > 0, even when exp(-s_k) rounds to 1.0
        if not (sk > 0 and math.isfinite(sk)):
            raise ValueError(f"c_{k} = {math.exp(-sk)!r} is not in (0, 1)")
    if s.is_positive() is False:
        raise ValueError("tail rule produces c_k = 1 for some k")
    flags: list[str] = []
    if coefficients.product_class == ZERO:
        flags.append("equivalence hypothesis fails: prod c_k = 0")
    elif coefficients.product_class == UNKNOWN:
        flags.append("positivity of prod c_k is undecided")
    return PlateauFamily(coefficients, tuple(flags))


@dataclass(frozen=True)
class TruncatedPoint:
    """A sequence whose coordinates beyond ``len(prefix)`` lie in ``[0, 1]``."""

    prefix: tuple[float, ...] = ()

    def __post_init__(self):
        prefix = tuple(float(x) for x in self.prefix)
        if not all(math.isfinite(x) for x in prefix):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "prefix", prefix)

    def canonical(self) -> "TruncatedPoint":
        """Drop trailing coordinates already inside ``[0, 1]``; they carry no information."""
        prefix = list(self.prefix)
        while prefix and 0.0 <= prefix[-1] <= 1.0:
            prefix.pop()
        return TruncatedPoint(tuple(prefix))


class DegenerateDensityError(ValueError):
    pass


def log_myk_density(family: PlateauFamily, point: TruncatedPoint) -> float:
    if family.product_class != POSITIVE:
        raise DegenerateDensityError(
            f"density degenerates to 0: product class is {family.product_class!r}")
    canon = point.canonical()
    m = len(canon.prefix)
    coeffs = family.coefficients
    logs = []
    for k, x in enumerate(canon.prefix, start=1):
        member = family.member(k)
        dist = max(-x, 0.0) + max(x - 1.0, 0.0)
        logs.append(coeffs.log_c(k) - member.beta * dist)
    logs.append(coeffs.log_tail_product(m))
    return math.fsum(logs)


def myk_density(family: PlateauFamily, point: TruncatedPoint) -> float:
    """The product density at ``point`` with respect to ``nu_[0,1)^N``; strictly positive."""
    return math.exp(log_myk_density(family, point))


@dataclass
class MarginalReport:
    n: int
    rhs: float
    depths: list[int]
    lhs: list[float]
    defects: list[float]
    relative_defects: list[float]
    tail_products: list[float]
    monotone: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "rhs": self.rhs,
            "per_depth": [
                {"m": m, "lhs": lhs, "defect": d, "relative_defect": r, "tail_product": t}
                for m, lhs, d, r, t in zip(self.depths, self.lhs, self.defects,
                                           self.relative_defects, self.tail_products)
            ],
            "monotone_decrease": self.monotone,
        }


def marginal_consistency(
    family: PlateauFamily,
    rectangle: Sequence[tuple[float, float]],
    depths: Iterable[int],
    q: QuadratureConfig | None = None,
) -> MarginalReport:
    """Evaluate the truncated cylinder integral against the product of marginals.

    At truncation depth ``m`` the integral of ``f`` against ``nu_[0,1)^N`` over
    ``A x R^{m-n} x [0,1]^{k > m}`` factorises into

        prod_{k <= n} int_{A_k} f_k  *  prod_{n < k <= m} int_R f_k  *  prod_{k > m} c_k

    which is integrated coordinate by coordinate. The target is
    ``prod_{k <= n} mu_k(A_k)`` from the closed-form CDFs.
    """
    q = q or QuadratureConfig()
    rect = [(float(a), float(b)) for a, b in rectangle]
    n = len(rect)
    depths = sorted(set(int(m) for m in depths))
    if not depths:
        raise ValueError("need at least one truncation depth")
    for a, b in rect:
        if not (math.isfinite(a) and math.isfinite(b)) or b < a:
            raise ValueError(f"rectangle sides must be bounded intervals, got [{a}, {b}]")
    if depths[0] < n:
        raise ValueError(f"truncation depth must be >= n={n}")
    if depths[-1] - n > 8:
        raise ValueError("m - n is capped at 8")
    if family.product_class != POSITIVE:
        raise DegenerateDensityError("marginal identity needs prod c_k > 0")

    rhs = 1.0
    side_integrals = []
    for k, (a, b) in enumerate(rect, start=1):
        member = family.member(k)
        rhs *= float(member.cdf(b) - member.cdf(a))
        try:
            val, _ = integrate(member._pdf, a, b, q, breakpoints=member.breakpoints())
        except QuadratureError as exc:
            raise QuadratureError(f"coordinate {k}: {exc}", exc.estimate, exc.error) from exc
        side_integrals.append(val)

    free_integrals = {}
    for k in range(n + 1, depths[-1] + 1):
        member = family.member(k)
        try:
            val, _ = integrate(member._pdf, -math.inf, math.inf, q, breakpoints=member.breakpoints())
        except QuadratureError as exc:
            raise QuadratureError(f"coordinate {k}: {exc}", exc.estimate, exc.error) from exc
        free_integrals[k] = val

    lhs_list, defects, rel, tails = [], [], [], []
    base = math.prod(side_integrals)
    for m in depths:
        tail = math.exp(family.coefficients.log_tail_product(m))
        lhs = base * math.prod(free_integrals[k] for k in range(n + 1, m + 1)) * tail
        d = abs(lhs - rhs)
        lhs_list.append(lhs)
        defects.append(d)
        rel.append(d / rhs if rhs > 0 else 0.0)
        tails.append(tail)
    monotone = all(later <= earlier for earlier, later in zip(defects, defects[1:]))
    return MarginalReport(n, rhs, depths, lhs_list, defects, rel, tails, monotone)
