"""Hellinger affinities and Kakutani's equivalent-or-orthogonal dichotomy.

For coordinatewise equivalent sequences ``mu_k``, ``nu_k`` the products
``prod mu_k`` and ``prod nu_k`` are equivalent when ``prod alpha_k > 0`` and
orthogonal otherwise, where ``alpha_k`` is the Hellinger affinity. Since
``prod alpha_k > 0`` iff ``sum (1 - alpha_k) < inf``, an exact verdict needs
a symbolic description of the defects ``1 - alpha_k``; numerics alone can only
certify orthogonality (a partial product already below a hard floor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._spec import check_keys
from .measures1d import DomainError, Gaussian, Measure1D, Plateau, measure_from_json, require_positive_on_R
from .quadrature import QuadratureConfig, QuadratureError, integrate
from .series import SeriesDescriptor, series_from_json

EQUIVALENT = "Equivalent"
ORTHOGONAL = "Orthogonal"
UNDECIDED = "Undecided"


class AffinityError(ArithmeticError):
    """Affinity could not be computed; ``estimate`` holds any partial value."""

    def __init__(self, message: str, estimate: float | None = None, index: int | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.index = index


def _common_support(mu: Measure1D, nu: Measure1D) -> tuple[float, float]:
    lo = max(mu.support[0], nu.support[0])
    hi = min(mu.support[1], nu.support[1])
    return lo, hi


def hellinger_affinity(mu: Measure1D, nu: Measure1D, q: QuadratureConfig | None = None) -> float:
    """``int sqrt(f_mu * f_nu) dx``, a number in ``(0, 1]``."""
    if mu == nu:
        return 1.0
    lo, hi = _common_support(mu, nu)
    if not lo < hi:
        raise AffinityError("affinity zero, measures orthogonal at one coordinate", 0.0)
    cuts = [p for p in (*mu.breakpoints(), *nu.breakpoints()) if lo < p < hi]

    def integrand(x):
        return np.sqrt(mu._pdf(x) * nu._pdf(x))

    try:
        value, _ = integrate(integrand, lo, hi, q, breakpoints=cuts)
    except QuadratureError as exc:
        raise AffinityError(f"affinity quadrature failed: {exc}", exc.estimate) from exc
    if not value > 0:
        raise AffinityError("affinity zero, measures orthogonal at one coordinate", value)
    return min(value, 1.0)


def density_ratio(mu: Measure1D, nu: Measure1D, x: float) -> float:
    """``d nu / d mu`` at ``x``."""
    return math.exp(log_density_ratio(mu, nu, x))


def log_density_ratio(mu: Measure1D, nu: Measure1D, x: float) -> float:
    if isinstance(mu, Gaussian) and isinstance(nu, Gaussian):
        if not math.isfinite(x):
            raise DomainError(f"density is undefined at x={x}")
        # exact log form: no underflow even where both densities round to 0
        z_mu = (x - mu.mean) / mu.sd
        z_nu = (x - nu.mean) / nu.sd
        return 0.5 * (z_mu * z_mu - z_nu * z_nu) + math.log(mu.sd / nu.sd)
    f_mu = mu.density(x)
    f_nu = nu.density(x)
    if not f_mu > 0:
        raise ZeroDivisionError(f"density of mu vanishes at x={x}: ratio is singular")
    if not f_nu > 0:
        raise ZeroDivisionError(f"density of nu vanishes at x={x}: ratio is zero")
    return math.log(f_nu) - math.log(f_mu)


# -- sequences of measures ------------------------------------------------------

@dataclass(frozen=True)
class SequenceRule:
    """How ``mu_k`` is generated beyond the explicit prefix.

    ``gaussian-shift``: ``N(base_mean + shift_k, base_sd**2)``.
    ``constant``: the same ``measure`` at every index.
    ``plateau``: plateau density with value ``exp(-c_k)`` shifted by ``shift_k``.
    """

    kind: str
    base_mean: float = 0.0
    base_sd: float = 1.0
    shift: SeriesDescriptor = field(default_factory=SeriesDescriptor.zero)
    measure: Measure1D | None = None
    c: SeriesDescriptor | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian-shift", "constant", "plateau"):
            raise ValueError(f"unknown sequence rule {self.kind!r}")
        if self.kind == "constant" and self.measure is None:
            raise ValueError("constant rule needs a measure")
        if self.kind == "plateau" and self.c is None:
            raise ValueError("plateau rule needs a coefficient series")
        if self.kind == "gaussian-shift" and not self.base_sd > 0:
            raise ValueError("gaussian-shift needs base_sd > 0")

    def measure_at(self, k: int) -> Measure1D:
        if self.kind == "gaussian-shift":
            return Gaussian(self.base_mean + self.shift.term(k), self.base_sd)
        if self.kind == "constant":
            return self.measure
        return Plateau.from_log(self.c.term(k), self.shift.term(k))

    def to_json(self) -> dict[str, Any]:
        if self.kind == "gaussian-shift":
            return {"kind": self.kind, "base_mean": self.base_mean, "base_sd": self.base_sd,
                    "shift": self.shift.to_json()}
        if self.kind == "constant":
            return {"kind": self.kind, "measure": self.measure.to_json()}
        return {"kind": self.kind, "c": {"kind": "exp-series", "s": self.c.to_json()},
                "shift": self.shift.to_json()}


@dataclass(frozen=True)
class MeasureSequence:
    """``mu_1, mu_2, ...``: an explicit prefix overriding a generating rule.

    ``descriptor`` optionally certifies the affinity defects ``1 - alpha_k``
    against the sequence this one is compared with.
    """

    rule: SequenceRule
    prefix: tuple[Measure1D, ...] = ()
    descriptor: SeriesDescriptor | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        for k, m in enumerate(self.prefix, start=1):
            require_positive_on_R(m, f"product-measure coordinate {k}")
        if self.rule.kind == "constant":
            require_positive_on_R(self.rule.measure, "the constant rule")

    def measure(self, k: int) -> Measure1D:
        if k < 1:
            raise IndexError("sequence indices start at 1")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.rule.measure_at(k)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"prefix": [m.to_json() for m in self.prefix],
                               "rule": self.rule.to_json()}
        if self.descriptor is not None:
            out["descriptor"] = self.descriptor.to_json()
        return out


_RULE_KEYS = {"gaussian-shift": {"base_mean", "base_sd", "shift"},
              "constant": {"measure"}, "plateau": {"c", "shift"}}


def sequence_from_json(spec: dict[str, Any]) -> MeasureSequence:
    """``{"prefix": [measure, ...], "rule": {...}, "descriptor": {series}}``."""
    check_keys(spec, {"prefix", "rule", "descriptor"}, "measure sequence")
    raw_rule = spec.get("rule", {"kind": "gaussian-shift", "base_sd": 1.0})
    kind = raw_rule.get("kind")
    check_keys(raw_rule, {"kind"} | _RULE_KEYS.get(kind, set()), f"sequence rule {kind!r}")
    if kind == "gaussian-shift":
        rule = SequenceRule(
            kind,
            base_mean=float(raw_rule.get("base_mean", 0.0)),
            base_sd=float(raw_rule.get("base_sd", 1.0)),
            shift=series_from_json(raw_rule["shift"]) if "shift" in raw_rule else SeriesDescriptor.zero(),
        )
    elif kind == "constant":
        rule = SequenceRule(kind, measure=measure_from_json(raw_rule["measure"]))
    elif kind == "plateau":
        c = raw_rule["c"]
        rule = SequenceRule(
            kind,
            c=series_from_json(c["s"] if c.get("kind") == "exp-series" else c),
            shift=series_from_json(raw_rule["shift"]) if "shift" in raw_rule else SeriesDescriptor.zero(),
        )
    else:
        raise ValueError(f"unknown sequence rule {kind!r}")
    prefix = tuple(measure_from_json(m) for m in spec.get("prefix", ()))
    descriptor = series_from_json(spec["descriptor"]) if "descriptor" in spec else None
    return MeasureSequence(rule, prefix, descriptor)


def partial_density(seq_mu: MeasureSequence, seq_nu: MeasureSequence, x: Sequence[float], n: int) -> float:
    """``r_n(x) = prod_{k <= n} d nu_k / d mu_k (x_k)``, strictly positive."""
    log_r = log_partial_density(seq_mu, seq_nu, x, n)
    value = math.exp(log_r)
    if value == 0.0 or math.isinf(value):
        raise OverflowError(f"partial density out of floating range (log value {log_r!r})")
    return value


def log_partial_density(seq_mu: MeasureSequence, seq_nu: MeasureSequence, x: Sequence[float], n: int) -> float:
    if n < 0 or n > len(x):
        raise ValueError(f"need 0 <= n <= len(x), got n={n}, len(x)={len(x)}")
    return math.fsum(log_density_ratio(seq_mu.measure(k), seq_nu.measure(k), float(x[k - 1]))
                     for k in range(1, n + 1))


# -- classification -----------------------------------------------------------

@dataclass
class DichotomyVerdict:
    verdict: str
    partial_product: float
    terms_used: int
    tail_class: str  # summable | divergent | unknown
    diagnostics: str
    log_partial_product: float = 0.0
    certificate: dict[str, Any] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "partial_product": self.partial_product,
            "log_partial_product": self.log_partial_product,
            "terms_used": self.terms_used,
            "tail_class": self.tail_class,
            "diagnostics": self.diagnostics,
            "certificate": self.certificate,
        }


@dataclass(frozen=True)
class ClassifyPolicy:
    terms: int = 64
    hard_floor: float = 1e-12
    q: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.terms < 1:
            raise ValueError("terms must be >= 1")
        if not (0.0 < self.hard_floor < 1.0):
            raise ValueError("hard_floor must lie in (0, 1)")


@dataclass(frozen=True)
class DefectCertificate:
    """Summability class of ``1 - alpha_k`` beyond both prefixes.

    ``descriptor`` is the closed form when one exists; some certificates only
    establish the class (e.g. via ``(x - y)^2 <= 2x^2 + 2y^2``).
    """

    summable: bool | None
    source: str
    descriptor: SeriesDescriptor | None = None

    def to_json(self) -> dict[str, Any]:
        return {"source": self.source, "summable": self.summable,
                "descriptor": None if self.descriptor is None else self.descriptor.to_json()}


def _certified(descriptor: SeriesDescriptor, source: str) -> DefectCertificate:
    return DefectCertificate(descriptor.summable(), source, descriptor)


def _gaussian_shift_defects(a: SequenceRule, b: SequenceRule) -> DefectCertificate | None:
    source = "closed-form gaussian affinity"
    if a.base_sd != b.base_sd:
        # every coordinate's affinity carries the factor sqrt(2st/(s^2+t^2)) < 1
        factor = math.sqrt(2 * a.base_sd * b.base_sd / (a.base_sd ** 2 + b.base_sd ** 2))
        return DefectCertificate(False, f"{source}: unequal sd bounds every affinity by {factor:.6g}")
    scale = 1.0 / (8.0 * a.base_sd ** 2)
    if a.shift == b.shift:
        if a.base_mean == b.base_mean:
            return _certified(SeriesDescriptor.zero(), "identical generating rules")
        d = -math.expm1(-scale * (a.base_mean - b.base_mean) ** 2)
        return _certified(SeriesDescriptor.constant(d), f"{source}: constant mean offset")
    if a.base_mean != b.base_mean:
        return None
    # 1 - alpha_k = 1 - exp(-d_k^2 / (8 sd^2)), d_k the shift difference
    if a.shift.kind == "zero-tail" or b.shift.kind == "zero-tail":
        other = b.shift if a.shift.kind == "zero-tail" else a.shift
        return _certified(SeriesDescriptor.one_minus_exp(other.squared().scaled(scale)), source)
    sa, sb = a.shift.squared().summable(), b.shift.squared().summable()
    if sa is True and sb is True:
        return DefectCertificate(True, f"{source}: both shifts square-summable")
    if {sa, sb} == {True, False}:
        return DefectCertificate(False, f"{source}: exactly one shift square-summable")
    return None


def derive_defect_certificate(seq_mu: MeasureSequence, seq_nu: MeasureSequence) -> DefectCertificate:
    """Analytic summability class of ``1 - alpha_k``, or an undecided certificate.

    Finitely many coordinates never change the verdict, so prefixes are ignored.
    """
    attached = [s.descriptor for s in (seq_mu, seq_nu) if s.descriptor is not None]
    if attached:
        classes = {d.summable() for d in attached}
        if len(classes) > 1:
            raise ValueError("attached defect descriptors disagree on summability")
        return _certified(attached[0], "attached descriptor")
    a, b = seq_mu.rule, seq_nu.rule
    if a == b:
        return _certified(SeriesDescriptor.zero(), "identical generating rules")
    if a.kind == "gaussian-shift" and b.kind == "gaussian-shift":
        cert = _gaussian_shift_defects(a, b)
        if cert is not None:
            return cert
    if a.kind == "constant" and b.kind == "constant":
        alpha = hellinger_affinity(a.measure, b.measure)
        return _certified(SeriesDescriptor.constant(1.0 - alpha), "stationary products of distinct laws")
    return DefectCertificate(None, "no closed form for this pair of rules")


def _tail_fit(defects: np.ndarray) -> str:
    k = np.arange(1, len(defects) + 1, dtype=float)
    mask = defects > 1e-13
    half = mask & (k > len(defects) / 2)
    if half.sum() < 4:
        return "defects below quadrature resolution in the fitted range"
    x, y = k[half], np.log(defects[half])
    geo = np.polyfit(x, y, 1)[0]
    pw = np.polyfit(np.log(x), y, 1)[0]
    return f"fitted tail: geometric ratio ~ {math.exp(geo):.4g}, power-law exponent ~ {-pw:.4g}"


def classify_products(seq_mu: MeasureSequence, seq_nu: MeasureSequence,
                      policy: ClassifyPolicy | None = None) -> DichotomyVerdict:
    """Equivalent / Orthogonal / Undecided for ``prod mu_k`` versus ``prod nu_k``.

    Equivalence is only reported with an analytic summability certificate for
    the defects. Orthogonality is reported either from a divergent certificate
    or from a numerically computed partial product below ``hard_floor``.
    """
    policy = policy or ClassifyPolicy()
    logs = []
    defects = []
    for k in range(1, policy.terms + 1):
        try:
            alpha = hellinger_affinity(seq_mu.measure(k), seq_nu.measure(k), policy.q)
        except AffinityError as exc:
            raise AffinityError(f"coordinate {k}: {exc}", exc.estimate, k) from exc
        logs.append(math.log(alpha))
        defects.append(1.0 - alpha)
    log_product = math.fsum(logs)
    product = math.exp(log_product)

    cert = derive_defect_certificate(seq_mu, seq_nu)
    summable, source = cert.summable, cert.source
    certificate = cert.to_json()

    if summable is True:
        return DichotomyVerdict(EQUIVALENT, product, policy.terms, "summable",
                                f"sum of 1 - alpha_k converges ({source})", log_product, certificate)
    if summable is False:
        return DichotomyVerdict(ORTHOGONAL, product, policy.terms, "divergent",
                                f"sum of 1 - alpha_k diverges ({source})", log_product, certificate)
    if product < policy.hard_floor:
        return DichotomyVerdict(ORTHOGONAL, product, policy.terms, "divergent",
                                f"partial product below floor {policy.hard_floor:g} after "
                                f"{policy.terms} terms", log_product, certificate)
    return DichotomyVerdict(UNDECIDED, product, policy.terms, "unknown",
                            f"{source}; {_tail_fit(np.asarray(defects))}", log_product, certificate)
