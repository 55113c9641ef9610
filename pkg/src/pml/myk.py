"""The Moore-Yamasaki-Kharazishvili measure on the box algebra of R^N.

A parallelepiped ``Delta = prod [a_i, b_i)`` fixes a measure ``nu_Delta`` that
gives every ``Delta_i`` normalised-Lebesgue mass one. On a box that agrees
with ``Delta`` outside finitely many coordinates the measure is the product of
the override lengths divided by the corresponding widths, computed here in
exact rational arithmetic.

All coordinate indices are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Union

from ._spec import check_keys
from .series import SeriesDescriptor, series_from_json

Number = Union[Fraction, float]  # float only for +/- inf


def exact(value: Any) -> Number:
    """Convert an int, float, Fraction or string ("1/3", "0.25", "inf") to an exact value.

    Finite floats convert without rounding (every float is a dyadic rational);
    infinities stay as floats.
    """
    if value is None:
        raise ValueError("missing numeric value")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("NaN is not allowed")
        return value if math.isinf(value) else Fraction(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
        return Fraction(text)
    raise ValueError(f"cannot interpret {value!r} as a number")


def is_rational_literal(value: Any) -> bool:
    """True for ints, Fractions and rational strings: inputs that ask for exact output."""
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, Fraction)):
        return True
    if isinstance(value, str):
        try:
            return not isinstance(exact(value), float)
        except (ValueError, ZeroDivisionError):
            return False
    return False


@dataclass(frozen=True)
class ParallelepipedSpec:
    """``Delta_i = [a_i, b_i)``: explicit prefixes followed by constant tails."""

    a_prefix: tuple[Fraction, ...] = ()
    b_prefix: tuple[Fraction, ...] = ()
    a_tail: Fraction = Fraction(0)
    b_tail: Fraction = Fraction(1)

    def __post_init__(self):
        a_prefix = tuple(exact(x) for x in self.a_prefix)
        b_prefix = tuple(exact(x) for x in self.b_prefix)
        a_tail, b_tail = exact(self.a_tail), exact(self.b_tail)
        values = (*a_prefix, *b_prefix, a_tail, b_tail)
        if any(isinstance(x, float) for x in values):
            raise ValueError("parallelepiped edges must be finite")
        object.__setattr__(self, "a_prefix", a_prefix)
        object.__setattr__(self, "b_prefix", b_prefix)
        object.__setattr__(self, "a_tail", a_tail)
        object.__setattr__(self, "b_tail", b_tail)
        for i in range(1, max(len(a_prefix), len(b_prefix)) + 2):
            if not self.a(i) < self.b(i):
                raise ValueError(f"need a_i < b_i, violated at i={i}")

    @classmethod
    def unit(cls) -> "ParallelepipedSpec":
        """``[0, 1)^N``."""
        return cls()

    def a(self, i: int) -> Fraction:
        return self.a_prefix[i - 1] if i <= len(self.a_prefix) else self.a_tail

    def b(self, i: int) -> Fraction:
        return self.b_prefix[i - 1] if i <= len(self.b_prefix) else self.b_tail

    def width(self, i: int) -> Fraction:
        if i < 1:
            raise IndexError("coordinates are 1-based")
        return self.b(i) - self.a(i)

    @property
    def prefix_length(self) -> int:
        return max(len(self.a_prefix), len(self.b_prefix))

    @property
    def tail_width(self) -> Fraction:
        return self.b_tail - self.a_tail


def _interval(u: Any, v: Any) -> tuple[Number, Number]:
    lo, hi = exact(u), exact(v)
    if not lo < hi:
        raise ValueError(f"interval [{u}, {v}) is empty or reversed")
    if lo == math.inf or hi == -math.inf:
        raise ValueError(f"interval [{u}, {v}) is empty")
    return lo, hi


def _length(lo: Number, hi: Number) -> Number:
    if isinstance(lo, float) or isinstance(hi, float):
        return math.inf
    return hi - lo


@dataclass(frozen=True)
class BoxSpec:
    """Finitely many coordinates replaced by ``[u_i, v_i)``; all others equal ``Delta_i``."""

    overrides: Mapping[int, tuple[Number, Number]] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[int, tuple[Number, Number]] = {}
        for key, (u, v) in dict(self.overrides).items():
            i = int(key)
            if i != key and str(i) != str(key):
                raise ValueError(f"bad coordinate index {key!r}")
            if i < 1:
                raise ValueError(f"coordinate indices start at 1, got {i}")
            clean[i] = _interval(u, v)
        object.__setattr__(self, "overrides", dict(sorted(clean.items())))

    @property
    def max_index(self) -> int:
        return max(self.overrides, default=0)


def box_measure(delta: ParallelepipedSpec, box: BoxSpec) -> Number:
    """``nu_Delta(box)``: product of override lengths over widths; may be ``inf``."""
    result: Number = Fraction(1)
    for i, (u, v) in box.overrides.items():
        length = _length(u, v)
        if length == math.inf:
            result = math.inf
            continue
        if result != math.inf:
            result *= length / delta.width(i)
    return result


@dataclass(frozen=True)
class TranslationSpec:
    """A translation vector ``g``: explicit values for ``i <= len(prefix)`` and a tail rule.

    ``tail`` describes the magnitudes beyond the prefix (absolute indexing). With
    ``tail_scale="relative"`` it describes ``|g_i| / width_i`` directly; with
    ``"absolute"`` it describes ``|g_i|`` and is divided by the tail width of
    the parallelepiped when a verdict is needed.
    """

    prefix: tuple[Fraction, ...] = ()
    tail: SeriesDescriptor = field(default_factory=SeriesDescriptor.zero)
    tail_scale: str = "relative"

    def __post_init__(self):
        prefix = tuple(exact(x) for x in self.prefix)
        if any(isinstance(x, float) for x in prefix):
            raise ValueError("translation coordinates must be finite")
        object.__setattr__(self, "prefix", prefix)
        if self.tail_scale not in ("relative", "absolute"):
            raise ValueError("tail_scale must be 'relative' or 'absolute'")

    @property
    def zero_tail(self) -> bool:
        return self.tail.kind == "zero-tail" or (
            self.tail.kind == "constant" and self.tail.c == 0.0)

    def value(self, i: int) -> Fraction:
        """Explicit ``g_i``; only available inside the prefix or under a zero tail."""
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.zero_tail:
            return Fraction(0)
        raise LookupError(f"g_{i} is only known through its tail rule")

    def relative_tail(self, delta: ParallelepipedSpec) -> SeriesDescriptor:
        if self.tail_scale == "relative":
            return self.tail
        return self.tail.scaled(1.0 / float(delta.tail_width))


def example_witness(delta: ParallelepipedSpec) -> TranslationSpec:
    """The non-finitary element ``g_i = (1 - exp(-w_i / 2^i)) * w_i``, ``w_i = b_i - a_i``.

    Its relative magnitudes are ``1 - exp(-w_i / 2^i)``.
    """
    n = delta.prefix_length
    s = SeriesDescriptor.with_prefix(
        [float(delta.width(i)) / 2.0 ** i for i in range(1, n + 1)],
        SeriesDescriptor.geometric(float(delta.tail_width), 0.5),
    )
    return TranslationSpec(tail=SeriesDescriptor.one_minus_exp(s))


ADMISSIBLE = "Admissible"
NOT_ADMISSIBLE = "NotAdmissible"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    status: str
    reason: str

    def to_json(self) -> dict[str, Any]:
        return {"verdict": self.status, "reason": self.reason}


def admissible_translation(delta: ParallelepipedSpec, g: TranslationSpec) -> AdmissibilityVerdict:
    """Decide whether ``g`` leaves ``nu_Delta`` invariant.

    With ``t_i = |g_i| / width_i`` the criterion is convergence of
    ``sum ln(1 - t_i)`` from some index on, which holds exactly when ``t_i < 1``
    eventually and ``sum t_i < inf``. Only the tail rule matters; the explicit
    prefix is absorbed by the choice of starting index.
    """
    if g.zero_tail:
        return AdmissibilityVerdict(ADMISSIBLE, "eventually zero translation")
    t = g.relative_tail(delta)
    top = t.limsup()
    if top is None:
        return AdmissibilityVerdict(UNDECIDED, f"tail rule {t.kind!r} is outside the decidable catalogue")
    if top >= 1.0:
        return AdmissibilityVerdict(NOT_ADMISSIBLE, "|g_i| >= b_i - a_i for infinitely many i")
    summable = t.summable()
    if summable is True:
        return AdmissibilityVerdict(ADMISSIBLE, f"sum of |g_i|/(b_i-a_i) converges ({t.kind} tail)")
    if summable is False:
        return AdmissibilityVerdict(NOT_ADMISSIBLE, f"sum of |g_i|/(b_i-a_i) diverges ({t.kind} tail)")
    return AdmissibilityVerdict(UNDECIDED, f"summability of {t.kind!r} tail is not decidable")


class BoxAlgebraError(ValueError):
    """The requested set falls outside the box algebra."""


def translate_box(box: BoxSpec, g: TranslationSpec, n: int,
                  delta: ParallelepipedSpec | None = None) -> BoxSpec:
    """``box + g`` for a translation that vanishes beyond coordinate ``n``.

    A non-overridden coordinate ``i <= n`` with ``g_i != 0`` becomes the override
    ``Delta_i + g_i``, which requires ``delta``.
    """
    if box.max_index > n:
        raise ValueError(f"box overrides reach index {box.max_index} > n={n}")
    nonzero_beyond = any(x != 0 for x in g.prefix[n:])
    if nonzero_beyond or not g.zero_tail:
        raise BoxAlgebraError("translated set not in box algebra: g has a nonzero tail beyond index "
                              f"{n}")
    moved: dict[int, tuple[Number, Number]] = {}
    for i in range(1, n + 1):
        gi = g.value(i)
        if i in box.overrides:
            u, v = box.overrides[i]
            moved[i] = (u + gi, v + gi)
        elif gi != 0:
            if delta is None:
                raise ValueError(f"g moves coordinate {i}, which is not overridden; pass delta")
            moved[i] = (delta.a(i) + gi, delta.b(i) + gi)
    return BoxSpec(moved)


@dataclass(frozen=True)
class InvarianceReport:
    measure: Number
    translated_measure: Number
    difference: Number

    def to_json(self) -> dict[str, Any]:
        return {"measure": self.measure, "translated_measure": self.translated_measure,
                "difference": self.difference}


def invariance_check(delta: ParallelepipedSpec, box: BoxSpec, g: TranslationSpec) -> InvarianceReport:
    """Compare ``nu_Delta(box)`` with ``nu_Delta(box + g)`` for an eventually-zero ``g``."""
    if not g.zero_tail:
        raise BoxAlgebraError("invariance_check needs an eventually zero translation")
    n = max(box.max_index, len(g.prefix))
    before = box_measure(delta, box)
    after = box_measure(delta, translate_box(box, g, n, delta))
    if before == math.inf and after == math.inf:
        diff: Number = Fraction(0)
    elif before == math.inf or after == math.inf:
        diff = math.inf
    else:
        diff = abs(after - before)
    return InvarianceReport(before, after, diff)


# -- JSON ----------------------------------------------------------------------

def delta_from_json(spec: Mapping[str, Any]) -> ParallelepipedSpec:
    """``{"a": [...], "b": [...], "a_tail": 0, "b_tail": 1}``; every key optional."""
    check_keys(spec, {"a", "b", "a_tail", "b_tail"}, "parallelepiped")
    return ParallelepipedSpec(
        a_prefix=tuple(spec.get("a", ())),
        b_prefix=tuple(spec.get("b", ())),
        a_tail=spec.get("a_tail", 0),
        b_tail=spec.get("b_tail", 1),
    )


def box_from_json(spec: Mapping[str, Any]) -> BoxSpec:
    """``{"overrides": {"1": ["0", "1/2"], "3": [null, 2]}}``; null means unbounded."""
    check_keys(spec, {"overrides"}, "box")
    raw = spec.get("overrides", {})
    overrides = {}
    for key, pair in raw.items():
        if len(pair) != 2:
            raise ValueError(f"override {key} must be a [u, v] pair")
        u, v = pair
        overrides[int(key)] = ("-inf" if u is None else u, "inf" if v is None else v)
    return BoxSpec(overrides)


def translation_from_json(spec: Mapping[str, Any]) -> TranslationSpec:
    """``{"prefix": [...], "tail": {series}, "tail_scale": "relative"}``."""
    if spec.get("witness"):
        raise ValueError("the example witness depends on Delta; build it with example_witness")
    check_keys(spec, {"prefix", "tail", "tail_scale"}, "translation")
    tail = series_from_json(spec["tail"]) if "tail" in spec else SeriesDescriptor.zero()
    return TranslationSpec(prefix=tuple(spec.get("prefix", ())), tail=tail,
                           tail_scale=spec.get("tail_scale", "relative"))


def format_number(value: Number, as_fraction: bool) -> str:
    """``p/q`` for exact output, otherwise 15 significant digits."""
    if isinstance(value, float):
        return "inf" if value > 0 else ("-inf" if value < 0 else repr(value))
    if as_fraction:
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return f"{float(value):.15g}"
