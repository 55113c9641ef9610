"""Symbolic nonnegative sequences with decidable summability.

A :class:`SeriesDescriptor` names a sequence ``term(i)``, ``i >= 1``, drawn from
a small catalogue whose convergence behaviour is known in closed form:

=================  =======================  ==========================
kind               term(i)                  summable
=================  =======================  ==========================
zero-tail          0                        yes
constant           c                        iff c == 0
geometric          c * q**i                 yes (0 <= q < 1)
power-law          c * i**(-p)              iff c == 0 or p > 1
one-minus-exp      1 - exp(-s_i)            iff s summable
explicit-prefix    prefix[i-1], then tail   iff tail summable
opaque             prefix[i-1], then ?      unknown
=================  =======================  ==========================

Tails of ``explicit-prefix`` keep absolute indexing: the tail rule is evaluated
at the original index ``i``, not at ``i - len(prefix)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from scipy.special import zeta

from ._spec import check_keys

KINDS = ("zero-tail", "constant", "geometric", "power-law", "one-minus-exp",
         "explicit-prefix", "opaque")


@dataclass(frozen=True)
class SeriesDescriptor:
    kind: str
    c: float = 0.0
    q: float = 0.0
    p: float = 1.0
    prefix: tuple[float, ...] = ()
    tail: "SeriesDescriptor | None" = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}; expected one of {KINDS}")
        if self.c < 0 or not math.isfinite(self.c):
            raise ValueError(f"series coefficient must be finite and >= 0, got {self.c}")
        if self.kind == "geometric" and not (0.0 <= self.q < 1.0):
            raise ValueError(f"geometric ratio must lie in [0, 1), got {self.q}")
        if self.kind == "power-law" and not self.p > 0:
            raise ValueError(f"power-law exponent must be > 0, got {self.p}")
        prefix = tuple(float(x) for x in self.prefix)
        if any(x < 0 or not math.isfinite(x) for x in prefix):
            raise ValueError("series terms must be finite and >= 0")
        object.__setattr__(self, "prefix", prefix)
        if self.kind in ("explicit-prefix", "one-minus-exp") and self.tail is None:
            raise ValueError(f"{self.kind} needs a tail descriptor")

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> "SeriesDescriptor":
        return cls("zero-tail")

    @classmethod
    def constant(cls, c: float) -> "SeriesDescriptor":
        return cls("constant", c=c)

    @classmethod
    def geometric(cls, c: float, q: float) -> "SeriesDescriptor":
        return cls("geometric", c=c, q=q)

    @classmethod
    def power_law(cls, c: float, p: float) -> "SeriesDescriptor":
        return cls("power-law", c=c, p=p)

    @classmethod
    def one_minus_exp(cls, s: "SeriesDescriptor") -> "SeriesDescriptor":
        return cls("one-minus-exp", tail=s)

    @classmethod
    def with_prefix(cls, prefix, tail: "SeriesDescriptor") -> "SeriesDescriptor":
        if not prefix:
            return tail
        return cls("explicit-prefix", prefix=tuple(prefix), tail=tail)

    @classmethod
    def opaque(cls, prefix=()) -> "SeriesDescriptor":
        return cls("opaque", prefix=tuple(prefix))

    # -- evaluation --------------------------------------------------------
    def term(self, i: int) -> float:
        """Value of the ``i``-th term (``i >= 1``); opaque tails raise ``LookupError``."""
        if i < 1:
            raise IndexError("series indices start at 1")
        k = self.kind
        if k == "zero-tail":
            return 0.0
        if k == "constant":
            return self.c
        if k == "geometric":
            return self.c * self.q ** i
        if k == "power-law":
            return self.c * i ** (-self.p)
        if k == "one-minus-exp":
            return -math.expm1(-self.tail.term(i))
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if k == "explicit-prefix":
            return self.tail.term(i)
        raise LookupError(f"opaque series has no rule for index {i}")

    def terms(self, n: int) -> list[float]:
        return [self.term(i) for i in range(1, n + 1)]

    def summable(self) -> bool | None:
        """True/False when convergence of the sum is decided by the catalogue, None otherwise."""
        k = self.kind
        if k in ("zero-tail", "geometric"):
            return True
        if k == "constant":
            return self.c == 0.0
        if k == "power-law":
            return self.c == 0.0 or self.p > 1.0
        if k in ("one-minus-exp", "explicit-prefix"):
            # 1 - exp(-s) is comparable to min(s, 1), so both sums converge together
            return self.tail.summable()
        return None

    def limsup(self) -> float | None:
        """``limsup term(i)``; None for opaque tails."""
        k = self.kind
        if k == "constant":
            return self.c
        if k in ("zero-tail", "geometric", "power-law"):
            return 0.0
        if k == "one-minus-exp":
            inner = self.tail.limsup()
            return None if inner is None else -math.expm1(-inner)
        if k == "explicit-prefix":
            return self.tail.limsup()
        return None

    def is_positive(self) -> bool | None:
        """Whether every term is strictly positive (None if undecidable)."""
        k = self.kind
        if k == "zero-tail":
            return False
        if k == "constant":
            return self.c > 0
        if k == "geometric":
            return self.c > 0 and self.q > 0
        if k == "power-law":
            return self.c > 0
        if k == "one-minus-exp":
            return self.tail.is_positive()
        if any(x <= 0 for x in self.prefix):
            return False
        if k == "explicit-prefix":
            # tail indices shadowed by the prefix do not count
            shadowed = len(self.prefix)
            tail = self.tail
            if any(x <= 0 for x in tail.prefix[shadowed:]):
                return False
            return tail.is_positive() if tail.kind != "explicit-prefix" else tail.tail.is_positive()
        return None

    def tail_sum(self, m: int) -> float:
        """``sum_{i > m} term(i)`` in closed form; ``inf`` for divergent series.

        Raises ``NotImplementedError`` where no closed form is available.
        """
        if m < 0:
            raise ValueError("m must be >= 0")
        k = self.kind
        if self.summable() is False:
            return math.inf
        if k == "zero-tail":
            return 0.0
        if k == "constant":
            return 0.0
        if k == "geometric":
            if self.c == 0.0 or self.q == 0.0:
                return 0.0
            return self.c * self.q ** (m + 1) / (1.0 - self.q)
        if k == "power-law":
            if self.c == 0.0:
                return 0.0
            # Hurwitz zeta: sum_{i >= m+1} i^-p
            return self.c * float(zeta(self.p, m + 1))
        if k == "explicit-prefix":
            n = len(self.prefix)
            if m >= n:
                return self.tail.tail_sum(m)
            return math.fsum(self.prefix[m:]) + self.tail.tail_sum(n)
        raise NotImplementedError(f"no closed-form tail sum for {k!r} series")

    # -- transformations ---------------------------------------------------
    def scaled(self, factor: float) -> "SeriesDescriptor":
        """The sequence ``factor * term(i)``; ``one-minus-exp`` and opaque tails are not closed under this."""
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        k = self.kind
        if k == "zero-tail" or factor == 0.0:
            return SeriesDescriptor.zero() if k != "opaque" else self
        if k in ("constant", "geometric", "power-law"):
            return SeriesDescriptor(k, c=self.c * factor, q=self.q, p=self.p)
        if k == "explicit-prefix":
            return SeriesDescriptor.with_prefix([x * factor for x in self.prefix],
                                                self.tail.scaled(factor))
        if k == "opaque":
            return SeriesDescriptor.opaque([x * factor for x in self.prefix])
        return SeriesDescriptor.opaque()

    def squared(self) -> "SeriesDescriptor":
        """The sequence ``term(i) ** 2``."""
        k = self.kind
        if k == "zero-tail":
            return self
        if k == "constant":
            return SeriesDescriptor.constant(self.c ** 2)
        if k == "geometric":
            return SeriesDescriptor.geometric(self.c ** 2, self.q ** 2)
        if k == "power-law":
            return SeriesDescriptor.power_law(self.c ** 2, 2.0 * self.p)
        if k == "explicit-prefix":
            return SeriesDescriptor.with_prefix([x * x for x in self.prefix], self.tail.squared())
        if k == "opaque":
            return SeriesDescriptor.opaque([x * x for x in self.prefix])
        return SeriesDescriptor.opaque()

    # -- JSON --------------------------------------------------------------
    def to_json(self) -> dict[str, Any]:
        k = self.kind
        out: dict[str, Any] = {"kind": k}
        if k in ("constant", "geometric", "power-law"):
            out["c"] = self.c
        if k == "geometric":
            out["q"] = self.q
        if k == "power-law":
            out["p"] = self.p
        if k in ("explicit-prefix", "opaque"):
            out["prefix"] = list(self.prefix)
        if k == "explicit-prefix":
            out["tail"] = self.tail.to_json()
        if k == "one-minus-exp":
            out["s"] = self.tail.to_json()
        return out


_JSON_KEYS = {
    "zero-tail": set(), "constant": {"c"}, "geometric": {"c", "q"}, "power-law": {"c", "p"},
    "one-minus-exp": {"s"}, "explicit-prefix": {"prefix", "tail"}, "opaque": {"prefix"},
}


def series_from_json(spec: dict[str, Any]) -> SeriesDescriptor:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"series descriptor must be an object with a 'kind' key: {spec!r}")
    k = spec["kind"]
    check_keys(spec, {"kind"} | _JSON_KEYS.get(k, set()), f"series kind {k!r}")
    if k == "zero-tail":
        return SeriesDescriptor.zero()
    if k == "constant":
        return SeriesDescriptor.constant(float(spec["c"]))
    if k == "geometric":
        return SeriesDescriptor.geometric(float(spec.get("c", 1.0)), float(spec["q"]))
    if k == "power-law":
        return SeriesDescriptor.power_law(float(spec.get("c", 1.0)), float(spec["p"]))
    if k == "one-minus-exp":
        return SeriesDescriptor.one_minus_exp(series_from_json(spec["s"]))
    if k == "explicit-prefix":
        return SeriesDescriptor("explicit-prefix", prefix=tuple(spec["prefix"]),
                                tail=series_from_json(spec["tail"]))
    if k == "opaque":
        return SeriesDescriptor.opaque(spec.get("prefix", ()))
    raise ValueError(f"unknown series kind {k!r}")
