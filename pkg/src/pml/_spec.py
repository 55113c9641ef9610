"""Shared guard for JSON input objects."""

from __future__ import annotations

from typing import Any, Iterable, Mapping


def check_keys(spec: Any, allowed: Iterable[str], what: str) -> None:
    """Reject non-objects and misspelled keys instead of silently using defaults."""
    if not isinstance(spec, Mapping):
        raise ValueError(f"{what} must be a JSON object, got {type(spec).__name__}")
    extra = set(spec) - set(allowed)
    if extra:
        raise ValueError(f"unexpected keys for {what}: {sorted(extra)}")
