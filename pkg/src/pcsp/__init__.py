"""Exact-arithmetic relax-and-round solver toolkit for promise CSPs."""

from __future__ import annotations

__version__ = "0.1.0"
