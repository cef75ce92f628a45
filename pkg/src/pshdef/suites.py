"""Seeded residual suites for the r-power grouping of det H_rho."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, TypeVar

import numpy as np

from .domains import random_field, random_point
from .expansion import TERMS, residual_full, residual_term
from .expr import Const, Node, Point, parse

__all__ = ["IdentityCase", "random_cases", "run_identity", "thread_count", "ordered_map"]

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """Worker cap from PSHDEF_THREADS (default 1)."""
    raw = os.environ.get("PSHDEF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map preserving input order; threaded when PSHDEF_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class IdentityCase:
    r: Node
    P: Node
    K: float
    q: Point


def random_cases(n: int, seed: int, r: Optional[Node] = None, X: Optional[Node] = None,
                 center: Optional[Point] = None, radius: float = 1.0) -> list[IdentityCase]:
    """n seeded cases; r is drawn at random unless given.

    When X is given, every other case uses P = 1 + L X with a random L.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        rr = r if r is not None else parse(random_field(rng))
        if X is not None and i % 2 == 1:
            P = Const(1.0) + Const(float(rng.uniform(-2, 2))) * X
        else:
            P = parse(random_field(rng))
        K = float(rng.uniform(0, 10))
        q = random_point(rng, radius)
        if center is not None:
            q = Point(q.z + center.z, q.w + center.w)
        out.append(IdentityCase(rr, P, K, q))
    return out


def _case_residuals(case: IdentityCase) -> tuple[float, dict]:
    full = residual_full(case.r, case.P, case.K, case.q)
    per = {t: residual_term(t, case.r, case.P, case.K, case.q) for t in TERMS}
    return full, per


def run_identity(cases: list[IdentityCase], threshold: float = 1e-9) -> dict:
    results = ordered_map(_case_residuals, cases)
    max_full = max((f for f, _ in results), default=0.0)
    per_term = {t: max((p[t] for _, p in results), default=0.0) for t in TERMS}
    worst = max(range(len(results)), key=lambda i: results[i][0]) if results else None
    return {
        "n": len(cases),
        "max_residual": max_full,
        "per_term": per_term,
        "threshold": threshold,
        "passed": bool(max_full <= threshold and all(v <= threshold for v in per_term.values())),
        "worst_point": None if worst is None else list(cases[worst].q.as_real()),
    }
