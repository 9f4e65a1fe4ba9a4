from __future__ import annotations

import math
from typing import Callable

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(
    func: Callable[[float], float],
    a: float,
    b: float,
    rel_width: float,
    max_iter: int = 500,
) -> tuple[float, float]:
    """Minimise a unimodal ``func`` on ``[a, b]``.

    Stops when the bracket is narrower than ``rel_width * max(|a|, |b|)``.
    Returns the best evaluated point and its value.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if b - a <= rel_width * max(abs(a), abs(b), 1e-300):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    return (c, fc) if fc <= fd else (d, fd)
