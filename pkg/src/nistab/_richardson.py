"""Richardson extrapolation of one-sided limits along a halving sequence."""

from __future__ import annotations

import numpy as np


def richardson_limit(f, eps0: float, levels: int = 6):
    """Extrapolate lim_{e -> 0+} f(e) assuming an error expansion in powers of e.

    Evaluates f at eps0, eps0/2, ..., eps0/2^(levels-1) and runs the standard
    Neville table with ratio 2.  Returns (limit, err_estimate), the estimate
    being the difference between the last two column tops of the table.
    """
    if levels < 2:
        raise ValueError("levels must be at least 2")
    row = [np.asarray(f(eps0 / 2.0 ** j), dtype=complex) for j in range(levels)]
    tops = []
    for k in range(1, levels):
        fac = 2.0 ** k
        row = [(fac * row[j + 1] - row[j]) / (fac - 1.0) for j in range(len(row) - 1)]
        tops.append(row[-1])
    limit = tops[-1]
    prev = tops[-2] if len(tops) > 1 else row[0]
    est = float(np.linalg.norm(np.atleast_1d(limit - prev)))
    return limit, est
