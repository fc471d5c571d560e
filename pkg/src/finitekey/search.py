"""Scalar search helpers: golden-section maximization and sign bisection."""

import math

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(func, lo, hi, tol=1e-10, max_iter=200):
    """Maximize a unimodal ``func`` on [lo, hi].

    Endpoints are compared against the interior optimum so that boundary
    maxima are returned exactly.

    Returns:
        (x, func(x)) at the best point found.
    """
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = func(x1), func(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = func(x2)
    candidates = [(x1, f1), (x2, f2), (lo, func(lo)), (hi, func(hi))]
    # first maximal candidate wins, so interior points take precedence on ties
    return max(candidates, key=lambda c: c[1])


def bisect_last_true(pred, lo, hi, tol):
    """Locate the boundary of a predicate that is true at ``lo`` and false at ``hi``.

    Returns:
        (last_true, first_false) with first_false - last_true <= tol.
    """
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi
