"""Fixed-step RK4 shooting reference for cross-checking find_ground_state.

Deliberately shares nothing with the package integrator: classic RK4 at
a constant step, no adaptive control, no decay box, no series start.
alpha* is the bare limit of rebound/crossing bisection, so agreement
with the adaptive solver checks the whole pipeline, not one code path.
"""

import math


def _make_rhs(omega, p, q, n):
    def f(u):
        # linear continuation below zero; only sampled mid-step after a
        # crossing, and the pre-step check terminates before it matters
        if u <= 0.0:
            return -omega * u
        return -omega * u + u**p - u**q

    def rhs(r, u, v):
        if r == 0.0:
            return v, -f(u) / n
        return v, -(n - 1) / r * v - f(u)

    return rhs


def classify(omega, p, q, n, alpha, h, r_max):
    """'R' (rebound) or 'C' (crossing) for the orbit from u(0) = alpha."""
    rhs = _make_rhs(omega, p, q, n)
    r, u, v = 0.0, alpha, 0.0
    descending = False
    v_floor = -1e-6 * math.sqrt(omega) * alpha
    while r < r_max:
        if u <= 0.0:
            return "C"
        if v < v_floor:
            descending = True
        elif descending and v >= 0.0:
            return "R"
        k1u, k1v = rhs(r, u, v)
        k2u, k2v = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v)
        k3u, k3v = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v)
        k4u, k4v = rhs(r + h, u + h * k3u, v + h * k3v)
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        r += h
    raise RuntimeError(f"no classification before r_max for alpha={alpha!r}")


def alpha_star(omega, p, q, n, beta, b2, h=0.01, scan=64, rel_tol=1e-9):
    """Bisection limit of the rebound/crossing boundary on (beta, b2)."""
    r_max = 80.0 / math.sqrt(omega)
    step = (b2 - beta) / scan
    lo = hi = None
    prev = None
    for i in range(scan):
        a = beta + (i + 0.5) * step
        c = classify(omega, p, q, n, a, h, r_max)
        if prev is not None and prev[1] == "R" and c == "C":
            lo, hi = prev[0], a
            break
        prev = (a, c)
    if lo is None:
        raise RuntimeError("no rebound-to-crossing pair in the scan")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if classify(omega, p, q, n, mid, h, r_max) == "C":
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
