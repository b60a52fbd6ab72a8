"""The double-power reaction term f(u) = -omega*u + u**p - u**q.

Builds f, its antiderivative F, derivative f', and the two tilde
discriminants as exact PowerSums, computes the closed-form critical
frequencies below which F (respectively f) is positive somewhere, and
locates the positive zeros of f and F.

Validity region: q > p > 1, omega > 0, n a positive integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .power_algebra import (
    PowerSum,
    antiderivative,
    differentiate,
    evaluate,
    make_power_sum,
    tilde,
)

# Relative half-width for declaring a maximum value indistinguishable
# from zero (tangent zero) and for flagging a tangent root by its
# derivative magnitude.
TANGENT_BAND = 1e-12
TANGENT_DERIV_RTOL = 1e-8
ZERO_REL_WIDTH = 1e-12


class InvalidParams(ValueError):
    """Parameter set outside the validity region."""


@dataclass(frozen=True)
class Params:
    """Problem parameters (omega, p, q, n) with q > p > 1, omega > 0, n >= 1."""

    omega: float
    p: float
    q: float
    n: int


@dataclass(frozen=True)
class Thresholds:
    """Critical frequencies and the maximizers that attain them.

    omega_crit: largest frequency below which F is positive somewhere,
        attained by 2*F(u)/u**2 at u_star_F.
    eta_crit: largest frequency below which f is positive somewhere,
        attained by f(u)/u + omega at u_star_f.
    """

    omega_crit: float
    eta_crit: float
    u_star_F: float
    u_star_f: float


def make_params(omega: float, p: float, q: float, n: int) -> Params:
    omega, p, q = float(omega), float(p), float(q)
    if not (omega > 0.0) or not math.isfinite(omega):
        raise InvalidParams(f"omega must be positive and finite, got {omega!r}")
    if not (q > p > 1.0) or not (math.isfinite(p) and math.isfinite(q)):
        raise InvalidParams(f"exponents must satisfy q > p > 1, got p={p!r}, q={q!r}")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidParams(f"dimension n must be a positive integer, got {n!r}")
    return Params(omega, p, q, n)


def f_of(params: Params) -> PowerSum:
    """The reaction term -omega*u + u**p - u**q."""
    return make_power_sum([(-params.omega, 1.0), (1.0, params.p), (-1.0, params.q)])


def F_of(params: Params) -> PowerSum:
    """Antiderivative of the reaction term, vanishing at 0."""
    return antiderivative(f_of(params))


def fprime_of(params: Params) -> PowerSum:
    """Derivative of the reaction term."""
    return differentiate(f_of(params))


def ftilde_of(params: Params) -> PowerSum:
    """Uniqueness discriminant tilde(f') = (u*f')'*f - u*f'**2."""
    return tilde(fprime_of(params))


def Ftilde_of(params: Params) -> PowerSum:
    """Existence discriminant tilde(f) = (u*f)'*F - u*f**2."""
    return tilde(f_of(params))


def thresholds(p: float, q: float) -> Thresholds:
    """Closed-form critical frequencies for exponents q > p > 1.

    omega_crit = 2(q-p)/((p+1)(q-1)) * [ (p-1)(q+1) / ((p+1)(q-1)) ]^((p-1)/(q-p))
    eta_crit   =  (q-p)/(q-1)        * [ (p-1)/(q-1) ]^((p-1)/(q-p))

    attained at u_star_F = [ (p-1)(q+1)/((p+1)(q-1)) ]^(1/(q-p)) and
    u_star_f = [ (p-1)/(q-1) ]^(1/(q-p)); both maximizers lie in (0, 1).
    """
    p, q = float(p), float(q)
    if not (q > p > 1.0) or not (math.isfinite(p) and math.isfinite(q)):
        raise InvalidParams(f"exponents must satisfy q > p > 1, got p={p!r}, q={q!r}")
    expo = (p - 1.0) / (q - p)
    ratio_F = ((p - 1.0) * (q + 1.0)) / ((p + 1.0) * (q - 1.0))
    ratio_f = (p - 1.0) / (q - 1.0)
    omega_crit = 2.0 * (q - p) / ((p + 1.0) * (q - 1.0)) * ratio_F**expo
    eta_crit = (q - p) / (q - 1.0) * ratio_f**expo
    return Thresholds(
        omega_crit=omega_crit,
        eta_crit=eta_crit,
        u_star_F=ratio_F ** (1.0 / (q - p)),
        u_star_f=ratio_f ** (1.0 / (q - p)),
    )


def _reduced_f(params: Params) -> PowerSum:
    # f(u)/u, a three-term sum with constant part -omega
    return make_power_sum(
        [(-params.omega, 0.0), (1.0, params.p - 1.0), (-1.0, params.q - 1.0)]
    )


def _reduced_F(params: Params) -> PowerSum:
    # F(u)/u**2
    return make_power_sum(
        [
            (-params.omega / 2.0, 0.0),
            (1.0 / (params.p + 1.0), params.p - 1.0),
            (-1.0 / (params.q + 1.0), params.q - 1.0),
        ]
    )


def _zeros_of_reduced(g: PowerSum, u_star: float, with_flags: bool):
    """Positive zeros of a reduced profile that is negative at 0+ and at
    infinity with a single interior maximum at u_star.

    Returns [] when the maximum is negative, a single flagged tangent
    root when it is indistinguishable from zero, and the two simple
    roots (bisection to 1e-12 relative width) otherwise.
    """
    g_max = evaluate(g, u_star)
    scale_ = max(abs(t.coeff) for t in g.terms)
    if g_max < -TANGENT_BAND * scale_:
        out: list[tuple[float, bool]] = []
    elif g_max <= TANGENT_BAND * scale_:
        out = [(u_star, True)]
    else:
        lo = _expand_left(g, u_star)
        hi = _expand_right(g, u_star)
        dg = differentiate(g)
        out = []
        for a, b, sign_left in ((lo, u_star, -1.0), (u_star, hi, +1.0)):
            root = _bisect_root(g, a, b, sign_left)
            dscale = sum(abs(t.coeff * t.exponent) * root ** (t.exponent - 1.0) for t in g.terms if t.exponent != 0.0)
            tangent = abs(evaluate(dg, root)) < TANGENT_DERIV_RTOL * dscale
            out.append((root, tangent))
    if with_flags:
        return out
    return [r for r, _ in out]


def _expand_left(g: PowerSum, u_star: float) -> float:
    lo = u_star * 1e-6
    for _ in range(60):
        if evaluate(g, lo) < 0.0:
            return lo
        lo *= 1e-6
        if lo == 0.0:
            break
    raise ArithmeticError("could not bracket the left zero above the float range")


def _expand_right(g: PowerSum, u_star: float) -> float:
    hi = u_star * 1e6
    for _ in range(60):
        if evaluate(g, hi) < 0.0:
            return hi
        hi *= 1e6
        if not math.isfinite(hi):
            break
    raise ArithmeticError("could not bracket the right zero below the float range")


def _bisect_root(g: PowerSum, a: float, b: float, sign_left: float) -> float:
    # sign_left: sign of g on the 'a' side; bisect to 1e-12 relative width
    while (b - a) > ZERO_REL_WIDTH * b:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if math.copysign(1.0, evaluate(g, mid) or sign_left) == sign_left:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def positive_zeros_f(params: Params, with_flags: bool = False):
    """Ascending positive zeros of f: two simple roots below the critical
    frequency eta_crit, one tangent root at it, none above.

    With ``with_flags=True`` each entry is (root, tangent) where the
    flag marks a root whose derivative magnitude is below 1e-8 of the
    local derivative scale.
    """
    thr = thresholds(params.p, params.q)
    return _zeros_of_reduced(_reduced_f(params), thr.u_star_f, with_flags)


def positive_zeros_F(params: Params, with_flags: bool = False):
    """Ascending positive zeros of F; structure as in positive_zeros_f
    with the threshold role played by omega_crit."""
    thr = thresholds(params.p, params.q)
    return _zeros_of_reduced(_reduced_F(params), thr.u_star_F, with_flags)
