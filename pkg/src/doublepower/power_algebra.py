"""Exact algebra for finite sums of real-exponent power terms on (0, inf).

A PowerSum is c1*u**e1 + ... + ck*u**ek with real coefficients and real
exponents, kept in a normalized form (ascending exponents, near-equal
exponents merged, zero coefficients dropped).  Closed under addition,
scaling, multiplication, differentiation and antidifferentiation, which
is enough to carry a double-power reaction term and everything derived
from it without truncation error beyond float arithmetic.

The module also provides the tilde transform

    tilde(h) = (u*h)' * H - u*h**2,   H = antiderivative of h with H(0)=0,

whose sign over (0, inf) decides existence and uniqueness questions for
the reaction terms built in :mod:`doublepower.nonlinearity`, and a sign
analyzer ``analyze_sign`` that classifies a PowerSum as positive
somewhere, negative everywhere, or identically zero on (0, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# Exponents closer than this (relative) are treated as the same power.
EXPONENT_MERGE_RTOL = 1e-12

# Sign analysis: grid for coarse bracketing and tolerance for calling a
# supremum indistinguishable from zero (relative to coefficient scale).
SIGN_GRID_LO = 1e-8
SIGN_GRID_HI = 1e8
SIGN_GRID_POINTS = 4096
SIGN_RTOL = 1e-11
REFINE_REL_WIDTH = 1e-12

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """Evaluation requested outside the domain of validity (u <= 0)."""


class ExponentMinusOne(ValueError):
    """Antiderivative of a u**-1 term is not a power term."""


class IndeterminateSign(Exception):
    """Supremum too close to zero to call a sign; caller decides.

    Carries ``sup_value`` and ``sup_arg`` (argmax, or None when the
    supremum is only approached in a limit).
    """

    def __init__(self, sup_value: float, sup_arg: float | None):
        self.sup_value = sup_value
        self.sup_arg = sup_arg
        super().__init__(
            f"supremum {sup_value:.3e} within sign tolerance (arg={sup_arg})"
        )


@dataclass(frozen=True)
class PowerTerm:
    """One term coeff * u**exponent."""

    coeff: float
    exponent: float


@dataclass(frozen=True)
class PowerSum:
    """Normalized finite sum of power terms; construct via make_power_sum."""

    terms: tuple[PowerTerm, ...]

    def __post_init__(self):
        for a, b in zip(self.terms, self.terms[1:]):
            if not a.exponent < b.exponent:
                raise ValueError("terms must have strictly ascending exponents")

    def __call__(self, u: float) -> float:
        return evaluate(self, u)

    def __add__(self, other: "PowerSum") -> "PowerSum":
        return add(self, other)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return add(self, scale(other, -1.0))

    def __neg__(self) -> "PowerSum":
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, PowerSum):
            return multiply(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__


class Verdict(Enum):
    POSITIVE_SOMEWHERE = "PositiveSomewhere"
    NEGATIVE_EVERYWHERE = "NegativeEverywhere"
    ZERO_EVERYWHERE = "ZeroEverywhere"


@dataclass(frozen=True)
class SignVerdict:
    """Outcome of analyze_sign.

    ``sup_value``/``sup_arg`` refer to the reduced sum ps/u**e_min (the
    factor u**e_min is strictly positive and carries no sign
    information); ``sup_arg`` is None when the supremum is approached
    only as u -> 0+ or u -> inf.  ``witness`` is a point where the
    original PowerSum is strictly positive, present when the verdict is
    POSITIVE_SOMEWHERE and a representable witness exists.
    """

    verdict: Verdict
    witness: float | None
    sup_value: float
    sup_arg: float | None


def make_power_sum(pairs: Iterable[tuple[float, float]]) -> PowerSum:
    """Build a normalized PowerSum from (coeff, exponent) pairs.

    Near-equal exponents (within EXPONENT_MERGE_RTOL relative) are
    merged by summing coefficients; terms whose coefficient cancels to
    exactly zero are dropped.  The empty sum is the zero function.
    """
    items = sorted(((float(e), float(c)) for c, e in pairs))
    merged: list[list[float]] = []
    for e, c in items:
        if merged and abs(e - merged[-1][0]) <= EXPONENT_MERGE_RTOL * max(1.0, abs(e)):
            merged[-1][1] += c
        else:
            merged.append([e, c])
    return PowerSum(tuple(PowerTerm(c, e) for e, c in merged if c != 0.0))


def evaluate(ps: PowerSum, u: float) -> float:
    """Evaluate at u > 0 (raises DomainError otherwise)."""
    u = float(u)
    if not u > 0.0:
        raise DomainError(f"PowerSum evaluation requires u > 0, got {u!r}")
    return math.fsum(t.coeff * u**t.exponent for t in ps.terms)


def add(a: PowerSum, b: PowerSum) -> PowerSum:
    return make_power_sum(
        [(t.coeff, t.exponent) for t in a.terms] + [(t.coeff, t.exponent) for t in b.terms]
    )


def scale(a: PowerSum, c: float) -> PowerSum:
    return make_power_sum([(t.coeff * float(c), t.exponent) for t in a.terms])


def multiply(a: PowerSum, b: PowerSum) -> PowerSum:
    return make_power_sum(
        [(ta.coeff * tb.coeff, ta.exponent + tb.exponent) for ta in a.terms for tb in b.terms]
    )


def differentiate(ps: PowerSum) -> PowerSum:
    """Termwise derivative; constant terms vanish."""
    return make_power_sum(
        [(t.coeff * t.exponent, t.exponent - 1.0) for t in ps.terms if t.exponent != 0.0]
    )


def antiderivative(ps: PowerSum) -> PowerSum:
    """Termwise antiderivative vanishing at 0; exponents must avoid -1."""
    for t in ps.terms:
        if abs(t.exponent + 1.0) <= EXPONENT_MERGE_RTOL * max(1.0, abs(t.exponent)):
            raise ExponentMinusOne(f"term with exponent {t.exponent} has no power antiderivative")
    return make_power_sum([(t.coeff / (t.exponent + 1.0), t.exponent + 1.0) for t in ps.terms])


_U = None  # u**1 as a PowerSum, built lazily to keep module import light


def _u_identity() -> PowerSum:
    global _U
    if _U is None:
        _U = make_power_sum([(1.0, 1.0)])
    return _U


def tilde(h: PowerSum) -> PowerSum:
    """The transform (u*h)' * H - u*h**2 with H the antiderivative of h.

    Composed from the primitive operations so the result is exact in
    the coefficient algebra.
    """
    u = _u_identity()
    H = antiderivative(h)
    return add(
        multiply(differentiate(multiply(u, h)), H),
        scale(multiply(u, multiply(h, h)), -1.0),
    )


def _golden_max(fn, t_lo: float, t_hi: float, tol: float = REFINE_REL_WIDTH):
    """Golden-section maximization of fn over [t_lo, t_hi]."""
    c = t_hi - _INVPHI * (t_hi - t_lo)
    d = t_lo + _INVPHI * (t_hi - t_lo)
    fc, fd = fn(c), fn(d)
    while (t_hi - t_lo) > tol:
        if fc >= fd:
            t_hi, d, fd = d, c, fc
            c = t_hi - _INVPHI * (t_hi - t_lo)
            fc = fn(c)
        else:
            t_lo, c, fc = c, d, fd
            d = t_lo + _INVPHI * (t_hi - t_lo)
            fd = fn(d)
    t = 0.5 * (t_lo + t_hi)
    return t, fn(t)


def _verify_witness(ps: PowerSum, w: float | None) -> float | None:
    if w is None or not (w > 0.0) or not math.isfinite(w):
        return None
    try:
        val = evaluate(ps, w)
    except (DomainError, OverflowError):
        return None
    return w if val > 0.0 else None


def analyze_sign(ps: PowerSum) -> SignVerdict:
    """Classify the sign of ps over (0, inf).

    The smallest power u**e_min is factored out (it is positive and
    cannot change the sign), leaving a reduced sum with a nonzero
    constant term.  Reduced sums with at most two terms are decided in
    closed form; otherwise the supremum is bracketed on a log-spaced
    grid over [1e-8, 1e8] and refined by golden section to relative
    width 1e-12.  When the supremum is within 1e-11 of zero relative to
    the coefficient scale, IndeterminateSign is raised for the caller
    to handle.
    """
    if not ps.terms:
        return SignVerdict(Verdict.ZERO_EVERYWHERE, None, 0.0, None)

    e_min = ps.terms[0].exponent
    red = [(t.coeff, t.exponent - e_min) for t in ps.terms]
    scale_ = max(abs(c) for c, _ in red)
    tol = SIGN_RTOL * scale_
    c0 = red[0][0]  # first term is the constant after factoring

    def reduced(u: float) -> float:
        # pure-python pow raises on overflow; treat as off-scale low so
        # searches steer back toward representable territory
        try:
            return math.fsum(c * u**e for c, e in red)
        except OverflowError:
            return -math.inf

    def positive(sup_value, sup_arg, witness):
        return SignVerdict(
            Verdict.POSITIVE_SOMEWHERE, _verify_witness(ps, witness), sup_value, sup_arg
        )

    if len(red) == 1:
        if c0 > tol:
            return positive(c0, None, 1.0)
        if c0 < -tol:
            return SignVerdict(Verdict.NEGATIVE_EVERYWHERE, None, c0, None)
        raise IndeterminateSign(c0, None)

    if len(red) == 2:
        c1, b = red[1]
        if c1 > 0.0:
            # increasing tail dominates: positive for large u
            ratio = (scale_ + abs(c0)) / c1
            w = ratio ** (1.0 / b) if math.log10(ratio) / b < 280.0 else None
            return positive(math.inf, None, w)
        # strictly decreasing from c0 toward -inf
        if c0 > tol:
            ratio = c0 / (2.0 * abs(c1))
            w = ratio ** (1.0 / b) if math.log10(ratio) / b < 280.0 else None
            return positive(c0, None, w)
        if c0 < -tol:
            return SignVerdict(Verdict.NEGATIVE_EVERYWHERE, None, c0, None)
        raise IndeterminateSign(c0, None)

    # General case: coarse log grid, then golden refinement of interior maxima.
    t_grid = np.linspace(math.log(SIGN_GRID_LO), math.log(SIGN_GRID_HI), SIGN_GRID_POINTS)
    u_grid = np.exp(t_grid)
    with np.errstate(over="ignore"):
        vals = np.zeros_like(u_grid)
        for c, e in red:
            vals += c * u_grid**e

    sup_value = c0  # limit as u -> 0+
    sup_arg: float | None = None
    c_top = red[-1][0]
    if c_top > 0.0:
        sup_value = math.inf

    finite = np.isfinite(vals)
    interior = np.nonzero(
        (vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]) & finite[1:-1]
    )[0] + 1
    # consecutive candidates are one flat plateau (values below float
    # resolution of each other); refine each run once, not per point
    for a, b in _runs(interior):
        t_star, v_star = _golden_max(
            lambda t: reduced(math.exp(t)), t_grid[a - 1], t_grid[b + 1]
        )
        if v_star > sup_value:
            sup_value, sup_arg = v_star, math.exp(t_star)
    # grid end points participate as plain candidates
    for i in (0, len(u_grid) - 1):
        if finite[i] and vals[i] > sup_value:
            sup_value, sup_arg = float(vals[i]), float(u_grid[i])

    if sup_value > tol:
        witness = sup_arg
        if witness is None or reduced(witness) <= 0.0:
            witness = _positive_point(red, c0, c_top, scale_)
        return positive(sup_value, sup_arg, witness)
    if sup_value < -tol:
        return SignVerdict(Verdict.NEGATIVE_EVERYWHERE, None, sup_value, sup_arg)
    raise IndeterminateSign(sup_value, sup_arg)


def _runs(indices) -> list[tuple[int, int]]:
    """Group sorted integer indices into maximal consecutive runs."""
    out: list[tuple[int, int]] = []
    start = prev = None
    for i in indices:
        i = int(i)
        if prev is not None and i == prev + 1:
            prev = i
            continue
        if prev is not None:
            out.append((start, prev))
        start = prev = i
    if prev is not None:
        out.append((start, prev))
    return out


def _positive_point(red: Sequence[tuple[float, float]], c0: float, c_top: float, scale_: float):
    """Find some u with the reduced sum positive, for witness reporting."""

    def val(u: float) -> float:
        try:
            return math.fsum(c * u**e for c, e in red)
        except OverflowError:
            return -math.inf

    if c_top > 0.0:
        u = SIGN_GRID_HI
        for _ in range(0, 600):
            if val(u) > 0.0:
                return u
            u *= 2.0
            if u > 1e280:
                return None
    if c0 > 0.0:
        u = SIGN_GRID_LO
        for _ in range(0, 600):
            if val(u) > 0.0:
                return u
            u *= 0.5
            if u < 1e-280:
                return None
    return None
