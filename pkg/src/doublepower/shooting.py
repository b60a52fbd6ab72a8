"""Shooting solver for the radial profile equation

    u'' + (n-1)/r u' + f(u) = 0,   u'(0) = 0,   u(r) -> 0 as r -> inf,

with the double-power f.  Orbits are classified as Crossing (u hits 0
while falling), Rebound (u' returns to 0 with u still positive), or
Decay (the orbit enters a small box around the origin inside the stable
cone of the linearization, from which neither of the other two exits is
numerically reachable).  A ground state is the separatrix between
Rebound and Crossing, located by bisection on the initial height alpha,
or, when the separatrix height rounds to the equilibrium b2 itself, by
bisection on the radius at which the orbit releases from b2.

The integrator is a scalar Dormand-Prince 5(4) pair with the FSAL
property, written out in plain floats: the system is two-dimensional
and the step loop dominates the solver's runtime, so avoiding array
overhead matters more than vectorization here.  The removable
singularity of the damping term at r = 0 is stepped over with a series
start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from ._fmt import format_float
from .nonlinearity import (
    F_of,
    Params,
    f_of,
    fprime_of,
    positive_zeros_F,
    positive_zeros_f,
    thresholds,
)
from .power_algebra import DomainError, evaluate

# Decay box: u below this fraction of alpha (with v < 0 and |v| inside
# the stable cone |v| < 2 sqrt(omega) u) terminates the orbit as Decay.
# The n = 1 box is wider: without damping the separatrix is neutrally
# stable and float-level alpha resolution cannot push the orbit to
# 1e-8 alpha before drift takes over.
DECAY_BOX = 1e-8
DECAY_BOX_LINE = 1e-5

DESCENT_EPS = 1e-6  # epsilon_v = 1e-6 sqrt(omega) alpha marks real descent
EQUILIBRIUM_RTOL = 1e-9  # |f(alpha)| < 1e-9 omega alpha means constant orbit
BOX_RELAX_CAP = 1e-4  # deepest acceptable box when alpha steering is exhausted
RELEASE_OFFSET = 1e-9  # w0/b2 when shooting on the release radius instead

SCAN_POINTS = 64
SCAN_POINTS_MAX = 4096

_SAFETY = 0.9
_SHRINK_CAP = 0.2
_GROW_CAP = 5.0


class OrbitClass(Enum):
    CROSSING = "Crossing"
    REBOUND = "Rebound"
    DECAY = "Decay"
    EQUILIBRIUM = "Equilibrium"
    INDETERMINATE = "Indeterminate"


class TerminalReason(Enum):
    CROSSING = "crossing"
    DECAY_BOX = "decay_box"
    REBOUND = "rebound"
    EQUILIBRIUM = "equilibrium"
    R_MAX = "r_max"


class StepSizeUnderflow(RuntimeError):
    """Adaptive step collapsed; the input is stiff or degenerate."""


class NonFiniteState(RuntimeError):
    """Integration produced inf or nan that step rejection cannot fix."""


class NoExistence(Exception):
    """omega at or above the existence threshold omega_crit."""

    def __init__(self, omega: float, omega_crit: float):
        self.omega = omega
        self.omega_crit = omega_crit
        super().__init__(
            f"no ground state: omega={format_float(omega)} >= "
            f"omega_crit={format_float(omega_crit)}"
        )


class BracketNotFound(RuntimeError):
    """The alpha scan or bisection failed to isolate the separatrix."""


class _AlphaSaturated(Exception):
    """Every float height up to b2 rebounds or lingers past r_max; the
    separatrix is within one ulp of the equilibrium and initial height
    has nothing left to steer.  Caught internally to switch the
    shooting parameter to the release radius."""

    def __init__(self, lo: float):
        self.lo = lo
        super().__init__()


class _BoxUnreached(Exception):
    """Bisection hit float resolution and the relax ladder its cap
    without any endpoint shot entering the decay box.  Callers decide
    whether the release stage applies or the failure is final."""

    def __init__(self, lo: float, hi: float):
        self.lo = lo
        self.hi = hi
        super().__init__()


class InsufficientTail(ValueError):
    """Profile has too few samples below 1e-3 alpha to fit a decay rate."""


@dataclass(frozen=True)
class Controls:
    """Integrator and solver knobs.

    r_max and max_step default to 50/sqrt(omega) and 0.05/sqrt(omega):
    fifty e-folds of the linear tail, sampled densely enough for
    postprocessing.  alpha_tol is the relative bracket width of the
    first bisection stage.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    r_max: float | None = None
    max_step: float | None = None
    alpha_tol: float = 1e-12


@dataclass(frozen=True)
class RadialState:
    r: float
    u: float
    v: float


@dataclass(frozen=True)
class TrajectoryStats:
    steps: int
    rejected_steps: int
    min_energy: float
    max_energy_violation: float


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[RadialState, ...]
    orbit_class: OrbitClass
    terminal_reason: TerminalReason
    stats: TrajectoryStats

    def to_json_dict(self) -> dict:
        return {
            "orbit_class": self.orbit_class.value,
            "terminal_reason": self.terminal_reason.value,
            "stats": {
                "steps": self.stats.steps,
                "rejected_steps": self.stats.rejected_steps,
                "min_energy": self.stats.min_energy,
                "max_energy_violation": self.stats.max_energy_violation,
            },
            "samples": [[s.r, s.u, s.v] for s in self.samples],
        }


@dataclass(frozen=True)
class GroundState:
    alpha: float
    profile: Trajectory
    bracket: tuple[float, float]
    decay_rate: float
    ode_residual: float

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "bracket": [self.bracket[0], self.bracket[1]],
            "decay_rate": self.decay_rate,
            "ode_residual": self.ode_residual,
            "profile": self.profile.to_json_dict(),
        }


def profile_csv(trajectory: Trajectory) -> str:
    lines = ["r,u,u_r"]
    for s in trajectory.samples:
        lines.append(f"{format_float(s.r)},{format_float(s.u)},{format_float(s.v)}")
    return "\n".join(lines) + "\n"


def _resolve(controls: Controls | None, params: Params) -> tuple[float, float, float, float, float]:
    ctl = controls or Controls()
    sqw = math.sqrt(params.omega)
    r_max = ctl.r_max if ctl.r_max is not None else 50.0 / sqw
    max_step = ctl.max_step if ctl.max_step is not None else 0.05 / sqw
    return ctl.rtol, ctl.atol, r_max, max_step, ctl.alpha_tol


def _decay_box_factor(n: int) -> float:
    return DECAY_BOX if n >= 2 else DECAY_BOX_LINE


# Dormand-Prince 5(4) coefficients.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
# y5 - y4, including the FSAL stage
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def _make_rhs(params: Params):
    """Scalar right-hand side with f extended oddly to u < 0.

    The odd extension only matters for transient stage values just
    below zero near a crossing; integration never continues past the
    localized u = 0 event.
    """
    omega, p, q = params.omega, params.p, params.q
    nm1 = float(params.n - 1)

    def rhs(r: float, u: float, v: float) -> tuple[float, float]:
        if u >= 0.0:
            fu = -omega * u + u**p - u**q
        else:
            au = -u
            fu = -omega * u - au**p + au**q
        return v, -nm1 / r * v - fu

    return rhs


def _dp_step(rhs, r, u, v, h, k1u, k1v):
    """One Dormand-Prince 5(4) step from (r, u, v) with stage-1 slopes
    given.  Returns (u5, v5, err_u, err_v, k7u, k7v)."""
    k2u, k2v = rhs(r + _C2 * h, u + h * _A21 * k1u, v + h * _A21 * k1v)
    k3u, k3v = rhs(
        r + _C3 * h, u + h * (_A31 * k1u + _A32 * k2u), v + h * (_A31 * k1v + _A32 * k2v)
    )
    k4u, k4v = rhs(
        r + _C4 * h,
        u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
        v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v),
    )
    k5u, k5v = rhs(
        r + _C5 * h,
        u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
        v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v),
    )
    k6u, k6v = rhs(
        r + h,
        u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
        v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v),
    )
    u5 = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
    v5 = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
    k7u, k7v = rhs(r + h, u5, v5)
    err_u = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
    err_v = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
    return u5, v5, err_u, err_v, k7u, k7v


def _series_start(params: Params, alpha: float, rtol: float) -> tuple[float, float, float]:
    """First step over the r = 0 singularity: u and v from the even
    series u(r) = alpha - f(alpha) r^2/(2n) + O(r^4)."""
    f_alpha = evaluate(f_of(params), alpha)
    fp_alpha = evaluate(fprime_of(params), alpha)
    h = min(1e-3, 1e-2 / math.sqrt(abs(fp_alpha) + params.omega))
    if rtol < 1e-10:
        # keep the O(h^3) series error below tighter tolerances too
        h *= (rtol / 1e-10) ** (1.0 / 3.0)
        h = max(h, 1e-6)
    n = params.n
    u1 = alpha - f_alpha * h * h / (2.0 * n)
    v1 = -f_alpha * h / n
    return h, u1, v1


def integrate_radial(params: Params, alpha: float, controls: Controls | None = None) -> Trajectory:
    """Integrate one shot from u(0) = alpha until classification.

    Stops at the first of: a localized u = 0 crossing, entry into the
    decay box, a rebound (v >= 0 after descent began), or r_max
    (classified Indeterminate).  Samples are the accepted steps, capped
    at max_step spacing.
    """
    if not alpha > 0.0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be positive and finite, got {alpha!r}")
    rtol, atol, r_max, max_step, _ = _resolve(controls, params)
    return _run(params, alpha, rtol, atol, r_max, max_step)


def _run(
    params: Params,
    alpha: float,
    rtol: float,
    atol: float,
    r_max: float,
    max_step: float,
    box_relax: float = 1.0,
    equilibrium_gate: bool = True,
    start: tuple[float, float, float] | None = None,
) -> Trajectory:
    omega, n = params.omega, params.n
    sqw = math.sqrt(omega)
    box_u = _decay_box_factor(n) * alpha * box_relax
    eps_v = DESCENT_EPS * sqw * alpha
    rhs = _make_rhs(params)

    # F coefficients inlined for the per-step energy bookkeeping
    F_terms = [(t.coeff, t.exponent) for t in F_of(params).terms]

    def F_val(u: float) -> float:
        return math.fsum(c * u**e for c, e in F_terms)

    if start is None:
        samples = [RadialState(0.0, alpha, 0.0)]
        # bisection probes disable the gate: near a critical omega the
        # separatrix can sit closer to the f-equilibrium than the gate width
        if equilibrium_gate:
            f_alpha = evaluate(f_of(params), alpha)
            if abs(f_alpha) < EQUILIBRIUM_RTOL * omega * alpha:
                # constant solution; report both ends of the would-be domain
                samples.append(RadialState(r_max, alpha, 0.0))
                stats = TrajectoryStats(0, 0, F_val(alpha), 0.0)
                return Trajectory(
                    tuple(samples), OrbitClass.EQUILIBRIUM, TerminalReason.EQUILIBRIUM, stats
                )
        h0, u, v = _series_start(params, alpha, rtol)
        r = h0
        samples.append(RadialState(r, u, v))
    else:
        # released mid-flight: no singularity to step over, alpha only
        # sets the scale of the decay box and descent epsilon
        r, u, v = start
        samples = [RadialState(r, u, v)]
        fp_u = evaluate(fprime_of(params), u)
        h0 = min(1e-3, 1e-2 / math.sqrt(abs(fp_u) + omega))

    e_prev = 0.5 * v * v + F_val(u)
    min_energy = min(F_val(alpha), e_prev)
    max_violation = 0.0
    steps = 0
    rejected = 0
    descent = False
    orbit: OrbitClass | None = None
    reason: TerminalReason | None = None

    h = h0
    k1u, k1v = rhs(r, u, v)
    while True:
        if r >= r_max * (1.0 - 1e-15):
            orbit, reason = OrbitClass.INDETERMINATE, TerminalReason.R_MAX
            break
        h = min(h, max_step, r_max - r)
        if h < 1e-14 * max(r, 1.0):
            raise StepSizeUnderflow(
                f"step {h:.3e} under floor at r={r:.6g} (alpha={format_float(alpha)})"
            )

        u5, v5, err_u, err_v, k7u, k7v = _dp_step(rhs, r, u, v, h, k1u, k1v)
        if not (math.isfinite(u5) and math.isfinite(v5)):
            rejected += 1
            h *= _SHRINK_CAP
            continue
        sc_u = atol + rtol * max(abs(u), abs(u5))
        sc_v = atol + rtol * max(abs(v), abs(v5))
        err = math.sqrt(0.5 * ((err_u / sc_u) ** 2 + (err_v / sc_v) ** 2))
        if err > 1.0:
            rejected += 1
            h *= max(_SHRINK_CAP, _SAFETY * err**-0.2)
            continue

        if u5 <= 0.0:
            # localize the crossing by bisecting the step size
            tau_lo, tau_hi = 0.0, h
            u_hi, v_hi = u5, v5
            for _ in range(80):
                tau = 0.5 * (tau_lo + tau_hi)
                if tau <= tau_lo or tau >= tau_hi:
                    break
                ut, vt, _, _, _, _ = _dp_step(rhs, r, u, v, tau, k1u, k1v)
                if ut > 0.0:
                    tau_lo = tau
                else:
                    tau_hi, u_hi, v_hi = tau, ut, vt
            r += tau_hi
            u, v = u_hi, v_hi
            steps += 1
            samples.append(RadialState(r, u, v))
            orbit, reason = OrbitClass.CROSSING, TerminalReason.CROSSING
            break

        r += h
        u, v = u5, v5
        steps += 1
        samples.append(RadialState(r, u, v))
        k1u, k1v = k7u, k7v

        e_new = 0.5 * v * v + F_val(u)
        if e_new < min_energy:
            min_energy = e_new
        jump = (e_new - e_prev) / h
        if jump > max_violation:
            max_violation = jump
        e_prev = e_new

        if v < 0.0 and u < box_u and -v < 2.0 * sqw * u:
            orbit, reason = OrbitClass.DECAY, TerminalReason.DECAY_BOX
            break
        if v >= 0.0 and u > box_u and descent:
            orbit, reason = OrbitClass.REBOUND, TerminalReason.REBOUND
            break
        if v < -eps_v:
            descent = True

        if err > 0.0:
            h *= min(_GROW_CAP, max(_SHRINK_CAP, _SAFETY * err**-0.2))
        else:
            h *= _GROW_CAP

    stats = TrajectoryStats(steps, rejected, min_energy, max_violation)
    return Trajectory(tuple(samples), orbit, reason, stats)


def classify_orbit(trajectory: Trajectory, params: Params) -> OrbitClass:
    """Re-derive the orbit class from the samples alone.

    Applies the same rules as the integrator (crossing, then decay box,
    then rebound, in that priority per sample) so it can double-check a
    stored trajectory or classify one produced elsewhere.  Equilibrium
    is recognised from the samples themselves (the orbit never leaves
    its starting point) rather than from f(alpha), so profiles shot
    from inside the integrator's equilibrium gate still classify by
    what they actually did.
    """
    samples = trajectory.samples
    alpha = samples[0].u
    omega, n = params.omega, params.n
    sqw = math.sqrt(omega)
    if all(
        abs(s.u - alpha) <= 1e-9 * alpha and abs(s.v) <= 1e-9 * sqw * alpha
        for s in samples
    ):
        return OrbitClass.EQUILIBRIUM
    box_u = _decay_box_factor(n) * alpha
    eps_v = DESCENT_EPS * sqw * alpha
    descent = False
    for s in samples[1:]:
        if s.u <= 0.0:
            return OrbitClass.CROSSING
        if s.v < 0.0 and s.u < box_u and -s.v < 2.0 * sqw * s.u:
            return OrbitClass.DECAY
        if s.v >= 0.0 and s.u > box_u and descent:
            return OrbitClass.REBOUND
        if s.v < -eps_v:
            descent = True
    # trajectories accepted under a relaxed box (alpha steering
    # exhausted) end inside the cone above the default depth
    last = samples[-1]
    if last.v < 0.0 and last.u < BOX_RELAX_CAP * alpha and -last.v < 2.0 * sqw * last.u:
        return OrbitClass.DECAY
    return OrbitClass.INDETERMINATE


def energy(state: RadialState, params: Params) -> float:
    """E = v^2/2 + F(u), the quantity damped at rate (n-1)/r v^2.

    For u < 0 (reachable only transiently at a crossing) F is a plain
    polynomial only when p and q are integers; otherwise real powers of
    negative numbers are undefined and DomainError is raised.
    """
    if state.u > 0.0:
        return 0.5 * state.v * state.v + evaluate(F_of(params), state.u)
    if state.u == 0.0:
        return 0.5 * state.v * state.v
    if params.p == int(params.p) and params.q == int(params.q):
        total = 0.0
        for t in F_of(params).terms:
            total += t.coeff * state.u ** int(round(t.exponent))
        return 0.5 * state.v * state.v + total
    raise DomainError(
        f"energy undefined at u={state.u!r} for non-integer exponents "
        f"p={params.p}, q={params.q}"
    )


def _scan_bracket(params: Params, beta: float, b2: float, rtol, atol, r_max, max_step):
    """Coarse alpha scan on (beta, b2) for a Rebound-below-Crossing pair.

    Midpoint sampling: strictly interior, and half a spacing of slack
    at both ends, where the separatrix can sit when omega approaches a
    threshold."""
    points = SCAN_POINTS
    while points <= SCAN_POINTS_MAX:
        step = (b2 - beta) / points
        classes = []
        for i in range(points):
            alpha = beta + (i + 0.5) * step
            traj = _run(
                params, alpha, rtol, atol, r_max, max_step, equilibrium_gate=False
            )
            classes.append((alpha, traj.orbit_class))
        first_cross = next(
            (idx for idx, (_, c) in enumerate(classes) if c is OrbitClass.CROSSING), None
        )
        if first_cross is not None:
            rebounds = [
                a for a, c in classes[:first_cross] if c is OrbitClass.REBOUND
            ]
            if rebounds:
                return rebounds[-1], classes[first_cross][0]
        # a crossing-free or rebound-free scan pins the separatrix to a
        # half spacing of an endpoint; fall back on what the endpoints
        # themselves are: beta can never cross (zero initial energy,
        # strict dissipation) and crossings accumulate just below the
        # equilibrium at b2.  Indeterminate verdicts above every rebound
        # are orbits lingering at b2 past r_max and point the same way.
        verdicts = {c for _, c in classes}
        if verdicts == {OrbitClass.CROSSING}:
            return beta * (1.0 + 1e-12), classes[0][0]
        if (
            OrbitClass.REBOUND in verdicts
            and verdicts <= {OrbitClass.REBOUND, OrbitClass.INDETERMINATE}
        ):
            last_reb = max(a for a, c in classes if c is OrbitClass.REBOUND)
            if all(
                a > last_reb for a, c in classes if c is OrbitClass.INDETERMINATE
            ):
                return last_reb, b2 * (1.0 - 1e-12)
        points *= 2
    raise BracketNotFound(
        f"no Rebound/Crossing transition on ({format_float(beta)}, {format_float(b2)}) "
        f"at {SCAN_POINTS_MAX} scan points"
    )


def _classify_at(params, alpha, rtol, atol, r_max, max_step) -> OrbitClass:
    return _run(
        params, alpha, rtol, atol, r_max, max_step, equilibrium_gate=False
    ).orbit_class


def _ensure_bracket(params, lo, hi, beta, b2, rtol, atol, r_max, max_step):
    """Re-validate a (Rebound, Crossing) bracket under different
    tolerances, widening geometrically if the separatrix moved."""
    width = max(hi - lo, 1e-15 * hi)
    for _ in range(40):
        if _classify_at(params, lo, rtol, atol, r_max, max_step) is OrbitClass.REBOUND:
            break
        lo = max(lo - 4.0 * width, beta * (1.0 + 1e-12))
        width *= 4.0
    else:
        raise BracketNotFound("lower bracket end refuses to classify Rebound")
    width = max(hi - lo, 1e-15 * hi)
    cap = b2 * (1.0 - 1e-12)
    for _ in range(40):
        if _classify_at(params, hi, rtol, atol, r_max, max_step) is OrbitClass.CROSSING:
            break
        if hi >= cap:
            # nothing between here and the equilibrium crosses either
            raise _AlphaSaturated(lo)
        hi = min(hi + 4.0 * width, cap)
        width *= 4.0
    else:
        raise BracketNotFound("upper bracket end refuses to classify Crossing")
    return lo, hi


def _bisect_to_decay(shot, lo: float, hi: float, n: int, what: str):
    """Bisect shot's scalar parameter until an orbit enters the decay box.

    shot(x, box_relax) -> Trajectory; Rebound steers lo up, Crossing
    steers hi down, and both hold for alpha and for the release radius.
    When float resolution runs out before the box is reached, both
    endpoints still shadow the separatrix to the achievable depth, so
    retry them under a geometrically shallower box instead.
    """
    relax = 1.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            relax *= 100.0
            if _decay_box_factor(n) * relax > BOX_RELAX_CAP:
                raise _BoxUnreached(lo, hi)
            for probe in (lo, hi):
                traj = shot(probe, relax)
                if traj.orbit_class is OrbitClass.DECAY:
                    return probe, traj, (lo, hi)
            continue
        traj = shot(mid, 1.0)
        if traj.orbit_class is OrbitClass.DECAY:
            return mid, traj, (lo, hi)
        if traj.orbit_class is OrbitClass.REBOUND:
            lo = mid
        elif traj.orbit_class is OrbitClass.CROSSING:
            hi = mid
        else:
            raise BracketNotFound(
                f"orbit at {what}={format_float(mid)} classified "
                f"{traj.orbit_class.value} during tight bisection"
            )


def _release_lambda(n: int, mu2: float, r0: float) -> float:
    """Growing rate of w'' + (n-1)/r0 w' - mu2 w = 0, friction frozen."""
    nm1 = float(n - 1)
    return 0.5 * (math.sqrt(nm1 * nm1 / (r0 * r0) + 4.0 * mu2) - nm1 / r0)


def _release_ground_state(params, b2, rtol, atol, r_max, max_step) -> Trajectory:
    """Shoot on the release radius when initial height is saturated.

    Near the existence threshold the separatrix height sits within one
    ulp of the equilibrium b2: every representable alpha leaves b2's
    neighborhood early enough that the damping term (n-1)/r still eats
    the whole barrier energy, and the orbit rebounds.  The connecting
    orbit is then indistinguishable from one that waits at b2 and
    departs along the unstable direction at a radius r0, so r0 takes
    over as the shooting parameter: early releases rebound, late ones
    coast over with nearly full energy and cross.  r0 moves the orbit
    linearly rather than exponentially, which restores the steering
    resolution that alpha lost.
    """
    mu2 = -evaluate(fprime_of(params), b2)
    if not mu2 > 0.0:
        raise BracketNotFound("no unstable direction at b2 to release along")
    w0 = RELEASE_OFFSET * b2

    def shot(r0: float, relax: float) -> Trajectory:
        lam = _release_lambda(params.n, mu2, r0)
        return _run(
            params, b2, rtol, atol, r_max, max_step,
            box_relax=relax, equilibrium_gate=False,
            start=(r0, b2 - w0, -lam * w0),
        )

    # half of r_max leaves the decaying tail enough room to reach the
    # box (log(1e8)/sqrt(omega) plus the descent) before the horizon
    lo = min(1.0, 0.01 * r_max)
    hi = 0.5 * r_max
    hi_shot = shot(hi, 1.0)
    if hi_shot.orbit_class is OrbitClass.DECAY:
        return _prepend_equilibrium(
            params, b2, _release_lambda(params.n, mu2, hi), hi_shot, max_step
        )
    if hi_shot.orbit_class is not OrbitClass.CROSSING:
        raise BracketNotFound(
            f"release at r0={format_float(hi)} still loses the barrier "
            "energy; the orbit cannot cross within r_max"
        )
    for _ in range(8):
        if shot(lo, 1.0).orbit_class is OrbitClass.REBOUND:
            break
        lo *= 0.25
    else:
        raise BracketNotFound(
            f"release at r0={format_float(lo)} does not rebound; "
            "no bracket in the release radius"
        )

    try:
        r_star, release, _ = _bisect_to_decay(shot, lo, hi, params.n, "release radius")
    except _BoxUnreached as exc:
        raise BracketNotFound(
            "bisection on the release radius exhausted float resolution "
            f"at ({format_float(exc.lo)}, {format_float(exc.hi)}) without "
            "reaching the decay box"
        ) from None
    lam = _release_lambda(params.n, mu2, r_star)
    return _prepend_equilibrium(params, b2, lam, release, max_step)


def _prepend_equilibrium(params, b2, lam, release: Trajectory, max_step) -> Trajectory:
    """Complete a released orbit back to r = 0 along the unstable mode.

    The prefix w(r) = w0 e^{lam (r - r0)} solves the profile equation
    up to the frozen-friction error (largest near the junction, of
    order w0 (n-1) lam / r0^2, far below the integrator's defect) and
    rounds to the constant b2 for most of the axis, where it is an
    exact equilibrium solution.
    """
    r0 = release.samples[0].r
    w0 = b2 - release.samples[0].u
    prefix = [RadialState(0.0, b2, 0.0)]
    m = max(1, int(math.ceil(r0 / max_step)))
    h = r0 / m
    for i in range(1, m):
        r = i * h
        w = w0 * math.exp(lam * (r - r0))
        if w < 1e-16 * b2:
            prefix.append(RadialState(r, b2, 0.0))
        else:
            prefix.append(RadialState(r, b2 - w, -lam * w))

    # fold the prefix into the energy bookkeeping; analytically E is
    # F(b2) minus w^2 (mu^2 - lam^2)/2, non-increasing from r = 0 on
    max_violation = release.stats.max_energy_violation
    min_energy = release.stats.min_energy
    e_prev = energy(prefix[0], params)
    for s in prefix[1:] + [release.samples[0]]:
        e_here = energy(s, params)
        if e_here < min_energy:
            min_energy = e_here
        jump = (e_here - e_prev) / h
        if jump > max_violation:
            max_violation = jump
        e_prev = e_here

    stats = TrajectoryStats(
        release.stats.steps, release.stats.rejected_steps, min_energy, max_violation
    )
    return Trajectory(
        tuple(prefix) + release.samples,
        release.orbit_class,
        release.terminal_reason,
        stats,
    )


def find_ground_state(params: Params, controls: Controls | None = None) -> GroundState:
    """Locate the unique positive decaying profile.

    Raises NoExistence at or above the threshold.  For n >= 2 the
    separatrix between Rebound and Crossing is scanned and bisected in
    two stages: stage one at the requested tolerances down to
    alpha_tol, stage two at hundredfold tighter tolerances, continuing
    the bisection until a shot actually enters the decay box (the
    bisection iterates sit exponentially close to the separatrix, so
    the orbit tracks it far enough to fall below 1e-8 alpha).  When
    every float height up to b2 rebounds the shooting parameter
    switches to the radius at which the orbit releases from the
    equilibrium; see _release_ground_state.  For n = 1 energy is
    conserved and the ground state is the zero-energy orbit
    alpha* = beta, integrated directly.
    """
    rtol, atol, r_max, max_step, alpha_tol = _resolve(controls, params)
    thr = thresholds(params.p, params.q)
    if not params.omega < thr.omega_crit:
        raise NoExistence(params.omega, thr.omega_crit)
    beta = positive_zeros_F(params)[0]
    b2 = positive_zeros_f(params)[-1]

    tight_rtol = max(rtol * 1e-2, 1e-13)
    tight_atol = atol * 1e-2

    if params.n == 1:
        profile = _run(
            params, beta, tight_rtol, tight_atol, r_max, max_step,
            equilibrium_gate=False,
        )
        if profile.orbit_class is not OrbitClass.DECAY:
            raise BracketNotFound(
                f"n=1 zero-energy orbit classified {profile.orbit_class.value}, not Decay"
            )
        gs_alpha = beta
        bracket = (beta, beta)
    else:
        lo, hi = _scan_bracket(params, beta, b2, rtol, atol, r_max, max_step)
        # stage one: bisect at the requested tolerances down to alpha_tol
        while hi - lo > alpha_tol * hi:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            cls = _classify_at(params, mid, rtol, atol, r_max, max_step)
            if cls is OrbitClass.REBOUND:
                lo = mid
            elif cls is OrbitClass.CROSSING:
                hi = mid
            elif cls is OrbitClass.DECAY:
                break  # already inside the box at these tolerances
            elif cls is OrbitClass.INDETERMINATE and mid > b2 * (1.0 - 1e-6):
                # lingering at b2 past r_max; the bracket check below
                # settles whether anything up there still crosses
                break
            else:
                raise BracketNotFound(
                    f"orbit at alpha={format_float(mid)} classified "
                    f"{cls.value} during bisection"
                )
        # stage two: tighter tolerances shift the numerical separatrix
        # slightly, so re-validate the bracket, then keep bisecting
        # until a shot tracks the separatrix into the decay box
        sat_lo = None
        try:
            lo, hi = _ensure_bracket(
                params, lo, hi, beta, b2, tight_rtol, tight_atol, r_max, max_step
            )
        except _AlphaSaturated as exc:
            sat_lo = exc.lo
        if sat_lo is None:
            def shot(a: float, relax: float) -> Trajectory:
                return _run(
                    params, a, tight_rtol, tight_atol, r_max, max_step,
                    box_relax=relax, equilibrium_gate=False,
                )

            try:
                gs_alpha, profile, bracket = _bisect_to_decay(
                    shot, lo, hi, params.n, "alpha"
                )
            except _BoxUnreached as exc:
                if exc.hi < b2 * (1.0 - 1e-9):
                    raise BracketNotFound(
                        "bisection on alpha exhausted float resolution at "
                        f"({format_float(exc.lo)}, {format_float(exc.hi)}) "
                        "without reaching the decay box"
                    ) from None
                # the endpoints peel off the separatrix too early only
                # when it hugs the equilibrium; release shooting applies
                sat_lo = exc.lo
        if sat_lo is not None:
            profile = _release_ground_state(
                params, b2, tight_rtol, tight_atol, r_max, max_step
            )
            gs_alpha = b2
            bracket = (sat_lo, b2)

    return GroundState(
        alpha=gs_alpha,
        profile=profile,
        bracket=bracket,
        decay_rate=decay_rate(profile, params),
        ode_residual=ode_residual(profile, params),
    )


def count_ground_states(params: Params, scan_resolution: int = 400) -> int:
    """Count Rebound-to-Crossing transitions over a uniform alpha grid
    on (beta, b2); uniqueness predicts exactly one."""
    if params.n < 2:
        raise ValueError("transition counting requires n >= 2 (n = 1 conserves energy)")
    thr = thresholds(params.p, params.q)
    if not params.omega < thr.omega_crit:
        raise NoExistence(params.omega, thr.omega_crit)
    rtol, atol, r_max, max_step, _ = _resolve(None, params)
    beta = positive_zeros_F(params)[0]
    b2 = positive_zeros_f(params)[-1]
    step = (b2 - beta) / scan_resolution
    prev = None
    transitions = 0
    for i in range(scan_resolution):
        cls = _classify_at(params, beta + (i + 0.5) * step, rtol, atol, r_max, max_step)
        if prev is OrbitClass.REBOUND and cls is OrbitClass.CROSSING:
            transitions += 1
        prev = cls
    return transitions


def decay_rate(profile: Trajectory, params: Params) -> float:
    """Exponential rate of the tail, fitted on samples below 1e-3 alpha.

    The linearization at u = 0 gives u ~ e^{-sqrt(omega) r} r^{-(n-1)/2},
    so the fit removes the algebraic factor before taking the
    least-squares slope of the log; with the factor left in, the
    damping bias at n = 3 is of order 1/r over the usable window, which
    is several percent and would swamp the rate itself.
    """
    import numpy as np

    if profile.orbit_class is not OrbitClass.DECAY:
        raise InsufficientTail(
            f"decay rate needs a Decay profile, got {profile.orbit_class.value}"
        )
    alpha = profile.samples[0].u
    half_nm1 = 0.5 * (params.n - 1)
    tail = [(s.r, s.u) for s in profile.samples if 0.0 < s.u < 1e-3 * alpha]
    if len(tail) < 20:
        raise InsufficientTail(f"only {len(tail)} tail samples below 1e-3 alpha")
    rs = np.array([r for r, _ in tail])
    ys = np.array([math.log(u) + half_nm1 * math.log(r) for r, u in tail])
    slope = np.polyfit(rs, ys, 1)[0]
    return -float(slope)


def ode_residual(profile: Trajectory, params: Params) -> float:
    """Max defect of the quintic Hermite reconstruction at step midpoints.

    Each sample interval carries (u, v, a) at both ends, with
    a = v' from the equation itself; the unique quintic matching those
    six values is evaluated at the midpoint and plugged back into the
    ODE.  No re-integration is needed, and the defect converges at the
    same order as the underlying pair.
    """
    omega, p, q, n = params.omega, params.p, params.q, params.n
    nm1 = float(n - 1)

    def fu(u: float) -> float:
        if u >= 0.0:
            return -omega * u + u**p - u**q
        au = -u
        return -omega * u - au**p + au**q

    def accel(r: float, u: float, v: float) -> float:
        if r == 0.0:
            return -fu(u) / n
        return -nm1 / r * v - fu(u)

    worst = 0.0
    s_prev = profile.samples[0]
    a_prev = accel(s_prev.r, s_prev.u, s_prev.v)
    for s in profile.samples[1:]:
        if s.u < 0.0 or s_prev.u < 0.0:
            break
        h = s.r - s_prev.r
        a_here = accel(s.r, s.u, s.v)
        u_mid = (
            0.5 * (s_prev.u + s.u)
            + 0.15625 * h * (s_prev.v - s.v)
            + 0.015625 * h * h * (a_prev + a_here)
        )
        v_mid = (
            1.875 * (s.u - s_prev.u) / h
            - 0.4375 * (s_prev.v + s.v)
            + 0.03125 * h * (a_here - a_prev)
        )
        a_mid = 1.5 * (s.v - s_prev.v) / h - 0.25 * (a_prev + a_here)
        r_mid = s_prev.r + 0.5 * h
        defect = abs(a_mid + nm1 / r_mid * v_mid + fu(u_mid))
        if defect > worst:
            worst = defect
        s_prev, a_prev = s, a_here
    return worst
