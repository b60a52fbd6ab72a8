"""Machine checks of the four sign conditions and their equivalences.

Each condition can be decided two independent ways: by comparing omega
against the closed-form critical frequency (Analytic) or by running the
sign analyzer on the relevant PowerSum (Numeric).  The two routes are
kept separate on purpose; ``verify_theorem`` asserts that they agree
and raises EquivalenceViolation when they do not, which would indicate
an implementation bug rather than a mathematical surprise.

Conditions checked:

    ExistenceF             F(u) > 0 for some u > 0
    UniquenessFtildeSmall  tilde(f')(u) < 0 for all u > 0
    FtildeBig              tilde(f)(u) < 0 for all u > 0
    FPositiveSomewhere     f(u) > 0 for some u > 0

The first is equivalent to omega < omega_crit and to FtildeBig; the
remaining two are mutually equivalent and equivalent to
omega < eta_crit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from ._fmt import format_float
from .nonlinearity import (
    F_of,
    Ftilde_of,
    InvalidParams,
    Params,
    f_of,
    ftilde_of,
    make_params,
    thresholds,
)
from .power_algebra import IndeterminateSign, PowerSum, Verdict, analyze_sign

# Inside this relative distance of the governing threshold a check
# refuses to answer; the strict inequalities are not decidable there.
CHECK_BAND = 1e-9

# verify_theorem requires this much clearance from both thresholds
# before it asserts route agreement.
EXCLUSION_BAND = 1e-6


class Method(Enum):
    ANALYTIC = "Analytic"
    NUMERIC = "Numeric"


class ConditionId(Enum):
    EXISTENCE_F = "ExistenceF"
    UNIQUENESS_FTILDE_SMALL = "UniquenessFtildeSmall"
    FTILDE_BIG = "FtildeBig"
    F_POSITIVE_SOMEWHERE = "FPositiveSomewhere"


class IndeterminateNearThreshold(Exception):
    """omega is too close to the governing threshold to decide.

    Carries the offending frequency, the threshold, and the condition.
    """

    def __init__(self, condition_id: ConditionId, omega: float, threshold: float):
        self.condition_id = condition_id
        self.omega = omega
        self.threshold = threshold
        rel = (omega - threshold) / threshold
        super().__init__(
            f"{condition_id.value}: omega={format_float(omega)} within "
            f"{rel:.3e} relative of threshold {format_float(threshold)}"
        )


class EquivalenceViolation(RuntimeError):
    """Two supposedly equivalent verdicts disagree; implementation bug."""

    def __init__(self, params: Params, left: str, right: str):
        self.params = params
        self.left = left
        self.right = right
        super().__init__(
            f"equivalence violated at omega={params.omega}, p={params.p}, "
            f"q={params.q}: {left} vs {right}"
        )


@dataclass(frozen=True)
class ConditionReport:
    """Verdict for one condition.

    margin is the signed distance omega - threshold for Analytic
    reports (holds iff margin < 0 for the existence-side conditions)
    and the reduced-sum supremum for Numeric reports.  witness, when
    present, is a point where the analyzed function is strictly
    positive: supporting evidence for the "for some u" conditions,
    falsifying evidence for the "for all u" ones.
    """

    condition_id: ConditionId
    holds: bool
    method: Method
    margin: float
    witness: float | None


@dataclass(frozen=True)
class TheoremCheck:
    """All six route verdicts for one parameter set, plus the flag."""

    params: Params
    existence: bool
    uniqueness: bool
    reports: tuple[ConditionReport, ...]
    consistent: bool


@dataclass(frozen=True)
class CorollaryCheck:
    p: float
    q: float
    omega_crit: float
    eta_crit: float
    thresholds_ordered: bool
    implication_held: bool
    contrapositive_held: bool
    samples_checked: int
    samples_skipped: int
    falsifying_omega: float | None

    @property
    def ok(self) -> bool:
        return self.thresholds_ordered and self.implication_held and self.contrapositive_held


def _guard_band(condition_id: ConditionId, omega: float, threshold: float) -> None:
    if abs(omega - threshold) < CHECK_BAND * threshold:
        raise IndeterminateNearThreshold(condition_id, omega, threshold)


def _analytic(condition_id: ConditionId, omega: float, threshold: float, witness: float) -> ConditionReport:
    _guard_band(condition_id, omega, threshold)
    holds = omega < threshold
    return ConditionReport(
        condition_id=condition_id,
        holds=holds,
        method=Method.ANALYTIC,
        margin=omega - threshold,
        witness=witness if holds else None,
    )


def _numeric(
    condition_id: ConditionId,
    ps: PowerSum,
    wanted: Verdict,
    omega: float,
    threshold: float,
) -> ConditionReport:
    _guard_band(condition_id, omega, threshold)
    try:
        sv = analyze_sign(ps)
    except IndeterminateSign as exc:
        raise IndeterminateNearThreshold(condition_id, omega, threshold) from exc
    return ConditionReport(
        condition_id=condition_id,
        holds=sv.verdict is wanted,
        method=Method.NUMERIC,
        margin=sv.sup_value,
        witness=sv.witness,
    )


def check_existence(params: Params, method: Method = Method.ANALYTIC) -> ConditionReport:
    """F positive somewhere, equivalently omega < omega_crit."""
    thr = thresholds(params.p, params.q)
    if method is Method.ANALYTIC:
        return _analytic(ConditionId.EXISTENCE_F, params.omega, thr.omega_crit, thr.u_star_F)
    return _numeric(
        ConditionId.EXISTENCE_F,
        F_of(params),
        Verdict.POSITIVE_SOMEWHERE,
        params.omega,
        thr.omega_crit,
    )


def check_uniqueness(params: Params, method: Method = Method.ANALYTIC) -> ConditionReport:
    """tilde(f') negative everywhere, equivalently omega < eta_crit.

    The Numeric route also runs the f-positivity analyzer and raises
    EquivalenceViolation if the two disagree.
    """
    thr = thresholds(params.p, params.q)
    if method is Method.ANALYTIC:
        return _analytic(
            ConditionId.UNIQUENESS_FTILDE_SMALL, params.omega, thr.eta_crit, thr.u_star_f
        )
    report = _numeric(
        ConditionId.UNIQUENESS_FTILDE_SMALL,
        ftilde_of(params),
        Verdict.NEGATIVE_EVERYWHERE,
        params.omega,
        thr.eta_crit,
    )
    cross = check_f_positive(params, Method.NUMERIC)
    if cross.holds != report.holds:
        raise EquivalenceViolation(
            params,
            f"ftilde negative everywhere = {report.holds}",
            f"f positive somewhere = {cross.holds}",
        )
    return report


def check_f_positive(params: Params, method: Method = Method.NUMERIC) -> ConditionReport:
    """f positive somewhere, equivalently omega < eta_crit."""
    thr = thresholds(params.p, params.q)
    if method is Method.ANALYTIC:
        return _analytic(
            ConditionId.F_POSITIVE_SOMEWHERE, params.omega, thr.eta_crit, thr.u_star_f
        )
    return _numeric(
        ConditionId.F_POSITIVE_SOMEWHERE,
        f_of(params),
        Verdict.POSITIVE_SOMEWHERE,
        params.omega,
        thr.eta_crit,
    )


def check_Ftilde(params: Params) -> ConditionReport:
    """tilde(f) negative everywhere; numeric only, the independent route
    for the existence side of the Theorem."""
    thr = thresholds(params.p, params.q)
    return _numeric(
        ConditionId.FTILDE_BIG,
        Ftilde_of(params),
        Verdict.NEGATIVE_EVERYWHERE,
        params.omega,
        thr.omega_crit,
    )


def verify_theorem(params: Params) -> TheoremCheck:
    """Assert both equivalence chains of the Theorem at one parameter set.

    Existence chain: omega < omega_crit (Analytic) <=> F positive
    somewhere (Numeric) <=> tilde(f) negative everywhere.  Uniqueness
    chain: omega < eta_crit <=> tilde(f') negative everywhere <=> f
    positive somewhere.

    Raises IndeterminateNearThreshold when omega sits within the 1e-6
    relative exclusion band of either threshold (the strict
    inequalities are not decidable by floating-point sampling there)
    and EquivalenceViolation when any two routes disagree.
    """
    thr = thresholds(params.p, params.q)
    for cond, gov in (
        (ConditionId.EXISTENCE_F, thr.omega_crit),
        (ConditionId.UNIQUENESS_FTILDE_SMALL, thr.eta_crit),
    ):
        if abs(params.omega - gov) < EXCLUSION_BAND * gov:
            raise IndeterminateNearThreshold(cond, params.omega, gov)

    ex_a = check_existence(params, Method.ANALYTIC)
    ex_n = check_existence(params, Method.NUMERIC)
    ftb = check_Ftilde(params)
    if not (ex_a.holds == ex_n.holds == ftb.holds):
        raise EquivalenceViolation(
            params,
            f"existence analytic={ex_a.holds}, numeric={ex_n.holds}",
            f"Ftilde negative everywhere={ftb.holds}",
        )

    un_a = check_uniqueness(params, Method.ANALYTIC)
    un_n = check_uniqueness(params, Method.NUMERIC)  # cross-checks f positivity
    fpos = check_f_positive(params, Method.NUMERIC)
    if not (un_a.holds == un_n.holds == fpos.holds):
        raise EquivalenceViolation(
            params,
            f"uniqueness analytic={un_a.holds}, numeric={un_n.holds}",
            f"f positive somewhere={fpos.holds}",
        )

    return TheoremCheck(
        params=params,
        existence=ex_a.holds,
        uniqueness=un_a.holds,
        reports=(ex_a, ex_n, ftb, un_a, un_n, fpos),
        consistent=True,
    )


def verify_corollary(p: float, q: float, omega_samples: Iterable[float]) -> CorollaryCheck:
    """Check that existence implies uniqueness at (p, q).

    Three layers: the threshold ordering omega_crit <= eta_crit, the
    verdict implication on every sampled omega, and the function-level
    contrapositive (f negative everywhere forces F not positive
    anywhere).  Samples inside the check band of either threshold are
    skipped and counted.
    """
    thr = thresholds(p, q)
    ordered = thr.omega_crit <= thr.eta_crit * (1.0 + 1e-15)
    implication = True
    contrapositive = True
    checked = 0
    skipped = 0
    falsifying: float | None = None
    for omega in omega_samples:
        params = make_params(omega, p, q, 1)
        try:
            ex = check_existence(params, Method.ANALYTIC).holds
            un = check_uniqueness(params, Method.ANALYTIC).holds
            f_verdict = analyze_sign(f_of(params)).verdict
            F_verdict = analyze_sign(F_of(params)).verdict
        except (IndeterminateNearThreshold, IndeterminateSign):
            skipped += 1
            continue
        checked += 1
        if ex and not un:
            implication = False
            falsifying = omega
        if f_verdict is Verdict.NEGATIVE_EVERYWHERE and F_verdict is Verdict.POSITIVE_SOMEWHERE:
            contrapositive = False
            falsifying = omega
    return CorollaryCheck(
        p=p,
        q=q,
        omega_crit=thr.omega_crit,
        eta_crit=thr.eta_crit,
        thresholds_ordered=ordered,
        implication_held=implication,
        contrapositive_held=contrapositive,
        samples_checked=checked,
        samples_skipped=skipped,
        falsifying_omega=falsifying,
    )


def sample_lemma_instances(
    n: int,
    seed: int,
    p_range: tuple[float, float] = (1.001, 6.0),
    min_gap: float = 1e-3,
    factors: Sequence[float] = (0.5, 0.99, 1.01, 2.0),
    q_range: tuple[float, float] | None = None,
) -> list[Params]:
    """Seeded random (p, q, omega) instances for equivalence sweeps.

    Exponent pairs are drawn uniformly from the triangle q > p (by
    swapping) with a minimum gap, and omega is placed multiplicatively
    relative to one of the two thresholds, chosen at random, so both
    equivalence chains get exercised on both sides.  q_range defaults
    to p_range.
    """
    rng = random.Random(seed)
    lo, hi = p_range
    q_lo, q_hi = q_range if q_range is not None else p_range
    out: list[Params] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 1000 * (n + 1):
            raise InvalidParams("exponent ranges leave no room for q > p + min_gap")
        a = rng.uniform(lo, hi)
        b = rng.uniform(q_lo, q_hi)
        p, q = (a, b) if a < b else (b, a)
        if q - p < min_gap:
            continue
        thr = thresholds(p, q)
        ref = thr.omega_crit if rng.random() < 0.5 else thr.eta_crit
        omega = rng.choice(list(factors)) * ref
        out.append(make_params(omega, p, q, 3))
    return out


CSV_HEADER = "p,q,omega,omega_crit,eta_crit,existence,uniqueness,consistent"


@dataclass(frozen=True)
class PhaseRow:
    p: float
    q: float
    omega: float
    omega_crit: float
    eta_crit: float
    existence: bool
    uniqueness: bool
    consistent: bool


@dataclass(frozen=True)
class PhaseTable:
    """Grid of threshold comparisons; serializes to deterministic CSV."""

    rows: tuple[PhaseRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        format_float(r.p),
                        format_float(r.q),
                        format_float(r.omega),
                        format_float(r.omega_crit),
                        format_float(r.eta_crit),
                        "true" if r.existence else "false",
                        "true" if r.uniqueness else "false",
                        "true" if r.consistent else "false",
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PhaseTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError("unrecognized phase-table header")
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            if len(cells) != 8:
                raise ValueError(f"malformed row: {ln!r}")
            rows.append(
                PhaseRow(
                    p=float(cells[0]),
                    q=float(cells[1]),
                    omega=float(cells[2]),
                    omega_crit=float(cells[3]),
                    eta_crit=float(cells[4]),
                    existence=cells[5] == "true",
                    uniqueness=cells[6] == "true",
                    consistent=cells[7] == "true",
                )
            )
        return cls(tuple(rows))


def _axis(lo: float, hi: float, count: int) -> list[float]:
    if count == 1:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def sweep(
    p_range: tuple[float, float],
    q_range: tuple[float, float],
    omega_range: tuple[float, float],
    resolution: int | tuple[int, int, int],
) -> PhaseTable:
    """Evaluate threshold verdicts on an inclusive grid.

    resolution is either one count for all three axes or a
    (p, q, omega) triple.  Grid points with q <= p are skipped.  Rows
    appear in row-major (p, q, omega) order.  Verdicts here are plain
    threshold comparisons: total and deterministic, with no
    indeterminate band (a sweep is a map, not a certificate).
    """
    if isinstance(resolution, int):
        res_p = res_q = res_w = resolution
    else:
        res_p, res_q, res_w = resolution
    if min(res_p, res_q, res_w) < 1:
        raise InvalidParams(f"resolution counts must be >= 1, got {resolution!r}")
    for name, (lo, hi) in (("p", p_range), ("q", q_range), ("omega", omega_range)):
        if not (lo <= hi):
            raise InvalidParams(f"{name} range must satisfy lo <= hi, got {lo!r}:{hi!r}")
    if not (p_range[0] > 1.0):
        raise InvalidParams(f"p range must stay above 1, got {p_range!r}")
    if not (q_range[0] > 1.0):
        raise InvalidParams(f"q range must stay above 1, got {q_range!r}")
    if not (omega_range[0] > 0.0):
        raise InvalidParams(f"omega range must be positive, got {omega_range!r}")

    rows = []
    for p in _axis(*p_range, res_p):
        for q in _axis(*q_range, res_q):
            if not q > p:
                continue
            thr = thresholds(p, q)
            for omega in _axis(*omega_range, res_w):
                existence = omega < thr.omega_crit
                uniqueness = omega < thr.eta_crit
                rows.append(
                    PhaseRow(
                        p=p,
                        q=q,
                        omega=omega,
                        omega_crit=thr.omega_crit,
                        eta_crit=thr.eta_crit,
                        existence=existence,
                        uniqueness=uniqueness,
                        consistent=(not existence) or uniqueness,
                    )
                )
    return PhaseTable(tuple(rows))
