"""Solution branches lambda(s) parameterized by the amplitude s = v(0).

A sweep solves the load for every amplitude of a log grid, refines turning
points, extrapolates both tails and supports counting the solutions at a
given load. The (f0, finf) limits of the nonlinearity select one of nine
predicted existence patterns, which verify_case checks against a branch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from matool.bvp import (
    AMPLITUDE_MAX,
    AMPLITUDE_MIN,
    INF,
    LAMBDA_CAP,
    LAMBDA_FLOOR,
    LAMBDA_START,
    POINTS_PER_DECADE,
    NonlinearitySpec,
    amplitude_grid,
    quotient_bounds,
    solution_hygiene,
    solve_lambda_batch,
    threshold,
)
from matool.errors import BranchError, NonlinearityError
from matool.mesh import RadialMesh, RadialProfile, WeightPreset
from matool.stability import stability_condition_check

logger = logging.getLogger(__name__)

CONTINUUM = -1
MIN_BRANCH_POINTS = 10
TAIL_POINTS = 5
TURNING_DEAD_BAND = 1e-7
REFINE_POINTS = 9
REFINE_ROUNDS = 12
REFINE_STOP = 1e-7
VERTICAL_SPREAD = 1e-6
THRESHOLD_MARGIN = 0.02


# =============================================================================
# Branch types
# =============================================================================


@dataclass(frozen=True, eq=False)
class BranchPoint:
    s: float
    lam: float
    sup_norm: float
    profile: RadialProfile = field(repr=False)
    flux: np.ndarray = field(repr=False, default=None)
    principal_eig: float | None = None
    morse_index: int | None = None

    @property
    def stable(self) -> bool | None:
        if self.principal_eig is None:
            return None
        return self.principal_eig > 0


@dataclass(frozen=True)
class TurningPoint:
    s: float
    lam: float
    kind: str  # "max" or "min"


@dataclass(frozen=True)
class TailEstimate:
    """Extrapolated limit of lambda(s) at one end of the branch."""

    value: float
    error: float
    diverges: bool
    last: float


@dataclass(frozen=True)
class SweepFailure:
    s: float
    reason: str


@dataclass(frozen=True, eq=False)
class Branch:
    spec: NonlinearitySpec
    mesh: RadialMesh
    points: tuple[BranchPoint, ...]
    turning_points: tuple[TurningPoint, ...]
    tail_zero: TailEstimate
    tail_inf: TailEstimate
    case_id: str
    failures: tuple[SweepFailure, ...] = ()
    lambda_floor: float = LAMBDA_FLOOR
    lambda_cap: float = LAMBDA_CAP

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def asymptote_zero(self) -> float:
        return INF if self.tail_zero.diverges else self.tail_zero.value

    @property
    def asymptote_inf(self) -> float:
        return INF if self.tail_inf.diverges else self.tail_inf.value

    @property
    def is_vertical(self) -> bool:
        lams = self.lambdas
        return bool(np.ptp(lams) <= VERTICAL_SPREAD * np.mean(lams))

    def __len__(self) -> int:
        return len(self.points)


# =============================================================================
# Sweep
# =============================================================================


def _points_from_solves(solves, hygiene_tol: float, failures: list) -> list[BranchPoint]:
    points = []
    for solve in solves:
        if not solve.success:
            failures.append(SweepFailure(solve.amplitude, solve.error or "unknown failure"))
            continue
        issues = solution_hygiene(solve.shot, hygiene_tol)
        if issues:
            failures.append(SweepFailure(solve.amplitude, "hygiene: " + ", ".join(issues)))
            continue
        shot = solve.shot
        points.append(
            BranchPoint(
                s=shot.amplitude,
                lam=shot.lam,
                sup_norm=float(np.max(np.abs(shot.profile.values))),
                profile=shot.profile,
                flux=shot.flux,
            )
        )
    return points


def _turning_candidates(lams: np.ndarray) -> list[tuple[int, str]]:
    """Indices of interior extrema of lams, ignoring relative changes below the dead band."""
    diffs = np.diff(lams)
    scale = np.maximum(np.abs(lams[:-1]), np.abs(lams[1:]))
    moves = [(i, 1 if d > 0 else -1) for i, d in enumerate(diffs)
             if abs(d) > TURNING_DEAD_BAND * scale[i]]
    found = []
    for (i1, s1), (i2, s2) in zip(moves, moves[1:], strict=False):
        if s1 == s2:
            continue
        window = np.arange(i1 + 1, i2 + 1)
        if s1 > 0:
            found.append((int(window[np.argmax(lams[window])]), "max"))
        else:
            found.append((int(window[np.argmin(lams[window])]), "min"))
    return found


def _vertex(log_s: np.ndarray, lams: np.ndarray) -> tuple[float, float]:
    a, b, c = np.polyfit(log_s, lams, 2)
    if a == 0:
        return float(log_s[1]), float(lams[1])
    x = -b / (2.0 * a)
    x = float(np.clip(x, log_s[0], log_s[-1]))
    return x, float(np.polyval([a, b, c], x))


def _refine_turning_point(
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    s_lo: float,
    s_hi: float,
    kind: str,
    *,
    tol: float,
    bracket: tuple[float, float],
    lambda_cap: float,
    hygiene_tol: float,
    failures: list,
) -> tuple[TurningPoint | None, list[BranchPoint]]:
    pick = np.argmax if kind == "max" else np.argmin
    extra: list[BranchPoint] = []
    best = None
    window: list[BranchPoint] = []
    for _ in range(REFINE_ROUNDS):
        grid = np.geomspace(s_lo, s_hi, REFINE_POINTS)
        solves = solve_lambda_batch(
            grid, spec, mesh, tol=tol, bracket=bracket, lambda_cap=lambda_cap
        )
        points = _points_from_solves(solves, hygiene_tol, failures)
        if len(points) < 3:
            break
        extra.extend(points)
        lams = np.array([p.lam for p in points])
        j = int(np.clip(pick(lams), 1, len(points) - 2))
        window = points[j - 1 : j + 2]
        s_lo, s_hi = window[0].s, window[2].s
        previous, best = best, points[j].lam
        if previous is not None and abs(best - previous) <= REFINE_STOP * abs(best):
            break
    if len(window) < 3:
        return None, extra
    x, lam = _vertex(np.log([p.s for p in window]), np.array([p.lam for p in window]))
    return TurningPoint(s=math.exp(x), lam=lam, kind=kind), extra


def _richardson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Limit of y from increments that are linear in log s, or None if they do not contract."""
    d = np.diff(y)
    if np.any(d == 0) or np.any(np.sign(d) != np.sign(d[-1])):
        return None
    mids = 0.5 * (x[1:] + x[:-1])
    order, _ = np.polyfit(mids, np.log(np.abs(d)), 1)
    rho = math.exp(order * (mids[-1] - mids[-2]))
    if not rho < 1.0:
        return None
    return float(y[-1] + d[-1] * rho / (1.0 - rho))


def extrapolate_tail(amplitudes, values) -> TailEstimate:
    """Richardson extrapolation of a tail ordered toward the limit.

    The increments of lambda are fitted as log|d| = a + q log s, a straight
    line in log s with observed order q. The next increment ratio rho follows
    from q and the last log step, and the limit is the last value plus the
    geometric remainder d rho / (1 - rho). The error bar is the change in the
    estimate when the oldest point is dropped. Increasing tails that do not
    contract diverge; decreasing ones are bounded below by 0.
    """
    x = np.log(np.asarray(amplitudes, dtype=float))
    y = np.asarray(values, dtype=float)
    if x.size != y.size or y.size < 4:
        raise BranchError(f"need at least 4 tail points, got {y.size}")
    last = float(y[-1])
    d = np.diff(y)
    if np.all(np.abs(d) <= 1e-9 * float(np.max(np.abs(y)))):
        return TailEstimate(last, 0.0, False, last)
    full = _richardson(x, y)
    if full is None:
        if y[-1] > y[0]:
            return TailEstimate(INF, math.nan, True, last)
        return TailEstimate(0.0, last, False, last)
    short = _richardson(x[1:], y[1:])
    error = abs(full - short) if short is not None else abs(float(d[-1]))
    return TailEstimate(max(full, 0.0), error, False, last)


def case_id_for(f0: float, finf: float) -> str:
    """Case label i..ix from the limits of f(s)/s^N at 0 and infinity."""

    def kind(x: float) -> str:
        if x == 0:
            return "zero"
        if x == INF:
            return "inf"
        return "pos"

    table = {
        ("pos", "pos"): "i",
        ("pos", "zero"): "ii",
        ("pos", "inf"): "iii",
        ("zero", "pos"): "iv",
        ("zero", "zero"): "v",
        ("zero", "inf"): "vi",
        ("inf", "zero"): "vii",
        ("inf", "pos"): "viii",
        ("inf", "inf"): "ix",
    }
    return table[(kind(f0), kind(finf))]


def sweep(
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    s_grid=None,
    *,
    s_min: float = AMPLITUDE_MIN,
    s_max: float = AMPLITUDE_MAX,
    points_per_decade: int = POINTS_PER_DECADE,
    tol: float = 1e-10,
    lambda_floor: float = LAMBDA_FLOOR,
    lambda_cap: float = LAMBDA_CAP,
    refine: bool = True,
    hygiene_tol: float = 1e-8,
) -> Branch:
    """Solve lambda(s) over an amplitude grid and assemble the branch.

    Failed amplitudes are recorded and skipped. Turning points found on the
    grid are re-swept on progressively narrower local grids.
    """
    grid = (
        amplitude_grid(s_min, s_max, points_per_decade)
        if s_grid is None
        else np.asarray(s_grid, dtype=float)
    )
    if not 0 < lambda_floor < lambda_cap:
        raise ValueError(f"Need 0 < lambda_floor < lambda_cap, got {lambda_floor}, {lambda_cap}")
    bracket = (lambda_floor, max(LAMBDA_START, 10.0 * lambda_floor))
    failures: list[SweepFailure] = []
    solves = solve_lambda_batch(
        grid, spec, mesh, tol=tol, bracket=bracket, lambda_cap=lambda_cap
    )
    points = _points_from_solves(solves, hygiene_tol, failures)
    if len(points) < MIN_BRANCH_POINTS:
        raise BranchError(
            f"only {len(points)} of {grid.size} amplitudes produced solutions "
            f"(need {MIN_BRANCH_POINTS})"
        )

    lams = np.array([p.lam for p in points])
    turning: list[TurningPoint] = []
    extra: list[BranchPoint] = []
    for index, kind in _turning_candidates(lams):
        lo = points[max(index - 1, 0)].s
        hi = points[min(index + 1, len(points) - 1)].s
        if not refine:
            turning.append(TurningPoint(points[index].s, points[index].lam, kind))
            continue
        tp, more = _refine_turning_point(
            spec, mesh, lo, hi, kind,
            tol=tol, bracket=bracket, lambda_cap=lambda_cap, hygiene_tol=hygiene_tol,
            failures=failures,
        )
        extra.extend(more)
        turning.append(tp or TurningPoint(points[index].s, points[index].lam, kind))
        logger.info("turning point (%s) at s=%.6g, lambda=%.8g", kind, turning[-1].s,
                    turning[-1].lam)

    merged: dict[float, BranchPoint] = {p.s: p for p in points}
    for p in extra:
        merged.setdefault(p.s, p)
    ordered = tuple(merged[s] for s in sorted(merged))
    ordered_s = np.array([p.s for p in ordered])
    ordered_lams = np.array([p.lam for p in ordered])

    return Branch(
        spec=spec,
        mesh=mesh,
        points=ordered,
        turning_points=tuple(turning),
        tail_zero=extrapolate_tail(ordered_s[:TAIL_POINTS][::-1], ordered_lams[:TAIL_POINTS][::-1]),
        tail_inf=extrapolate_tail(ordered_s[-TAIL_POINTS:], ordered_lams[-TAIL_POINTS:]),
        case_id=case_id_for(spec.f0, spec.finf),
        failures=tuple(failures),
        lambda_floor=lambda_floor,
        lambda_cap=lambda_cap,
    )


# =============================================================================
# Asymptotes and counting
# =============================================================================


@dataclass(frozen=True)
class TailComparison:
    estimate: TailEstimate
    predicted: float
    agrees: bool


@dataclass(frozen=True)
class AsymptoteReport:
    zero: TailComparison
    inf: TailComparison

    @property
    def agrees(self) -> bool:
        return self.zero.agrees and self.inf.agrees


def _compare_tail(estimate: TailEstimate, predicted: float, rel_tol: float) -> TailComparison:
    if predicted == INF:
        agrees = estimate.diverges
    elif estimate.diverges:
        agrees = False
    elif predicted == 0:
        agrees = estimate.value <= 0.5 * abs(estimate.last) + estimate.error
    else:
        agrees = abs(estimate.value - predicted) <= rel_tol * predicted + estimate.error
    return TailComparison(estimate, predicted, bool(agrees))


def estimate_asymptotes(
    branch: Branch,
    spec: NonlinearitySpec,
    lambda1: float,
    rel_tol: float = 1e-3,
) -> AsymptoteReport:
    """Compare the extrapolated tails with lambda1 f0^(-1/N) and lambda1 finf^(-1/N)."""
    if len(branch.points) < 2 * TAIL_POINTS:
        raise BranchError(
            f"need {TAIL_POINTS} points per tail, branch has {len(branch.points)} points"
        )
    return AsymptoteReport(
        zero=_compare_tail(branch.tail_zero, threshold(lambda1, spec.f0, spec.N), rel_tol),
        inf=_compare_tail(branch.tail_inf, threshold(lambda1, spec.finf, spec.N), rel_tol),
    )


def _graph_vertices(branch: Branch) -> tuple[np.ndarray, np.ndarray]:
    s = list(branch.amplitudes)
    lam = list(branch.lambdas)
    for tp in branch.turning_points:
        s.append(tp.s)
        lam.append(tp.lam)
    order = np.argsort(s, kind="stable")
    return np.asarray(s)[order], np.asarray(lam)[order]


def _check_range(branch: Branch, lam: float) -> None:
    if not (lam > 0 and branch.lambda_floor <= lam <= branch.lambda_cap):
        raise BranchError(
            f"lambda={lam:g} outside swept range [{branch.lambda_floor:g}, {branch.lambda_cap:g}]"
        )


def locate_solutions(branch: Branch, lam: float) -> list[float]:
    """Amplitudes where the piecewise-linear graph of lambda(s) meets the load lam."""
    _check_range(branch, lam)
    s, lams = _graph_vertices(branch)
    shifted = lams - lam
    shifted[shifted == 0] = 1e-300
    crossings = np.flatnonzero(np.sign(shifted[:-1]) != np.sign(shifted[1:]))
    roots = []
    for i in crossings:
        t = shifted[i] / (shifted[i] - shifted[i + 1])
        roots.append(float(math.exp(math.log(s[i]) + t * math.log(s[i + 1] / s[i]))))
    return roots


def count_solutions(branch: Branch, lam: float) -> int:
    """Number of solutions at load lam, or CONTINUUM on a vertical branch at its load."""
    _check_range(branch, lam)
    if branch.is_vertical:
        level = float(np.mean(branch.lambdas))
        return CONTINUUM if abs(lam - level) <= 1e-5 * level else 0
    return len(locate_solutions(branch, lam))


# =============================================================================
# Case classification
# =============================================================================


@dataclass(frozen=True)
class ExistenceInterval:
    """Open load interval with a solution-count claim; exact=True with count 0 is nonexistence.

    `label` names the statement the claim comes from, e.g. `ii.existence` or
    `ix.none-above-max`, so a failed probe can be traced back to it.
    """

    lo: float
    hi: float
    min_count: int
    exact: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"Interval needs lo < hi, got ({self.lo}, {self.hi})")

    def contains(self, lam: float) -> bool:
        return self.lo < lam < self.hi

    def describe(self) -> str:
        claim = f"exactly {self.min_count}" if self.exact else f">= {self.min_count}"
        text = f"({self.lo:.6g}, {self.hi:.6g}): {claim}"
        return f"{text}  ({self.label})" if self.label else text


@dataclass(frozen=True)
class CasePrediction:
    case_id: str
    intervals: tuple[ExistenceInterval, ...]
    source: str
    threshold_kind: str | None = None
    continuum_at: float | None = None
    monotone: bool = False

    @property
    def label(self) -> str:
        """Statement label of the prediction as a whole."""
        if self.continuum_at is not None:
            return "homogeneous.continuum"
        return f"{self.case_id}.monotone" if self.monotone else f"{self.case_id}.existence"

    def with_threshold(self, value: float) -> CasePrediction:
        """Fill the intervals of the threshold cases (v, ix) from a turning-point load."""
        case = self.case_id
        if self.threshold_kind == "min":
            intervals = (
                ExistenceInterval(0.0, value, 0, exact=True, label=f"{case}.none-below-min"),
                ExistenceInterval(value, INF, 2, label=f"{case}.two-above-min"),
            )
        elif self.threshold_kind == "max":
            intervals = (
                ExistenceInterval(0.0, value, 2, label=f"{case}.two-below-max"),
                ExistenceInterval(value, INF, 0, exact=True, label=f"{case}.none-above-max"),
            )
        else:
            return self
        return CasePrediction(
            self.case_id, intervals, self.source, self.threshold_kind, None, self.monotone
        )

    def thresholds(self) -> list[float]:
        ends = {x for iv in self.intervals for x in (iv.lo, iv.hi)}
        return sorted(x for x in ends if 0 < x < INF)


CASE_SOURCES = {
    "i": "case i: solutions between lambda1 finf^(-1/N) and lambda1 f0^(-1/N)",
    "ii": "case ii: solutions for every lambda above lambda1 f0^(-1/N)",
    "iii": "case iii: solutions for every lambda below lambda1 f0^(-1/N)",
    "iv": "case iv: solutions for every lambda above lambda1 finf^(-1/N)",
    "v": "case v: at least two solutions above the minimum load lambda_*",
    "vi": "case vi: solutions for every lambda",
    "vii": "case vii: solutions for every lambda",
    "viii": "case viii: solutions for every lambda below lambda1 finf^(-1/N)",
    "ix": "case ix: at least two solutions below the maximum load lambda*",
}
MONOTONE_SOURCE = "decreasing f(s)/s^N: exactly one stable solution, none outside"


def classify_case(spec: NonlinearitySpec, lambda1: float) -> CasePrediction:
    """Predicted existence pattern for the (f0, finf) class of spec."""
    if spec.f0 is None or spec.finf is None:
        raise ValueError("Nonlinearity must declare f0 and finf")
    case = case_id_for(spec.f0, spec.finf)
    t0 = threshold(lambda1, spec.f0, spec.N)
    tinf = threshold(lambda1, spec.finf, spec.N)

    if spec.homogeneous_coefficient is not None:
        return CasePrediction(
            case, (), "homogeneous f: continuum at lambda1 c^(-1/N)", continuum_at=t0
        )

    try:
        monotone = stability_condition_check(spec).holds
    except NonlinearityError:
        # f overflows before the sampled range ends; no monotone claim.
        monotone = False
    if case in ("i", "ii") and monotone and t0 < tinf:
        intervals = [
            ExistenceInterval(0.0, t0, 0, exact=True, label=f"{case}.none-below"),
            ExistenceInterval(t0, tinf, 1, exact=True, label=f"{case}.unique"),
        ]
        if tinf < INF:
            intervals.append(
                ExistenceInterval(tinf, INF, 0, exact=True, label=f"{case}.none-above")
            )
        return CasePrediction(
            case, tuple(intervals), f"{CASE_SOURCES[case]}; {MONOTONE_SOURCE}", monotone=True
        )

    if case == "v":
        return CasePrediction(case, (), CASE_SOURCES[case], threshold_kind="min")
    if case == "ix":
        return CasePrediction(case, (), CASE_SOURCES[case], threshold_kind="max")

    spans = {
        "i": (min(t0, tinf), max(t0, tinf)),
        "ii": (t0, INF),
        "iii": (0.0, t0),
        "iv": (tinf, INF),
        "vi": (0.0, INF),
        "vii": (0.0, INF),
        "viii": (0.0, tinf),
    }
    lo, hi = spans[case]
    intervals = (ExistenceInterval(lo, hi, 1, label=f"{case}.existence"),) if lo < hi else ()
    return CasePrediction(case, intervals, CASE_SOURCES[case], monotone=monotone)


@dataclass(frozen=True)
class ProbeResult:
    lam: float
    expected: str
    count: int | None
    passed: bool
    skipped: bool
    label: str
    note: str = ""

    def describe(self) -> str:
        """Failure line naming the statement label and the probe load."""
        got = "continuum" if self.count == CONTINUUM else self.count
        text = f"{self.label} at lambda={self.lam:.6g}: expected {self.expected}, got {got}"
        return f"{text} {self.note}".strip()


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    entries: tuple[ProbeResult, ...]
    threshold: float | None = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[ProbeResult]:
        return [e for e in self.entries if not e.passed]

    @property
    def failure_messages(self) -> list[str]:
        return [e.describe() for e in self.failures]


def _branch_threshold(branch: Branch, kind: str) -> float | None:
    loads = [tp.lam for tp in branch.turning_points if tp.kind == kind]
    if not loads:
        return None
    return max(loads) if kind == "max" else min(loads)


def default_probes(branch: Branch, prediction: CasePrediction, lambda1: float) -> list[float]:
    """Loads on both sides of every threshold, plus interior points."""
    anchors = list(prediction.thresholds())
    if prediction.threshold_kind:
        value = _branch_threshold(branch, prediction.threshold_kind)
        if value is not None:
            anchors.append(value)
    if prediction.continuum_at is not None:
        return [prediction.continuum_at, 0.5 * prediction.continuum_at]
    if not anchors:
        anchors = [lambda1]
    probes = set()
    for a in anchors:
        probes.update({0.5 * a, 0.9 * a, 1.1 * a, 2.0 * a})
    return sorted(p for p in probes if branch.lambda_floor <= p <= branch.lambda_cap)


def verify_case(branch: Branch, prediction: CasePrediction, probes) -> CaseReport:
    """Check solution counts of a branch against a prediction at each probe load.

    Probes within 2% of a threshold are skipped; probes outside every
    predicted interval carry no claim and are skipped too. Each entry carries
    the label of the interval it was judged against.
    """
    entries: list[ProbeResult] = []
    value = None
    if prediction.threshold_kind:
        value = _branch_threshold(branch, prediction.threshold_kind)
        if value is None:
            entries.append(
                ProbeResult(math.nan, f"a turning point ({prediction.threshold_kind})", None,
                            False, False, prediction.label, "no turning point on the branch")
            )
            return CaseReport(prediction.case_id, tuple(entries))
        prediction = prediction.with_threshold(value)

    for lam in probes:
        lam = float(lam)
        interval = next((iv for iv in prediction.intervals if iv.contains(lam)), None)
        label = interval.label if interval is not None else prediction.label
        try:
            count = count_solutions(branch, lam)
        except BranchError as e:
            entries.append(ProbeResult(lam, "-", None, False, False, label, str(e)))
            continue

        if prediction.continuum_at is not None:
            at_level = abs(lam - prediction.continuum_at) <= 1e-5 * prediction.continuum_at
            expected = CONTINUUM if at_level else 0
            entries.append(
                ProbeResult(lam, "continuum" if at_level else "0", count, count == expected,
                            False, label)
            )
            continue

        near = [t for t in prediction.thresholds() if abs(lam - t) <= THRESHOLD_MARGIN * t]
        if near:
            entries.append(ProbeResult(lam, "-", count, True, True, label,
                                       f"within {THRESHOLD_MARGIN:.0%} of threshold {near[0]:.6g}"))
            continue
        if interval is None:
            entries.append(ProbeResult(lam, "-", count, True, True, label,
                                       "no prediction at this load"))
            continue
        if interval.exact:
            passed = count == interval.min_count
            expected = f"{interval.min_count}"
        else:
            passed = count >= interval.min_count
            expected = f">= {interval.min_count}"
        entries.append(ProbeResult(lam, expected, count, passed, False, label))

    return CaseReport(prediction.case_id, tuple(entries), threshold=value)


# =============================================================================
# Scaling and explicit bounds
# =============================================================================


def scale_to_ball(lam: float, radius: float, weight: WeightPreset | None = None) -> float:
    """Unit-ball load equivalent to load lam on the ball of the given radius."""
    if not radius > 0:
        raise ValueError(f"Radius must be positive, got {radius}")
    if weight is not None and not weight.is_constant:
        raise ValueError(f"Scaling to a ball needs a constant weight, got {weight.label()}")
    return lam * radius**2


def equivalent_ball_radius(lam: float) -> float:
    """Radius sqrt(lam) on which the unit-load problem is equivalent to load lam on B_1."""
    if not lam > 0:
        raise ValueError(f"Load must be positive, got {lam}")
    return math.sqrt(lam)


@dataclass(frozen=True)
class NonexistenceBounds:
    """Comparison bounds: no solution below floor or above ceiling."""

    quotient_inf: float
    quotient_sup: float
    floor: float
    ceiling: float
    lambda_min: float
    lambda_max: float

    @property
    def floor_holds(self) -> bool:
        return self.lambda_min >= self.floor * (1.0 - 1e-6)

    @property
    def ceiling_holds(self) -> bool:
        return self.lambda_max <= self.ceiling * (1.0 + 1e-6)


def nonexistence_bounds(branch: Branch, lambda1: float) -> NonexistenceBounds:
    """Bounds from comparing with the eigenproblem: lambda1 sup(f/s^N)^(-1/N) and lambda1 inf(f/s^N)^(-1/N)."""
    lower, upper = quotient_bounds(branch.spec)
    lams = branch.lambdas
    return NonexistenceBounds(
        quotient_inf=lower,
        quotient_sup=upper,
        floor=threshold(lambda1, upper, branch.spec.N),
        ceiling=threshold(lambda1, lower, branch.spec.N),
        lambda_min=float(lams.min()),
        lambda_max=float(lams.max()),
    )
