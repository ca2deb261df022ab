"""
matool: radial Monge-Ampere shooting, continuation and classification.

Usage:
    matool init                       # Write .matool.yml
    matool eigen                      # lambda_1 / mu_1 by shooting and Rayleigh quotient
    matool mu-scan                    # mu_1(p) over numerics.p_grid
    matool solve --lambda 0.5         # Every positive solution at one load
    matool solve --amplitude 1 10     # The load for given amplitudes
    matool branch                     # Sweep lambda(s), write CSV/JSON and SVG
    matool cases                      # Classify (f0, finf) and check solution counts
    matool stability                  # Linearized eigenvalues and Morse indices
    matool sturm                      # Randomized Sturm comparison suite
    matool setlimits --example21      # Upper/lower limits of an interval-set sequence

Global options:
    --config PATH  --out DIR  --seed N  --set section.key=value  -v
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from matool import __version__
from matool.branch import (
    Branch,
    CasePrediction,
    CaseReport,
    default_probes,
    estimate_asymptotes,
    nonexistence_bounds,
    sweep,
    verify_case,
)
from matool.branch import classify_case as predict_case
from matool.bvp import (
    NonlinearitySpec,
    amplitude_grid,
    make_nonlinearity,
    solution_hygiene,
    solve_amplitudes_for_lambda,
    solve_lambda_for_amplitude,
)
from matool.compare import SturmSuiteReport, sturm_suite
from matool.config import CONFIG_TEMPLATE, RunConfig
from matool.eigen import Eigenpair, Mu1Scan, eig_rayleigh, eig_shoot, lambda1, mu1_scan
from matool.errors import BracketError, MatoolError
from matool.mesh import RadialMesh, build_mesh
from matool.operators import fixed_point_check
from matool.report import RunReport, emit_branch_csv, emit_branch_json, emit_branch_svg
from matool.setlim import (
    TWO_GAP_FAMILIES,
    IntervalSet,
    SetSequence,
    components,
    is_unbounded,
    liminf_sets,
    limsup_sets,
    parse_sequence,
)
from matool.stability import (
    ConditionReport,
    MonotonicityReport,
    annotate_stability,
    branch_monotonicity,
    stability_condition_check,
)

console = Console()
logger = logging.getLogger("matool")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

SCAN_JUMP_LIMIT = 0.05
# Principal eigenvalues this close to zero sit at turning points; their sign is not resolved.
MISMATCH_FLOOR = 1e-6
# Relative sup-norm distance allowed between a shot and its Picard fixed point.
FIXED_POINT_AGREEMENT = 1e-3


# =============================================================================
# CLI Result Types (for testability)
# =============================================================================


@dataclass
class InitResult:
    """Result of init command."""

    success: bool
    config_path: Path | None = None
    error: str | None = None
    already_exists: bool = False


@dataclass
class EigenResult:
    p: float
    shooting: Eigenpair
    rayleigh: Eigenpair
    gap: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tolerance and self.rayleigh.converged


@dataclass
class ScanResult:
    scan: Mu1Scan
    max_relative_jump: float

    @property
    def passed(self) -> bool:
        return self.max_relative_jump < SCAN_JUMP_LIMIT


@dataclass
class SolveRow:
    s: float
    lam: float | None
    terminal: float | None = None
    issues: list[str] = field(default_factory=list)
    error: str | None = None
    fixed_point_gap: float | None = None


@dataclass
class SolveResult:
    rows: list[SolveRow]

    @property
    def passed(self) -> bool:
        return all(r.error is None and not r.issues for r in self.rows)


@dataclass
class BranchResult:
    branch: Branch
    lambda1: float
    table_path: Path | None = None
    svg_path: Path | None = None
    asymptotes_agree: bool | None = None
    bounds_hold: bool = True


@dataclass
class CasesResult:
    prediction: CasePrediction
    report: CaseReport
    branch: Branch
    lambda1: float


@dataclass
class StabilityResult:
    branch: Branch
    condition: ConditionReport
    monotonicity: MonotonicityReport
    unstable: int
    mismatches: list[float]

    @property
    def passed(self) -> bool:
        if self.mismatches:
            return False
        if self.condition.holds:
            return self.unstable == 0 and self.monotonicity.passed
        return True


@dataclass
class SetLimitResult:
    sequence: SetSequence
    limsup: IntervalSet
    liminf: IntervalSet

    @property
    def nested(self) -> bool:
        return self.liminf.issubset(self.limsup)


# =============================================================================
# CLI Logic Functions (testable, no console output)
# =============================================================================


def init_config(config_path: Path, force: bool = False) -> InitResult:
    """Create config file. Returns result without console output."""
    if config_path.exists() and not force:
        return InitResult(success=False, config_path=config_path, already_exists=True)
    try:
        config_path.write_text(CONFIG_TEMPLATE)
    except OSError as e:
        return InitResult(success=False, config_path=config_path, error=str(e))
    return InitResult(success=True, config_path=config_path)


def build_problem_mesh(config: RunConfig) -> RadialMesh:
    problem, numerics = config.problem, config.numerics
    return build_mesh(
        numerics.mesh_n,
        problem.R,
        problem.a_preset,
        numerics.grading,
        gamma=problem.gamma,
    )


def build_spec(config: RunConfig) -> NonlinearitySpec:
    return make_nonlinearity(config.problem.f_preset, config.problem.N, **config.problem.f_params)


def run_eigen(config: RunConfig, p: float | None = None) -> EigenResult:
    """mu_1(p) by both methods; p defaults to N + 1, which gives lambda_1."""
    p = config.problem.exponent if p is None else p
    mesh = build_problem_mesh(config)
    shot = eig_shoot(p, mesh, tol=config.numerics.tol_bisect)
    ray = eig_rayleigh(p, mesh)
    gap = abs(shot.mu1 - ray.mu1) / shot.mu1
    return EigenResult(p, shot, ray, gap, config.numerics.tol_eigen)


def run_mu_scan(config: RunConfig) -> ScanResult:
    scan = mu1_scan(config.numerics.p_grid, build_problem_mesh(config))
    values = [mu for _, mu in scan.rows]
    jumps = [abs(b - a) / min(a, b) for a, b in zip(values, values[1:], strict=False)]
    return ScanResult(scan, max(jumps, default=0.0))


def run_solve(
    config: RunConfig,
    lam: float | None = None,
    amplitudes: list[float] | None = None,
) -> SolveResult:
    """Solutions at one load, or the load for each amplitude, each checked against its Picard fixed point."""
    if (lam is None) == (amplitudes is None):
        raise ValueError("Give exactly one of a load or a list of amplitudes")
    spec = build_spec(config)
    mesh = build_problem_mesh(config)
    numerics = config.numerics

    def checked_row(shot) -> SolveRow:
        issues = solution_hygiene(shot)
        check = fixed_point_check(spec, mesh, shot.lam, shot.profile, tol=numerics.tol_picard)
        gap = check.gap if check.converged else None
        if gap is not None and gap > FIXED_POINT_AGREEMENT:
            issues.append(f"Picard fixed point differs from the shot by {gap:.3g}")
        return SolveRow(shot.amplitude, shot.lam, shot.terminal, issues, fixed_point_gap=gap)

    rows = []
    if lam is not None:
        grid = amplitude_grid(numerics.s_min, numerics.s_max, numerics.points_per_decade)
        for shot in solve_amplitudes_for_lambda(lam, spec, mesh, grid, tol=numerics.tol_bisect):
            rows.append(checked_row(shot))
        return SolveResult(rows)
    for s in amplitudes:
        try:
            _, shot = solve_lambda_for_amplitude(
                s, spec, mesh, tol=numerics.tol_bisect, lambda_cap=numerics.lambda_cap
            )
        except BracketError as e:
            rows.append(SolveRow(s, None, error=str(e)))
            continue
        rows.append(checked_row(shot))
    return SolveResult(rows)


def _sweep(config: RunConfig, spec: NonlinearitySpec, mesh: RadialMesh) -> Branch:
    numerics = config.numerics
    return sweep(
        spec,
        mesh,
        s_min=numerics.s_min,
        s_max=numerics.s_max,
        points_per_decade=numerics.points_per_decade,
        tol=numerics.tol_bisect,
        lambda_floor=numerics.lambda_floor,
        lambda_cap=numerics.lambda_cap,
    )


def _emit_branch(config: RunConfig, branch: Branch, lam1: float) -> tuple[Path, Path | None]:
    out_dir = Path(config.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.output.format == "json":
        table = emit_branch_json(branch, out_dir / "branch.json")
    else:
        table = emit_branch_csv(branch, out_dir / "branch.csv")
    svg = emit_branch_svg(branch, out_dir / "branch.svg", lam1) if config.output.svg else None
    return table, svg


def run_branch(config: RunConfig, with_stability: bool = False, emit: bool = True) -> BranchResult:
    """Sweep the branch, compare its tails with the bifurcation loads and write artifacts."""
    spec = build_spec(config)
    mesh = build_problem_mesh(config)
    lam1 = lambda1(spec.N, mesh, config.numerics.tol_eigen)
    branch = _sweep(config, spec, mesh)
    if with_stability:
        branch = annotate_stability(branch)
    asymptotes = estimate_asymptotes(branch, spec, lam1)
    bounds = nonexistence_bounds(branch, lam1)
    result = BranchResult(
        branch,
        lam1,
        asymptotes_agree=asymptotes.agrees,
        bounds_hold=bounds.floor_holds and bounds.ceiling_holds,
    )
    if emit:
        result.table_path, result.svg_path = _emit_branch(config, branch, lam1)
    return result


def run_cases(config: RunConfig) -> CasesResult:
    """Predict the existence pattern from (f0, finf) and check it against a sweep."""
    spec = build_spec(config)
    mesh = build_problem_mesh(config)
    lam1 = lambda1(spec.N, mesh, config.numerics.tol_eigen)
    prediction = predict_case(spec, lam1)
    branch = _sweep(config, spec, mesh)
    probes = config.numerics.probes or default_probes(branch, prediction, lam1)
    report = verify_case(branch, prediction, probes)
    return CasesResult(prediction, report, branch, lam1)


def run_stability(config: RunConfig) -> StabilityResult:
    spec = build_spec(config)
    mesh = build_problem_mesh(config)
    branch = annotate_stability(_sweep(config, spec, mesh))
    condition = stability_condition_check(spec, s_max=config.numerics.s_max)
    mismatches = [
        p.s for p in branch.points
        if p.principal_eig is not None
        and abs(p.principal_eig) > MISMATCH_FLOOR
        and (p.morse_index == 0) != (p.principal_eig > 0)
    ]
    unstable = sum(1 for p in branch.points if p.morse_index)
    return StabilityResult(branch, condition, branch_monotonicity(branch), unstable, mismatches)


def run_sturm(config: RunConfig, trials: int | None = None) -> SturmSuiteReport:
    return sturm_suite(
        build_problem_mesh(config),
        config.problem.N,
        trials or config.numerics.sturm_trials,
        config.output.seed,
    )


def run_setlimits(config: RunConfig, sequence=None) -> SetLimitResult:
    settings = config.setlim
    terms = parse_sequence(settings.sequence if sequence is None else sequence, settings.terms)
    seq = SetSequence(tuple(terms), settings.epsilon, settings.window)
    return SetLimitResult(seq, limsup_sets(seq), liminf_sets(seq))


# =============================================================================
# Commands
# =============================================================================


def load_config(args: argparse.Namespace, solver: bool = True) -> RunConfig:
    config = RunConfig.load(args.config).apply_overrides(args.set or [])
    if args.out is not None:
        config.output.out_dir = str(args.out)
    if args.seed is not None:
        config.output.seed = args.seed
    return config.validate(solver=solver)


def _finish(
    args: argparse.Namespace,
    config: RunConfig,
    results: dict,
    passed: bool | None,
    failures: list[str] | None = None,
) -> int:
    report = RunReport(
        command=args.command,
        config=config.to_dict(),
        results=results,
        passed=passed,
        failures=failures or [],
        elapsed_seconds=round(time.perf_counter() - args.started, 3),
    )
    path = report.write(Path(config.output.out_dir))
    console.print(f"[dim]Report: {path}[/dim]")
    if passed is False:
        console.print("[red]Verification failed[/red]")
        return EXIT_FAILED
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    """Create .matool.yml config file."""
    config_path = args.config or Path(".matool.yml")
    result = init_config(config_path, force=args.force)

    if result.already_exists:
        console.print("[yellow]Config file already exists![/yellow]")
        console.print("Use --force to overwrite.")
        return EXIT_ERROR
    if not result.success:
        console.print(f"[red]{result.error}[/red]")
        return EXIT_ERROR

    console.print(f"[green]Created {result.config_path}[/green]")
    console.print("\nNext steps:")
    console.print("  1. Pick a nonlinearity under problem.f_preset")
    console.print("  2. Run: matool eigen, then matool branch")
    return EXIT_OK


def cmd_eigen(args: argparse.Namespace) -> int:
    """Principal eigenvalue by shooting and by the Rayleigh quotient."""
    config = load_config(args)
    result = run_eigen(config, args.p)

    table = Table(title=f"mu_1(p={result.p:g}), N={config.problem.N}")
    table.add_column("Method")
    table.add_column("mu_1", justify="right")
    table.add_column("Residual", justify="right")
    for pair in (result.shooting, result.rayleigh):
        table.add_row(pair.method, f"{pair.mu1:.10f}", f"{pair.residual:.2e}")
    console.print(table)
    color = "green" if result.passed else "red"
    console.print(f"[{color}]Relative gap: {result.gap:.2e} (tolerance {result.tolerance:g})[/{color}]")

    return _finish(
        args,
        config,
        {"p": result.p, "shooting": result.shooting.mu1, "rayleigh": result.rayleigh.mu1,
         "gap": result.gap, "rayleigh_iterations": result.rayleigh.iterations},
        result.passed,
        [] if result.passed else [f"methods disagree: gap {result.gap:.2e}"],
    )


def cmd_mu_scan(args: argparse.Namespace) -> int:
    """mu_1 over the exponent grid."""
    config = load_config(args)
    result = run_mu_scan(config)

    table = Table(title="mu_1(p)")
    table.add_column("p", justify="right")
    table.add_column("mu_1", justify="right")
    for p, mu in result.scan.rows:
        table.add_row(f"{p:g}", f"{mu:.10f}")
    console.print(table)
    console.print(f"  Largest step: {result.scan.modulus:.4g} "
                  f"({result.max_relative_jump:.2%} relative)")
    return _finish(
        args,
        config,
        {"rows": result.scan.rows, "modulus": result.scan.modulus,
         "max_relative_jump": result.max_relative_jump},
        result.passed,
        [] if result.passed else [f"relative jump {result.max_relative_jump:.3g} >= 0.05"],
    )


def cmd_solve(args: argparse.Namespace) -> int:
    """Solve for one load or for given amplitudes."""
    config = load_config(args)
    result = run_solve(config, lam=args.lam, amplitudes=args.amplitude)

    table = Table(title=f"Solutions ({build_spec(config).label()}, N={config.problem.N})")
    table.add_column("s", justify="right")
    table.add_column("lambda", justify="right")
    table.add_column("v(R)", justify="right")
    table.add_column("Picard gap", justify="right")
    table.add_column("Notes")
    for row in result.rows:
        notes = row.error or ", ".join(row.issues) or "[green]ok[/green]"
        lam = "-" if row.lam is None else f"{row.lam:.10g}"
        terminal = "-" if row.terminal is None else f"{row.terminal:.2e}"
        gap = "-" if row.fixed_point_gap is None else f"{row.fixed_point_gap:.1e}"
        table.add_row(f"{row.s:.8g}", lam, terminal, gap, notes)
    console.print(table)
    if not result.rows:
        console.print("[yellow]No solutions in the amplitude range[/yellow]")
    return _finish(
        args,
        config,
        {"rows": result.rows},
        result.passed,
        [f"s={r.s:g}: {r.error or ', '.join(r.issues)}" for r in result.rows
         if r.error or r.issues],
    )


def _print_branch_summary(branch: Branch) -> None:
    console.print(f"\n[bold]Branch[/bold] {branch.spec.label()}, N={branch.spec.N}, "
                  f"case {branch.case_id}")
    console.print(f"  Points: {len(branch)} ({len(branch.failures)} amplitudes failed)")
    console.print(f"  lambda range: [{branch.lambdas.min():.8g}, {branch.lambdas.max():.8g}]")
    console.print(f"  lambda as s -> 0: {branch.asymptote_zero:.8g}")
    console.print(f"  lambda as s -> inf: {branch.asymptote_inf:.8g}")
    for tp in branch.turning_points:
        console.print(f"  [cyan]Turning point ({tp.kind}):[/cyan] lambda={tp.lam:.8g} at s={tp.s:.6g}")


def cmd_branch(args: argparse.Namespace) -> int:
    """Sweep the solution branch and write its table and diagram."""
    config = load_config(args)
    if args.no_svg:
        config.output.svg = False
    result = run_branch(config, with_stability=args.stability)
    _print_branch_summary(result.branch)
    console.print(f"  lambda_1: {result.lambda1:.10g}")
    console.print(f"  [dim]Table: {result.table_path}[/dim]")
    if result.svg_path:
        console.print(f"  [dim]Diagram: {result.svg_path}[/dim]")

    failures = []
    if not result.asymptotes_agree:
        failures.append("branch tails do not match lambda_1 f0^(-1/N) and lambda_1 finf^(-1/N)")
    if not result.bounds_hold:
        failures.append("branch leaves the comparison bounds")
    for message in failures:
        console.print(f"  [yellow]{message}[/yellow]")
    branch = result.branch
    return _finish(
        args,
        config,
        {"lambda1": result.lambda1, "case": branch.case_id, "points": len(branch),
         "asymptote_zero": branch.asymptote_zero, "asymptote_inf": branch.asymptote_inf,
         "turning_points": branch.turning_points, "failures": branch.failures},
        not failures,
        failures,
    )


def cmd_cases(args: argparse.Namespace) -> int:
    """Classify the nonlinearity and verify the predicted solution counts."""
    config = load_config(args)
    result = run_cases(config)
    prediction, report = result.prediction, result.report

    console.print(f"\n[bold]{prediction.source}[/bold] [dim]({prediction.label})[/dim]")
    for interval in prediction.intervals:
        console.print(f"  {interval.describe()}")
    if prediction.continuum_at is not None:
        console.print(f"  continuum of solutions at lambda={prediction.continuum_at:.8g}")
    if report.threshold is not None:
        console.print(f"  threshold from the branch: {report.threshold:.8g}")

    table = Table(title="Probes")
    table.add_column("lambda", justify="right")
    table.add_column("Expected")
    table.add_column("Count", justify="right")
    table.add_column("Result")
    table.add_column("Statement")
    for entry in report.entries:
        if entry.skipped:
            verdict = f"[dim]skipped ({entry.note})[/dim]"
        elif entry.passed:
            verdict = "[green]pass[/green]"
        else:
            verdict = f"[red]FAIL[/red] {entry.note}"
        count = "-" if entry.count is None else ("continuum" if entry.count < 0 else str(entry.count))
        table.add_row(f"{entry.lam:.6g}", entry.expected, count, verdict, entry.label)
    console.print(table)

    failures = report.failure_messages
    return _finish(
        args,
        config,
        {"case": prediction.case_id, "label": prediction.label, "source": prediction.source,
         "lambda1": result.lambda1, "threshold": report.threshold, "entries": report.entries},
        report.passed,
        failures,
    )


def cmd_stability(args: argparse.Namespace) -> int:
    """Linearized eigenvalues and Morse indices along the branch."""
    config = load_config(args)
    result = run_stability(config)
    _print_branch_summary(result.branch)

    condition = result.condition
    if condition.holds:
        console.print("  [green]f(s)/s^N is decreasing: every solution should be stable[/green]")
    else:
        console.print(f"  f(s)/s^N is not decreasing (first violation at s={condition.first_violation:.4g})")
    console.print(f"  Unstable points: {result.unstable} of {len(result.branch)}")
    for issue in result.monotonicity.violations[:10]:
        console.print(f"  [yellow]{issue.kind}[/yellow] at index {issue.index}: {issue.detail}")
    if result.monotonicity.ties:
        console.print(f"  [dim]{len(result.monotonicity.ties)} ties below load resolution[/dim]")
    for s in result.mismatches:
        console.print(f"  [red]Morse index and principal eigenvalue disagree at s={s:.6g}[/red]")

    out_dir = Path(config.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = emit_branch_csv(result.branch, out_dir / "stability.csv")
    console.print(f"  [dim]Table: {table_path}[/dim]")
    return _finish(
        args,
        config,
        {"condition": condition, "unstable": result.unstable,
         "monotonicity": result.monotonicity, "mismatches": result.mismatches},
        result.passed,
        [f"sign mismatch at s={s:g}" for s in result.mismatches]
        + [i.detail for i in result.monotonicity.violations if condition.holds],
    )


def cmd_sturm(args: argparse.Namespace) -> int:
    """Randomized comparison suite."""
    config = load_config(args)
    report = run_sturm(config, args.trials)
    total = len(report.trials)
    color = "green" if report.passed else "red"
    console.print(f"[{color}]{total - len(report.failures)}/{total} trials produced an interior "
                  f"zero (N={report.N}, seed={report.seed})[/{color}]")
    for trial in report.failures:
        console.print(f"  [red]trial {trial.index}[/red]: bump at {trial.center:.3f}, "
                      f"width {trial.width:.3f}, height {trial.height:.3f}")
    return _finish(
        args,
        config,
        {"trials": report.trials},
        report.passed,
        [f"trial {t.index}: no interior zero" for t in report.failures],
    )


def cmd_setlimits(args: argparse.Namespace) -> int:
    """Upper and lower limits of an interval-set sequence."""
    config = load_config(args, solver=False)
    if args.two_gap:
        sequence = "two_gap"
    elif args.family:
        sequence = f"two_gap_{args.family}"
    elif args.connected:
        sequence = "connected"
    else:
        sequence = None
    result = run_setlimits(config, sequence)

    for name, value in (("limsup", result.limsup), ("liminf", result.liminf)):
        parts = len(components(value))
        shape = "connected" if parts == 1 else f"{parts} components"
        bound = "unbounded" if is_unbounded(value) else "bounded"
        console.print(f"  [bold]{name}[/bold] = {value}  [dim]({shape}, {bound})[/dim]")
    if not result.nested:
        console.print("  [red]liminf is not contained in limsup[/red]")
    return _finish(
        args,
        config,
        {"limsup": str(result.limsup), "liminf": str(result.liminf),
         "limsup_components": len(components(result.limsup)),
         "liminf_components": len(components(result.liminf))},
        result.nested,
        [] if result.nested else ["liminf is not contained in limsup"],
    )


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "init": cmd_init,
    "eigen": cmd_eigen,
    "mu-scan": cmd_mu_scan,
    "solve": cmd_solve,
    "branch": cmd_branch,
    "cases": cmd_cases,
    "stability": cmd_stability,
    "sturm": cmd_sturm,
    "setlimits": cmd_setlimits,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matool",
        description="Radial Monge-Ampere shooting, continuation and classification",
    )
    parser.add_argument("--version", action="version", version=f"matool {__version__}")
    parser.add_argument("--config", type=Path, help="Config file path (default: .matool.yml)")
    parser.add_argument("--out", type=Path, help="Output directory (overrides output.out_dir)")
    parser.add_argument("--seed", type=int, help="Random seed (overrides output.seed)")
    parser.add_argument(
        "--set",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="Override a config key; repeatable",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    init_parser = subparsers.add_parser("init", help="Create .matool.yml config")
    init_parser.add_argument("--force", action="store_true", help="Overwrite existing config")

    eigen_parser = subparsers.add_parser("eigen", help="Principal eigenvalue, both methods")
    eigen_parser.add_argument("--p", type=float, help="Exponent p (default N + 1)")

    subparsers.add_parser("mu-scan", help="mu_1(p) over numerics.p_grid")

    solve_parser = subparsers.add_parser("solve", help="Solve at one load or given amplitudes")
    target = solve_parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--lambda", dest="lam", type=float, help="Load lambda")
    target.add_argument("--amplitude", type=float, nargs="+", help="Amplitudes s = v(0)")

    branch_parser = subparsers.add_parser("branch", help="Sweep lambda(s) and write artifacts")
    branch_parser.add_argument("--no-svg", action="store_true", help="Skip the SVG diagram")
    branch_parser.add_argument(
        "--stability", action="store_true", help="Fill Morse index and principal eigenvalue"
    )

    subparsers.add_parser("cases", help="Classify (f0, finf) and verify solution counts")
    subparsers.add_parser("stability", help="Linearized stability along the branch")

    sturm_parser = subparsers.add_parser("sturm", help="Randomized Sturm comparison suite")
    sturm_parser.add_argument("--trials", type=int, help="Trial count (default numerics.sturm_trials)")

    setlim_parser = subparsers.add_parser("setlimits", help="Set limits of interval sequences")
    which = setlim_parser.add_mutually_exclusive_group()
    which.add_argument(
        "--example21", "--two-gap", dest="two_gap", action="store_true",
        help="Sequence with two-piece limits",
    )
    which.add_argument(
        "--family", choices=TWO_GAP_FAMILIES, help="One convergent family of that sequence"
    )
    which.add_argument("--connected", action="store_true", help="Connected unbounded sequence")
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    configure_logging(args.verbose)
    if args.command is None:
        parser.print_help()
        return EXIT_ERROR

    args.started = time.perf_counter()
    try:
        return COMMANDS[args.command](args)
    except (MatoolError, ValueError) as e:
        console.print(f"[red]{e}[/red]")
        logger.debug("command failed", exc_info=True)
        return EXIT_ERROR
    except OSError as e:
        console.print(f"[red]Cannot write output: {e}[/red]")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
