"""
kramers Run Commands
Stationary sampling and the γ rate sweep.
"""

import typer

from experiments.models import RATE_COLUMNS, CheckResult, ValidationReport
from experiments.reporting import output_path, write_csv
from experiments.simulate import SAMPLE_COLUMNS, simulate
from experiments.sweep import rate_rows, run_rate_sweep

from ..context import RunContext
from ..ui import console, print_report, print_rows, print_title, print_warning

FIT_COLUMNS = ["slope", "intercept", "slope_ci_low", "slope_ci_high", "points"]


def simulate_command(ctx: typer.Context):
    """Sample μ_γ for every γ and the overdamped target μ_O⊗N(0,Σ²); write a summary CSV."""
    run: RunContext = ctx.obj
    cfg = run.load("simulate")
    seed = run.resolve_seed(cfg)
    out_dir = run.output_dir(cfg)
    print_title("Stationary sampling", f"{cfg.name}, n={cfg.n}, seed={seed}")

    result = simulate(cfg, seed, run.resolve_threads(), run.batch, sample_dir=out_dir / "samples")
    print_rows(result.rows, SAMPLE_COLUMNS)
    csv = write_csv(result.rows, output_path(out_dir, cfg, "samples"), SAMPLE_COLUMNS)
    run.finish(cfg, "simulate", seed, [csv, *result.files])


def rate_sweep_command(
    ctx: typer.Context,
    slope_min: float = typer.Option(-1.15, help="Lower end of the accepted slope range"),
    slope_max: float = typer.Option(-0.80, help="Upper end of the accepted slope range"),
    progress: bool = typer.Option(True, "--progress/--no-progress", help="Show a progress bar"),
):
    """Ŵ(γ) with bootstrap SE and bias floor for every γ, then the log-log slope."""
    run: RunContext = ctx.obj
    cfg = run.load("rate-sweep")
    seed = run.resolve_seed(cfg)
    out_dir = run.output_dir(cfg)
    print_title("Rate sweep", f"{cfg.name}: gammas={cfg.gammas}, n={cfg.n}, reps={cfg.repetitions}")

    result = run_rate_sweep(cfg, seed, run.resolve_threads(), run.batch, show_progress=progress)
    rows = rate_rows(result)
    print_rows(rows, ["gamma", "w_joint", "w_joint_se", "bias_floor", "w_position", "w_velocity", "excluded"])

    report = ValidationReport("rate-sweep")
    if result.fit is None:
        print_warning("Not enough gamma values above the bias floor to fit a slope")
        report.add(CheckResult("slope", False, "no fit"))
    else:
        ci = result.slope_ci
        console.print(
            f"slope [bold]{result.slope:.3f}[/bold]"
            + (f"  (95% CI {ci[0]:.3f} .. {ci[1]:.3f})" if ci else "")
        )
        report.add(
            CheckResult(
                "slope range",
                slope_min <= result.slope <= slope_max,
                f"slope {result.slope:.3f} in [{slope_min}, {slope_max}]",
                result.slope,
                slope_max,
            )
        )
    print_report(report)

    rate_csv = write_csv(rows, output_path(out_dir, cfg, "rate"), RATE_COLUMNS, sort_by=["gamma"])
    fit_csv = write_csv([result.summary_row()], output_path(out_dir, cfg, "fit"), FIT_COLUMNS)
    run.finish(cfg, "rate-sweep", seed, [rate_csv, fit_csv], report)
