"""
kramers Validation Commands
Closed-form validators, coupling diagnostics and the transport self-test.
All exit with code 1 when any check fails.
"""

import typer

from config.experiment import ExperimentConfig
from experiments.diagnostics import (
    COUPLING_COLUMNS,
    COUPLING_FIT_COLUMNS,
    run_coupling_diagnostics,
)
from experiments.reporting import output_path, write_csv
from experiments.selftest import ot_selftest
from experiments.validators import validate_equilibrium, validate_homogeneous

from ..context import RunContext
from ..ui import print_report, print_rows, print_title

CHECK_COLUMNS = ["report", "name", "passed", "value", "tolerance", "detail"]


def _write_report(run: RunContext, cfg: ExperimentConfig, command: str, seed: int, report, extra_outputs=()):
    print_report(report)
    csv = write_csv(report.rows(), output_path(run.output_dir(cfg), cfg, "checks"), CHECK_COLUMNS)
    run.finish(cfg, command, seed, [*extra_outputs, csv], report)


def validate_equilibrium_command(
    ctx: typer.Context,
    position_tol: float = typer.Option(0.02, help="Max 1D W1 of the position marginal"),
    residual_tol: float = typer.Option(1e-8, help="Max stationarity residual on the grid"),
):
    """Gradient model: tensorized Gibbs law, closed-form density and its normalization."""
    run: RunContext = ctx.obj
    cfg = run.load("validate-equilibrium")
    seed = run.resolve_seed(cfg)
    print_title("Equilibrium validation", f"{cfg.name}, gamma={cfg.gammas[0]}, n={cfg.n}")
    report = validate_equilibrium(
        cfg, seed, run.resolve_threads(), run.batch, position_tol, residual_tol
    )
    _write_report(run, cfg, "validate-equilibrium", seed, report)


def validate_homogeneous_command(
    ctx: typer.Context,
    ks_level: float = typer.Option(0.01, help="Minimum KS p-value for shape checks"),
):
    """Constant force: Gaussian velocities N(η/γ, Σ²), uniform positions, W1 = |η|/γ."""
    run: RunContext = ctx.obj
    cfg = run.load("validate-homogeneous")
    seed = run.resolve_seed(cfg)
    print_title("Homogeneous validation", f"{cfg.name}, gammas={cfg.gammas}, n={cfg.n}")
    report = validate_homogeneous(cfg, seed, run.resolve_threads(), run.batch, ks_level)
    _write_report(run, cfg, "validate-homogeneous", seed, report)


def coupling_diagnostics_command(ctx: typer.Context):
    """Coupling errors e₁, e₂, e₃ per γ with bound, covariance and independence checks."""
    run: RunContext = ctx.obj
    cfg = run.load("coupling-diagnostics")
    seed = run.resolve_seed(cfg)
    print_title(
        "Coupling diagnostics", f"{cfg.name}, t={cfg.coupling.t}, R={cfg.coupling.replicas}"
    )
    result = run_coupling_diagnostics(cfg, seed, run.resolve_threads(), run.batch)
    rows = result.rows()
    print_rows(rows, ["gamma", "e1_mean", "e1_se", "e2_mean", "e2_bound", "e3_mean", "max_abs_corr_WA"])
    if result.fit_rows():
        print_rows(result.fit_rows(), ["quantity", "slope", "intercept"], title="log-log slopes")
    out_dir = run.output_dir(cfg)
    csv = write_csv(rows, output_path(out_dir, cfg, "coupling"), COUPLING_COLUMNS, sort_by=["gamma"])
    fit_csv = write_csv(
        result.fit_rows(), output_path(out_dir, cfg, "coupling_fit"), COUPLING_FIT_COLUMNS
    )
    _write_report(run, cfg, "coupling-diagnostics", seed, result.checks, [csv, fit_csv])


def ot_selftest_command(ctx: typer.Context):
    """Cross-check the transport solvers on small random instances."""
    run: RunContext = ctx.obj
    cfg = run.load("ot-selftest") if run.config_path else ExperimentConfig(name="ot_selftest")
    seed = run.resolve_seed(cfg)
    print_title("Transport self-test", f"seed={seed}")
    report = ot_selftest(seed)
    _write_report(run, cfg, "ot-selftest", seed, report)
