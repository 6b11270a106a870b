"""
kramers - Command Line Interface (Typer)

Entry point for the overdamped-limit laboratory.
"""

from pathlib import Path
from typing import Optional

import typer

from config.config import VERSION, get_config
from utils.logger import KramersLogger

from .commands import run, validate
from .context import RunContext
from .ui import console, print_title

app = typer.Typer(
    name="kramers",
    help="kramers - large-damping limit of Langevin diffusions on the torus",
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=False,
)

app.command("simulate")(run.simulate_command)
app.command("rate-sweep")(run.rate_sweep_command)
app.command("validate-equilibrium")(validate.validate_equilibrium_command)
app.command("validate-homogeneous")(validate.validate_homogeneous_command)
app.command("coupling-diagnostics")(validate.coupling_diagnostics_command)
app.command("ot-selftest")(validate.ot_selftest_command)


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", help="Experiment YAML file", exists=True, dir_okay=False
    ),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", min=0, help="Master seed"),
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", "-o", help="Output directory"),
    threads: Optional[int] = typer.Option(None, "--threads", "-j", min=1, help="Worker threads"),
    version: bool = typer.Option(None, "--version", "-v", help="Show version", is_eager=True),
):
    """
    [bold cyan]kramers[/bold cyan] - stationary sampling, couplings and W1 rate studies.

    Use [bold]kramers --help[/bold] to see available commands.
    """
    if version:
        console.print(f"[bold cyan]kramers[/bold cyan] v{VERSION}")
        raise typer.Exit()

    settings = get_config()
    KramersLogger.configure(settings.logging.log_level, settings.logging.log_file)
    ctx.obj = RunContext(config_path=config, seed=seed, out_dir=out_dir, threads=threads)

    if ctx.invoked_subcommand is None:
        print_title("kramers", "Overdamped limit of non-equilibrium Langevin diffusions")
        console.print("Use [bold green]kramers --help[/bold green] to see available commands.")


if __name__ == "__main__":
    app()
