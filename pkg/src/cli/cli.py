#!/usr/bin/env python3
"""
kramers - Command Line Interface
Console-script entry point for the Typer app.
"""
import sys
from pathlib import Path

# Ensure the package can be imported from installed location
sys.path.insert(0, str(Path(__file__).parent.parent))


def main():
    """Main entry point for the Typer CLI."""
    from cli.main import app

    app()


if __name__ == "__main__":
    main()
