# fracwave.py
from __future__ import annotations

import json
import logging
import os
import sys
from functools import wraps
from logging.handlers import RotatingFileHandler

import click
from dotenv import load_dotenv

# ── Load env FIRST ────────────────────────────────────────────────────────────
load_dotenv()

from physics.errors import FracwaveError  # noqa: E402
from services import db, settings  # noqa: E402
from services.config import SUBCOMMANDS, load_config, serialize_config  # noqa: E402
from services.runner import default_registry, run_scenario, run_sweep  # noqa: E402

# ── Logging ───────────────────────────────────────────────────────────────────
log = logging.getLogger("fracwave")

_formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")


def _setup_logging(level: str) -> None:
    log.setLevel(getattr(logging, level.upper(), logging.INFO))
    if log.handlers:
        return
    # console
    _ch = logging.StreamHandler(sys.stdout)
    _ch.setFormatter(_formatter)
    log.addHandler(_ch)

    # rotating file (./logs/fracwave.log unless FRACWAVE_LOG_DIR says otherwise)
    try:
        os.makedirs(settings.LOG_DIR, exist_ok=True)
        _fh = RotatingFileHandler(os.path.join(settings.LOG_DIR, "fracwave.log"),
                                  maxBytes=2_000_000, backupCount=5, encoding="utf-8")
        _fh.setFormatter(_formatter)
        log.addHandler(_fh)
    except OSError as e:
        log.warning("File logging disabled (%s): %s", settings.LOG_DIR, e)


# ── Exit codes ────────────────────────────────────────────────────────────────
def _guarded(fn):
    """0 ok, 2 config/domain, 3 numerical or unexpected, 4 I/O."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FracwaveError as e:
            for line in getattr(e, "messages", None) or [str(e)]:
                click.echo(f"error: {line}", err=True)
            sys.exit(e.exit_code)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception as e:
            log.exception("Unexpected failure: %s", e)
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            sys.exit(3)

    return wrapper


# ── CLI ───────────────────────────────────────────────────────────────────────
@click.group()
@click.option("--log-level", default=settings.LOG_LEVEL, show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.version_option(settings.FRACWAVE_VERSION, prog_name="fracwave")
def cli(log_level: str) -> None:
    """Fractional Schrodinger simulations with oracle-checked operators."""
    _setup_logging(log_level)


def _scenario_command(name: str) -> click.Command:
    @click.command(name=name, help=default_registry().help(name) or f"Run the {name} scenario.")
    @click.argument("config", type=click.Path(dir_okay=False))
    @click.option("--out", "out_dir", default=None, help="Override [output] dir.")
    @click.option("--ledger/--no-ledger", default=None, help="Record the run in the sqlite ledger.")
    @_guarded
    def command(config: str, out_dir: str | None, ledger: bool | None) -> None:
        cfg = load_config(config, subcommand=name)
        if out_dir is not None:
            cfg = cfg.model_copy(update={"output": cfg.output.model_copy(update={"dir": out_dir})})
        report = run_scenario(cfg, ledger=ledger)
        click.echo(json.dumps(report.as_dict(), sort_keys=True, default=str))

    return command


for _name in SUBCOMMANDS:
    cli.add_command(_scenario_command(_name))


@cli.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--subcommand", type=click.Choice(SUBCOMMANDS), default=None)
@_guarded
def validate(config: str, subcommand: str | None) -> None:
    """Parse and check CONFIG, print it normalized with every default filled."""
    cfg = load_config(config, subcommand=subcommand)
    click.echo(serialize_config(cfg), nl=False)


@cli.command()
@click.argument("configs", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--workers", type=int, default=None, help="Process pool size (FRACWAVE_WORKERS).")
@_guarded
def sweep(configs: tuple[str, ...], workers: int | None) -> None:
    """Run independent configs in parallel; exit with the worst code."""
    reports = run_sweep(list(configs), workers)
    for path, rep in zip(configs, reports):
        click.echo(json.dumps({"config": path, **rep.as_dict()}, sort_keys=True, default=str))
    worst = max((r.exit_code for r in reports), default=0)
    if worst:
        sys.exit(worst)


@cli.command()
@click.option("--limit", type=int, default=25, show_default=True)
@click.option("--subcommand", type=click.Choice(SUBCOMMANDS), default=None)
@click.option("--id", "run_id", type=int, default=None, help="Show one run in full.")
@_guarded
def runs(limit: int, subcommand: str | None, run_id: int | None) -> None:
    """List the run ledger, newest first."""
    db.init()
    if run_id is not None:
        row = db.get_run(run_id)
        if row is None:
            raise click.ClickException(f"no run with id {run_id}")
        click.echo(json.dumps(row, sort_keys=True))
        return
    for row in db.list_runs(limit, subcommand):
        click.echo(f"{row['id']:>5}  {row['subcommand']:<14} exit={row['exit_code']}  "
                   f"seed={row['seed']}  {row['runtime_s'] or 0:.2f}s  {row['output_dir'] or ''}")


if __name__ == "__main__":
    cli()
