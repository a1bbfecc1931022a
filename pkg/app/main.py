# app/main.py
import sys
from typing import List, Optional

import click

from app.commands.counters import counter_trace_command
from app.commands.hierarchy import cells_command, petals_command
from app.commands.machine import machine_run_command
from app.commands.robinson import codes_command, generate_supertile_command, render_command, tile_plane_command
from app.commands.simulation import simulate_command, validate_command
from app.core.config import load_settings, settings
from app.core.exceptions import USAGE_ERROR, SftException
from app.core.logger import get_logger
from app.schemas.report import Report

logger = get_logger(__name__)


@click.group(name="sft")
@click.option("--config", "config", type=str, default=None, help="dotenv-файл настроек (иначе SFT_CONFIG или .env)")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Число потоков проверки сечений")
def cli(config: Optional[str], threads: Optional[int]):
    """Генератор и валидатор свидетелей трёхмерного SFT."""
    if config is not None:
        load_settings(config)
    if threads is not None:
        settings.threads = threads


cli.add_command(generate_supertile_command)
cli.add_command(tile_plane_command)
cli.add_command(validate_command)
cli.add_command(petals_command)
cli.add_command(cells_command)
cli.add_command(counter_trace_command)
cli.add_command(machine_run_command)
cli.add_command(simulate_command)
cli.add_command(render_command)
cli.add_command(codes_command)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа: 0 - без нарушений, 1 - найдены нарушения, 2 - ошибка использования,
    ввода-вывода или предусловия.
    """
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        result = cli.main(args=args, prog_name="sft", standalone_mode=False)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return USAGE_ERROR
    except click.Abort:
        return USAGE_ERROR
    except SftException as exc:
        logger.error("Command failed: %s", exc.detail)
        click.echo(f"error: {exc.detail}", err=True)
        return exc.exit_code
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return USAGE_ERROR
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return USAGE_ERROR
    if isinstance(result, Report):
        click.echo(result.render())
        return result.exit_code
    # --help и пустой вызов
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
