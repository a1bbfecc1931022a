"""
Общие помощники команд: отчёт с замером времени, пути артефактов и чтение входов.
"""
import time
from functools import wraps
from pathlib import Path

import click

from app.core.config import settings
from app.core.exceptions import ParseError
from app.schemas.pattern import Pattern
from app.schemas.report import Report
from app.services.pattern_io import parse_pattern, write_pattern


def _echo(ctx: click.Context) -> str:
    parts = [ctx.command_path]
    for name, value in ctx.params.items():
        if value is None or value is False:
            continue
        flag = "--" + name.replace("_", "-")
        parts.append(flag if value is True else f"{flag} {value}")
    return " ".join(parts)


def reported(command):
    """
    Оборачивает тело команды: команда возвращает строки и нарушения,
    обёртка дописывает эхо и время выполнения.
    """

    @wraps(command)
    def wrapper(*args, **kwargs) -> Report:
        ctx = click.get_current_context()
        start = time.perf_counter()
        report = command(*args, **kwargs)
        report.command = _echo(ctx)
        report.elapsed = time.perf_counter() - start
        return report

    return wrapper


def new_report() -> Report:
    return Report(command="")


def artifact_path(path: str) -> Path:
    target = Path(path)
    return target if target.is_absolute() else Path(settings.output_dir) / target


def write_artifact(path: str, data: bytes) -> Path:
    target = artifact_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    return target


def read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"Не удалось прочитать {path}: {exc.strerror}.") from exc


def read_pattern(path: str) -> Pattern:
    return parse_pattern(read_bytes(path))


def save_pattern(report: Report, path: str, p: Pattern) -> None:
    target = write_artifact(path, write_pattern(p))
    report.lines.append(f"written {target}")
