from typing import Optional

import click

from app.commands.common import new_report, read_bytes, reported, save_pattern
from app.schemas.pattern import Pattern
from app.services.machine import initial_area, run_area
from app.services.machine_layers import diagram_layers
from app.services.pattern_io import parse_machine, parse_sides, write_pattern
from app.services.signals import compute_signals


def _letters(tape: str):
    return tape.split(",") if "," in tape else list(tape)


@click.command("machine-run", help="Диаграмма машины на области вычислений и отчёт сигналов.")
@click.option("--spec", "spec_path", type=str, required=True, help="Файл машины (machine v1)")
@click.option("--width", type=click.IntRange(min=1), required=True)
@click.option("--height", type=click.IntRange(min=1), required=True)
@click.option("--tape", type=str, default=None, help="Буквы ленты, через запятую или по одной")
@click.option("--sides", "sides_path", type=str, default=None, help="Файл входов со сторон")
@click.option("--out", "out", type=str, default=None, help="Файл диаграммы")
@reported
def machine_run_command(spec_path: str, width: int, height: int, tape: Optional[str], sides_path: Optional[str], out: Optional[str]):
    report = new_report()
    spec = parse_machine(read_bytes(spec_path))
    area = initial_area(spec, width, height, tape=None if tape is None else _letters(tape))
    if sides_path is not None:
        west, east = parse_sides(read_bytes(sides_path))
        area = area.model_copy(update={"west": west, "east": east})
    diagram = run_area(spec, area)
    signals = compute_signals(diagram, area, spec)
    p = Pattern(origin=(0, 0), size=(width, height), layers=diagram_layers(spec, diagram.cells))
    if out is None:
        report.lines.extend(write_pattern(p).decode("utf-8").splitlines())
    else:
        save_pattern(report, out, p)
    report.lines.append(f"events {len(diagram.events)}")
    report.lines.append(f"first-error {signals.first_error}")
    report.lines.append(f"empty-tape {signals.tape_left} {signals.tape_right}")
    report.lines.append(f"empty-sides {signals.west_side} {signals.east_side}")
    report.lines.append(f"admissible {str(signals.admissible).lower()}")
    report.failed = not signals.admissible
    return report
