import random
from typing import Optional

import click

from app.commands.common import new_report, read_pattern, reported, save_pattern
from app.schemas.simulation import StackPhases
from app.services.assembly import assemble_stack
from app.services.simulation import check_commuting, phi
from app.services.systems import SYSTEMS
from app.services.validation import validate_pattern, validate_stack


@click.command("validate", help="Проверка всех локальных правил образца.")
@click.option("--in", "source", type=str, required=True)
@reported
def validate_command(source: str):
    report = new_report()
    p = read_pattern(source)
    report.lines.append(f"support {' '.join(str(v) for v in p.size)} layers {','.join(p.layer_names)}")
    report.violations = validate_pattern(p)
    return report


@click.command("simulate", help="Сборка и проверка стека, симулирующего систему.")
@click.option("--system", "system", type=click.Choice(sorted(SYSTEMS)), default="odometer", show_default=True)
@click.option("--order", type=int, required=True)
@click.option("--height", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=int, default=None, help="Случайные начальные фазы")
@click.option("--out", "out", type=str, default=None, help="Файл трёхмерного образца")
@reported
def simulate_command(system: str, order: int, height: int, seed: Optional[int], out: Optional[str]):
    report = new_report()
    phases = StackPhases()
    if seed is not None:
        rng = random.Random(seed)
        phases = StackPhases(orbit=rng.randrange(256), linear=rng.randrange(256), system=rng.randrange(256))
    st = assemble_stack(SYSTEMS[system](), order, height, phases)
    if out is not None:
        save_pattern(report, out, st.pattern)
    for c in range(st.height):
        bits = "".join(str(b) for b in phi(st, c).bits)
        report.lines.append(f"phi {c} {bits}")
    commuting = check_commuting(st)
    report.lines.append(f"commuting {str(commuting).lower()}")
    report.violations = validate_stack(st)
    report.failed = not commuting
    return report
