import click

from app.commands.common import new_report, read_pattern, reported, save_pattern, write_artifact
from app.models.robinson import Corner
from app.services.codes import code_table
from app.services.render import render_ppm
from app.services.robinson import ROBINSON, generate_supertile, tile_plane

CORNERS = {corner.label: corner for corner in Corner}


@click.command("generate-supertile", help="Супертайл St_corner(n) в формате образца.")
@click.option("--corner", type=click.Choice(sorted(CORNERS)), default="sw", show_default=True)
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.option("--out", "out", type=str, required=True, help="Файл образца")
@reported
def generate_supertile_command(corner: str, order: int, out: str):
    report = new_report()
    p = generate_supertile(CORNERS[corner], order)
    report.lines.append(f"supertile {corner} {order} side {p.width}")
    save_pattern(report, out, p)
    return report


@click.command("tile-plane", help="Окно детерминированной конфигурации плоскости.")
@click.option("--order", type=click.IntRange(min=0), required=True)
@click.option("--x0", type=int, default=0, show_default=True)
@click.option("--y0", type=int, default=0, show_default=True)
@click.option("--width", type=click.IntRange(min=1), required=True)
@click.option("--height", type=click.IntRange(min=1), required=True)
@click.option("--out", "out", type=str, required=True)
@reported
def tile_plane_command(order: int, x0: int, y0: int, width: int, height: int, out: str):
    report = new_report()
    p = tile_plane(order, x0, y0, width, height)
    report.lines.append(f"window {x0} {y0} {width} {height}")
    save_pattern(report, out, p)
    return report


@click.command("render", help="Отрисовка слоя образца в PPM.")
@click.option("--in", "source", type=str, required=True)
@click.option("--layer", type=str, default=ROBINSON, show_default=True)
@click.option("--z", type=int, default=None)
@click.option("--out", "out", type=str, required=True)
@reported
def render_command(source: str, layer: str, z: int, out: str):
    report = new_report()
    data = render_ppm(read_pattern(source), layer, z)
    target = write_artifact(out, data)
    report.lines.append(f"written {target}")
    return report


@click.command("codes", help="Таблица кодов символов Робинсона.")
@reported
def codes_command():
    report = new_report()
    report.lines.extend(code_table())
    return report
