import click

from app.commands.common import new_report, read_pattern, reported
from app.services.hierarchy import detect_cells, extract_petals, read_modularity


@click.command("petals", help="Лепестки образца: petal <order> <x> <y> <side> <role>.")
@click.option("--in", "source", type=str, required=True)
@reported
def petals_command(source: str):
    report = new_report()
    for petal in extract_petals(read_pattern(source)):
        report.lines.append(f"petal {petal.order} {petal.box.x} {petal.box.y} {petal.box.w} {petal.role.value}")
    return report


@click.command("cells", help="Клетки образца: cell <order> <x> <y> <side> [mark].")
@click.option("--in", "source", type=str, required=True)
@reported
def cells_command(source: str):
    report = new_report()
    p = read_pattern(source)
    for cell in read_modularity(detect_cells(p), p):
        line = f"cell {cell.order} {cell.box.x} {cell.box.y} {cell.box.w}"
        if cell.modularity is not None:
            line += f" {cell.modularity}"
        report.lines.append(line)
    return report
