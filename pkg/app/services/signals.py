"""
Сигналы ошибок области вычислений и правило запрета.
"""
from typing import List, Tuple

from app.core.exceptions import DimensionMismatch
from app.core.logger import get_logger
from app.models.machine import Move
from app.schemas.machine import ComputationArea, MachineSpec, SignalReport, SpaceTimeDiagram

logger = get_logger(__name__)


def _first(flags: List[bool], default: int) -> int:
    return next((index for index, dirty in enumerate(flags) if dirty), default)


def _tape_dirt(spec: MachineSpec, area: ComputationArea) -> List[bool]:
    dirty = [False] * area.width
    for p, (x, cell) in enumerate(zip(area.columns, area.tape)):
        expected = (spec.blank, spec.init if p == 0 else spec.shadow)
        dirty[x] = tuple(cell) != expected
    return dirty


def _side_dirt(spec: MachineSpec, area: ComputationArea, inputs) -> List[bool]:
    dirty = [True] * area.height
    values = [spec.shadow] * len(area.rows) if inputs is None else inputs
    for y, state in zip(area.rows, values):
        dirty[y] = state != spec.shadow
    return dirty


def _error_path(area: ComputationArea, start: int) -> List[Tuple[int, int]]:
    top = area.height - 1
    if area.arrow(start) == Move.LEFT:
        border = 0
        path = [(x, top) for x in range(start, -1, -1)]
    else:
        border = area.width - 1
        path = [(x, top) for x in range(start, area.width)]
    path += [(border, y) for y in range(top - 1, -1, -1)]
    return path


def compute_signals(diagram: SpaceTimeDiagram, area: ComputationArea, spec: MachineSpec) -> SignalReport:
    """
    Четыре семейства сигналов по диаграмме:
    первая ошибка в верхней строке (головка qe или неактивный столбец),
    пустая лента (разбиения слева направо и справа налево),
    пустые стороны (западная и восточная) и путь сигнала ошибки.
    Область недопустима, когда ошибка сочетается с чистыми лентой и сторонами.
    """
    if diagram.width != area.width or diagram.height != area.height:
        raise DimensionMismatch("Диаграмма и область имеют разные размеры.")
    top = diagram.cells[-1]
    errors = [
        not area.active_columns[x] or top[x].state == spec.error
        for x in range(area.width)
    ]
    first_error = _first(errors, area.width)

    tape = _tape_dirt(spec, area)
    tape_left = _first(tape, area.width)
    tape_right = max((x + 1 for x, dirty in enumerate(tape) if dirty), default=0)
    west_side = _first(_side_dirt(spec, area, area.west), area.height)
    east_side = _first(_side_dirt(spec, area, area.east), area.height)

    has_error = first_error < area.width
    path = _error_path(area, first_error) if has_error else []
    forbidden = (
        has_error
        and tape_left == area.width
        and west_side == area.height
        and east_side == area.height
    )
    if forbidden:
        logger.warning("Error signal meets clean initialization at column %s", first_error)
    return SignalReport(
        first_error=first_error,
        tape_left=tape_left,
        tape_right=tape_right,
        west_side=west_side,
        east_side=east_side,
        error_path=path,
        admissible=not forbidden,
        width=area.width,
        height=area.height,
    )
