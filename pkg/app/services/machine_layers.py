"""
Машины внутри клеток: диаграмма пространства-времени на позициях вычислений,
входы со сторон и стрелки направления сигнала ошибки как слои образца.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.logger import get_logger
from app.models.machine import Move
from app.schemas.hierarchy import CellRecord
from app.schemas.machine import ComputationArea, DiagramCell, MachineSpec, SpaceTimeDiagram
from app.schemas.pattern import Pattern, RuleViolation
from app.services.machine import initial_area, run_area
from app.services.signals import compute_signals

logger = get_logger(__name__)

TAPE = "tape"
HEAD = "head"
SIDES = "sides"
ARROW = "arrow"
MACHINE_LAYERS = (TAPE, HEAD, SIDES, ARROW)

ARROW_CODES = {Move.RIGHT: 1, Move.LEFT: 2}

Grid = Dict[Tuple[int, int], Tuple[List[int], List[int]]]


def _letter_code(spec: MachineSpec, letter: Optional[str]) -> int:
    return 0 if letter is None else 1 + spec.alphabet.index(letter)


def _state_code(spec: MachineSpec, state: Optional[str]) -> int:
    """
    Головка: 1 + индекс состояния; тень и отсутствие головки - 0.
    """
    return 0 if state in (None, spec.shadow) else 1 + spec.states.index(state)


def diagram_layers(spec: MachineSpec, cells: Sequence[Sequence[DiagramCell]]) -> Dict[str, np.ndarray]:
    """
    Слои tape и head для вывода диаграммы: 1 + индекс буквы (состояния), 0 - пусто.
    """
    tape = np.array([[_letter_code(spec, cell.letter) for cell in row] for row in cells], dtype=np.int16)
    head = np.array([[_state_code(spec, cell.state) for cell in row] for row in cells], dtype=np.int16)
    return {TAPE: tape, HEAD: head}


def _side_inputs(spec: MachineSpec, area: ComputationArea) -> Tuple[List[str], List[str]]:
    rows = len(area.rows)
    west = [spec.shadow] * rows if area.west is None else list(area.west)
    east = [spec.shadow] * rows if area.east is None else list(area.east)
    return west, east


def machine_layers(p: Pattern, cells: List[CellRecord], grid: Grid, spec: MachineSpec) -> Dict[str, np.ndarray]:
    """
    Каждая клетка запускает машину с правильной инициализацией на своей области вычислений.
    sides несёт 1 + индекс входного состояния на западном и восточном столбцах,
    arrow - направление сигнала ошибки над каждым столбцом верхней строки.
    """
    x0, y0 = p.origin[:2]
    layers = {name: np.zeros((p.height, p.width), dtype=np.int16) for name in MACHINE_LAYERS}
    for cell in cells:
        columns, rows = grid[cell.anchor]
        if not columns or not rows:
            continue
        area = initial_area(spec, len(columns), len(rows))
        diagram = run_area(spec, area)
        for r, y in enumerate(rows):
            for c, x in enumerate(columns):
                content = diagram.cells[r][c]
                layers[TAPE][y - y0, x - x0] = _letter_code(spec, content.letter)
                layers[HEAD][y - y0, x - x0] = _state_code(spec, content.state)
        west, east = _side_inputs(spec, area)
        for r, y in enumerate(rows):
            layers[SIDES][y - y0, columns[0] - x0] = 1 + spec.states.index(west[r])
            layers[SIDES][y - y0, columns[-1] - x0] = 1 + spec.states.index(east[r])
        for c, x in enumerate(columns):
            layers[ARROW][rows[-1] - y0, x - x0] = ARROW_CODES[area.arrow(c)]
    return layers


def _decode_state(spec: MachineSpec, code: int, blank_is_shadow: bool) -> Optional[str]:
    if code == 0:
        return spec.shadow if blank_is_shadow else None
    if not 1 <= code <= len(spec.states):
        return None
    return spec.states[code - 1]


def read_area(
    p: Pattern, columns: List[int], rows: List[int], spec: MachineSpec
) -> Optional[Tuple[ComputationArea, SpaceTimeDiagram]]:
    """
    Область и диаграмма, записанные в слоях клетки; None, если символ вне алфавитов.
    """
    x0, y0 = p.origin[:2]
    tape, head, sides, arrow = (p.layer(name) for name in MACHINE_LAYERS)
    content = []
    for y in rows:
        row = []
        for x in columns:
            letter_code = int(tape[y - y0, x - x0])
            if not 1 <= letter_code <= len(spec.alphabet):
                return None
            state = _decode_state(spec, int(head[y - y0, x - x0]), True)
            if state is None:
                return None
            row.append(DiagramCell(letter=spec.alphabet[letter_code - 1], state=state))
        content.append(row)
    west = [_decode_state(spec, int(sides[y - y0, columns[0] - x0]), False) for y in rows]
    east = [_decode_state(spec, int(sides[y - y0, columns[-1] - x0]), False) for y in rows]
    codes = {code: move for move, code in ARROW_CODES.items()}
    arrows = [codes.get(int(arrow[rows[-1] - y0, x - x0])) for x in columns]
    if None in west or None in east or None in arrows:
        return None
    area = ComputationArea(
        width=len(columns),
        height=len(rows),
        active_columns=[True] * len(columns),
        active_rows=[True] * len(rows),
        tape=[(cell.letter, cell.state) for cell in content[0]],
        west=west,
        east=east,
        arrows=arrows,
    )
    diagram = SpaceTimeDiagram(width=len(columns), height=len(rows), cells=content)
    return area, diagram


def _expected_masks(p: Pattern, cells: List[CellRecord], grid: Grid) -> Dict[str, np.ndarray]:
    x0, y0 = p.origin[:2]
    masks = {name: np.zeros((p.height, p.width), dtype=bool) for name in MACHINE_LAYERS}
    for cell in cells:
        columns, rows = grid[cell.anchor]
        if not columns or not rows:
            continue
        xs = np.asarray(columns) - x0
        ys = np.asarray(rows) - y0
        masks[TAPE][np.ix_(ys, xs)] = True
        masks[SIDES][ys, xs[0]] = True
        masks[SIDES][ys, xs[-1]] = True
        masks[ARROW][ys[-1], xs] = True
    return masks


def check_machine_layers(p: Pattern, cells: List[CellRecord], grid: Grid, spec: MachineSpec) -> List[RuleViolation]:
    """
    Машины клеток: символы только на позициях вычислений, каждая строка диаграммы
    получается из предыдущей по правилам машины, и запрещённое сочетание сигналов
    (ошибка при чистых ленте и сторонах) отсутствует.
    """
    if not all(p.has_layer(name) for name in MACHINE_LAYERS):
        return []
    x0, y0 = p.origin[:2]
    masks = _expected_masks(p, cells, grid)
    found = []
    for name in MACHINE_LAYERS:
        # Головка в тени записывается нулём, поэтому для head проверяется только лишний символ
        present = p.layer(name) != 0
        wrong = present & ~masks[TAPE] if name == HEAD else present != masks[name]
        for row, col in np.argwhere(wrong):
            found.append(RuleViolation(
                rule_id="machine-localization",
                positions=[(x0 + int(col), y0 + int(row))],
                detail=f"Слой {name} не совпадает с областью вычислений.",
            ))

    for cell in cells:
        columns, rows = grid[cell.anchor]
        if not columns or not rows:
            continue
        read = read_area(p, columns, rows, spec)
        if read is None:
            found.append(RuleViolation(
                rule_id="machine-localization",
                positions=[cell.anchor],
                detail=f"Машина клетки уровня {cell.order} содержит символы вне алфавитов.",
            ))
            continue
        area, written = read
        expected = run_area(spec, area)
        for r in range(1, area.height):
            for c in range(area.width):
                a, b = written.cells[r][c], expected.cells[r][c]
                if (a.letter, a.state) != (b.letter, b.state):
                    found.append(RuleViolation(
                        rule_id="machine-transition",
                        positions=[(columns[c], rows[r])],
                        detail=f"Ожидалось ({b.letter}, {b.state}), найдено ({a.letter}, {a.state}).",
                    ))
        report = compute_signals(written, area, spec)
        if not report.admissible:
            found.append(RuleViolation(
                rule_id="machine-admissibility",
                positions=[(columns[report.first_error], rows[-1])],
                detail=f"Сигнал ошибки в клетке уровня {cell.order} при чистой инициализации.",
            ))
    if found:
        logger.warning("Machine layers have %s violations", len(found))
    return found
