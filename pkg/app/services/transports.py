"""
Транспорт информации внутри клеток и между ними: диагонали лепестков,
случайные каналы к границе клетки, контур линейного счётчика и его извлечение
к машине, межклеточный транспорт и ориентация клеток в иерархии.

Каждый слой задаётся ожидаемым массивом, вычисленным по слоям-источникам того же
образца; сборка записывает ожидаемый массив, проверка сравнивает с ним.
Код -1 в ожидаемом массиве означает непустой символ, содержимое которого не
удалось вывести (источник сам нарушает правила и сообщается своей проверкой).
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import SftException
from app.core.logger import get_logger
from app.models.hierarchy import AreaFunction
from app.models.machine import Move
from app.schemas.hierarchy import CellRecord, Petal
from app.schemas.pattern import Pattern, RuleViolation
from app.services import counters
from app.services.counter_layers import LINEAR, read_linear_word
from app.services.hierarchy import (
    FUNCTION,
    MIN_SUBDIVIDED_ORDER,
    cell_border,
    cell_parents,
    function_owners,
    organite_lines,
)

logger = get_logger(__name__)

DIAGONAL = "diagonal"
BORDER = "border"
LINEAR_TRANSPORT = "linear_transport"
EXTRACTION = "extraction"
INTERCELL = "intercell"
ORIENTATION = "orientation"
TRANSPORT_LAYERS = (DIAGONAL, BORDER, LINEAR_TRANSPORT, EXTRACTION, INTERCELL, ORIENTATION)

UNKNOWN = -1

# Линия канала к границе по отметке модулярности: (строка органитов, столбец органитов)
BORDER_LINES = {1: (4, 2), 3: (1, 5)}
CHANNEL_ORGANITES = {1: (2, 5), 3: (5, 2)}

# Контур линейного счётчика
CIRCUIT_ORGANITES = frozenset(
    [(0, 3), (0, 7), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7)]
    + [(3, k) for k in range(8)]
    + [(4, 3), (5, 3), (6, 3), (7, 3), (7, 4), (7, 5), (7, 6), (7, 7), (6, 7), (5, 7), (4, 7)]
)

# Органиты извлечения: столбцовые несут поля цифры по столбцу, строковые - по строке
EXTRACTION_COLUMNS = ((5, 4), (5, 6))
EXTRACTION_ROWS = ((4, 5), (6, 5))

PAIR_BASE = 64

Grid = Dict[Tuple[int, int], Tuple[List[int], List[int]]]
Bits = Dict[Tuple[int, int], Optional[int]]


def _organite_cells(cells: List[CellRecord]) -> List[CellRecord]:
    return [cell for cell in cells if cell.order >= MIN_SUBDIVIDED_ORDER]


def _put(layer: np.ndarray, origin, xs, ys, value: int) -> None:
    x0, y0 = origin
    if len(xs) and len(ys):
        layer[np.ix_(np.asarray(ys) - y0, np.asarray(xs) - x0)] = value


# Диагонали

def _paint_petals(p: Pattern, petals: List[Petal]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Значение и владелец каждой позиции на границах лепестков. На пересечениях
    границ (позиции преобразования) остаётся лепесток меньшего порядка.
    """
    x0, y0 = p.origin[:2]
    function = p.layer(FUNCTION) if p.has_layer(FUNCTION) else np.zeros((p.height, p.width), dtype=np.int16)
    values = np.zeros((p.height, p.width), dtype=np.int16)
    owners = np.full((p.height, p.width), -1, dtype=np.int64)
    for number in sorted(range(len(petals)), key=lambda k: -petals[k].order):
        b = petals[number].box
        sw = function[b.y - y0, b.x - x0]
        value = 2 if sw == AreaFunction.COMPUTATION.value else 1
        for target, content in ((values, value), (owners, number)):
            region = target[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
            region[0, :] = region[-1, :] = content
            region[:, 0] = region[:, -1] = content
    return values, owners


def diagonal_layer(p: Pattern, petals: List[Petal]) -> np.ndarray:
    """
    Слой diagonal: непустой на границах лепестков; 2 (диагональ) у лепестка, чей
    юго-западный угол - позиция вычислений, 1 у остальных.
    """
    return _paint_petals(p, petals)[0]


def check_diagonals(p: Pattern, petals: List[Petal]) -> List[RuleViolation]:
    if not p.has_layer(DIAGONAL):
        return []
    x0, y0 = p.origin[:2]
    layer = p.layer(DIAGONAL)
    expected, owners = _paint_petals(p, petals)
    found = _mask_violations("diagonal-localization", (layer != 0) != (owners >= 0), (x0, y0),
                             "Символ диагонали вне границы лепестка.")
    for number, petal in enumerate(petals):
        b = petal.box
        window = np.s_[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        owned = np.argwhere(owners[window] == number)
        if not owned.size:
            continue
        values = layer[window]
        row, col = owned[0]
        reference = values[row, col]
        if reference != expected[window][row, col]:
            found.append(_violation("diagonal-transformation", (b.x + int(col), b.y + int(row)),
                                    f"Лепесток порядка {petal.order} несёт {int(reference)}."))
        for row, col in owned[1:]:
            if values[row, col] != reference and values[row, col] != 0:
                found.append(_violation("diagonal-transmission", (b.x + int(col), b.y + int(row)),
                                        "Символ диагонали меняется вдоль лепестка."))
    return found


# Случайные каналы к границе клетки

def _border_cross(cell: CellRecord, grid: Grid) -> Optional[Tuple[List[Tuple[int, int]], Tuple[int, int]]]:
    """
    Позиции канала к границе и их пересечение: нижняя строка ряда органитов
    и левый столбец колонки органитов, выбранных отметкой клетки.
    """
    if cell.order < MIN_SUBDIVIDED_ORDER or cell.order % 2 == 0 or cell.modularity not in BORDER_LINES:
        return None
    columns, rows = grid[cell.anchor]
    j, i = BORDER_LINES[cell.modularity]
    _, ys = organite_lines(columns, rows, 0, j)
    xs, _ = organite_lines(columns, rows, i, 0)
    row, column = ys[0], xs[0]
    positions = [(x, row) for x in columns] + [(column, y) for y in rows if y != row]
    return positions, (column, row)


def border_layer(p: Pattern, marked: List[CellRecord], grid: Grid, bits: Bits) -> np.ndarray:
    """
    Слой border: 1 + системный бит клетки вдоль канала к её западной и южной границам.
    """
    x0, y0 = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in marked:
        cross = _border_cross(cell, grid)
        if cross is None:
            continue
        bit = bits.get(cell.anchor)
        for x, y in cross[0]:
            layer[y - y0, x - x0] = UNKNOWN if bit is None else 1 + bit
    return layer


def check_border(p: Pattern, marked: List[CellRecord], grid: Grid, bits: Bits,
                 channel: Optional[np.ndarray] = None) -> List[RuleViolation]:
    """
    Канал непуст ровно на своих линиях, символ передаётся вдоль них,
    на границе клетки равен её системному биту и совпадает со случайным каналом
    в органите, выбранном той же отметкой.
    """
    if not p.has_layer(BORDER):
        return []
    x0, y0 = p.origin[:2]
    layer = p.layer(BORDER)
    expected = border_layer(p, marked, grid, bits)
    found = _mask_violations("border-localization", (layer != 0) != (expected != 0), (x0, y0),
                             "Символ канала вне линий, выбранных отметкой модулярности.")
    for cell in marked:
        cross = _border_cross(cell, grid)
        if cross is None:
            continue
        positions, (cx, cy) = cross
        reference = int(layer[cy - y0, cx - x0])
        for x, y in positions:
            value = int(layer[y - y0, x - x0])
            if value != 0 and value != reference:
                found.append(_violation("border-transmission", (x, y), "Символ канала меняется вдоль линии."))
        bit = bits.get(cell.anchor)
        if bit is not None and reference != 1 + bit:
            found.append(_violation("border-evaluation", (cx, cy),
                                    f"Канал несёт {reference - 1}, системный бит клетки {bit}."))
        if channel is not None:
            columns, rows = grid[cell.anchor]
            xs, ys = organite_lines(columns, rows, *CHANNEL_ORGANITES[cell.modularity])
            corner = (xs[0], ys[0])
            meet = int(channel[corner[1] - y0, corner[0] - x0])
            if meet != reference:
                found.append(_violation("border-synchronization", corner,
                                        "Канал к границе расходится со случайным каналом органита."))
    return found


# Контур линейного счётчика и извлечение

def _digit_of(state, t: int) -> int:
    return state.digits[t % len(state.digits)]


def linear_transport_layer(p: Pattern, cells: List[CellRecord], grid: Grid) -> np.ndarray:
    """
    Слой linear_transport: на позициях вычислений органитов контура 1 + разряд
    линейного счётчика клетки с номером (номер столбца по модулю длины слова).
    """
    origin = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in _organite_cells(cells):
        columns, rows = grid[cell.anchor]
        state = read_linear_word(p, cell, grid)
        for i, j in CIRCUIT_ORGANITES:
            xs, ys = organite_lines(columns, rows, i, j)
            for x in xs:
                value = UNKNOWN if state is None else 1 + _digit_of(state, columns.index(x))
                _put(layer, origin, [x], ys, value)
    return layer


def extraction_codes(digit: int, l: int) -> Dict[Tuple[int, int], int]:
    """
    Поля цифры линейного счётчика для органитов извлечения:
    (5,4) - буква, первое состояние и флаг столбца; (4,5) - второе состояние и флаг строки;
    (6,5) - третье состояние; (5,6) - направление сигнала ошибки.
    """
    decoded = counters.decode_digit(digit, l)
    size = 2 ** decoded.field_bits
    return {
        (5, 4): 1 + decoded.letter + size * decoded.states[0] + size * size * int(decoded.column_on),
        (4, 5): 1 + decoded.states[1] + size * int(decoded.row_on),
        (6, 5): 1 + decoded.states[2],
        (5, 6): 1 if decoded.direction == Move.RIGHT else 2,
    }


def extraction_layer(p: Pattern, cells: List[CellRecord], grid: Grid) -> np.ndarray:
    origin = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in _organite_cells(cells):
        columns, rows = grid[cell.anchor]
        state = read_linear_word(p, cell, grid)
        l = cell.order - MIN_SUBDIVIDED_ORDER
        for place in EXTRACTION_COLUMNS:
            xs, ys = organite_lines(columns, rows, *place)
            for x in xs:
                value = UNKNOWN if state is None else extraction_codes(_digit_of(state, columns.index(x)), l)[place]
                _put(layer, origin, [x], ys, value)
        for place in EXTRACTION_ROWS:
            xs, ys = organite_lines(columns, rows, *place)
            for y in ys:
                value = UNKNOWN if state is None else extraction_codes(_digit_of(state, rows.index(y)), l)[place]
                _put(layer, origin, xs, [y], value)
    return layer


# Межклеточный транспорт

def intercell_symbol(digit: int, mark: Optional[int], bit: Optional[int]) -> int:
    """
    Символ межклеточного транспорта: первый разряд линейного счётчика клетки-источника
    и её системный бит, если отметка клетки 1 или 3 (иначе пусто).
    """
    carried = 0 if mark not in BORDER_LINES or bit is None else 1 + bit
    return 1 + 3 * digit + carried


def _sources(kids: List[CellRecord], xs: np.ndarray, ys: np.ndarray, vertical: bool) -> np.ndarray:
    """
    Ближайшая подклетка, пересекающая строку (столбец) позиции: сначала к западу (югу),
    иначе к востоку (северу). -1, если такой нет.
    """
    along, across = (ys, xs) if vertical else (xs, ys)
    far = np.iinfo(np.int64).max
    before = np.full(len(xs), -1, dtype=np.int64)
    after = np.full(len(xs), -1, dtype=np.int64)
    before_gap = np.full(len(xs), far, dtype=np.int64)
    after_gap = np.full(len(xs), far, dtype=np.int64)
    for k, kid in enumerate(kids):
        low, size = (kid.box.x, kid.box.w) if vertical else (kid.box.y, kid.box.h)
        start, length = (kid.box.y, kid.box.h) if vertical else (kid.box.x, kid.box.w)
        crosses = (across >= low) & (across < low + size)
        gap = along - (start + length - 1)
        take = crosses & (gap > 0) & (gap < before_gap)
        before = np.where(take, k, before)
        before_gap = np.where(take, gap, before_gap)
        gap = start - along
        take = crosses & (gap > 0) & (gap < after_gap)
        after = np.where(take, k, after)
        after_gap = np.where(take, gap, after_gap)
    return np.where(before >= 0, before, after)


def _children(cells: List[CellRecord]) -> Dict[Tuple[int, int], List[CellRecord]]:
    by_anchor = {cell.anchor: cell for cell in cells}
    family: Dict[Tuple[int, int], List[CellRecord]] = {}
    for anchor, parent in cell_parents(cells).items():
        if parent is not None:
            family.setdefault(parent.anchor, []).append(by_anchor[anchor])
    return family


def intercell_layer(p: Pattern, marked: List[CellRecord], grid: Grid, bits: Bits) -> np.ndarray:
    """
    Слой intercell на позициях передачи и пересечений: по строке идёт символ соседней
    подклетки по e1, по столбцу - по e2, на пересечении пара PAIR_BASE * верт. + гориз.
    """
    x0, y0 = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int64)
    if not p.has_layer(FUNCTION):
        return layer.astype(np.int16)
    function = p.layer(FUNCTION)
    owners = function_owners(p, marked)
    family = _children(marked)
    for number, cell in enumerate(marked):
        kids = family.get(cell.anchor, [])
        if not kids:
            continue
        where = np.argwhere((owners == number) & (function >= AreaFunction.TRANSFER_H.value))
        if not where.size:
            continue
        symbols = []
        for kid in kids:
            state = read_linear_word(p, kid, grid) if p.has_layer(LINEAR) else None
            symbols.append(UNKNOWN if state is None else intercell_symbol(state.digits[0], kid.modularity, bits.get(kid.anchor)))
        symbols = np.asarray(symbols + [UNKNOWN], dtype=np.int64)
        if symbols.max() >= PAIR_BASE:
            raise SftException(f"Символ межклеточного транспорта не помещается в пару: {int(symbols.max())}.")
        rows, cols = where[:, 0], where[:, 1]
        xs, ys = cols + x0, rows + y0
        codes = function[rows, cols]
        horizontal = symbols[_sources(kids, xs, ys, vertical=False)]
        vertical = symbols[_sources(kids, xs, ys, vertical=True)]
        pair = np.where((horizontal < 0) | (vertical < 0), UNKNOWN, PAIR_BASE * vertical + horizontal)
        values = np.select(
            [codes == AreaFunction.TRANSFER_H.value, codes == AreaFunction.TRANSFER_V.value],
            [horizontal, vertical],
            default=pair,
        )
        layer[rows, cols] = values
    return layer.astype(np.int16)


def _carried(code: int) -> int:
    return (code - 1) % 3


def check_intercell(p: Pattern, marked: List[CellRecord], grid: Grid, bits: Bits) -> List[RuleViolation]:
    """
    Межклеточный транспорт непуст ровно на позициях передачи и пересечений;
    бит передаётся только от подклеток с отметкой 1 или 3, любой бит от подклетки
    с чётной отметкой - нарушение.
    """
    if not p.has_layer(INTERCELL):
        return []
    x0, y0 = p.origin[:2]
    layer = p.layer(INTERCELL).astype(np.int64)
    expected = intercell_layer(p, marked, grid, bits).astype(np.int64)
    found = _mask_violations("intercell-localization", (layer != 0) != (expected != 0), (x0, y0),
                             "Символ межклеточного транспорта вне позиций передачи.")
    differs = (layer != expected) & (layer != 0) & (expected > 0)
    for row, col in np.argwhere(differs):
        a, e = int(layer[row, col]), int(expected[row, col])
        parts = [(a // PAIR_BASE, e // PAIR_BASE), (a % PAIR_BASE, e % PAIR_BASE)] if e >= PAIR_BASE else [(a, e)]
        stray_bit = all(
            (pa - 1) // 3 == (pe - 1) // 3 and (_carried(pa) == _carried(pe) or _carried(pe) == 0)
            for pa, pe in parts
            if pa > 0 and pe > 0
        )
        rule = "intercell-modularity" if stray_bit else "intercell-content"
        found.append(_violation(rule, (x0 + int(col), y0 + int(row)), f"Код {a}, ожидался {e}."))
    return found


# Ориентация в иерархии

def _quadrant(child: CellRecord, parent: CellRecord) -> int:
    cx, cy = child.box.x + child.box.w // 2, child.box.y + child.box.h // 2
    px, py = parent.box.x + parent.box.w // 2, parent.box.y + parent.box.h // 2
    return int(cx > px) + 2 * int(cy > py)


def orientation_layer(p: Pattern, cells: List[CellRecord]) -> np.ndarray:
    """
    Слой orientation на границах клеток: 1 + четверть родительской клетки
    (0 - юго-запад, 1 - юго-восток, 2 - северо-запад, 3 - северо-восток).
    Клетки без родителя в окне несут пустой символ.
    """
    x0, y0 = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    parents = cell_parents(cells)
    for cell in cells:
        parent = parents[cell.anchor]
        if parent is None:
            continue
        for x, y in cell_border(cell):
            layer[y - y0, x - x0] = 1 + _quadrant(cell, parent)
    return layer


def check_orientation(p: Pattern, cells: List[CellRecord]) -> List[RuleViolation]:
    if not p.has_layer(ORIENTATION):
        return []
    x0, y0 = p.origin[:2]
    layer = p.layer(ORIENTATION)
    expected = orientation_layer(p, cells)
    found = _mask_violations("orientation-localization", (layer != 0) != (expected != 0), (x0, y0),
                             "Символ ориентации вне границы клетки с родителем.")
    for cell in cells:
        border = cell_border(cell)
        sw = border[0]
        reference = int(layer[sw[1] - y0, sw[0] - x0])
        if reference == 0:
            continue
        if reference != int(expected[sw[1] - y0, sw[0] - x0]):
            found.append(_violation("orientation-transformation", sw,
                                    f"Клетка уровня {cell.order} несёт ориентацию {reference - 1}."))
        for x, y in border[1:]:
            value = int(layer[y - y0, x - x0])
            if value != 0 and value != reference:
                found.append(_violation("orientation-transmission", (x, y),
                                        "Ориентация меняется вдоль границы клетки."))
    return found


# Общие проверки

def _violation(rule_id: str, position, detail: str) -> RuleViolation:
    return RuleViolation(rule_id=rule_id, positions=[tuple(position)], detail=detail)


def _mask_violations(rule_id: str, mask: np.ndarray, origin, detail: str) -> List[RuleViolation]:
    x0, y0 = origin
    return [_violation(rule_id, (x0 + int(col), y0 + int(row)), detail) for row, col in np.argwhere(mask)]


def _check_content(name: str, p: Pattern, expected: np.ndarray) -> List[RuleViolation]:
    x0, y0 = p.origin[:2]
    layer = p.layer(name)
    found = _mask_violations(f"{name.replace('_', '-')}-localization", (layer != 0) != (expected != 0), (x0, y0),
                             f"Символ слоя {name} вне своих органитов.")
    wrong = (layer != expected) & (layer != 0) & (expected > 0)
    found += [
        _violation(f"{name.replace('_', '-')}-content", (x0 + int(col), y0 + int(row)),
                   f"Слой {name}: код {int(layer[row, col])}, ожидался {int(expected[row, col])}.")
        for row, col in np.argwhere(wrong)
    ]
    return found


def check_linear_transport(p: Pattern, cells: List[CellRecord], grid: Grid) -> List[RuleViolation]:
    if not p.has_layer(LINEAR_TRANSPORT):
        return []
    return _check_content(LINEAR_TRANSPORT, p, linear_transport_layer(p, cells, grid))


def check_extraction(p: Pattern, cells: List[CellRecord], grid: Grid) -> List[RuleViolation]:
    if not p.has_layer(EXTRACTION):
        return []
    return _check_content(EXTRACTION, p, extraction_layer(p, cells, grid))


def transport_layers(p: Pattern, marked: List[CellRecord], grid: Grid, bits: Bits) -> Dict[str, np.ndarray]:
    """
    Слои транспорта, зависящие от сечения. Образец уже несёт function,
    модулярность и линейные счётчики; диагонали и ориентация входят в структуру.
    """
    layers = {
        BORDER: border_layer(p, marked, grid, bits),
        LINEAR_TRANSPORT: linear_transport_layer(p, marked, grid),
        EXTRACTION: extraction_layer(p, marked, grid),
        INTERCELL: intercell_layer(p, marked, grid, bits),
    }
    for name, values in layers.items():
        if (values < 0).any():
            logger.error("Transport layer %s has symbols without a source", name)
            raise SftException(f"Слой {name} содержит символы без источника.")
    return layers
