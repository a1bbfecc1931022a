"""
Первый слой Робинсона: генерация супертайлов и окон плоскости, проверка
локальных правил, поиск вхождений блоков и достраивание блока до супертайла.

Генерация идёт по замкнутой формуле на координатах квадранта (X, Y >= 0).
Уровень координаты lev(v) - число младших единичных битов v. Позиция с
lev(X) == lev(Y) == m - угол (синий при m == 0, красный центр St(m) иначе),
при lev(X) > lev(Y) - вертикальное плечо креста St(lev(X)), иначе горизонтальное.
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import MissingLayer, NotFound, OrderTooLarge, WindowTooLarge
from app.core.logger import get_logger
from app.models.robinson import ARROW_KINDS, Corner, Direction, SymbolKind
from app.schemas.pattern import Pattern, RuleViolation, sort_violations
from app.services import codes

logger = get_logger(__name__)

ROBINSON = "robinson"
ALIGNMENT = "alignment"

# Самая старшая позиция бита, используемая сдвигом окна плоскости
_OFFSET_TOP_BIT = 60
_MAX_WINDOW_ORIGIN = 2**40

_KIND_INDEX = {kind: index for index, kind in enumerate(ARROW_KINDS)}
_ARROW_3 = _KIND_INDEX[SymbolKind.ARROW_3]
_ARROW_4 = _KIND_INDEX[SymbolKind.ARROW_4]
_ARROW_4M = _KIND_INDEX[SymbolKind.ARROW_4M]
_ARROW_5 = _KIND_INDEX[SymbolKind.ARROW_5]
_ARROW_6 = _KIND_INDEX[SymbolKind.ARROW_6]
_ARROW_6M = _KIND_INDEX[SymbolKind.ARROW_6M]


def levels(values: np.ndarray) -> np.ndarray:
    """
    Число младших единичных битов каждого элемента (значения неотрицательны).
    """
    t = values.astype(np.int64) + 1
    lowest = t & -t
    return np.round(np.log2(lowest.astype(np.float64))).astype(np.int64)


def _bit(values: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.right_shift(values, k) & 1


def quadrant_layers(xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Слои robinson и alignment на прямоугольнике координат квадранта.
    :param xs: координаты X столбцов (int64, >= 0)
    :param ys: координаты Y строк (int64, >= 0)
    :return: два массива int16 с индексами [y, x]
    """
    X, Y = np.meshgrid(np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64))
    a = levels(X)
    b = levels(Y)
    m = np.maximum(a, b)

    # Ориентация центра креста порядка m, которому принадлежит позиция
    east = _bit(X, m + 1)
    north = _bit(Y, m + 1)
    orientation = (north << 1) | east

    robinson = np.zeros(X.shape, dtype=np.int16)
    alignment = np.zeros(X.shape, dtype=np.int16)

    blue = (a == b) & (a == 0)
    red = (a == b) & (a > 0)
    robinson[blue] = codes.BLUE_BASE + orientation[blue]
    robinson[red] = codes.RED_BASE + 2 * orientation[red] + (a[red] & 1)

    vertical = a > b
    horizontal = b > a
    one = np.int64(1)

    # Вертикальное плечо: центр в строке Yc, направление от центра
    centre_y = (np.right_shift(Y, a + 1) << (a + 1)) | ((one << a) - 1)
    vertical_dir = np.where(Y > centre_y, Direction.N.value, Direction.S.value)
    vertical_petal = np.where(north == 0, Direction.N.value, Direction.S.value)
    vertical_double = vertical_dir == vertical_petal
    vertical_mirror = east == 1

    centre_x = (np.right_shift(X, b + 1) << (b + 1)) | ((one << b) - 1)
    horizontal_dir = np.where(X > centre_x, Direction.E.value, Direction.W.value)
    horizontal_petal = np.where(east == 0, Direction.E.value, Direction.W.value)
    horizontal_double = horizontal_dir == horizontal_petal
    horizontal_mirror = north == 1

    through = np.where(vertical, vertical_dir, horizontal_dir)
    through_double = np.where(vertical, vertical_double, horizontal_double)
    mirror = np.where(vertical, vertical_mirror, horizontal_mirror)
    sides_double = np.abs(a - b) == 1

    kind_index = np.where(
        through_double,
        np.where(
            sides_double,
            np.where(mirror, _ARROW_6M, _ARROW_6),
            np.where(mirror, _ARROW_4M, _ARROW_4),
        ),
        np.where(sides_double, _ARROW_5, _ARROW_3),
    )
    i = b & 1
    j = a & 1
    arrows = vertical | horizontal
    arrow_codes = codes.ARROW_BASE + ((kind_index * 4 + through) * 2 + i) * 2 + j
    robinson[arrows] = arrow_codes[arrows]

    # Плечи с одинарной сквозной линией крестов порядка >= 2 несут ориентацию центра
    marked = arrows & ~through_double & (m >= 2)
    alignment[marked] = 1 + orientation[marked]
    return robinson, alignment


def _check_order(n: int, cap: Optional[int] = None) -> None:
    cap = settings.max_supertile_order if cap is None else cap
    if n < 0:
        raise OrderTooLarge(f"Порядок {n} должен быть неотрицательным.")
    if n > cap:
        logger.error("Supertile order %s exceeds cap %s", n, cap)
        raise OrderTooLarge(f"Порядок {n} превышает допустимый максимум {cap}.")


def _supertile(corner: Corner, n: int) -> Pattern:
    side = 2 ** (n + 1) - 1
    step = 2 ** (n + 1)
    xs = np.arange(side, dtype=np.int64) + (step if corner.east else 0)
    ys = np.arange(side, dtype=np.int64) + (step if corner.north else 0)
    robinson, alignment = quadrant_layers(xs, ys)
    return Pattern(origin=(0, 0), size=(side, side), layers={ROBINSON: robinson, ALIGNMENT: alignment})


def generate_supertile(corner: Corner, n: int) -> Pattern:
    """
    Супертайл St_corner(n): квадрат стороны 2^(n+1)-1 с красным углом в центре (n >= 1).
    :param corner: ориентация центрального угла
    :param n: порядок
    :return: образец со слоями robinson и alignment, начало в (0, 0)
    """
    _check_order(n)
    return _supertile(corner, n)


def plane_offset(n: int) -> int:
    """
    Сдвиг мировых координат окна плоскости в координаты квадранта.
    Начало мира попадает в юго-западный угол St_sw(n); старшие биты чередуют
    ориентации, поэтому конфигурация покрывает всю плоскость.
    """
    return sum(2 ** e for e in range(n + 3, _OFFSET_TOP_BIT, 2))


def tile_plane(n: int, x0: int, y0: int, w: int, h: int) -> Pattern:
    """
    Окно детерминированной конфигурации плоскости, в которой супертайлы порядка n
    повторяются с периодом 2^(n+2) по обеим осям.
    """
    _check_order(n)
    if w <= 0 or h <= 0 or max(w, h) > settings.max_window_side:
        raise WindowTooLarge(
            f"Окно {w}x{h} выходит за допустимый размер {settings.max_window_side}."
        )
    if max(abs(x0), abs(y0)) > _MAX_WINDOW_ORIGIN:
        raise WindowTooLarge(f"Начало окна ({x0}, {y0}) слишком далеко от начала координат.")
    offset = plane_offset(n)
    xs = np.arange(x0, x0 + w, dtype=np.int64) + offset
    ys = np.arange(y0, y0 + h, dtype=np.int64) + offset
    robinson, alignment = quadrant_layers(xs, ys)
    return Pattern(origin=(x0, y0), size=(w, h), layers={ROBINSON: robinson, ALIGNMENT: alignment})


def shifted(values: np.ndarray, dx: int, dy: int, fill: int = 0) -> np.ndarray:
    """
    Значение соседа (x+dx, y+dy) для каждой позиции; вне опоры - fill.
    """
    h, w = values.shape
    padded = np.pad(values, 2, constant_values=fill)
    return padded[2 + dy:2 + dy + h, 2 + dx:2 + dx + w]


def _positions(mask: np.ndarray, origin: tuple, offsets: List[Tuple[int, int]], z: Optional[int]) -> List[list]:
    x0, y0 = origin
    found = []
    for row, col in np.argwhere(mask):
        cells = []
        for dx, dy in offsets:
            point = (x0 + int(col) + dx, y0 + int(row) + dy)
            cells.append(point if z is None else point + (z,))
        found.append(cells)
    return found


def _ports_match(a: np.ndarray, b: np.ndarray, side_a: Direction) -> np.ndarray:
    side_b = side_a.opposite
    state_a = codes.PORT_STATE[a, side_a.value]
    state_b = codes.PORT_STATE[b, side_b.value]
    weight_a = codes.PORT_WEIGHT[a, side_a.value]
    weight_b = codes.PORT_WEIGHT[b, side_b.value]
    inner_a = codes.PORT_INNER[a, side_a.value]
    inner_b = codes.PORT_INNER[b, side_b.value]
    directed = ((state_a == codes.PORT_OUT) & (state_b == codes.PORT_IN)) | (
        (state_a == codes.PORT_IN) & (state_b == codes.PORT_OUT)
    )
    return directed & (weight_a == weight_b) & ((weight_a == codes.SINGLE) | (inner_a == inner_b))


def _violations(rule_id: str, mask: np.ndarray, origin: tuple, offsets, detail: str, z) -> List[RuleViolation]:
    return [
        RuleViolation(rule_id=rule_id, positions=cells, detail=detail)
        for cells in _positions(mask, origin, offsets, z)
    ]


def check_section(robinson: np.ndarray, alignment: Optional[np.ndarray], origin: tuple, z: Optional[int] = None) -> List[RuleViolation]:
    """
    Проверка правил Робинсона на одном двумерном сечении.
    Ограничения, затрагивающие позиции вне опоры, пропускаются.
    """
    c = robinson.astype(np.int64)
    found: List[RuleViolation] = []
    present = c != codes.BLANK

    # Правило 1: входящие и исходящие стрелки соответствуют друг другу
    right = shifted(c, 1, 0)
    up = shifted(c, 0, 1)
    bad = present & (right != codes.BLANK) & ~_ports_match(c, right, Direction.E)
    found += _violations("arrow-correspondence", bad, origin, [(0, 0), (1, 0)],
                         "Несогласованные линии на горизонтальной границе.", z)
    bad = present & (up != codes.BLANK) & ~_ports_match(c, up, Direction.N)
    found += _violations("arrow-correspondence", bad, origin, [(0, 0), (0, 1)],
                         "Несогласованные линии на вертикальной границе.", z)

    # Правило 2: в каждом квадрате 2x2 есть синий угол, синие углы повторяются через 2
    blue = codes.IS_BLUE[c]
    h, w = c.shape
    if h >= 2 and w >= 2:
        square_present = present[:-1, :-1] & present[1:, :-1] & present[:-1, 1:] & present[1:, 1:]
        square_blue = blue[:-1, :-1] | blue[1:, :-1] | blue[:-1, 1:] | blue[1:, 1:]
        bad = np.zeros_like(present)
        bad[:-1, :-1] = square_present & ~square_blue
        found += _violations("blue-density", bad, origin, [(0, 0), (1, 0), (0, 1), (1, 1)],
                             "Квадрат 2x2 без синего угла.", z)
    for dx, dy in ((2, 0), (0, 2)):
        other = shifted(c, dx, dy)
        bad = present & (other != codes.BLANK) & (blue != codes.IS_BLUE[other])
        found += _violations("blue-density", bad, origin, [(0, 0), (dx, dy)],
                             "Синие углы должны повторяться с шагом 2.", z)

    # Правила 3 и 4: счётчик чётности (i по строкам, j по столбцам)
    par_i = codes.PAR_I[c]
    par_j = codes.PAR_J[c]
    bad = present & (right != codes.BLANK) & (par_i != codes.PAR_I[right])
    found += _violations("parity-transmission", bad, origin, [(0, 0), (1, 0)],
                         "Отметка i меняется вдоль строки.", z)
    bad = present & (up != codes.BLANK) & (par_j != codes.PAR_J[up])
    found += _violations("parity-transmission", bad, origin, [(0, 0), (0, 1)],
                         "Отметка j меняется вдоль столбца.", z)
    bad = codes.DOUBLE_SIDES[c] & (par_i == par_j)
    found += _violations("parity-inequality", bad, origin, [(0, 0)],
                         "На стрелках 5 и 6 отметки i и j должны различаться.", z)

    if alignment is not None:
        found += _check_alignment(c, alignment.astype(np.int64), origin, z)
    return found


def _check_alignment(c: np.ndarray, mark: np.ndarray, origin: tuple, z) -> List[RuleViolation]:
    found: List[RuleViolation] = []
    through = codes.THROUGH[c]
    alignable = codes.ALIGNABLE[c]
    three = codes.THREE[c]

    bad = (mark != 0) & ~alignable
    found += _violations("alignment-localization", bad, origin, [(0, 0)],
                         "Отметка выравнивания вне стрелок 3 и 5.", z)

    for d in Direction:
        # Индукция: стрелка 3, выходящая из угла, несёт его ориентацию
        tail = shifted(c, -d.dx, -d.dy)
        tail_corner = codes.CORNER[tail]
        bad = three & (through == d.value) & codes.IS_CORNER[tail] & (mark != tail_corner + 1)
        found += _violations("alignment-induction", bad, origin, [(0, 0), (-d.dx, -d.dy)],
                             "Стрелка 3 у угла должна нести его ориентацию.", z)
        # Передача вдоль сквозной линии
        ahead = shifted(c, d.dx, d.dy)
        ahead_mark = shifted(mark, d.dx, d.dy)
        bad = (
            alignable & (through == d.value)
            & codes.ALIGNABLE[ahead] & (codes.THROUGH[ahead] == d.value)
            & (mark != ahead_mark)
        )
        found += _violations("alignment-transmission", bad, origin, [(0, 0), (d.dx, d.dy)],
                             "Отметка выравнивания меняется вдоль линии.", z)

    # Синхронизация на тройках: горизонтальной (L, M, R) и вертикальной (B, M, T)
    left, left_mark = shifted(c, -1, 0), shifted(mark, -1, 0)
    right, right_mark = shifted(c, 1, 0), shifted(mark, 1, 0)
    vertical_middle = (
        (codes.KIND[c] >= 2) & codes.SINGLE_SIDES[c]
        & np.isin(through, (Direction.N.value, Direction.S.value))
    )
    triple = (
        vertical_middle
        & codes.THREE[left] & (codes.THROUGH[left] == Direction.E.value)
        & codes.THREE[right] & (codes.THROUGH[right] == Direction.W.value)
    )
    allowed = ((left_mark == 4) & (right_mark == 3)) | ((left_mark == 2) & (right_mark == 1))
    found += _violations("alignment-synchronization", triple & ~allowed, origin, [(-1, 0), (0, 0), (1, 0)],
                         "Горизонтальная тройка допускает только (ne, nw) или (se, sw).", z)

    below, below_mark = shifted(c, 0, -1), shifted(mark, 0, -1)
    above, above_mark = shifted(c, 0, 1), shifted(mark, 0, 1)
    horizontal_middle = (
        (codes.KIND[c] >= 2) & codes.SINGLE_SIDES[c]
        & np.isin(through, (Direction.E.value, Direction.W.value))
    )
    triple = (
        horizontal_middle
        & codes.THREE[below] & (codes.THROUGH[below] == Direction.N.value)
        & codes.THREE[above] & (codes.THROUGH[above] == Direction.S.value)
    )
    allowed = ((below_mark == 3) & (above_mark == 1)) | ((below_mark == 4) & (above_mark == 2))
    found += _violations("alignment-synchronization", triple & ~allowed, origin, [(0, -1), (0, 0), (0, 1)],
                         "Вертикальная тройка допускает только (nw, sw) или (ne, se).", z)
    return found


def check_robinson_rules(p: Pattern) -> List[RuleViolation]:
    """
    Проверяет правила Робинсона (и слоя выравнивания, если он есть) внутри опоры.
    Трёхмерный образец проверяется по сечениям.
    :return: нарушения, отсортированные по позиции и идентификатору правила
    """
    if not p.has_layer(ROBINSON):
        logger.error("Pattern has no %s layer", ROBINSON)
        raise MissingLayer(f"В образце нет слоя {ROBINSON}.")
    origin = tuple(p.origin[:2])
    robinson = p.layer(ROBINSON)
    alignment = p.layers.get(ALIGNMENT)
    if p.dim == 2:
        found = check_section(robinson, alignment, origin)
    else:
        found = []
        for k in range(p.depth):
            found += check_section(
                robinson[k], None if alignment is None else alignment[k], origin, p.origin[2] + k
            )
    if found:
        logger.warning("Robinson check found %s violations", len(found))
    return sort_violations(found)


def chi(n: int) -> int:
    if n < 1:
        raise ValueError("Сторона блока должна быть не меньше 1.")
    return math.ceil(math.log2(n)) + 4


def chi_prime(n: int) -> int:
    if n < 1:
        raise ValueError("Сторона блока должна быть не меньше 1.")
    return math.ceil(math.ceil(math.log2(n)) / 2) + 2


def find_occurrences(p: Pattern, block: Pattern, layer_names: Optional[List[str]] = None) -> List[Tuple[int, int]]:
    """
    Все смещения (x, y) мировых координат, где block совпадает с p по выбранным слоям.
    Кандидаты отбираются по первой позиции блока и затем сужаются по остальным.
    """
    names = layer_names or [n for n in block.layer_names if p.has_layer(n)]
    bw, bh = block.width, block.height
    if bw > p.width or bh > p.height:
        return []
    rows = p.height - bh + 1
    cols = p.width - bw + 1
    candidates = np.argwhere(np.ones((rows, cols), dtype=bool))
    for name in names:
        target = p.layer(name)
        pattern = block.layer(name)
        for dy in range(bh):
            for dx in range(bw):
                if len(candidates) == 0:
                    return []
                keep = target[candidates[:, 0] + dy, candidates[:, 1] + dx] == pattern[dy, dx]
                candidates = candidates[keep]
    x0, y0 = p.origin[:2]
    return sorted((x0 + int(col), y0 + int(row)) for row, col in candidates)


def complete_block(b: Pattern) -> Tuple[int, Tuple[int, int]]:
    """
    Наименьший порядок o <= chi(стороны блока) и смещение, при которых блок
    входит в St_sw(o). Перебор смещений полный, при равенстве берётся
    лексикографически наименьшее смещение.
    """
    if not b.has_layer(ROBINSON):
        raise MissingLayer(f"В блоке нет слоя {ROBINSON}.")
    side = max(b.width, b.height)
    bound = chi(side)
    names = [n for n in (ROBINSON, ALIGNMENT) if b.has_layer(n)]
    for order in range(0, bound + 1):
        if order > settings.max_chi_order:
            break
        if 2 ** (order + 1) - 1 < side:
            continue
        found = find_occurrences(_supertile(Corner.SW, order), b, names)
        if found:
            return order, found[0]
    logger.error("Block of side %s not found up to order %s", side, bound)
    raise NotFound(f"Блок стороны {side} не найден в супертайлах порядка до {bound}.")


def cell_region(level: int) -> Tuple[Pattern, Tuple[int, int]]:
    """
    Окно St_sw(2*level+2) и юго-западный угол его центральной клетки уровня level.
    """
    window = _supertile(Corner.SW, 2 * level + 2)
    corner = 2 ** (2 * level + 1) - 1
    return window, (corner, corner)


def complete_block_in_cell(b: Pattern) -> Tuple[int, Tuple[int, int]]:
    """
    Наименьший уровень клетки L <= chi_prime(стороны) такой, что блок входит
    внутрь клетки уровня L; смещение отсчитывается от юго-западного угла клетки.
    """
    side = max(b.width, b.height)
    bound = chi_prime(side)
    names = [n for n in (ROBINSON, ALIGNMENT) if b.has_layer(n)]
    for level in range(0, bound + 1):
        if 2 * level + 2 > settings.max_chi_order:
            break
        window, (cx, cy) = cell_region(level)
        cell_side = 4 ** (level + 1) + 1
        if cell_side < side:
            continue
        inner = window.crop(cx, cy, cell_side, cell_side)
        found = find_occurrences(inner, b, names)
        if found:
            x, y = found[0]
            return level, (x - cx, y - cy)
    raise NotFound(f"Блок стороны {side} не найден в клетках уровня до {bound}.")
