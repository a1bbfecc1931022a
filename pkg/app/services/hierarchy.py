"""
Иерархия лепестков и клеток: извлечение из слоя Робинсона, разбиение клеток
на органиты, функциональные зоны и отметки модулярности.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import CellTooSmall
from app.core.logger import get_logger
from app.models.hierarchy import AreaFunction, OrganiteRole, PetalRole
from app.models.robinson import Corner, Direction
from app.schemas.hierarchy import CellRecord, OrganiteFunction, Petal
from app.schemas.pattern import Box, Pattern, RuleViolation, sort_violations
from app.services import codes
from app.services.robinson import ROBINSON

logger = get_logger(__name__)

MODULARITY = "modularity"
FUNCTION = "function"
ORGANITE = "organite"

ORGANITE_GRAY = 65
MIN_SUBDIVIDED_ORDER = 3

# Функции органитов (i - с запада на восток, j - с юга на север).
# Порядок групп задаёт приоритет при совпадении координат.
_ORGANITE_GROUPS = (
    (OrganiteRole.MACHINE, ((6, 5),)),
    (OrganiteRole.DEMULTIPLEXER, ((1, 3), (3, 3), (6, 3), (3, 7), (6, 7))),
    (OrganiteRole.LINEAR_INCREMENT, ((2, 3),)),
    (OrganiteRole.SYSTEM_COUNTER, ((3, 4), (4, 3), (4, 4), (2, 5), (5, 2))),
    (OrganiteRole.TRANSPORT, ((6, 1), (6, 2), (6, 4), (5, 3), (3, 5), (3, 6), (4, 7), (5, 7))),
)


def _organite_table() -> Dict[Tuple[int, int], OrganiteRole]:
    table = {(i, j): OrganiteRole.NONE for i in range(8) for j in range(8)}
    assigned = set()
    for role, places in _ORGANITE_GROUPS:
        for place in places:
            if place not in assigned:
                table[place] = role
                assigned.add(place)
    return table


ORGANITE_TABLE = _organite_table()


def organite_function(i: int, j: int) -> OrganiteRole:
    return ORGANITE_TABLE[(i % 8, j % 8)]


def organite_functions() -> List[OrganiteFunction]:
    return [OrganiteFunction(i=i, j=j, function=role) for (i, j), role in sorted(ORGANITE_TABLE.items())]


def _robinson_2d(p: Pattern) -> np.ndarray:
    values = p.layer(ROBINSON)
    if p.dim == 3:
        values = values[0]
    return values.astype(np.int64)


def _is_power_of_two(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


def extract_petals(p: Pattern) -> List[Petal]:
    """
    Все лепестки, целиком лежащие в опоре.
    От каждого юго-западного угла ищется ближайший угол к востоку в той же строке,
    затем проверяются остальные три угла и двойные линии по сторонам.
    :return: лепестки, отсортированные по (порядок, x, y)
    """
    c = _robinson_2d(p)
    h, w = c.shape
    x0, y0 = p.origin[:2]
    is_corner = codes.IS_CORNER[c]
    corner = codes.CORNER[c]
    is_red = codes.IS_RED[c]
    bit = codes.BIT[c]
    weight_e = codes.PORT_WEIGHT[c, Direction.E.value]
    weight_n = codes.PORT_WEIGHT[c, Direction.N.value]
    row_corners = [np.flatnonzero(is_corner[r]) for r in range(h)]

    petals: List[Petal] = []
    for r, col in np.argwhere(is_corner & (corner == Corner.SW.value)):
        r, col = int(r), int(col)
        xs = row_corners[r]
        k = int(np.searchsorted(xs, col, side="right"))
        if k == len(xs):
            continue
        col2 = int(xs[k])
        side = col2 - col + 1
        if side < 3 or not _is_power_of_two(side - 1):
            continue
        r2 = r + side - 1
        if r2 >= h:
            continue
        expected = ((r, col2, Corner.SE), (r2, col, Corner.NW), (r2, col2, Corner.NE))
        if any(not is_corner[rr, cc] or corner[rr, cc] != o.value for rr, cc, o in expected):
            continue
        if any(is_red[rr, cc] != is_red[r, col] or bit[rr, cc] != bit[r, col] for rr, cc, _ in expected):
            continue
        if not (
            np.all(weight_e[r, col:col2] == codes.DOUBLE)
            and np.all(weight_e[r2, col:col2] == codes.DOUBLE)
            and np.all(weight_n[r:r2, col] == codes.DOUBLE)
            and np.all(weight_n[r:r2, col2] == codes.DOUBLE)
        ):
            continue
        order = (side - 1).bit_length() - 2
        role = PetalRole.SUPPORT if is_red[r, col] and bit[r, col] == 1 else PetalRole.TRANSMISSION
        x, y = x0 + col, y0 + r
        petals.append(
            Petal(
                order=order,
                box=Box(x=x, y=y, w=side, h=side),
                role=role,
                corners=[(x, y), (x + side - 1, y), (x, y + side - 1), (x + side - 1, y + side - 1)],
            )
        )
    return sorted(petals, key=lambda pt: (pt.order, pt.box.x, pt.box.y))


def detect_cells(p: Pattern) -> List[CellRecord]:
    """
    Клетки уровня n - лепестки нечётного порядка 2n+1.
    """
    cells = [
        CellRecord(order=(pt.order - 1) // 2, box=pt.box, petal_order=pt.order)
        for pt in extract_petals(p)
        if pt.order % 2 == 1
    ]
    return sorted(cells, key=lambda cell: (cell.order, cell.box.x, cell.box.y))


def sub_cells(cell: CellRecord, cells: List[CellRecord]) -> List[CellRecord]:
    return [other for other in cells if other.box.strictly_inside(cell.box)]


def _cell_arrays(cells: List[CellRecord]) -> np.ndarray:
    if not cells:
        return np.zeros((0, 5), dtype=np.int64)
    return np.array([(c.box.x, c.box.y, c.box.w, c.box.h, c.order) for c in cells], dtype=np.int64)


def _strictly_inside(boxes: np.ndarray, cell: CellRecord) -> np.ndarray:
    b = cell.box
    return (
        (boxes[:, 0] > b.x) & (boxes[:, 0] + boxes[:, 2] < b.x + b.w)
        & (boxes[:, 1] > b.y) & (boxes[:, 1] + boxes[:, 3] < b.y + b.h)
    )


def _blocked_lines(cell: CellRecord, inner: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Какие столбцы и строки клетки (от края до края) пересекают её подклетки.
    """
    b = cell.box
    columns = np.zeros(b.w, dtype=bool)
    rows = np.zeros(b.h, dtype=bool)
    for x, y, w, h, _ in inner:
        columns[x - b.x:x - b.x + w] = True
        rows[y - b.y:y - b.y + h] = True
    return columns, rows


def _interior_blue(cell: CellRecord, p: Pattern) -> np.ndarray:
    c = _robinson_2d(p)
    x0, y0 = p.origin[:2]
    b = cell.box
    window = c[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
    blue = codes.IS_BLUE[window].copy()
    blue[0, :] = blue[-1, :] = False
    blue[:, 0] = blue[:, -1] = False
    return blue


def _function_codes(cell: CellRecord, p: Pattern, boxes: np.ndarray) -> np.ndarray:
    """
    Коды функциональных зон (AreaFunction.value) на позициях синих углов клетки, 0 - прочие.
    """
    inner = boxes[_strictly_inside(boxes, cell)]
    columns, rows = _blocked_lines(cell, inner)
    blue = _interior_blue(cell, p)
    column_blocked = np.broadcast_to(columns[None, :], blue.shape)
    row_blocked = np.broadcast_to(rows[:, None], blue.shape)
    values = np.select(
        [
            column_blocked & row_blocked,
            column_blocked,
            row_blocked,
        ],
        [
            AreaFunction.NONE.value,
            AreaFunction.TRANSFER_V.value,
            AreaFunction.TRANSFER_H.value,
        ],
        default=AreaFunction.COMPUTATION.value,
    )
    return np.where(blue, values, 0)


def assign_functional_areas(
    c: CellRecord, p: Pattern, cells: Optional[List[CellRecord]] = None
) -> Dict[Tuple[int, int], AreaFunction]:
    """
    Функция каждой позиции синего угла внутри клетки.
    Строка или столбец считаются занятыми, если пересекают подклетку.
    :param cells: клетки образца; если не заданы, определяются заново
    """
    cells = detect_cells(p) if cells is None else cells
    values = _function_codes(c, p, _cell_arrays(cells))
    functions = {}
    for row, col in np.argwhere(values > 0):
        functions[(c.box.x + int(col), c.box.y + int(row))] = AreaFunction(int(values[row, col]))
    return functions


def computation_lines(
    c: CellRecord, p: Pattern, cells: Optional[List[CellRecord]] = None
) -> Tuple[List[int], List[int]]:
    """
    Свободные столбцы и строки синих углов клетки (мировые координаты).
    Их пересечения - позиции вычислений.
    """
    cells = detect_cells(p) if cells is None else cells
    values = _function_codes(c, p, _cell_arrays(cells))
    computing = values == AreaFunction.COMPUTATION.value
    columns = [c.box.x + int(i) for i in np.flatnonzero(computing.any(axis=0))]
    rows = [c.box.y + int(i) for i in np.flatnonzero(computing.any(axis=1))]
    return columns, rows


def organite_index(t: int, count: int) -> int:
    """
    Номер органита для функциональной линии с номером t из count.
    """
    return t * 8 // count


def organite_boxes(cell: CellRecord, columns: List[int], rows: List[int]) -> Dict[Tuple[int, int], Box]:
    """
    Квадраты органитов: органит (i, j) охватывает свою группу функциональных столбцов и строк.
    :param columns: функциональные столбцы клетки (мировые координаты, по возрастанию)
    :param rows: функциональные строки клетки
    """
    if len(columns) < 8 or len(rows) < 8:
        raise CellTooSmall(f"У клетки уровня {cell.order} меньше восьми функциональных линий.")

    def groups(lines: List[int]) -> List[Tuple[int, int]]:
        bounds = [[None, None] for _ in range(8)]
        for t, v in enumerate(lines):
            k = organite_index(t, len(lines))
            bounds[k][0] = v if bounds[k][0] is None else bounds[k][0]
            bounds[k][1] = v
        return [(low, high - low + 1) for low, high in bounds]

    xs, ys = groups(columns), groups(rows)
    return {
        (i, j): Box(x=xs[i][0], y=ys[j][0], w=xs[i][1], h=ys[j][1])
        for i in range(8)
        for j in range(8)
    }


def address_triple(i: int, j: int) -> Tuple[int, int, int]:
    """
    Адрес органита как три последовательных выбора квадранта в Z/4Z:
    q_k = (бит j << 1) | бит i, от старшего бита к младшему.
    """
    return tuple((((j >> s) & 1) << 1) | ((i >> s) & 1) for s in (2, 1, 0))


def triple_code(triple: Tuple[int, int, int]) -> int:
    q1, q2, q3 = triple
    return 1 + 16 * q1 + 4 * q2 + q3


def _organite_codes(cell: CellRecord, p: Pattern, boxes: np.ndarray) -> np.ndarray:
    """
    Ожидаемый сигнальный слой органитов внутри клетки уровня >= 3:
    адрес органита на функциональных позициях, серый символ на прочих синих углах
    и в подклетках уровня <= 2, 0 в подклетках уровня >= 3 (их размечает сама подклетка).
    """
    b = cell.box
    blue = _interior_blue(cell, p)
    functions = _function_codes(cell, p, boxes)
    computing = functions == AreaFunction.COMPUTATION.value
    columns = np.flatnonzero(computing.any(axis=0))
    rows = np.flatnonzero(computing.any(axis=1))
    values = np.full(blue.shape, ORGANITE_GRAY, dtype=np.int64)
    if len(columns) >= 8 and len(rows) >= 8:
        i = np.zeros(b.w, dtype=np.int64)
        j = np.zeros(b.h, dtype=np.int64)
        i[columns] = np.arange(len(columns)) * 8 // len(columns)
        j[rows] = np.arange(len(rows)) * 8 // len(rows)
        lookup = np.zeros((8, 8), dtype=np.int64)
        for u in range(8):
            for v in range(8):
                lookup[v, u] = triple_code(address_triple(u, v))
        addressed = lookup[j[:, None], i[None, :]]
        values = np.where(computing, addressed, values)
    inner = boxes[_strictly_inside(boxes, cell)]
    for x, y, w, h, order in inner.tolist():
        if order >= MIN_SUBDIVIDED_ORDER:
            values[y - b.y:y - b.y + h, x - b.x:x - b.x + w] = 0
    return np.where(blue, values, 0)


def check_organite_signals(
    c: CellRecord, p: Pattern, cells: Optional[List[CellRecord]] = None
) -> List[RuleViolation]:
    """
    Сверяет слой organite с разбиением функциональных позиций клетки.
    """
    if not p.has_layer(ORGANITE):
        return []
    cells = detect_cells(p) if cells is None else cells
    expected = _organite_codes(c, p, _cell_arrays(cells))
    layer = p.layer(ORGANITE)
    if p.dim == 3:
        layer = layer[0]
    x0, y0 = p.origin[:2]
    b = c.box
    actual = layer[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
    # Позиции вложенных клеток уровня >= 3 проверяются ими самими
    mismatch = (actual != expected) & ~((expected == 0) & _interior_blue(c, p))
    violations = [
        RuleViolation(
            rule_id="organite-signal",
            positions=[(b.x + int(col), b.y + int(row))],
            detail=f"Ожидался код {int(expected[row, col])}, найден {int(actual[row, col])}.",
        )
        for row, col in np.argwhere(mismatch)
    ]
    return sort_violations(violations)


def subdivide_cell(
    c: CellRecord, p: Pattern, cells: Optional[List[CellRecord]] = None
) -> CellRecord:
    """
    Разбиение клетки уровня >= 3 на 64 органита с проверкой сигнального слоя.
    """
    if c.order < MIN_SUBDIVIDED_ORDER:
        logger.error("Cell of order %s is too small to subdivide", c.order)
        raise CellTooSmall(f"Клетка уровня {c.order} слишком мала для разбиения на органиты.")
    cells = detect_cells(p) if cells is None else cells
    columns, rows = computation_lines(c, p, cells)
    violations = check_organite_signals(c, p, cells)
    if violations:
        logger.warning("Organite signal layer has %s violations", len(violations))
    return c.updated(organites=organite_boxes(c, columns, rows), violations=list(c.violations) + violations)


def _north_east_child(cell: CellRecord, cells: List[CellRecord]) -> Optional[CellRecord]:
    children = [o for o in cells if o.order == cell.order - 1 and o.box.strictly_inside(cell.box)]
    if not children:
        return None
    return max(children, key=lambda o: (o.box.x, o.box.y))


def modularity_marks(cells: List[CellRecord]) -> Tuple[List[CellRecord], List[RuleViolation]]:
    """
    Отметки модулярности: 0 на клетках уровня 0, далее отметка северо-восточной
    подклетки предыдущего уровня плюс один по модулю 4.
    Заранее заданные отметки (прочитанные из слоя) сверяются с этим правилом.
    """
    ordered = sorted(cells, key=lambda cell: (cell.order, cell.box.x, cell.box.y))
    computed: Dict[Tuple[int, int], int] = {}
    presets = {cell.anchor: cell.modularity for cell in ordered}
    violations: List[RuleViolation] = []
    marked: List[CellRecord] = []
    for cell in ordered:
        if cell.order == 0:
            expected = 0
            mark = 0
        else:
            child = _north_east_child(cell, ordered)
            if child is None:
                # Подклетка не попала в список: отметка берётся по уровню
                mark = cell.order % 4
                expected = mark
            else:
                mark = (computed[child.anchor] + 1) % 4
                child_preset = presets.get(child.anchor)
                expected = mark if child_preset is None else (child_preset + 1) % 4
        computed[cell.anchor] = mark
        preset = presets[cell.anchor]
        if preset is not None and preset != expected:
            violations.append(
                RuleViolation(
                    rule_id="modularity-transformation",
                    positions=[modularity_border(cell)[0]],
                    detail=f"Клетка уровня {cell.order}: отметка {preset}, ожидалась {expected}.",
                )
            )
        marked.append(cell.updated(modularity=mark))
    return marked, sort_violations(violations)


def modularity_border(cell: CellRecord) -> List[Tuple[int, int]]:
    """
    Восточная половина северной стороны и северная половина восточной стороны.
    """
    b = cell.box
    half = (b.w - 1) // 2
    top = b.y + b.h - 1
    right = b.x + b.w - 1
    north = [(x, top) for x in range(b.x + half, right + 1)]
    east = [(right, y) for y in range(b.y + half, top)]
    return north + east


def read_modularity(cells: List[CellRecord], p: Pattern, z: Optional[int] = None) -> List[CellRecord]:
    """
    Подставляет в клетки отметки, записанные в слое modularity (в северо-восточном углу).
    """
    if not p.has_layer(MODULARITY):
        return cells
    section = p if z is None else p.section(z)
    result = []
    for cell in cells:
        corner = (cell.box.x + cell.box.w - 1, cell.box.y + cell.box.h - 1)
        code = section.at(MODULARITY, corner)
        result.append(cell.updated(modularity=None if code == 0 else (code - 1) % 4))
    return result


def modularity_layer(p: Pattern, cells: List[CellRecord]) -> np.ndarray:
    """
    Слой modularity для размеченных клеток (коды 1..4 - отметки 0..3).
    """
    x0, y0 = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in sorted(cells, key=lambda c: -c.order):
        mark = cell.modularity if cell.modularity is not None else cell.order % 4
        for x, y in modularity_border(cell):
            layer[y - y0, x - x0] = mark + 1
    return layer


def check_modularity_layer(p: Pattern, cells: List[CellRecord], z: Optional[int] = None) -> List[RuleViolation]:
    """
    Локализация отметок: непустые коды только на северо-восточных четвертях границ клеток,
    одинаковые вдоль каждой такой границы. Правило перехода проверяет modularity_marks.
    """
    if not p.has_layer(MODULARITY):
        return []
    section = p if z is None else p.section(z)
    layer = section.layer(MODULARITY)
    x0, y0 = p.origin[:2]
    expected_present = np.zeros(layer.shape, dtype=bool)
    violations = []
    for cell in cells:
        border = modularity_border(cell)
        values = {int(layer[y - y0, x - x0]) for x, y in border}
        for x, y in border:
            expected_present[y - y0, x - x0] = True
        if 0 in values or len(values) > 1:
            violations.append(
                RuleViolation(
                    rule_id="modularity-localization",
                    positions=[border[0] if z is None else border[0] + (z,)],
                    detail=f"Граница клетки уровня {cell.order} несёт отметки {sorted(values)}.",
                )
            )
    stray = (layer != 0) & ~expected_present
    for row, col in np.argwhere(stray):
        position = (x0 + int(col), y0 + int(row))
        violations.append(
            RuleViolation(
                rule_id="modularity-localization",
                positions=[position if z is None else position + (z,)],
                detail="Отметка модулярности вне границы клетки.",
            )
        )
    return sort_violations(violations)


def function_layer(p: Pattern, cells: List[CellRecord]) -> np.ndarray:
    """
    Слой function: функция синего угла относительно наименьшей охватывающей клетки.
    """
    x0, y0 = p.origin[:2]
    boxes = _cell_arrays(cells)
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in sorted(cells, key=lambda c: -c.order):
        values = _function_codes(cell, p, boxes)
        b = cell.box
        region = layer[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        region[values > 0] = values[values > 0]
    return layer


def organite_layer(p: Pattern, cells: List[CellRecord]) -> np.ndarray:
    x0, y0 = p.origin[:2]
    boxes = _cell_arrays(cells)
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell in sorted(cells, key=lambda c: -c.order):
        if cell.order < MIN_SUBDIVIDED_ORDER:
            continue
        values = _organite_codes(cell, p, boxes)
        b = cell.box
        region = layer[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        region[values > 0] = values[values > 0]
    return layer


def _compare_layers(name: str, rule_id: str, actual: np.ndarray, expected: np.ndarray, origin, z) -> List[RuleViolation]:
    x0, y0 = origin
    violations = []
    for row, col in np.argwhere(actual != expected):
        position = (x0 + int(col), y0 + int(row))
        violations.append(
            RuleViolation(
                rule_id=rule_id,
                positions=[position if z is None else position + (z,)],
                detail=f"Слой {name}: код {int(actual[row, col])}, ожидался {int(expected[row, col])}.",
            )
        )
    return violations


def check_function_layer(p: Pattern, cells: List[CellRecord], z: Optional[int] = None) -> List[RuleViolation]:
    if not p.has_layer(FUNCTION):
        return []
    section = p if z is None else p.section(z)
    expected = function_layer(section, cells)
    return _compare_layers(FUNCTION, "function-area", section.layer(FUNCTION), expected, p.origin[:2], z)


def check_organite_layer(p: Pattern, cells: List[CellRecord], z: Optional[int] = None) -> List[RuleViolation]:
    if not p.has_layer(ORGANITE):
        return []
    section = p if z is None else p.section(z)
    expected = organite_layer(section, cells)
    return _compare_layers(ORGANITE, "organite-signal", section.layer(ORGANITE), expected, p.origin[:2], z)


def organite_mask(c: CellRecord, p: Pattern, cells: List[CellRecord], i: int, j: int) -> np.ndarray:
    """
    Функциональные позиции органита (i, j) клетки: синие углы, несущие его адрес.
    :return: булев массив над квадратом клетки
    """
    values = _organite_codes(c, p, _cell_arrays(cells))
    return values == triple_code(address_triple(i, j))


def computation_grid(p: Pattern, cells: List[CellRecord]) -> Dict[Tuple[int, int], Tuple[List[int], List[int]]]:
    """
    Свободные столбцы и строки каждой клетки (по юго-западному углу),
    посчитанные за один проход с общим массивом квадратов.
    """
    boxes = _cell_arrays(cells)
    grid = {}
    for cell in cells:
        computing = _function_codes(cell, p, boxes) == AreaFunction.COMPUTATION.value
        columns = [cell.box.x + int(i) for i in np.flatnonzero(computing.any(axis=0))]
        rows = [cell.box.y + int(i) for i in np.flatnonzero(computing.any(axis=1))]
        grid[cell.anchor] = (columns, rows)
    return grid


def word_positions(columns: List[int], rows: List[int], length: int, start: int = 0) -> List[Tuple[int, int]]:
    """
    Позиции слова на пересечениях области вычислений: по строкам с юго-запада,
    начиная с номера start.
    """
    if start + length > len(columns) * len(rows):
        raise CellTooSmall(
            f"Слово длины {length} не помещается в область {len(columns)}x{len(rows)} с позиции {start}."
        )
    width = len(columns)
    return [(columns[t % width], rows[t // width]) for t in range(start, start + length)]



def cell_border(cell: CellRecord) -> List[Tuple[int, int]]:
    """
    Позиции границы клетки против часовой стрелки от юго-западного угла.
    """
    b = cell.box
    right, top = b.x + b.w - 1, b.y + b.h - 1
    south = [(x, b.y) for x in range(b.x, right)]
    east = [(right, y) for y in range(b.y, top)]
    north = [(x, top) for x in range(right, b.x, -1)]
    west = [(b.x, y) for y in range(top, b.y, -1)]
    return south + east + north + west


def function_owners(p: Pattern, cells: List[CellRecord]) -> np.ndarray:
    """
    Номер наименьшей клетки, которой принадлежит функция синего угла (-1 - никакой);
    клетки закрашиваются так же, как в function_layer.
    """
    x0, y0 = p.origin[:2]
    boxes = _cell_arrays(cells)
    owners = np.full((p.height, p.width), -1, dtype=np.int64)
    for number in sorted(range(len(cells)), key=lambda k: -cells[k].order):
        cell = cells[number]
        values = _function_codes(cell, p, boxes)
        b = cell.box
        region = owners[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        region[values > 0] = number
    return owners


def organite_lines(columns: List[int], rows: List[int], i: int, j: int) -> Tuple[List[int], List[int]]:
    """
    Функциональные столбцы и строки органита (i, j).
    """
    xs = [x for t, x in enumerate(columns) if organite_index(t, len(columns)) == i]
    ys = [y for s, y in enumerate(rows) if organite_index(s, len(rows)) == j]
    return xs, ys


def cell_parents(cells: List[CellRecord]) -> Dict[Tuple[int, int], Optional[CellRecord]]:
    """
    Клетка следующего уровня, внутри которой лежит каждая клетка (None, если её нет в окне).
    """
    by_order: Dict[int, List[CellRecord]] = {}
    for cell in cells:
        by_order.setdefault(cell.order, []).append(cell)
    parents: Dict[Tuple[int, int], Optional[CellRecord]] = {}
    for order, same in by_order.items():
        uppers = by_order.get(order + 1, [])
        boxes = _cell_arrays(uppers)
        for cell in same:
            hits = np.flatnonzero(_containing(boxes, cell))
            parents[cell.anchor] = uppers[int(hits[0])] if hits.size else None
    return parents


def _containing(boxes: np.ndarray, cell: CellRecord) -> np.ndarray:
    b = cell.box
    return (
        (boxes[:, 0] < b.x) & (b.x + b.w < boxes[:, 0] + boxes[:, 2])
        & (boxes[:, 1] < b.y) & (b.y + b.h < boxes[:, 1] + boxes[:, 3])
    )
