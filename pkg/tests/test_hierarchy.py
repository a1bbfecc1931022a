import logging
from collections import Counter

import pytest

from app.core.exceptions import CellTooSmall
from app.models.hierarchy import AreaFunction, OrganiteRole, PetalRole
from app.schemas.hierarchy import CellRecord
from app.schemas.pattern import Box
from app.services.assembly import structure_pattern
from app.services.hierarchy import (
    MODULARITY,
    address_triple,
    assign_functional_areas,
    check_function_layer,
    check_modularity_layer,
    computation_lines,
    detect_cells,
    extract_petals,
    modularity_border,
    modularity_marks,
    organite_boxes,
    organite_function,
    organite_functions,
    read_modularity,
    sub_cells,
    subdivide_cell,
    triple_code,
)
from app.services.robinson import tile_plane

# Настройка логгирования
logger = logging.getLogger("test_logger")
logger.setLevel(logging.DEBUG)
handler = logging.StreamHandler()
formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
handler.setFormatter(formatter)
logger.addHandler(handler)


def log_result(description: str, payload) -> None:
    """Логирует описание теста и полученный результат."""
    logger.info(f"{description}")
    logger.debug(f"Result: {payload}")


def test_extract_petals(supertile_3):
    """Тест извлечения лепестков из St_sw(3)."""
    petals = extract_petals(supertile_3)
    by_order = Counter(pt.order for pt in petals)
    log_result("Лепестки St_sw(3)", dict(by_order))
    assert set(by_order) == {0, 1, 2}, f"Unexpected orders: {by_order}"
    assert by_order[0] == 16, f"Unexpected order-0 petals: {by_order}"
    assert by_order[1] == 4, f"Unexpected order-1 petals: {by_order}"
    assert by_order[2] == 1, f"Unexpected order-2 petals: {by_order}"
    for pt in petals:
        side = 2 ** (pt.order + 1) + 1
        assert pt.box.w == pt.box.h == side, f"Unexpected petal side: {pt}"
        expected_role = PetalRole.SUPPORT if pt.order % 2 == 1 else PetalRole.TRANSMISSION
        assert pt.role == expected_role, f"Unexpected role: {pt}"
    central = next(pt for pt in petals if pt.order == 2)
    assert (central.box.x, central.box.y) == (3, 3), f"Unexpected central petal: {central}"


def test_detect_cells(supertile_3, supertile_4):
    """Тест определения клеток: стороны 4^(n+1)+1 и положения."""
    cells = detect_cells(supertile_3)
    anchors = sorted(cell.anchor for cell in cells)
    log_result("Клетки St_sw(3)", anchors)
    assert anchors == [(1, 1), (1, 9), (9, 1), (9, 9)], f"Unexpected anchors: {anchors}"
    assert all(cell.order == 0 and cell.box.w == 5 for cell in cells), f"Unexpected cells: {cells}"

    cells = detect_cells(supertile_4)
    levels = Counter(cell.order for cell in cells)
    assert levels == {0: 16, 1: 1}, f"Unexpected levels: {levels}"
    big = next(cell for cell in cells if cell.order == 1)
    assert big.anchor == (7, 7) and big.box.w == 17, f"Unexpected level-1 cell: {big}"
    inner = sub_cells(big, cells)
    assert len(inner) == 4, f"Unexpected sub-cells: {inner}"


def test_cell_record_geometry():
    """Тест: сторона клетки обязана быть 4^(n+1)+1."""
    with pytest.raises(ValueError):
        CellRecord(order=1, box=Box(x=0, y=0, w=9, h=9), petal_order=3)


def test_functional_areas_level_zero(supertile_3):
    """Тест: клетка уровня 0 целиком вычислительная, область 2x2."""
    cells = detect_cells(supertile_3)
    cell = next(c for c in cells if c.anchor == (1, 1))
    functions = assign_functional_areas(cell, supertile_3, cells)
    log_result("Функции клетки уровня 0", functions)
    assert set(functions) == {(2, 2), (2, 4), (4, 2), (4, 4)}, f"Unexpected positions: {functions}"
    assert set(functions.values()) == {AreaFunction.COMPUTATION}, f"Unexpected functions: {functions}"
    columns, rows = computation_lines(cell, supertile_3, cells)
    assert (columns, rows) == ([2, 4], [2, 4]), f"Unexpected lines: {columns}, {rows}"


def test_functional_areas_level_one(supertile_4):
    """Тест: клетка уровня 1 имеет область вычислений 4x4 и зоны передачи."""
    cells = detect_cells(supertile_4)
    cell = next(c for c in cells if c.order == 1)
    functions = assign_functional_areas(cell, supertile_4, cells)
    counts = Counter(functions.values())
    log_result("Функции клетки уровня 1", counts)
    assert len(functions) == 64, f"Unexpected blue positions: {len(functions)}"
    for kind in AreaFunction:
        assert counts[kind] == 16, f"Unexpected count for {kind}: {counts}"
    columns, rows = computation_lines(cell, supertile_4, cells)
    assert columns == [8, 14, 16, 22], f"Unexpected columns: {columns}"
    assert rows == [8, 14, 16, 22], f"Unexpected rows: {rows}"


def test_organite_table():
    """Тест таблицы функций органитов."""
    assert organite_function(6, 5) == OrganiteRole.MACHINE
    assert organite_function(3, 3) == OrganiteRole.DEMULTIPLEXER
    assert organite_function(2, 3) == OrganiteRole.LINEAR_INCREMENT
    assert organite_function(2, 5) == OrganiteRole.SYSTEM_COUNTER
    assert organite_function(5, 2) == OrganiteRole.SYSTEM_COUNTER
    assert organite_function(6, 1) == OrganiteRole.TRANSPORT
    assert organite_function(0, 0) == OrganiteRole.NONE
    table = organite_functions()
    assert len(table) == 64, f"Unexpected table size: {len(table)}"
    assert sum(f.function == OrganiteRole.SYSTEM_COUNTER for f in table) == 5, "Unexpected system counters"


def test_organite_addresses():
    """Тест адресов органитов как троек квадрантов."""
    assert address_triple(0, 0) == (0, 0, 0)
    assert address_triple(7, 7) == (3, 3, 3)
    assert address_triple(5, 2) == (1, 2, 1), f"Unexpected triple: {address_triple(5, 2)}"
    assert triple_code((1, 2, 1)) == 26
    codes = {triple_code(address_triple(i, j)) for i in range(8) for j in range(8)}
    assert len(codes) == 64, "Organite addresses must be distinct"


def test_organite_boxes_split_functional_lines():
    """Тест: 64 органита клетки уровня 3 делят её функциональные линии на группы по две."""
    offsets = [1, 7, 25, 31, 97, 103, 121, 127, 129, 135, 153, 159, 225, 231, 249, 255]
    lines = [127 + v for v in offsets]
    cell = CellRecord(order=3, box=Box(x=127, y=127, w=257, h=257), petal_order=7)
    boxes = organite_boxes(cell, lines, lines)
    assert len(boxes) == 64, f"Unexpected organites: {len(boxes)}"
    first, last = boxes[(0, 0)], boxes[(7, 7)]
    assert (first.x, first.y, first.w) == (128, 128, 7), f"Unexpected first organite: {first}"
    assert (last.x, last.x + last.w) == (376, 383), f"Unexpected last organite: {last}"
    assert boxes[(2, 5)].x == 127 + 97 and boxes[(2, 5)].y == 127 + 153, f"Unexpected organite: {boxes[(2, 5)]}"
    with pytest.raises(CellTooSmall):
        organite_boxes(cell, lines[:4], lines)


def test_subdivide_small_cell(supertile_3):
    """Тест: клетку уровня меньше 3 нельзя разбить на органиты."""
    cell = detect_cells(supertile_3)[0]
    with pytest.raises(CellTooSmall):
        subdivide_cell(cell, supertile_3)


def test_modularity_marks(supertile_4):
    """Тест отметок модулярности: 0 на уровне 0 и +1 на каждом следующем."""
    marked, violations = modularity_marks(detect_cells(supertile_4))
    marks = {cell.order: cell.modularity for cell in marked}
    log_result("Отметки модулярности", marks)
    assert violations == [], f"Unexpected violations: {violations}"
    assert marks == {0: 0, 1: 1}, f"Unexpected marks: {marks}"


def test_modularity_preset_mismatch(supertile_4):
    """Тест: неверная заданная отметка даёт нарушение перехода."""
    cells = [
        cell.updated(modularity=3) if cell.order == 1 else cell
        for cell in detect_cells(supertile_4)
    ]
    _, violations = modularity_marks(cells)
    assert [v.rule_id for v in violations] == ["modularity-transformation"], f"Unexpected violations: {violations}"


def test_modularity_layer_roundtrip():
    """Тест: структурный слой несёт отметки на северо-восточных границах клеток."""
    structure, cells = structure_pattern(4)
    assert check_modularity_layer(structure, cells) == [], "Unexpected modularity violations"
    assert check_function_layer(structure, cells) == [], "Unexpected function violations"
    read = read_modularity(detect_cells(structure), structure)
    assert {c.order: c.modularity for c in read} == {0: 0, 1: 1}, f"Unexpected read marks: {read}"

    big = next(c for c in cells if c.order == 1)
    x, y = modularity_border(big)[0]
    values = structure.layer(MODULARITY).copy()
    values[y, x] = 4
    broken = structure.with_layers(**{MODULARITY: values})
    violations = check_modularity_layer(broken, cells)
    log_result("Испорченная граница", violations)
    assert [v.rule_id for v in violations] == ["modularity-localization"], f"Unexpected violations: {violations}"


@pytest.mark.slow
def test_cells_recur_in_plane_window():
    """Тест: в окне плоскости стороны лепестков и клеток подчиняются законам размеров,
    клетки уровня m <= 2 повторяются со сдвигом 4^(m+2) по обеим осям."""
    side = 600
    window = tile_plane(8, 0, 0, side, side)
    for pt in extract_petals(window):
        assert pt.box.w == pt.box.h == 2 ** (pt.order + 1) + 1, f"Unexpected petal side: {pt}"
    cells = detect_cells(window)
    for level in range(3):
        period = 4 ** (level + 2)
        extent = 4 ** (level + 1) + 1
        anchors = {cell.anchor for cell in cells if cell.order == level}
        checked = 0
        for x, y in anchors:
            if x + period + extent <= side:
                assert (x + period, y) in anchors, f"Level-{level} cell at {(x, y)} has no copy to the east"
                checked += 1
            if y + period + extent <= side:
                assert (x, y + period) in anchors, f"Level-{level} cell at {(x, y)} has no copy to the north"
                checked += 1
        log_result(f"Повторы клеток уровня {level}", checked)
        assert checked > 0, f"No level-{level} cells to compare"
