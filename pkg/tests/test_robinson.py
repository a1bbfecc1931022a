import logging

import numpy as np
import pytest

from app.core.exceptions import MissingLayer, NotFound, OrderTooLarge, WindowTooLarge
from app.models.robinson import Corner, SymbolKind
from app.schemas.pattern import Pattern
from app.services import codes
from app.services.robinson import (
    ALIGNMENT,
    ROBINSON,
    cell_region,
    check_robinson_rules,
    chi,
    chi_prime,
    complete_block,
    complete_block_in_cell,
    find_occurrences,
    generate_supertile,
    levels,
    tile_plane,
)

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


def test_levels_count_trailing_ones():
    """Тест уровня координаты: число младших единичных битов."""
    values = np.array([0, 1, 2, 3, 7, 11, 23, 255])
    assert levels(values).tolist() == [0, 1, 0, 2, 3, 2, 3, 8], f"Unexpected levels: {levels(values)}"


@pytest.mark.parametrize("corner", list(Corner))
@pytest.mark.parametrize(
    "order", [*range(0, 7), pytest.param(7, marks=pytest.mark.slow), pytest.param(8, marks=pytest.mark.slow)]
)
def test_supertile_is_legal(order, corner):
    """Тест: супертайлы всех ориентаций не нарушают правил Робинсона."""
    p = generate_supertile(corner, order)
    violations = check_robinson_rules(p)
    log_result(f"Проверка St_{corner.label}({order})", len(violations))
    assert p.width == p.height == 2 ** (order + 1) - 1, f"Unexpected side: {p.size}"
    assert violations == [], f"Unexpected violations: {violations[:3]}"


def test_supertile_geometry():
    """Тест размеров супертайла и красного угла в центре."""
    p = generate_supertile(Corner.SW, 2)
    assert p.size == (7, 7), f"Unexpected size: {p.size}"

    ne = generate_supertile(Corner.NE, 3)
    code = ne.at(ROBINSON, (7, 7))
    assert code == codes.red_code(Corner.NE, 1), f"Unexpected centre code: {code}"
    symbol = codes.decode_symbol(code)
    log_result("Центр St_ne(3)", symbol)
    assert symbol.kind == SymbolKind.RED_CORNER, f"Unexpected symbol: {symbol}"
    assert symbol.rotation == Corner.NE.degrees, f"Unexpected rotation: {symbol}"


def test_supertile_order_cap():
    """Тест ограничения порядка супертайла."""
    with pytest.raises(OrderTooLarge):
        generate_supertile(Corner.SW, 11)
    with pytest.raises(OrderTooLarge):
        generate_supertile(Corner.SW, -1)


def test_blue_over_blue_breaks_arrows():
    """Тест: два синих угла друг над другом дают одно нарушение стрелок."""
    blue = codes.blue_code(Corner.SW)
    p = Pattern(origin=(0, 0), size=(1, 2), layers={ROBINSON: [[blue], [blue]]})
    violations = check_robinson_rules(p)
    log_result("Синий над синим", violations)
    assert len(violations) == 1, f"Unexpected violations: {violations}"
    assert violations[0].rule_id == "arrow-correspondence", f"Unexpected rule: {violations[0]}"
    assert violations[0].positions == [(0, 0), (0, 1)], f"Unexpected positions: {violations[0]}"


def test_broken_supertile_is_reported(supertile_3):
    """Тест: заменённый символ внутри супертайла обнаруживается."""
    values = supertile_3.layer(ROBINSON).copy()
    values[7, 5] = codes.blue_code(Corner.SW)
    broken = supertile_3.with_layers(**{ROBINSON: values})
    violations = check_robinson_rules(broken)
    rules = {v.rule_id for v in violations}
    log_result("Испорченный супертайл", rules)
    assert violations, "Expected violations for a broken supertile"
    assert "arrow-correspondence" in rules or "blue-density" in rules, f"Unexpected rules: {rules}"


def test_check_requires_robinson_layer():
    """Тест: проверка без слоя robinson невозможна."""
    p = Pattern(origin=(0, 0), size=(2, 2), layers={ALIGNMENT: np.zeros((2, 2))})
    with pytest.raises(MissingLayer):
        check_robinson_rules(p)


def test_chi_values():
    """Тест оценок порядка достраивания."""
    assert chi(1) == 4, f"Unexpected chi(1): {chi(1)}"
    assert chi(3) == 6, f"Unexpected chi(3): {chi(3)}"
    assert chi_prime(4) == 3, f"Unexpected chi'(4): {chi_prime(4)}"
    with pytest.raises(ValueError):
        chi(0)


@pytest.mark.parametrize(
    "order, big",
    [(m, n) for n in range(1, 6) for m in range(n)]
    + [pytest.param(m, n, marks=pytest.mark.slow) for n in (6, 7) for m in range(n)],
)
def test_supertile_repeats_inside_larger(order, big):
    """Тест: St_sw(m) встречается в St_sw(n) при всех m < n только с шагом 2^(m+2)."""
    found = find_occurrences(generate_supertile(Corner.SW, big), generate_supertile(Corner.SW, order), [ROBINSON])
    xs = sorted({x for x, _ in found})
    ys = sorted({y for _, y in found})
    assert xs and ys, f"St_sw({order}) not found in St_sw({big})"
    period = 2 ** (order + 2)
    assert all(b - a == period for a, b in zip(xs, xs[1:])), f"Unexpected columns: {xs}"
    assert all(b - a == period for a, b in zip(ys, ys[1:])), f"Unexpected rows: {ys}"
    assert len(found) == len(xs) * len(ys), f"Occurrences must form a lattice: {len(found)}"


def test_plane_window_is_legal():
    """Тест: окно плоскости (в том числе с отрицательными координатами) законно."""
    p = tile_plane(6, -40, -17, 90, 70)
    assert p.origin == (-40, -17), f"Unexpected origin: {p.origin}"
    violations = check_robinson_rules(p)
    log_result("Окно плоскости", len(violations))
    assert violations == [], f"Unexpected violations: {violations[:3]}"


def test_plane_window_is_deterministic():
    """Тест: одинаковые параметры дают одинаковые окна, сдвиг окна согласован."""
    a = tile_plane(4, 0, 0, 40, 40)
    b = tile_plane(4, 10, 5, 20, 20)
    assert np.array_equal(a.layer(ROBINSON)[5:25, 10:30], b.layer(ROBINSON)), "Windows disagree on overlap"


def test_plane_window_limits():
    """Тест ограничений размера окна."""
    with pytest.raises(WindowTooLarge):
        tile_plane(4, 0, 0, 5000, 4)
    with pytest.raises(WindowTooLarge):
        tile_plane(4, 0, 0, 0, 4)


@pytest.mark.parametrize("x, y", [(0, 0), (5, 9), (12, 3), (20, 27)])
def test_complete_block(supertile_4, x, y):
    """Тест достраивания блока 3x3 до супертайла."""
    block = supertile_4.crop(x, y, 3, 3)
    order, (dx, dy) = complete_block(block)
    log_result(f"Блок в ({x}, {y})", (order, dx, dy))
    assert order <= chi(3), f"Unexpected order: {order}"
    found = generate_supertile(Corner.SW, order).crop(dx, dy, 3, 3)
    for name in (ROBINSON, ALIGNMENT):
        assert np.array_equal(found.layer(name), block.layer(name)), f"Layer {name} differs at {(dx, dy)}"


def test_complete_block_not_found():
    """Тест: блок, которого нет ни в одном супертайле, не достраивается."""
    blue = codes.blue_code(Corner.SW)
    block = Pattern(origin=(0, 0), size=(1, 2), layers={ROBINSON: [[blue], [blue]]})
    with pytest.raises(NotFound):
        complete_block(block)


def test_complete_block_in_cell():
    """Тест достраивания блока до клетки."""
    window, (cx, cy) = cell_region(1)
    block = window.crop(cx + 2, cy + 2, 3, 3)
    level, (dx, dy) = complete_block_in_cell(block)
    log_result("Блок внутри клетки", (level, dx, dy))
    assert level <= min(1, chi_prime(3)), f"Unexpected level: {level}"
    region, (rx, ry) = cell_region(level)
    found = region.crop(rx + dx, ry + dy, 3, 3)
    assert np.array_equal(found.layer(ROBINSON), block.layer(ROBINSON)), "Block differs from the cell"


@pytest.mark.slow
def test_random_plane_blocks_complete():
    """Тест: 200 случайных блоков стороны до 4 из окна плоскости достраиваются до супертайла порядка <= chi."""
    rng = np.random.default_rng(11)
    plane = tile_plane(8, 0, 0, 512, 512)
    for _ in range(200):
        w, h = (int(v) for v in rng.integers(1, 5, size=2))
        x, y = int(rng.integers(0, 512 - w)), int(rng.integers(0, 512 - h))
        block = plane.crop(x, y, w, h)
        order, (dx, dy) = complete_block(block)
        assert order <= chi(max(w, h)), f"Unexpected order {order} for block at {(x, y)}"
        found = generate_supertile(Corner.SW, order).crop(dx, dy, w, h)
        assert np.array_equal(found.layer(ROBINSON), block.layer(ROBINSON)), f"Block at {(x, y)} differs"
