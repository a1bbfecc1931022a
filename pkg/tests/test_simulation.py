import logging

import numpy as np
import pytest

from app.core.exceptions import BoundExceeded, BudgetExceeded, InconsistentBits, OrderTooLarge
from app.services.assembly import BITS_H, BITS_V, CHANNEL, assemble_stack, bits_layers, prefix_length
from app.schemas.pattern import Box
from app.services.hierarchy import MODULARITY, detect_cells, modularity_border, subdivide_cell
from app.services.simulation import check_commuting, phi, recurrence_witness
from app.services.systems import odometer_point, odometer_step
from app.services.validation import check_bits, validate_pattern, validate_stack

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


def with_bits(st, c, bits):
    """Стек, в котором сечение c перезаписано другими системными битами."""
    section = st.section(c)
    bits_h, bits_v = bits_layers(section.pattern, bits)
    pattern = section.pattern.with_layers(**{BITS_H: bits_h, BITS_V: bits_v})
    return st.with_section(c, section.model_copy(update={"pattern": pattern, "bits": bits}))


def test_odometer_examples(odometer):
    """Тест одометра: прибавление единицы с переносом."""
    assert odometer_step([1, 1, 0]) == [0, 0, 1]
    assert odometer_step([1, 1, 1]) == [0, 0, 0]
    assert odometer_point(6, 4) == [0, 1, 1, 0]
    assert odometer.graph([(1, 0), (1, 0), (0, 1)], 10), "Carry law must accept 3 -> 4"
    assert not odometer.graph([(0, 0)], 10), "Lowest bit must flip"
    assert odometer.membership([0, 1, 1], 10)
    with pytest.raises(BudgetExceeded):
        odometer.membership([0] * 5, 4)


def test_recurrence_witness(odometer):
    """Тест свидетеля возвращаемости на орбите одометра."""
    assert recurrence_witness(odometer, [1, 0], 1) == 4, "Word 10 returns every 4 steps"
    assert recurrence_witness(odometer, [1, 0], 4) == 1
    assert recurrence_witness(odometer, [1, 0], 3) == 4
    assert recurrence_witness(odometer, [], 5) == 0
    with pytest.raises(BoundExceeded):
        recurrence_witness(odometer, [1, 1, 1, 1], 1, bound=10)
    with pytest.raises(ValueError):
        recurrence_witness(odometer, [1], 0)


@pytest.mark.asyncio
async def test_assembled_stack_is_valid(stack_violations):
    """Тест: собранный стек одометра не нарушает ни одного правила."""
    log_result("Нарушения стека одометра", stack_violations)
    assert stack_violations == [], f"Unexpected violations: {stack_violations[:5]}"


def test_assembled_stack_records(odometer_stack):
    """Тест записей стека: биты сечений и префиксы моделируемой точки."""
    assert odometer_stack.height == 2
    assert prefix_length(3) == 1
    assert odometer_stack.pattern.size == (15, 15, 2), f"Unexpected size: {odometer_stack.pattern.size}"
    for c in range(odometer_stack.height):
        prefix = phi(odometer_stack, c)
        log_result(f"Префикс сечения {c}", prefix)
        assert prefix.bits == [c & 1], f"Unexpected prefix: {prefix}"
        assert prefix.provenance[0][0] == 0, f"Unexpected provenance: {prefix}"
    assert check_commuting(odometer_stack), "Commuting diagram must hold"


def test_phased_stack_is_valid(phased_stack):
    """Тест стека с начальными фазами на окне с клеткой уровня 1."""
    violations = validate_stack(phased_stack)
    log_result("Нарушения стека с фазами", violations)
    assert violations == [], f"Unexpected violations: {violations[:5]}"
    prefixes = [phi(phased_stack, c).bits for c in range(phased_stack.height)]
    assert prefixes == [[1], [0], [1]], f"Unexpected prefixes: {prefixes}"
    assert check_commuting(phased_stack)


@pytest.mark.parametrize("order", [3, 4, pytest.param(5, marks=pytest.mark.slow)])
def test_odometer_stack_end_to_end(odometer, order):
    """Тест: стек высоты 8 корректен, моделирует орбиту нуля, и любой перевёрнутый бит чётного уровня обнаруживается."""
    st = assemble_stack(odometer, order, 8)
    violations = validate_stack(st)
    assert violations == [], f"Unexpected violations: {violations[:5]}"
    length = prefix_length(order)
    assert phi(st, 0).bits == odometer_point(0, length), f"Unexpected prefix: {phi(st, 0)}"
    assert check_commuting(st), "Commuting diagram must hold"
    for c in range(st.height):
        for level in (n for n in st.section(c).bits if n % 2 == 0):
            bits = dict(st.section(c).bits)
            bits[level] = 1 - bits[level]
            broken = with_bits(st, c, bits)
            caught = not check_commuting(broken) or validate_stack(broken) != []
            assert caught, f"Flip of level {level} in section {c} went unnoticed"


def test_assembly_order_limits(odometer):
    """Тест ограничений порядка окна сборки."""
    with pytest.raises(OrderTooLarge):
        assemble_stack(odometer, 2, 2)
    with pytest.raises(OrderTooLarge):
        assemble_stack(odometer, 9, 2)


def test_single_bit_flip_is_detected(odometer_stack):
    """Тест: перевёрнутый бит в одной позиции нарушает синхронизацию строки."""
    section = odometer_stack.section(0).pattern
    values = section.layer(BITS_H).copy()
    values[1, 3] = 3 - values[1, 3]
    broken = section.with_layers(**{BITS_H: values})
    rules = {v.rule_id for v in check_bits(broken)}
    log_result("Перевёрнутый бит", rules)
    assert "bits-synchronization" in rules, f"Unexpected rules: {rules}"
    assert "bits-synchronization" in {v.rule_id for v in validate_pattern(broken)}


def test_whole_level_flip_breaks_commuting(odometer_stack):
    """Тест: бит уровня 0, перевёрнутый во всём сечении, ломает коммутативную диаграмму."""
    bits = dict(odometer_stack.section(1).bits)
    bits[0] = 1 - bits[0]
    broken = with_bits(odometer_stack, 1, bits)
    assert phi(broken, 1).bits == [0], f"Unexpected prefix: {phi(broken, 1)}"
    assert not check_commuting(broken), "Commuting diagram must fail"
    rules = {v.rule_id for v in validate_stack(broken)}
    log_result("Перевёрнутый уровень", rules)
    assert "simulation-graph" in rules, f"Unexpected rules: {rules}"


def test_inconsistent_cells(odometer_stack):
    """Тест: клетки одного уровня с разными битами не дают префикса."""
    section = odometer_stack.section(0).pattern
    cells = detect_cells(section)
    x, y = cells[0].anchor
    values = section.layer(BITS_H).copy()
    values[y, x] = 3 - values[y, x]
    broken_pattern = section.with_layers(**{BITS_H: values})
    broken = odometer_stack.with_section(0, odometer_stack.section(0).model_copy(update={"pattern": broken_pattern}))
    with pytest.raises(InconsistentBits):
        phi(broken, 0)
    assert not check_commuting(broken)


@pytest.mark.slow
def test_modularity_flip_moves_channel(section_8):
    """Тест: отметка модулярности клетки уровня 3 выбирает органит канала."""
    section = section_8
    cells = detect_cells(section)
    big = next(cell for cell in cells if cell.order == 3)
    assert big.anchor == (127, 127), f"Unexpected level-3 cell: {big}"
    divided = subdivide_cell(big, section, cells)
    assert divided.violations == [], f"Unexpected organite violations: {divided.violations[:3]}"
    assert divided.organites[(5, 2)] == Box(x=280, y=224, w=7, h=7), f"Unexpected organite: {divided.organites[(5, 2)]}"
    channel = section.layer(CHANNEL)
    assert np.count_nonzero(channel) > 0, "Level-3 cell must carry a channel"
    values = section.layer(MODULARITY).copy()
    for x, y in modularity_border(big):
        values[y, x] = 2
    broken = section.with_layers(**{MODULARITY: values})
    rules = {v.rule_id for v in validate_pattern(broken)}
    log_result("Изменённая отметка модулярности", rules)
    assert "channel-localization" in rules, f"Unexpected rules: {rules}"
    assert "modularity-transformation" in rules, f"Unexpected rules: {rules}"
