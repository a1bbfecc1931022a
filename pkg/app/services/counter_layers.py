"""
Счётчики как слова в образце: линейный счётчик на первых позициях области
вычислений каждой клетки, системный - на клетках нечётного уровня,
и раскраски обнаружения и заморозки рядом с ними.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import CellTooSmall
from app.core.logger import get_logger
from app.schemas.counters import LinearCounterState, SystemCounterState
from app.schemas.hierarchy import CellRecord
from app.schemas.pattern import Pattern, RuleViolation
from app.services import counters
from app.services.hierarchy import word_positions

logger = get_logger(__name__)

LINEAR = "linear"
LINEAR_FREEZE = "linear_freeze"
SYSTEM = "system"
SYSTEM_FREEZE = "system_freeze"

Grid = Dict[Tuple[int, int], Tuple[List[int], List[int]]]


def freeze_code(detection: bool, frozen: bool) -> int:
    """
    Код раскраски: 1 + зелёный сигнал обнаружения + 2 * символ заморозки.
    """
    return 1 + int(detection) + 2 * int(frozen)


def system_word_length(level: int) -> int:
    params = counters.system_params_for_level(level)
    return params.index_width + params.torus_length + 1


def linear_positions(cell: CellRecord, grid: Grid) -> List[Tuple[int, int]]:
    columns, rows = grid[cell.anchor]
    return word_positions(columns, rows, settings.linear_counter_width)


def system_positions(cell: CellRecord, grid: Grid) -> List[Tuple[int, int]]:
    """
    Слово системного счётчика: индекс, затем тор, затем фаза поворота.
    """
    columns, rows = grid[cell.anchor]
    return word_positions(columns, rows, system_word_length(cell.order))


def torus_positions(cell: CellRecord, grid: Grid) -> List[Tuple[int, int]]:
    params = counters.system_params_for_level(cell.order)
    start = params.index_width
    return system_positions(cell, grid)[start:start + params.torus_length]


def _put(layer: np.ndarray, origin, positions, values) -> None:
    x0, y0 = origin
    for (x, y), value in zip(positions, values):
        layer[y - y0, x - x0] = value


def counter_layers(
    p: Pattern,
    cells: List[CellRecord],
    grid: Grid,
    linear: Dict[Tuple[int, int], LinearCounterState],
    system: Dict[int, SystemCounterState],
) -> Dict[str, np.ndarray]:
    """
    Слои linear, linear_freeze, system и system_freeze одного сечения.
    Разряды записываются как 1 + цифра, младший первым.
    :param linear: состояние линейного счётчика клетки по её юго-западному углу
    :param system: системный счётчик каждого нечётного уровня
    :raises CellTooSmall: слово не помещается в область вычислений клетки
    """
    origin = p.origin[:2]
    shape = (p.height, p.width)
    layers = {name: np.zeros(shape, dtype=np.int16) for name in (LINEAR, LINEAR_FREEZE, SYSTEM, SYSTEM_FREEZE)}
    for cell in cells:
        state = linear[cell.anchor]
        params = counters.linear_params_for_level(cell.order)
        positions = linear_positions(cell, grid)
        coloring = counters.spatial_freeze_coloring([state], params)[0]
        _put(layers[LINEAR], origin, positions, [1 + d for d in state.digits])
        _put(layers[LINEAR_FREEZE], origin, positions, [freeze_code(g, coloring.frozen) for g in coloring.detection])

        word = system.get(cell.order)
        if word is None:
            continue
        params = counters.system_params_for_level(cell.order)
        values = list(word.index) + list(word.torus) + [word.phase]
        _put(layers[SYSTEM], origin, system_positions(cell, grid), [1 + v for v in values])
        coloring = counters.spatial_freeze_coloring([word], params)[0]
        _put(
            layers[SYSTEM_FREEZE],
            origin,
            torus_positions(cell, grid),
            [freeze_code(g, coloring.frozen) for g in coloring.detection],
        )
    return layers


def _read(layer: np.ndarray, origin, positions) -> List[int]:
    x0, y0 = origin
    return [int(layer[y - y0, x - x0]) for x, y in positions]


def _violation(rule_id: str, position, detail: str) -> RuleViolation:
    return RuleViolation(rule_id=rule_id, positions=[tuple(position)], detail=detail)


def _localization(rule_id: str, layer: np.ndarray, expected: np.ndarray, origin, detail: str) -> List[RuleViolation]:
    x0, y0 = origin
    return [
        _violation(rule_id, (x0 + int(col), y0 + int(row)), detail)
        for row, col in np.argwhere((layer != 0) != expected)
    ]


def read_linear_word(p: Pattern, cell: CellRecord, grid: Grid) -> Optional[LinearCounterState]:
    """
    Линейный счётчик клетки, прочитанный из слоёв (None, если слово неполно или вне алфавита).
    """
    if not (p.has_layer(LINEAR) and p.has_layer(LINEAR_FREEZE)):
        return None
    try:
        positions = linear_positions(cell, grid)
    except CellTooSmall:
        return None
    origin = p.origin[:2]
    digits = [v - 1 for v in _read(p.layer(LINEAR), origin, positions)]
    size = counters.linear_params_for_level(cell.order).digit_count
    if any(not 0 <= d < size for d in digits):
        return None
    frozen = _read(p.layer(LINEAR_FREEZE), origin, positions[:1])[0] >= 3
    return LinearCounterState(digits=tuple(digits), frozen=frozen)


def read_system_word(p: Pattern, cell: CellRecord, grid: Grid) -> Optional[SystemCounterState]:
    if cell.order % 2 == 0 or not (p.has_layer(SYSTEM) and p.has_layer(SYSTEM_FREEZE)):
        return None
    params = counters.system_params_for_level(cell.order)
    try:
        positions = system_positions(cell, grid)
    except CellTooSmall:
        return None
    origin = p.origin[:2]
    values = [v - 1 for v in _read(p.layer(SYSTEM), origin, positions)]
    index = values[:params.index_width]
    torus = values[params.index_width:params.index_width + params.torus_length]
    phase = values[-1]
    if (
        any(not 0 <= v < params.symbol_count**2 for v in index)
        or any(not 0 <= v < params.symbol_count for v in torus)
        or not 0 <= phase < params.torus_length
    ):
        return None
    frozen = _read(p.layer(SYSTEM_FREEZE), origin, torus_positions(cell, grid)[:1])[0] >= 3
    return counters.system_state(index, torus, phase, frozen, params)


def _word_mask(shape, origin, cells: List[CellRecord], positions_of) -> np.ndarray:
    x0, y0 = origin
    mask = np.zeros(shape, dtype=bool)
    for cell in cells:
        try:
            positions = positions_of(cell)
        except CellTooSmall:
            continue
        for x, y in positions:
            mask[y - y0, x - x0] = True
    return mask


def _freeze_mismatch(
    rule_id: str, layer: np.ndarray, origin, positions, coloring, what: str
) -> List[RuleViolation]:
    expected = [freeze_code(g, coloring.frozen) for g in coloring.detection]
    actual = _read(layer, origin, positions)
    return [
        _violation(rule_id, position, f"Раскраска {what}: код {a}, ожидался {e}.")
        for position, a, e in zip(positions, actual, expected)
        if a != e
    ]


def check_linear_words(p: Pattern, cells: List[CellRecord], grid: Grid) -> List[RuleViolation]:
    """
    Линейные счётчики в сечении: слово на первых позициях области вычислений,
    одинаковые слова в клетках одного столбца, шаг счётчика между соседними
    столбцами клеток одного уровня и раскраска заморозки.
    """
    if not (p.has_layer(LINEAR) and p.has_layer(LINEAR_FREEZE)):
        return []
    origin = p.origin[:2]
    shape = (p.height, p.width)
    mask = _word_mask(shape, origin, cells, lambda cell: linear_positions(cell, grid))
    found = _localization("linear-localization", p.layer(LINEAR), mask, origin,
                          "Разряд линейного счётчика вне слова клетки.")
    found += _localization("linear-localization", p.layer(LINEAR_FREEZE), mask, origin,
                           "Раскраска заморозки вне слова клетки.")

    by_column: Dict[Tuple[int, int], List[Tuple[CellRecord, LinearCounterState]]] = {}
    for cell in cells:
        state = read_linear_word(p, cell, grid)
        if state is None:
            found.append(_violation("linear-localization", cell.anchor,
                                    f"Клетка уровня {cell.order} не несёт слова линейного счётчика."))
            continue
        params = counters.linear_params_for_level(cell.order)
        coloring = counters.spatial_freeze_coloring([state], params)[0]
        found += _freeze_mismatch("linear-freeze-coloring", p.layer(LINEAR_FREEZE), origin,
                                  linear_positions(cell, grid), coloring, "линейного счётчика")
        by_column.setdefault((cell.order, cell.box.x), []).append((cell, state))

    for level in sorted({key[0] for key in by_column}):
        params = counters.linear_params_for_level(level)
        columns = sorted(x for lv, x in by_column if lv == level)
        for x in columns:
            first = by_column[(level, x)][0][1]
            for cell, state in by_column[(level, x)][1:]:
                if state != first:
                    found.append(_violation("linear-counter-increment", cell.anchor,
                                            f"Клетки уровня {level} одного столбца несут разные счётчики."))
        for left, right in zip(columns, columns[1:]):
            expected = counters.linear_step(by_column[(level, left)][0][1], params)
            for cell, state in by_column[(level, right)]:
                if state != expected:
                    found.append(_violation("linear-counter-increment", cell.anchor,
                                            "Линейный счётчик не увеличен относительно клетки слева."))
    return found


def check_system_words(
    p: Pattern, cells: List[CellRecord], grid: Grid, cell_bits: Dict[Tuple[int, int], Optional[int]]
) -> List[RuleViolation]:
    """
    Системные счётчики в сечении: слово на клетках нечётного уровня, одинаковое
    у всех клеток уровня; физическая позиция 0 тора равна биту клетки.
    :param cell_bits: системный бит клетки по её юго-западному углу
    """
    if not (p.has_layer(SYSTEM) and p.has_layer(SYSTEM_FREEZE)):
        return []
    origin = p.origin[:2]
    shape = (p.height, p.width)
    odd = [cell for cell in cells if cell.order % 2 == 1]
    found = _localization("system-localization", p.layer(SYSTEM),
                          _word_mask(shape, origin, odd, lambda cell: system_positions(cell, grid)), origin,
                          "Символ системного счётчика вне слова клетки.")
    found += _localization("system-localization", p.layer(SYSTEM_FREEZE),
                           _word_mask(shape, origin, odd, lambda cell: torus_positions(cell, grid)), origin,
                           "Раскраска заморозки вне тора.")

    words: Dict[int, List[Tuple[CellRecord, SystemCounterState]]] = {}
    for cell in odd:
        state = read_system_word(p, cell, grid)
        if state is None:
            found.append(_violation("system-localization", cell.anchor,
                                    f"Клетка уровня {cell.order} не несёт слова системного счётчика."))
            continue
        params = counters.system_params_for_level(cell.order)
        coloring = counters.spatial_freeze_coloring([state], params)[0]
        found += _freeze_mismatch("system-freeze-coloring", p.layer(SYSTEM_FREEZE), origin,
                                  torus_positions(cell, grid), coloring, "системного счётчика")
        bit = cell_bits.get(cell.anchor)
        if bit is not None and state.torus[0] != bit:
            position = torus_positions(cell, grid)[0]
            found.append(_violation("system-counter-trace", position,
                                    f"Позиция 0 тора несёт {state.torus[0]}, бит клетки {bit}."))
        words.setdefault(cell.order, []).append((cell, state))

    for level, same in words.items():
        first = same[0][1]
        for cell, state in same[1:]:
            if state != first:
                found.append(_violation("system-counter-synchronization", cell.anchor,
                                        f"Системные счётчики клеток уровня {level} различаются."))
    return found


def check_system_increment(p: Pattern, cells: List[CellRecord], grid: Grid) -> List[RuleViolation]:
    """
    Между соседними сечениями системный счётчик каждой клетки делает ровно один шаг.
    """
    if p.dim == 2 or not p.has_layer(SYSTEM):
        return []
    z0 = p.origin[2]
    sections = [p.section(z0 + k) for k in range(p.depth)]
    found = []
    for cell in cells:
        if cell.order % 2 == 0:
            continue
        params = counters.system_params_for_level(cell.order)
        words = [read_system_word(section, cell, grid) for section in sections]
        for k in range(1, len(words)):
            below, above = words[k - 1], words[k]
            if below is None or above is None:
                continue
            if above != counters.system_step(below, params):
                found.append(RuleViolation(
                    rule_id="system-counter-increment",
                    positions=[cell.anchor + (z0 + k,)],
                    detail=f"Системный счётчик клетки уровня {cell.order} не сделал шаг между сечениями.",
                ))
    if found:
        logger.warning("System counters skip steps in %s places", len(found))
    return found
