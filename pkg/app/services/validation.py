"""
Проверка всех локальных правил: пространственная часть по сечениям (параллельно),
тождества и шаги счётчиков вдоль e3 и проверки записей стека (оракулы).
"""
from functools import partial
from typing import Dict, List, Optional, Sequence

import anyio
import numpy as np

from app.core.config import settings
from app.core.exceptions import InconsistentBits
from app.core.logger import get_logger
from app.schemas.hierarchy import CellRecord
from app.schemas.pattern import Pattern, RuleViolation, sort_violations
from app.schemas.simulation import StackAssembly
from app.services import codes
from app.services.assembly import BITS_H, BITS_V, CHANNEL, STRUCTURE_LAYERS, cell_bit, cell_bits, channel_cells
from app.services.counter_layers import (
    LINEAR,
    LINEAR_FREEZE,
    SYSTEM,
    SYSTEM_FREEZE,
    check_linear_words,
    check_system_increment,
    check_system_words,
)
from app.services.hierarchy import (
    check_function_layer,
    check_modularity_layer,
    check_organite_layer,
    computation_grid,
    detect_cells,
    extract_petals,
    modularity_marks,
    organite_mask,
    read_modularity,
)
from app.services.machine import witness_machine
from app.services.machine_layers import MACHINE_LAYERS, check_machine_layers
from app.services.robinson import ALIGNMENT, ROBINSON, check_section
from app.services.simulation import phi
from app.services.transports import (
    EXTRACTION,
    LINEAR_TRANSPORT,
    TRANSPORT_LAYERS,
    check_border,
    check_diagonals,
    check_extraction,
    check_intercell,
    check_linear_transport,
    check_orientation,
)

logger = get_logger(__name__)

# Слои, одинаковые во всех сечениях, кроме структурных
LINEAR_LAYERS = (LINEAR, LINEAR_FREEZE, LINEAR_TRANSPORT, EXTRACTION)
CELL_LAYERS = (LINEAR, LINEAR_FREEZE, SYSTEM, SYSTEM_FREEZE) + MACHINE_LAYERS + TRANSPORT_LAYERS


def _lift(violations: List[RuleViolation], z: Optional[int]) -> List[RuleViolation]:
    if z is None:
        return violations
    return [
        v.model_copy(update={"positions": [tuple(pos) + (z,) if len(pos) == 2 else tuple(pos) for pos in v.positions]})
        for v in violations
    ]


def _mask_violations(rule_id: str, mask: np.ndarray, origin, detail: str, offset=(0, 0)) -> List[RuleViolation]:
    x0, y0 = origin
    dx, dy = offset
    return [
        RuleViolation(
            rule_id=rule_id,
            positions=[(x0 + int(col), y0 + int(row))] + ([(x0 + int(col) + dx, y0 + int(row) + dy)] if offset != (0, 0) else []),
            detail=detail,
        )
        for row, col in np.argwhere(mask)
    ]


def check_bits(p: Pattern) -> List[RuleViolation]:
    """
    Слои системных битов: bits_h непуст ровно там, где i = 1, bits_v - где j = 1;
    значения передаются вдоль строк и столбцов и совпадают на углах.
    """
    if not (p.has_layer(BITS_H) and p.has_layer(BITS_V)):
        return []
    c = p.layer(ROBINSON).astype(np.int64)
    bits_h = p.layer(BITS_H).astype(np.int64)
    bits_v = p.layer(BITS_V).astype(np.int64)
    present = c != codes.BLANK
    par_i = codes.PAR_I[c] == 1
    par_j = codes.PAR_J[c] == 1
    origin = p.origin[:2]
    found = []
    found += _mask_violations("bits-localization", present & ((bits_h != 0) != par_i), origin,
                              "Горизонтальный бит должен стоять ровно на строках с i = 1.")
    found += _mask_violations("bits-localization", present & ((bits_v != 0) != par_j), origin,
                              "Вертикальный бит должен стоять ровно на столбцах с j = 1.")
    sync_h = par_i[:, :-1] & par_i[:, 1:] & (bits_h[:, :-1] != bits_h[:, 1:])
    sync_v = par_j[:-1, :] & par_j[1:, :] & (bits_v[:-1, :] != bits_v[1:, :])
    mask = np.zeros(c.shape, dtype=bool)
    mask[:, :-1] = sync_h
    found += _mask_violations("bits-synchronization", mask, origin,
                              "Системный бит меняется вдоль строки.", offset=(1, 0))
    mask = np.zeros(c.shape, dtype=bool)
    mask[:-1, :] = sync_v
    found += _mask_violations("bits-synchronization", mask, origin,
                              "Системный бит меняется вдоль столбца.", offset=(0, 1))
    corner = codes.IS_CORNER[c] & par_i & par_j & (bits_h != bits_v)
    found += _mask_violations("bits-corner", corner, origin, "На углу оба системных бита совпадают.")
    return found


def _effective_marks(cells: List[CellRecord], p: Pattern) -> List[CellRecord]:
    """
    Отметки модулярности из слоя, а где его нет - вычисленные.
    """
    computed, _ = modularity_marks(cells)
    by_anchor = {cell.anchor: cell.modularity for cell in computed}
    read = read_modularity(cells, p)
    return [
        cell if cell.modularity is not None else cell.updated(modularity=by_anchor[cell.anchor])
        for cell in read
    ]


def check_channels(p: Pattern, cells: List[CellRecord]) -> List[RuleViolation]:
    """
    Случайные каналы нечётных клеток уровня >= 3: органит (2,5) при отметке 1,
    (5,2) при отметке 3; содержимое - системный бит клетки.
    """
    if not p.has_layer(CHANNEL):
        return []
    layer = p.layer(CHANNEL)
    x0, y0 = p.origin[:2]
    marked = _effective_marks(cells, p)
    expected = np.zeros(layer.shape, dtype=bool)
    found = []
    for cell, (i, j) in channel_cells(marked):
        b = cell.box
        mask = organite_mask(cell, p, cells, i, j)
        region = expected[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        region |= mask
        bit = cell_bit(cell, p)
        if bit is None:
            continue
        values = layer[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        wrong = mask & (values != 0) & (values != 1 + bit)
        for row, col in np.argwhere(wrong):
            found.append(
                RuleViolation(
                    rule_id="channel-content",
                    positions=[(b.x + int(col), b.y + int(row))],
                    detail=f"Канал клетки уровня {cell.order} должен нести бит {bit}.",
                )
            )
    misplaced = (layer != 0) != expected
    found += _mask_violations("channel-localization", misplaced, (x0, y0),
                              "Канал не совпадает с органитом, выбранным отметкой модулярности.")
    return found


def check_cell_layers(p: Pattern, cells: List[CellRecord]) -> List[RuleViolation]:
    """
    Содержимое клеток: счётчики, машины, диагонали, каналы к границе, контур
    линейного счётчика, извлечение, межклеточный транспорт и ориентация.
    Проверка пропускается, если образец не несёт ни одного из этих слоёв.
    """
    if not any(p.has_layer(name) for name in CELL_LAYERS):
        return []
    grid = computation_grid(p, cells)
    marked = _effective_marks(cells, p)
    bits = cell_bits(p, cells)
    channel = p.layer(CHANNEL) if p.has_layer(CHANNEL) else None
    found = check_linear_words(p, cells, grid)
    found += check_system_words(p, cells, grid, bits)
    if all(p.has_layer(name) for name in MACHINE_LAYERS):
        found += check_machine_layers(p, cells, grid, witness_machine())
    found += check_diagonals(p, extract_petals(p))
    found += check_border(p, marked, grid, bits, channel)
    found += check_linear_transport(p, marked, grid)
    found += check_extraction(p, marked, grid)
    found += check_intercell(p, marked, grid, bits)
    found += check_orientation(p, cells)
    return found


def check_section_layers(p: Pattern, z: Optional[int] = None, cells: Optional[List[CellRecord]] = None) -> List[RuleViolation]:
    """
    Пространственные правила одного двумерного сечения.
    """
    alignment = p.layers.get(ALIGNMENT)
    found = check_section(p.layer(ROBINSON), alignment, p.origin[:2])
    cells = detect_cells(p) if cells is None else cells
    read = read_modularity(cells, p)
    _, transformation = modularity_marks(read)
    found += transformation
    found += check_modularity_layer(p, cells)
    found += check_function_layer(p, cells)
    found += check_organite_layer(p, cells)
    found += check_bits(p)
    found += check_channels(p, cells)
    found += check_cell_layers(p, cells)
    return sort_violations(_lift(found, z))


def _check_constant_e3(p: Pattern, names: Sequence[str], rule_id: str) -> List[RuleViolation]:
    """
    Слои names одинаковы во всех сечениях; на каждый слой и сечение
    сообщается первая отличающаяся позиция.
    """
    found = []
    x0, y0, z0 = p.origin
    for name in names:
        if not p.has_layer(name):
            continue
        values = p.layer(name)
        for k in range(1, p.depth):
            diff = np.argwhere(values[k] != values[0])
            if diff.size:
                row, col = diff[0]
                found.append(
                    RuleViolation(
                        rule_id=rule_id,
                        positions=[(x0 + int(col), y0 + int(row), z0 + k)],
                        detail=f"Слой {name} различается в сечениях {z0} и {z0 + k}.",
                    )
                )
    return found


def check_structure_e3(p: Pattern) -> List[RuleViolation]:
    """
    Структурные слои и линейные счётчики постоянны вдоль e3.
    """
    if p.dim == 2:
        return []
    return _check_constant_e3(p, STRUCTURE_LAYERS, "structure-e3") + _check_constant_e3(
        p, LINEAR_LAYERS, "linear-counter-e3"
    )


async def avalidate_pattern(p: Pattern) -> List[RuleViolation]:
    """
    Параллельная проверка сечений через пул потоков с ограничением settings.threads.
    Клетки определяются один раз на каждый различный слой robinson.
    """
    sections = [(None, p)] if p.dim == 2 else [(p.origin[2] + k, p.section(p.origin[2] + k)) for k in range(p.depth)]
    cells_by_layer: Dict[bytes, List[CellRecord]] = {}
    for _, section in sections:
        key = section.layer(ROBINSON).tobytes()
        if key not in cells_by_layer:
            cells_by_layer[key] = detect_cells(section)

    results: List[List[RuleViolation]] = [[] for _ in sections]
    limiter = anyio.CapacityLimiter(max(1, settings.threads))
    logger.info("Validating %s sections", len(sections))

    async def run(index: int, z: Optional[int], section: Pattern) -> None:
        cells = cells_by_layer[section.layer(ROBINSON).tobytes()]
        job = partial(check_section_layers, section, z, cells)
        results[index] = await anyio.to_thread.run_sync(job, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index, (z, section) in enumerate(sections):
            tg.start_soon(run, index, z, section)

    found = [v for chunk in results for v in chunk] + check_structure_e3(p)
    if p.dim == 3 and p.has_layer(SYSTEM):
        first = sections[0][1]
        cells = cells_by_layer[first.layer(ROBINSON).tobytes()]
        found += check_system_increment(p, cells, computation_grid(first, cells))
    found = sort_violations(found)
    if found:
        logger.warning("Pattern validation found %s violations", len(found))
    return found


def validate_pattern(p: Pattern) -> List[RuleViolation]:
    return anyio.run(avalidate_pattern, p)


def _check_records(st: StackAssembly, cells: List[CellRecord]) -> List[RuleViolation]:
    found = []
    for section in st.sections:
        for cell in cells:
            bit = cell_bit(cell, section.pattern)
            expected = section.bits.get(cell.order)
            if expected is not None and bit != expected:
                found.append(RuleViolation(
                    rule_id="bits-record",
                    positions=[cell.anchor + (section.z,)],
                    detail=f"Клетка уровня {cell.order} несёт бит {bit}, записано {expected}.",
                ))
    return found


def _check_oracles(st: StackAssembly) -> List[RuleViolation]:
    found = []
    budget = settings.oracle_step_budget
    prefixes = []
    for c, section in enumerate(st.sections):
        origin = tuple(section.pattern.origin[:2]) + (section.z,)
        try:
            prefix = phi(st, c).bits
        except InconsistentBits:
            prefixes.append(None)
            continue
        prefixes.append(prefix)
        if not st.system.membership(prefix, budget):
            found.append(RuleViolation(
                rule_id="simulation-membership",
                positions=[origin],
                detail="Префикс сечения не принадлежит Z.",
            ))
    for c in range(len(prefixes) - 1):
        a, b = prefixes[c], prefixes[c + 1]
        if a is None or b is None:
            continue
        if not st.system.graph(list(zip(a, b)), budget):
            section = st.sections[c + 1]
            found.append(RuleViolation(
                rule_id="simulation-graph",
                positions=[tuple(section.pattern.origin[:2]) + (section.z,)],
                detail=f"Сечения {c} и {c + 1} не лежат на графе f.",
            ))
    return found


async def avalidate_stack(st: StackAssembly) -> List[RuleViolation]:
    """
    Пространственные правила по сечениям и проверки записей стека.
    """
    found = await avalidate_pattern(st.pattern)
    cells = detect_cells(st.sections[0].pattern)
    found += _check_records(st, cells)
    found += _check_oracles(st)
    found = sort_violations(found)
    if found:
        logger.warning("Stack validation found %s violations", len(found))
    return found


def validate_stack(st: StackAssembly) -> List[RuleViolation]:
    return anyio.run(avalidate_stack, st)
