"""
Сборка конечного трёхмерного стека-свидетеля: структурный слой общий для всех
сечений, системные биты, каналы и счётчики меняются от сечения к сечению.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import OracleRejection, OrderTooLarge
from app.core.logger import get_logger
from app.models.robinson import Corner
from app.schemas.counters import LinearCounterState, SystemCounterState
from app.schemas.hierarchy import CellRecord
from app.schemas.pattern import Pattern
from app.schemas.simulation import EffectiveSystemSpec, StackAssembly, StackPhases, StackSection
from app.services import counters
from app.services.counter_layers import counter_layers
from app.services.hierarchy import (
    FUNCTION,
    MIN_SUBDIVIDED_ORDER,
    MODULARITY,
    ORGANITE,
    computation_grid,
    detect_cells,
    extract_petals,
    function_layer,
    modularity_layer,
    modularity_marks,
    organite_layer,
    organite_mask,
)
from app.services.machine import witness_machine
from app.services.machine_layers import MACHINE_LAYERS, machine_layers
from app.services.robinson import ALIGNMENT, ROBINSON, generate_supertile, levels
from app.services.transports import (
    CHANNEL_ORGANITES,
    DIAGONAL,
    ORIENTATION,
    diagonal_layer,
    orientation_layer,
    transport_layers,
)

logger = get_logger(__name__)

BITS_H = "bits_h"
BITS_V = "bits_v"
CHANNEL = "channel"
STRUCTURE_LAYERS = (ROBINSON, ALIGNMENT, MODULARITY, FUNCTION, ORGANITE, DIAGONAL, ORIENTATION) + MACHINE_LAYERS
MIN_ASSEMBLY_ORDER = 3


def cell_levels(order: int) -> range:
    """
    Уровни клеток, целиком лежащих в St(order).
    """
    return range(0, (order - 2) // 2 + 1)


def bit_levels(order: int) -> range:
    """
    Уровни, линии которых проходят через St(order).
    """
    return range(0, (order - 1) // 2 + 1)


def prefix_length(order: int) -> int:
    return len([n for n in bit_levels(order) if n % 2 == 0])


def bits_layers(p: Pattern, bits: Dict[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Слои bits_h и bits_v: на строках с lev(Y) = 2k+1 (столбцах с lev(X) = 2k+1)
    записан 1 + бит уровня k, остальные позиции пусты.
    """
    x0, y0 = p.origin[:2]
    top = max(x0 + p.width, y0 + p.height)
    lookup = np.zeros(top.bit_length() + 2, dtype=np.int16)
    for level, bit in bits.items():
        if 2 * level + 1 < len(lookup):
            lookup[2 * level + 1] = 1 + bit
    rows = lookup[levels(np.arange(y0, y0 + p.height))]
    columns = lookup[levels(np.arange(x0, x0 + p.width))]
    bits_h = np.broadcast_to(rows[:, None], (p.height, p.width)).copy()
    bits_v = np.broadcast_to(columns[None, :], (p.height, p.width)).copy()
    return bits_h, bits_v


def channel_cells(cells: List[CellRecord]) -> List[Tuple[CellRecord, Tuple[int, int]]]:
    """
    Клетки нечётного уровня >= 3 с отметкой 1 или 3 и органит их канала.
    """
    return [
        (cell, CHANNEL_ORGANITES[cell.modularity])
        for cell in cells
        if cell.order % 2 == 1
        and cell.order >= MIN_SUBDIVIDED_ORDER
        and cell.modularity in CHANNEL_ORGANITES
    ]


def channel_layer(p: Pattern, cells: List[CellRecord], bits: Dict[int, int]) -> np.ndarray:
    x0, y0 = p.origin[:2]
    layer = np.zeros((p.height, p.width), dtype=np.int16)
    for cell, (i, j) in channel_cells(cells):
        if cell.order not in bits:
            continue
        b = cell.box
        mask = organite_mask(cell, p, cells, i, j)
        region = layer[b.y - y0:b.y - y0 + b.h, b.x - x0:b.x - x0 + b.w]
        region[mask] = 1 + bits[cell.order]
    return layer


def structure_pattern(order: int) -> Tuple[Pattern, List[CellRecord]]:
    """
    Структурные слои окна St_sw(order) и размеченные клетки.
    Диагонали лепестков и ориентация клеток не зависят от сечения и входят в структуру.
    """
    base = generate_supertile(Corner.SW, order)
    cells, _ = modularity_marks(detect_cells(base))
    structure = base.with_layers(
        **{
            MODULARITY: modularity_layer(base, cells),
            FUNCTION: function_layer(base, cells),
            ORGANITE: organite_layer(base, cells),
        }
    )
    structure = structure.with_layers(
        **{
            DIAGONAL: diagonal_layer(structure, extract_petals(base)),
            ORIENTATION: orientation_layer(structure, cells),
        }
    )
    return structure, cells


def cell_bit(cell: CellRecord, p: Pattern) -> Optional[int]:
    """
    Системный бит клетки, записанный в её юго-западном углу (None, если пусто).
    """
    if not p.has_layer(BITS_H):
        return None
    code = p.at(BITS_H, (cell.box.x, cell.box.y))
    return None if code == 0 else code - 1


def cell_bits(p: Pattern, cells: List[CellRecord]) -> Dict[Tuple[int, int], Optional[int]]:
    return {cell.anchor: cell_bit(cell, p) for cell in cells}


def _system_traces(order: int, phases: StackPhases, height: int) -> Dict[int, List[SystemCounterState]]:
    traces = {}
    for level in bit_levels(order):
        if level % 2 == 0:
            continue
        params = counters.system_params_for_level(level)
        start = counters.system_zero(params)
        for _ in range(phases.system):
            start = counters.system_step(start, params)
        traces[level] = [start] + counters.system_states(params, height - 1, start)
    return traces


def _linear_states(cells: List[CellRecord], phases: StackPhases) -> Tuple[Dict, Dict]:
    """
    Линейный счётчик клетки с номером столбца t среди клеток её уровня равен step^(phase+t)(0).
    """
    states: Dict[Tuple[int, int], LinearCounterState] = {}
    owners: Dict[Tuple[int, int], int] = {}
    for level in sorted({cell.order for cell in cells}):
        same = [cell for cell in cells if cell.order == level]
        columns = sorted({cell.box.x for cell in same})
        params = counters.linear_params_for_level(level)
        state = counters.linear_zero(params)
        for _ in range(phases.linear):
            state = counters.linear_step(state, params)
        run = [state] + counters.linear_run(params, len(columns) - 1, state)
        rank = {x: t for t, x in enumerate(columns)}
        for cell in same:
            states[cell.anchor] = run[rank[cell.box.x]]
            owners[cell.anchor] = level
    return states, owners


def _section_bits(
    sys: EffectiveSystemSpec, order: int, c: int, phases: StackPhases, traces: Dict[int, List[SystemCounterState]]
) -> Dict[int, int]:
    prefix = sys.point(phases.orbit + c, prefix_length(order))
    bits = {}
    for level in bit_levels(order):
        if level % 2 == 0:
            bits[level] = prefix[level // 2]
        else:
            bits[level] = traces[level][c].torus[0]
    return bits


def _check_oracles(sys: EffectiveSystemSpec, order: int, height: int, phases: StackPhases) -> None:
    length = prefix_length(order)
    budget = settings.oracle_step_budget
    prefixes = [sys.point(phases.orbit + c, length) for c in range(height)]
    for c, prefix in enumerate(prefixes):
        if not sys.membership(prefix, budget):
            logger.error("Membership oracle rejected prefix of section %s", c)
            raise OracleRejection(f"Префикс сечения {c} не принадлежит Z.")
    for c in range(height - 1):
        if not sys.graph(list(zip(prefixes[c], prefixes[c + 1])), budget):
            logger.error("Graph oracle rejected sections %s and %s", c, c + 1)
            raise OracleRejection(f"Сечения {c} и {c + 1} не лежат на графе f.")


def assemble_stack(
    sys: EffectiveSystemSpec, order: int, height: int, phases: Optional[StackPhases] = None
) -> StackAssembly:
    """
    Собирает стек высоты height на окне St_sw(order).
    Сечение c несёт префикс f^c(z) на чётных уровнях и след системного счётчика
    на нечётных; линейные счётчики растут на единицу от клетки к клетке вдоль e1
    и постоянны вдоль e3.
    :param sys: эффективная система
    :param order: порядок окна, от 3 до max_assembly_order
    :param height: число сечений
    :param phases: начальные фазы
    :return: стек со всеми слоями и записями счётчиков
    """
    if not MIN_ASSEMBLY_ORDER <= order <= settings.max_assembly_order:
        logger.error("Assembly order %s is outside %s..%s", order, MIN_ASSEMBLY_ORDER, settings.max_assembly_order)
        raise OrderTooLarge(
            f"Порядок сборки {order} вне диапазона {MIN_ASSEMBLY_ORDER}..{settings.max_assembly_order}."
        )
    if height < 1:
        raise ValueError("Высота стека должна быть положительной.")
    phases = StackPhases() if phases is None else phases
    logger.info("Assembling %s stack of order %s and height %s", sys.name, order, height)

    _check_oracles(sys, order, height, phases)
    structure, cells = structure_pattern(order)
    grid = computation_grid(structure, cells)
    structure = structure.with_layers(**machine_layers(structure, cells, grid, witness_machine()))
    traces = _system_traces(order, phases, height)
    linear, owners = _linear_states(cells, phases)

    sections = []
    for c in range(height):
        bits = _section_bits(sys, order, c, phases, traces)
        bits_h, bits_v = bits_layers(structure, bits)
        pattern = structure.with_layers(
            **{BITS_H: bits_h, BITS_V: bits_v, CHANNEL: channel_layer(structure, cells, bits)}
        )
        system = {level: states[c] for level, states in traces.items()}
        pattern = pattern.with_layers(**counter_layers(pattern, cells, grid, linear, system))
        pattern = pattern.with_layers(**transport_layers(pattern, cells, grid, cell_bits(pattern, cells)))
        sections.append(
            StackSection(
                z=c,
                pattern=pattern,
                bits=bits,
                linear=linear,
                linear_levels=owners,
                system=system,
            )
        )
    return StackAssembly(system=sys, order=order, phases=phases, sections=sections)
