"""
Многоголовочная машина на прямоугольной области вычислений
и эталонный одноголовочный симулятор для сверки.
"""
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from app.core.exceptions import DimensionMismatch, LengthMismatch, Overflow
from app.core.logger import get_logger
from app.models.machine import HeadEvent, Move
from app.schemas.machine import (
    ComputationArea,
    DiagramCell,
    HeadEventRecord,
    MachineSpec,
    SpaceTimeDiagram,
)
from app.services.counters import decode_digit

logger = get_logger(__name__)

_STEP = {Move.LEFT: -1, Move.RIGHT: 1, Move.STAY: 0}


def pad_machine(spec: MachineSpec, l: int) -> MachineSpec:
    """
    Дополняет алфавит и множество состояний до 2^(2^l) инертными элементами.
    """
    size = 2 ** (2**l)
    if len(spec.alphabet) > size or len(spec.states) > size:
        raise Overflow(f"Машина не помещается в алфавиты размера {size}.")
    letters = list(spec.alphabet) + [f"_a{n}" for n in range(size - len(spec.alphabet))]
    states = list(spec.states) + [f"_q{n}" for n in range(size - len(spec.states))]
    return spec.model_copy(update={"alphabet": letters, "states": states})


def witness_machine() -> MachineSpec:
    """
    Машина, которая качается между двумя левыми столбцами и никогда не достигает qe
    на области ширины не меньше 2.
    """
    return MachineSpec(
        states=["q0", "q1", "qe", "qs"],
        alphabet=["#", "1"],
        delta={
            ("#", "q0"): ("1", "q1", Move.RIGHT),
            ("1", "q0"): ("1", "q1", Move.RIGHT),
            ("#", "q1"): ("#", "q0", Move.LEFT),
            ("1", "q1"): ("1", "q0", Move.LEFT),
        },
        init="q0",
        error="qe",
        shadow="qs",
        blank="#",
    )


def initial_area(
    spec: MachineSpec,
    width: int,
    height: int,
    active_columns: Optional[List[bool]] = None,
    active_rows: Optional[List[bool]] = None,
    tape: Optional[Sequence[str]] = None,
) -> ComputationArea:
    """
    Область с правильной инициализацией: (буква, q0) в крайнем левом активном столбце,
    (буква, qs) в остальных, без входов со сторон.
    """
    columns = [True] * width if active_columns is None else list(active_columns)
    rows = [True] * height if active_rows is None else list(active_rows)
    count = sum(columns)
    letters = [spec.blank] * count if tape is None else list(tape)
    cells = [(a, spec.init if x == 0 else spec.shadow) for x, a in enumerate(letters)]
    return ComputationArea(
        width=width,
        height=height,
        active_columns=columns,
        active_rows=rows,
        tape=cells,
    )


def _check_area(spec: MachineSpec, area: ComputationArea) -> Tuple[List[str], List[str]]:
    if len(area.active_columns) != area.width or len(area.active_rows) != area.height:
        raise DimensionMismatch("Флаги активности не совпадают с размерами области.")
    columns = area.columns
    if len(area.tape) != len(columns):
        raise DimensionMismatch(f"Лента длины {len(area.tape)}, активных столбцов {len(columns)}.")
    if area.arrows is not None and len(area.arrows) != area.width:
        raise DimensionMismatch("Стрелки направления задаются для каждого столбца.")
    rows = len(area.rows)
    west = [spec.shadow] * rows if area.west is None else list(area.west)
    east = [spec.shadow] * rows if area.east is None else list(area.east)
    if len(west) != rows or len(east) != rows:
        raise DimensionMismatch(f"Входов со сторон должно быть по {rows}.")
    return west, east


def _side_inputs(area: ComputationArea, west: List[str], east: List[str]) -> Dict[int, Tuple[str, str]]:
    return {y: (west[k], east[k]) for k, y in enumerate(area.rows)}


def _transit(
    row: List[DiagramCell], columns: List[int], landings: List[Tuple[int, int, str]], shadow: str
) -> None:
    """
    Отмечает головки, проходящие над неактивными столбцами между src и dst.
    """
    passing: Dict[int, List[str]] = defaultdict(lambda: [shadow, shadow])
    for src, dst, state in landings:
        if src == dst:
            continue
        low, high = sorted((src, dst))
        for x in range(low + 1, high):
            if x not in columns:
                passing[x][0 if dst > src else 1] = state
    for x, (right, left) in passing.items():
        row[x] = DiagramCell(transit=(right, left))


def _settle(
    spec: MachineSpec,
    y: int,
    letters: Dict[int, str],
    arrivals: Dict[int, List[str]],
    events: List[HeadEventRecord],
    width: int,
    columns: List[int],
) -> List[DiagramCell]:
    row = [DiagramCell(transit=(spec.shadow, spec.shadow)) for _ in range(width)]
    for x in columns:
        heads = arrivals.get(x, [])
        if len(heads) >= 2:
            state = spec.error
            events.append(HeadEventRecord(x=x, y=y, state=state, event=HeadEvent.FUSE))
        elif heads:
            state = heads[0]
        else:
            state = spec.shadow
        row[x] = DiagramCell(letter=letters[x], state=state)
    return row


def run_area(spec: MachineSpec, area: ComputationArea) -> SpaceTimeDiagram:
    """
    Диаграмма пространства-времени: строка y+1 получается из строки y и входов со сторон.
    Головка снизу применяет delta и учитывается в столбце, куда она приходит;
    выход за край области даёт (a, qe) в исходном столбце без записи;
    две и более приходящие головки сливаются в (a, qe).
    Неактивные строки повторяют строку ниже, неактивные столбцы пропускаются ходами.
    :param spec: машина
    :param area: область вычислений
    :return: диаграмма с событиями головок
    """
    west, east = _check_area(spec, area)
    sides = _side_inputs(area, west, east)
    columns = area.columns
    position = {x: p for p, x in enumerate(columns)}
    events: List[HeadEventRecord] = []

    letters = {x: a for x, (a, _) in zip(columns, area.tape)}
    arrivals: Dict[int, List[str]] = defaultdict(list)
    for x, (_, q) in zip(columns, area.tape):
        if q != spec.shadow:
            arrivals[x].append(q)
    landings: List[Tuple[int, int, str]] = []
    _enter_sides(spec, sides.get(0), columns, arrivals, landings, area.width)
    first = _settle(spec, 0, letters, arrivals, events, area.width, columns)
    _transit(first, columns, landings, spec.shadow)
    cells = [first]

    for y in range(1, area.height):
        below = cells[-1]
        if not area.active_rows[y] or not columns:
            cells.append(list(below))
            continue
        letters = {}
        arrivals = defaultdict(list)
        landings = []
        for x in columns:
            a, q = below[x].letter, below[x].state
            letters.setdefault(x, a)
            if q == spec.shadow:
                continue
            b, p, move = spec.apply(a, q)
            target = position[x] + _STEP[move]
            if not 0 <= target < len(columns):
                arrivals[x].append(spec.error)
                events.append(HeadEventRecord(x=x, y=y, state=spec.error, event=HeadEvent.BORDER_HIT))
                continue
            letters[x] = b
            dst = columns[target]
            arrivals[dst].append(p)
            landings.append((x, dst, p))
            if q != spec.error:
                events.append(HeadEventRecord(x=dst, y=y, state=p, event=HeadEvent.MOVE))
        _enter_sides(spec, sides.get(y), columns, arrivals, landings, area.width)
        row = _settle(spec, y, letters, arrivals, events, area.width, columns)
        _transit(row, columns, landings, spec.shadow)
        cells.append(row)

    logger.debug("Machine run on %sx%s area produced %s events", area.width, area.height, len(events))
    return SpaceTimeDiagram(width=area.width, height=area.height, cells=cells, events=events)


def _enter_sides(spec, inputs, columns, arrivals, landings, width) -> None:
    if inputs is None or not columns:
        return
    west, east = inputs
    if west != spec.shadow:
        arrivals[columns[0]].append(west)
        landings.append((-1, columns[0], west))
    if east != spec.shadow:
        arrivals[columns[-1]].append(east)
        landings.append((width, columns[-1], east))


Configuration = Tuple[Tuple[str, ...], int, str]


def reference_run(spec: MachineSpec, tape: Sequence[str], steps: int) -> List[Configuration]:
    """
    Обычная одноголовочная машина на конечной ленте; шаг за край ленты
    оставляет букву и переводит головку в qe.
    :return: конфигурации (лента, позиция, состояние) для шагов 0..steps
    """
    cells = list(tape)
    head, state = 0, spec.init
    configurations = [(tuple(cells), head, state)]
    for _ in range(steps):
        b, p, move = spec.apply(cells[head], state)
        target = head + _STEP[move]
        if 0 <= target < len(cells):
            cells[head] = b
            head, state = target, p
        else:
            state = spec.error
        configurations.append((tuple(cells), head, state))
    return configurations


def diagram_configurations(spec: MachineSpec, diagram: SpaceTimeDiagram) -> List[Optional[Configuration]]:
    """
    Конфигурации строк диаграммы с ровно одной головкой (None для прочих строк).
    """
    result = []
    for y, row in enumerate(diagram.cells):
        heads = diagram.heads(y, spec.shadow)
        letters = tuple(cell.letter for cell in row if cell.letter is not None)
        result.append((letters, heads[0][0], heads[0][1]) if len(heads) == 1 else None)
    return result


def reference_equivalence(spec: MachineSpec, tape: Sequence[str], steps: int) -> bool:
    """
    Сверяет run_area с эталонным симулятором на полностью активной области
    с единственной головкой q0 в левом столбце.
    """
    area = initial_area(spec, len(tape), steps + 1, tape=tape)
    observed = diagram_configurations(spec, run_area(spec, area))
    expected = reference_run(spec, tape, steps)
    equal = observed == expected
    if not equal:
        logger.warning("Machine run diverges from the reference simulator")
    return equal


def active_gating_consistency(area: ComputationArea, digits: Sequence[int], l: int) -> bool:
    """
    Флаги активности области совпадают с флагами, закодированными в цифрах линейного счётчика:
    цифра t задаёт столбец t и строку t.
    """
    expected = max(area.width, area.height)
    if len(digits) != expected:
        raise LengthMismatch(f"Ожидалось {expected} цифр счётчика, получено {len(digits)}.")
    decoded = [decode_digit(d, l) for d in digits]
    columns = [decoded[t].column_on for t in range(area.width)]
    rows = [decoded[t].row_on for t in range(area.height)]
    return columns == list(area.active_columns) and rows == list(area.active_rows)
