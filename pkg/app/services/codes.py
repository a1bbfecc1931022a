"""
Таблица кодов символов Робинсона и таблицы поиска для векторных проверок.

Коды генерируются, а не задаются вручную:
0 - пустой символ, 1..4 - синие углы, 5..12 - красные углы (ориентация x бит),
далее стрелки: 6 видов x 4 направления x i x j.
"""
from typing import List, Optional

import numpy as np

from app.models.robinson import ARROW_KINDS, AlignmentMark, Corner, Direction, SymbolKind
from app.schemas.robinson import RobinsonSymbol

BLANK = 0
BLUE_BASE = 1
RED_BASE = 5
ARROW_BASE = 13
CODE_COUNT = ARROW_BASE + len(ARROW_KINDS) * 4 * 2 * 2

PORT_NONE, PORT_OUT, PORT_IN = 0, 1, 2
SINGLE, DOUBLE = 1, 2

# Индексы видов в таблице KIND: 0 синий угол, 1 красный угол, 2.. стрелки в порядке ARROW_KINDS
KIND_BLUE, KIND_RED = 0, 1
KIND_OF_ARROW = {kind: 2 + index for index, kind in enumerate(ARROW_KINDS)}


def blue_code(corner: Corner) -> int:
    return BLUE_BASE + corner.value


def red_code(corner: Corner, bit: int) -> int:
    return RED_BASE + 2 * corner.value + bit


def arrow_code(kind: SymbolKind, through: Direction, i: int, j: int) -> int:
    kind_index = ARROW_KINDS.index(kind)
    return ARROW_BASE + ((kind_index * 4 + through.value) * 2 + i) * 2 + j


def decode_symbol(code: int, alignment: int = 0) -> Optional[RobinsonSymbol]:
    """
    Восстанавливает символ по коду слоя robinson и коду слоя alignment.
    :return: None для пустого символа
    """
    if code == BLANK:
        return None
    mark = AlignmentMark(alignment)
    if code < RED_BASE:
        corner = Corner(code - BLUE_BASE)
        return RobinsonSymbol(kind=SymbolKind.BLUE_CORNER, rotation=corner.degrees, alignment=mark)
    if code < ARROW_BASE:
        corner, bit = divmod(code - RED_BASE, 2)
        corner = Corner(corner)
        return RobinsonSymbol(kind=SymbolKind.RED_CORNER, rotation=corner.degrees, bit=bit, alignment=mark)
    rest = code - ARROW_BASE
    rest, j = divmod(rest, 2)
    rest, i = divmod(rest, 2)
    kind_index, through = divmod(rest, 4)
    return RobinsonSymbol(
        kind=ARROW_KINDS[kind_index],
        rotation=Direction(through).degrees,
        parity=(i, j),
        alignment=mark,
    )


def encode_symbol(symbol: Optional[RobinsonSymbol]) -> int:
    if symbol is None:
        return BLANK
    if symbol.kind.is_corner:
        corner = next(c for c in Corner if c.degrees == symbol.rotation)
        if symbol.kind == SymbolKind.BLUE_CORNER:
            return blue_code(corner)
        return red_code(corner, symbol.bit)
    i, j = symbol.parity
    return arrow_code(symbol.kind, Direction(symbol.rotation // 90), i, j)


def _side_directions(through: Direction) -> tuple:
    return Direction((through.value + 1) % 4), Direction((through.value + 3) % 4)


def _build_tables() -> dict:
    kind = np.full(CODE_COUNT, -1, dtype=np.int16)
    corner = np.full(CODE_COUNT, -1, dtype=np.int16)
    through = np.full(CODE_COUNT, -1, dtype=np.int16)
    bit = np.full(CODE_COUNT, -1, dtype=np.int16)
    par_i = np.full(CODE_COUNT, -1, dtype=np.int16)
    par_j = np.full(CODE_COUNT, -1, dtype=np.int16)
    port_state = np.zeros((CODE_COUNT, 4), dtype=np.int8)
    port_weight = np.zeros((CODE_COUNT, 4), dtype=np.int8)
    port_inner = np.full((CODE_COUNT, 4), -1, dtype=np.int8)

    for code in range(1, CODE_COUNT):
        symbol = decode_symbol(code)
        if symbol.kind.is_corner:
            c = next(c for c in Corner if c.degrees == symbol.rotation)
            corner[code] = c.value
            kind[code] = KIND_BLUE if symbol.kind == SymbolKind.BLUE_CORNER else KIND_RED
            value = symbol.bit or 0
            bit[code] = value if symbol.kind == SymbolKind.RED_CORNER else -1
            par_i[code] = par_j[code] = value
            horizontal, vertical = c.petal_directions
            for d in Direction:
                port_state[code, d.value] = PORT_OUT
                port_weight[code, d.value] = SINGLE
            # Двойные линии уходят в сторону лепестка, внутренняя сторона - внутрь лепестка
            port_weight[code, horizontal.value] = DOUBLE
            port_inner[code, horizontal.value] = vertical.value
            port_weight[code, vertical.value] = DOUBLE
            port_inner[code, vertical.value] = horizontal.value
            continue

        t = Direction(symbol.rotation // 90)
        kind[code] = KIND_OF_ARROW[symbol.kind]
        through[code] = t.value
        par_i[code], par_j[code] = symbol.parity
        if symbol.kind.double_through:
            weight = DOUBLE
            if t.is_horizontal:
                inner = Direction.S if symbol.kind.mirrored else Direction.N
            else:
                inner = Direction.W if symbol.kind.mirrored else Direction.E
        else:
            weight, inner = SINGLE, None
        for d, state in ((t, PORT_OUT), (t.opposite, PORT_IN)):
            port_state[code, d.value] = state
            port_weight[code, d.value] = weight
            if inner is not None:
                port_inner[code, d.value] = inner.value
        for side in _side_directions(t):
            port_state[code, side.value] = PORT_IN
            if symbol.kind.double_sides:
                port_weight[code, side.value] = DOUBLE
                port_inner[code, side.value] = t.opposite.value
            else:
                port_weight[code, side.value] = SINGLE

    alignable = np.zeros(CODE_COUNT, dtype=bool)
    single_sides = np.zeros(CODE_COUNT, dtype=bool)
    three = np.zeros(CODE_COUNT, dtype=bool)
    double_sides = np.zeros(CODE_COUNT, dtype=bool)
    for arrow_kind, index in KIND_OF_ARROW.items():
        mask = kind == index
        alignable[mask] = arrow_kind.alignable
        single_sides[mask] = not arrow_kind.double_sides
        double_sides[mask] = arrow_kind.double_sides
        three[mask] = arrow_kind == SymbolKind.ARROW_3

    return {
        "kind": kind,
        "corner": corner,
        "through": through,
        "bit": bit,
        "par_i": par_i,
        "par_j": par_j,
        "port_state": port_state,
        "port_weight": port_weight,
        "port_inner": port_inner,
        "alignable": alignable,
        "single_sides": single_sides,
        "double_sides": double_sides,
        "three": three,
    }


TABLES = _build_tables()
KIND = TABLES["kind"]
CORNER = TABLES["corner"]
THROUGH = TABLES["through"]
BIT = TABLES["bit"]
PAR_I = TABLES["par_i"]
PAR_J = TABLES["par_j"]
PORT_STATE = TABLES["port_state"]
PORT_WEIGHT = TABLES["port_weight"]
PORT_INNER = TABLES["port_inner"]
ALIGNABLE = TABLES["alignable"]
SINGLE_SIDES = TABLES["single_sides"]
DOUBLE_SIDES = TABLES["double_sides"]
THREE = TABLES["three"]
IS_BLUE = KIND == KIND_BLUE
IS_RED = KIND == KIND_RED
IS_CORNER = IS_BLUE | IS_RED


def code_table() -> List[str]:
    """
    Справочник кодов для команды codes: одна строка на код.
    """
    lines = [f"{BLANK} blank"]
    for code in range(1, CODE_COUNT):
        symbol = decode_symbol(code)
        parts = [str(code), symbol.kind.value, f"rot={symbol.rotation}"]
        if symbol.bit is not None:
            parts.append(f"bit={symbol.bit}")
        if symbol.parity is not None:
            parts.append(f"ij={symbol.parity[0]}{symbol.parity[1]}")
        lines.append(" ".join(parts))
    return lines
