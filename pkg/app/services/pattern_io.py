"""
Текстовые форматы: образцы (sft-pattern v1), машины (machine v1) и входы со сторон.
"""
from typing import Dict, List, Tuple

import numpy as np

from app.core.exceptions import ParseError
from app.models.machine import Move
from app.schemas.machine import MachineSpec
from app.schemas.pattern import Pattern
from app.services import codes
from app.services.assembly import BITS_H, BITS_V, CHANNEL
from app.services.counter_layers import LINEAR, LINEAR_FREEZE, SYSTEM, SYSTEM_FREEZE
from app.services.hierarchy import FUNCTION, MODULARITY, ORGANITE, ORGANITE_GRAY
from app.services.machine_layers import ARROW, HEAD, SIDES, TAPE
from app.services.robinson import ALIGNMENT, ROBINSON
from app.services.transports import BORDER, DIAGONAL, EXTRACTION, INTERCELL, LINEAR_TRANSPORT, ORIENTATION

PATTERN_MAGIC = "sft-pattern v1"
MACHINE_MAGIC = "machine v1"
KNOWN_LAYERS = (
    ROBINSON, ALIGNMENT, BITS_H, BITS_V, MODULARITY, FUNCTION, ORGANITE, CHANNEL,
    DIAGONAL, ORIENTATION, BORDER, LINEAR_TRANSPORT, EXTRACTION, INTERCELL,
    LINEAR, LINEAR_FREEZE, SYSTEM, SYSTEM_FREEZE,
    TAPE, HEAD, SIDES, ARROW,
)

MAX_CODE = 2**15
# Граница кодов (не включая) для слоёв с конечным алфавитом
CODE_LIMITS = {
    ROBINSON: codes.CODE_COUNT,
    ALIGNMENT: 5,
    BITS_H: 3,
    BITS_V: 3,
    CHANNEL: 3,
    BORDER: 3,
    MODULARITY: 5,
    FUNCTION: 5,
    ORGANITE: ORGANITE_GRAY + 1,
    DIAGONAL: 3,
    ORIENTATION: 5,
    LINEAR_FREEZE: 5,
    SYSTEM_FREEZE: 5,
    ARROW: 3,
}


class _Lines:
    """
    Построчное чтение с номерами строк для сообщений об ошибках.
    """

    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.index = 0

    @property
    def number(self) -> int:
        return self.index + 1

    def next(self, what: str) -> str:
        if self.index >= len(self.lines):
            raise ParseError(f"Файл обрывается, ожидалось: {what}.", self.index + 1, 1)
        line = self.lines[self.index]
        self.index += 1
        return line

    def done(self) -> bool:
        return self.index >= len(self.lines)


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"Файл не в кодировке UTF-8: {exc.reason}.", 1, exc.start + 1) from exc


def _numbered(line: str, number: int) -> List[Tuple[int, int]]:
    """
    Целые числа строки вместе со столбцом, с которого начинается каждое.
    """
    values = []
    column = 1
    for token in line.split(" "):
        if token == "":
            column += 1
            continue
        try:
            values.append((int(token), column))
        except ValueError:
            raise ParseError(f"Ожидалось целое число, найдено '{token}'.", number, column) from None
        column += len(token) + 1
    return values


def _integers(line: str, number: int) -> List[int]:
    return [value for value, _ in _numbered(line, number)]


def _keyword(line: str, keyword: str, number: int) -> str:
    head, _, rest = line.partition(" ")
    if head != keyword:
        raise ParseError(f"Ожидалось ключевое слово '{keyword}', найдено '{head}'.", number, 1)
    return rest


def parse_pattern(data: bytes) -> Pattern:
    """
    Разбор образца: заголовок, опора, список слоёв и по каждому слою строки кодов
    с юга на север (для трёхмерной опоры - сечения по возрастанию z).
    :raises ParseError: с номером строки и столбца
    """
    lines = _Lines(_decode(data))
    if lines.next("заголовок") != PATTERN_MAGIC:
        raise ParseError(f"Ожидался заголовок '{PATTERN_MAGIC}'.", 1, 1)

    number = lines.number
    support = _integers(_keyword(lines.next("опора"), "support", number), number)
    if len(support) == 4:
        origin, size = tuple(support[:2]), tuple(support[2:])
    elif len(support) == 6:
        origin, size = tuple(support[:3]), tuple(support[3:])
    else:
        raise ParseError("Опора задаётся 4 или 6 числами.", number, 1)
    if any(extent <= 0 for extent in size):
        raise ParseError("Размеры опоры должны быть положительными.", number, 1)

    number = lines.number
    names = _keyword(lines.next("список слоёв"), "layers", number).split(",")
    column = len("layers ") + 1
    for k, name in enumerate(names):
        if name not in KNOWN_LAYERS:
            raise ParseError(f"Неизвестный слой '{name}'.", number, column)
        if name in names[:k]:
            raise ParseError(f"Слой '{name}' повторяется.", number, column)
        column += len(name) + 1

    width = size[0]
    rows = size[1] * (size[2] if len(size) == 3 else 1)
    layers: Dict[str, np.ndarray] = {}
    for name in names:
        number = lines.number
        declared = _keyword(lines.next(f"слой {name}"), "layer", number)
        if declared != name:
            raise ParseError(f"Ожидался слой '{name}', найден '{declared}'.", number, 7)
        values = []
        for _ in range(rows):
            number = lines.number
            row = _numbered(lines.next(f"строка слоя {name}"), number)
            if len(row) != width:
                raise ParseError(f"В строке {len(row)} кодов, ожидалось {width}.", number, 1)
            limit = CODE_LIMITS.get(name, MAX_CODE)
            for value, column in row:
                if not 0 <= value < limit:
                    raise ParseError(f"Код {value} вне алфавита слоя {name} (0..{limit - 1}).", number, column)
            values.append([value for value, _ in row])
        layers[name] = np.array(values, dtype=np.int16).reshape(tuple(reversed(size)))
    if not lines.done():
        raise ParseError("Лишние строки после последнего слоя.", lines.number, 1)
    return Pattern(origin=origin, size=size, layers=layers)


def write_pattern(p: Pattern) -> bytes:
    """
    Каноническая запись образца (слои в порядке хранения, одиночные пробелы).
    """
    out = [PATTERN_MAGIC]
    out.append("support " + " ".join(str(v) for v in tuple(p.origin) + tuple(p.size)))
    out.append("layers " + ",".join(p.layer_names))
    for name in p.layer_names:
        out.append(f"layer {name}")
        values = p.layer(name).reshape(-1, p.width)
        out.extend(" ".join(str(int(v)) for v in row) for row in values)
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_machine(data: bytes) -> MachineSpec:
    """
    Разбор машины: заголовок, объявления states/alphabet/init/error/shadow/blank,
    затем строки переходов `a q -> a' q' ход`.
    """
    lines = _Lines(_decode(data))
    if lines.next("заголовок") != MACHINE_MAGIC:
        raise ParseError(f"Ожидался заголовок '{MACHINE_MAGIC}'.", 1, 1)
    fields: Dict[str, object] = {}
    for keyword, many in (("states", True), ("alphabet", True), ("init", False),
                          ("error", False), ("shadow", False), ("blank", False)):
        number = lines.number
        tokens = _keyword(lines.next(keyword), keyword, number).split()
        if not tokens or (not many and len(tokens) != 1):
            raise ParseError(f"Неверное объявление '{keyword}'.", number, len(keyword) + 2)
        fields[keyword] = tokens if many else tokens[0]
    delta: Dict[Tuple[str, str], Tuple[str, str, Move]] = {}
    while not lines.done():
        number = lines.number
        line = lines.next("переход")
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 6 or tokens[2] != "->":
            raise ParseError("Переход записывается как 'a q -> a2 q2 ход'.", number, 1)
        try:
            move = Move(tokens[5])
        except ValueError:
            raise ParseError(f"Неизвестный ход '{tokens[5]}'.", number, line.rfind(tokens[5]) + 1) from None
        key = (tokens[0], tokens[1])
        if key in delta:
            raise ParseError(f"Переход для ({tokens[0]}, {tokens[1]}) задан дважды.", number, 1)
        delta[key] = (tokens[3], tokens[4], move)
    try:
        return MachineSpec(delta=delta, **fields)
    except ValueError as exc:
        raise ParseError(f"Некорректная машина: {exc}", lines.number, 1) from exc


def write_machine(spec: MachineSpec) -> bytes:
    out = [
        MACHINE_MAGIC,
        "states " + " ".join(spec.states),
        "alphabet " + " ".join(spec.alphabet),
        f"init {spec.init}",
        f"error {spec.error}",
        f"shadow {spec.shadow}",
        f"blank {spec.blank}",
    ]
    for (a, q), (b, p, move) in sorted(spec.delta.items()):
        out.append(f"{a} {q} -> {b} {p} {move.value}")
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_sides(data: bytes) -> Tuple[List[str], List[str]]:
    """
    Входы со сторон: по строке `запад восток` на каждую активную строку снизу вверх.
    """
    west, east = [], []
    for number, line in enumerate(_decode(data).splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise ParseError("Строка входов содержит два состояния.", number, 1)
        west.append(tokens[0])
        east.append(tokens[1])
    return west, east

