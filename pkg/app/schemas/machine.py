from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.machine import HeadEvent, Move

Action = Tuple[str, str, Move]


class MachineSpec(BaseModel):
    """
    Вычислительная машина: состояния, алфавит ленты и полная функция перехода.
    Пары, отсутствующие в delta, считаются инертными: (a, q) -> (a, q, ^).
    Состояния ошибки и тени всегда инертны.
    """
    model_config = ConfigDict(frozen=True)

    states: List[str] = Field(..., min_length=3, description="Множество состояний Q")
    alphabet: List[str] = Field(..., min_length=1, description="Алфавит ленты A")
    delta: Dict[Tuple[str, str], Action] = Field(default_factory=dict, description="Переходы (a, q) -> (a', q', ход)")
    init: str = Field(..., description="Начальное состояние q0")
    error: str = Field(..., description="Состояние ошибки qe")
    shadow: str = Field(..., description="Теневое состояние qs")
    blank: str = Field(..., description="Пустой символ #")

    @model_validator(mode="after")
    def check_machine(self):
        states, letters = set(self.states), set(self.alphabet)
        if len(states) != len(self.states) or len(letters) != len(self.alphabet):
            raise ValueError("Состояния и буквы не должны повторяться.")
        if not {self.init, self.error, self.shadow} <= states:
            raise ValueError("Состояния q0, qe и qs должны принадлежать Q.")
        if len({self.init, self.error, self.shadow}) != 3:
            raise ValueError("Состояния q0, qe и qs должны быть различны.")
        if self.blank not in letters:
            raise ValueError("Пустой символ должен принадлежать алфавиту.")
        for (a, q), (b, p, _) in self.delta.items():
            if a not in letters or b not in letters or q not in states or p not in states:
                raise ValueError(f"Переход ({a}, {q}) использует неизвестные символы.")
            if q in (self.error, self.shadow) and (b, p) != (a, q):
                raise ValueError(f"Состояние {q} должно быть инертным.")
        return self

    def apply(self, a: str, q: str) -> Action:
        if q in (self.error, self.shadow):
            return a, q, Move.STAY
        return self.delta.get((a, q), (a, q, Move.STAY))


class ComputationArea(BaseModel):
    """
    Прямоугольная область вычислений: флаги активности столбцов и строк,
    нижняя лента (по одной паре (буква, состояние) на активный столбец),
    входы с западной и восточной сторон (по одному состоянию на активную строку)
    и стрелки направления над каждым столбцом верхней строки.
    """
    model_config = ConfigDict(frozen=True)

    width: int = Field(..., ge=1, description="Ширина области")
    height: int = Field(..., ge=1, description="Высота области")
    active_columns: List[bool] = Field(..., description="Активные столбцы")
    active_rows: List[bool] = Field(..., description="Активные строки")
    tape: List[Tuple[str, str]] = Field(..., description="Нижняя лента над активными столбцами")
    west: Optional[List[str]] = Field(None, description="Входы с запада; по умолчанию qs")
    east: Optional[List[str]] = Field(None, description="Входы с востока; по умолчанию qs")
    arrows: Optional[List[Move]] = Field(None, description="Направления сигнала ошибки; по умолчанию вправо")

    @property
    def columns(self) -> List[int]:
        return [x for x, on in enumerate(self.active_columns) if on]

    @property
    def rows(self) -> List[int]:
        return [y for y, on in enumerate(self.active_rows) if on]

    def arrow(self, x: int) -> Move:
        return Move.RIGHT if self.arrows is None else self.arrows[x]


class DiagramCell(BaseModel):
    """
    Содержимое позиции диаграммы: буква и состояние на пересечениях,
    пара транзитных состояний (вправо, влево) на неактивных столбцах.
    """
    model_config = ConfigDict(frozen=True)

    letter: Optional[str] = None
    state: Optional[str] = None
    transit: Optional[Tuple[str, str]] = None


class HeadEventRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    state: str
    event: HeadEvent


class SpaceTimeDiagram(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int
    height: int
    cells: List[List[DiagramCell]] = Field(..., description="Строки диаграммы снизу вверх, индекс [y][x]")
    events: List[HeadEventRecord] = Field(default_factory=list, description="События головок")

    def heads(self, y: int, shadow: str) -> List[Tuple[int, str]]:
        return [
            (x, cell.state)
            for x, cell in enumerate(self.cells[y])
            if cell.state is not None and cell.state != shadow
        ]


class SignalReport(BaseModel):
    """
    Разбиения сигналов: первая ошибка сверху, пустая лента (слева направо и справа налево),
    пустые стороны (запад и восток), путь сигнала ошибки и итог допустимости.
    """
    model_config = ConfigDict(frozen=True)

    first_error: int = Field(..., ge=0, description="Столбец первой ошибки в верхней строке")
    tape_left: int = Field(..., ge=0, description="Первый грязный столбец слева")
    tape_right: int = Field(..., ge=0, description="Граница последнего грязного столбца справа")
    west_side: int = Field(..., ge=0, description="Первая грязная строка западной стороны")
    east_side: int = Field(..., ge=0, description="Первая грязная строка восточной стороны")
    error_path: List[Tuple[int, int]] = Field(default_factory=list, description="Путь сигнала ошибки")
    admissible: bool = Field(..., description="Запрещённое сочетание сигналов отсутствует")
    width: int
    height: int

    @property
    def has_error(self) -> bool:
        return self.first_error < self.width

    @property
    def tape_clean(self) -> bool:
        return self.tape_left == self.width

    @property
    def sides_clean(self) -> bool:
        return self.west_side == self.height and self.east_side == self.height
