from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.machine import Move


class CounterParams(BaseModel):
    """
    Параметры линейного счётчика: алфавит цифр размера D = 2^(2^k), длина слова w
    и циклическая перестановка successor (по умолчанию d -> d+1 mod D).
    Максимальная цифра - та, за которой следует нулевая.
    """
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=0, le=5, description="Показатель алфавита цифр")
    w: int = Field(..., ge=1, description="Число разрядов")
    successor: Optional[Tuple[int, ...]] = Field(None, description="Перестановка s алфавита цифр")
    max_digit: Optional[int] = Field(None, description="Выделенная цифра c_max")

    @model_validator(mode="after")
    def check_successor(self):
        size = self.digit_count
        if self.successor is not None:
            if sorted(self.successor) != list(range(size)):
                raise ValueError(f"Перестановка должна состоять из цифр 0..{size - 1}.")
            d, seen = 0, 0
            while True:
                d = self.successor[d]
                seen += 1
                if d == 0:
                    break
            if seen != size:
                raise ValueError("Перестановка s должна быть одним циклом длины D.")
        if self.max_digit is not None and not 0 <= self.max_digit < size:
            raise ValueError("Цифра c_max вне алфавита.")
        return self

    @property
    def digit_count(self) -> int:
        return 2 ** (2 ** self.k)

    @property
    def top(self) -> int:
        if self.max_digit is not None:
            return self.max_digit
        return self.digit_count - 1 if self.successor is None else self.successor.index(0)

    @property
    def zero(self) -> int:
        return self.next_digit(self.top)

    def next_digit(self, d: int) -> int:
        return (d + 1) % self.digit_count if self.successor is None else self.successor[d]


class LinearCounterState(BaseModel):
    model_config = ConfigDict(frozen=True)

    digits: Tuple[int, ...] = Field(..., min_length=1, description="Разряды, младший первым")
    frozen: bool = Field(False, description="Символ заморозки")


class DecodedLinearDigit(BaseModel):
    """
    Раскрытая цифра линейного счётчика. Поля по порядку от младших битов:
    буква (2^l бит), три состояния (по 2^l бит), направление (1 бит),
    флаги столбца и строки (2 бита), заполнение (4*2^l-3 бит).
    """
    model_config = ConfigDict(frozen=True)

    l: int = Field(..., ge=0, description="Показатель алфавитов машины")
    letter: int = Field(..., ge=0, description="Буква ленты")
    states: Tuple[int, int, int] = Field(..., description="Три состояния машины")
    direction: Move = Field(..., description="Направление сигнала ошибки")
    padding: int = Field(0, ge=0, description="Заполнение")
    column_on: bool = Field(True, description="Столбец активен для вычислений")
    row_on: bool = Field(True, description="Строка активна для вычислений")

    @field_validator("direction")
    @classmethod
    def check_direction(cls, value: Move) -> Move:
        if value == Move.STAY:
            raise ValueError("Направление сигнала ошибки - только влево или вправо.")
        return value

    @model_validator(mode="after")
    def check_ranges(self):
        size = 2 ** (2 ** self.l)
        if self.letter >= size or any(not 0 <= q < size for q in self.states):
            raise ValueError(f"Буквы и состояния должны быть меньше {size}.")
        if self.padding >= 2 ** self.padding_bits:
            raise ValueError("Заполнение не помещается в отведённые биты.")
        return self

    @property
    def field_bits(self) -> int:
        return 2 ** self.l

    @property
    def padding_bits(self) -> int:
        return 4 * 2 ** self.l - 3


class SystemCounterParams(BaseModel):
    """
    Системный счётчик: индексное слово над E^2 и тор из двух половин над E, |E| = 2^(2^m).
    """
    model_config = ConfigDict(frozen=True)

    m: int = Field(0, ge=0, le=3, description="Показатель алфавита E")
    index_width: int = Field(1, ge=1, description="Длина индексного слова")
    torus_width: int = Field(1, ge=1, description="Длина половины тора")

    @property
    def symbol_count(self) -> int:
        return 2 ** (2 ** self.m)

    @property
    def torus_length(self) -> int:
        return 2 * self.torus_width


class SystemCounterState(BaseModel):
    """
    Тор хранится в физическом положении, phase - число выполненных поворотов
    по модулю длины тора. detection - три раскраски обнаружения максимума
    (индекс, тор, их конъюнкция), True - зелёный.
    """
    model_config = ConfigDict(frozen=True)

    index: Tuple[int, ...] = Field(..., min_length=1, description="Индексное слово, младший разряд первым")
    torus: Tuple[int, ...] = Field(..., min_length=2, description="Тор в физическом положении")
    phase: int = Field(0, ge=0, description="Фаза поворота")
    frozen: bool = Field(False, description="Символ заморозки")
    detection: Tuple[Tuple[bool, ...], ...] = Field((), description="Раскраски обнаружения")

    @model_validator(mode="after")
    def check_torus(self):
        if len(self.torus) % 2:
            raise ValueError("Тор состоит из двух половин одинаковой длины.")
        if self.phase >= len(self.torus):
            raise ValueError("Фаза поворота должна быть меньше длины тора.")
        return self


class FreezeColoring(BaseModel):
    """
    Пространственная раскраска одного состояния: сигнал обнаружения максимума
    по разрядам (зелёный, пока все младшие разряды максимальны) и символ заморозки.
    """
    model_config = ConfigDict(frozen=True)

    detection: Tuple[bool, ...]
    frozen: bool
