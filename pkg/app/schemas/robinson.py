from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.robinson import AlignmentMark, SymbolKind


class RobinsonSymbol(BaseModel):
    """
    Символ первого слоя Робинсона вместе с отметкой слоя выравнивания.
    """
    model_config = ConfigDict(frozen=True)

    kind: SymbolKind = Field(..., description="Вид символа")
    rotation: int = Field(..., description="Поворот в градусах: 0, 90, 180 или 270")
    bit: Optional[int] = Field(None, ge=0, le=1, description="Бит красного угла")
    parity: Optional[Tuple[int, int]] = Field(None, description="Пара (i, j) счётчика чётности")
    alignment: AlignmentMark = Field(AlignmentMark.BLANK, description="Отметка выравнивания")

    @model_validator(mode="after")
    def check_fields(self):
        if self.rotation not in (0, 90, 180, 270):
            raise ValueError("Поворот должен быть кратен 90 градусам.")
        if (self.bit is not None) != (self.kind == SymbolKind.RED_CORNER):
            raise ValueError("Бит задаётся ровно у красных углов.")
        if (self.parity is not None) == self.kind.is_corner:
            raise ValueError("Пара чётности задаётся ровно у стрелок.")
        if self.parity is not None and any(v not in (0, 1) for v in self.parity):
            raise ValueError("Компоненты пары чётности лежат в {0, 1}.")
        if self.alignment != AlignmentMark.BLANK and not self.kind.alignable:
            raise ValueError("Отметка выравнивания допустима только на стрелках 3 и 5.")
        return self
