from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.hierarchy import AreaFunction, OrganiteRole, PetalRole
from app.schemas.pattern import Box, RuleViolation


class Petal(BaseModel):
    """
    Лепесток: квадрат, соединяющий четыре угла одного порядка.
    """
    model_config = ConfigDict(frozen=True)

    order: int = Field(..., ge=0, description="Порядок лепестка")
    box: Box = Field(..., description="Ограничивающий квадрат")
    role: PetalRole = Field(..., description="Опорный (бит 1) или передающий лепесток")
    corners: List[Tuple[int, int]] = Field(..., min_length=4, max_length=4, description="Углы sw, se, nw, ne")

    @model_validator(mode="after")
    def check_side(self):
        side = 2 ** (self.order + 1) + 1
        if self.box.w != side or self.box.h != side:
            raise ValueError(f"Сторона лепестка порядка {self.order} должна быть {side}.")
        return self


class OrganiteFunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int = Field(..., ge=0, le=7, description="Номер столбца органита (с запада на восток)")
    j: int = Field(..., ge=0, le=7, description="Номер строки органита (с юга на север)")
    function: OrganiteRole = Field(..., description="Функция органита")


class CellRecord(BaseModel):
    """
    Двумерная клетка уровня order: внутренность лепестка порядка 2*order+1.
    """
    model_config = ConfigDict(frozen=True)

    order: int = Field(..., ge=0, description="Уровень клетки")
    box: Box = Field(..., description="Ограничивающий квадрат")
    petal_order: int = Field(..., description="Порядок охватывающего лепестка")
    organites: Optional[Dict[Tuple[int, int], Box]] = Field(
        None, description="Разбиение 8x8 на органиты (только для уровня >= 3)"
    )
    modularity: Optional[int] = Field(None, ge=0, le=3, description="Отметка модулярности в Z/4Z")
    functions: Optional[Dict[Tuple[int, int], AreaFunction]] = Field(
        None, description="Функции позиций синих углов внутри клетки"
    )
    violations: List[RuleViolation] = Field(default_factory=list, description="Нарушения сигнального слоя")

    @model_validator(mode="after")
    def check_geometry(self):
        side = 4 ** (self.order + 1) + 1
        if self.box.w != side or self.box.h != side:
            raise ValueError(f"Сторона клетки уровня {self.order} должна быть {side}.")
        if self.petal_order != 2 * self.order + 1:
            raise ValueError("Порядок лепестка клетки равен 2*order+1.")
        if self.organites is not None and self.order < 3:
            raise ValueError("Органиты есть только у клеток уровня не меньше 3.")
        return self

    @property
    def anchor(self) -> Tuple[int, int]:
        return self.box.x, self.box.y

    def updated(self, **changes) -> "CellRecord":
        return self.model_copy(update=changes)
