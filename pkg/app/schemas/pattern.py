from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import MissingLayer

Position = Tuple[int, ...]


class RuleViolation(BaseModel):
    """
    Нарушение локального правила: идентификатор правила, затронутые позиции и пояснение.
    """
    model_config = ConfigDict(frozen=True)

    rule_id: str = Field(..., description="Идентификатор правила, например 'arrow-correspondence'")
    positions: List[Position] = Field(..., min_length=1, description="Координаты затронутых позиций")
    detail: str = Field("", description="Пояснение в свободной форме")

    @property
    def sort_key(self) -> tuple:
        return (tuple(self.positions[0]), self.rule_id)


def sort_violations(violations: List[RuleViolation]) -> List[RuleViolation]:
    return sorted(violations, key=lambda v: v.sort_key)


class Pattern(BaseModel):
    """
    Конечный образец на целочисленном прямоугольнике (2D) или параллелепипеде (3D).
    Каждый слой хранится как массив кодов int16 с индексами [y, x] или [z, y, x];
    код 0 во всех слоях означает пустой символ.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    origin: Tuple[int, ...] = Field(..., description="Начало опоры (x0, y0[, z0])")
    size: Tuple[int, ...] = Field(..., description="Размеры опоры (w, h[, d])")
    layers: Dict[str, np.ndarray] = Field(..., description="Слои: имя -> массив кодов")

    @model_validator(mode="before")
    @classmethod
    def coerce_layers(cls, data):
        if isinstance(data, dict) and "layers" in data:
            data = dict(data)
            data["layers"] = {
                name: np.array(values, dtype=np.int16, copy=True)
                for name, values in data["layers"].items()
            }
        return data

    @model_validator(mode="after")
    def check_support(self):
        if len(self.origin) not in (2, 3) or len(self.origin) != len(self.size):
            raise ValueError("Опора должна быть двумерной или трёхмерной.")
        if any(extent <= 0 for extent in self.size):
            raise ValueError("Размеры опоры должны быть положительными.")
        shape = tuple(reversed(self.size))
        for name, values in self.layers.items():
            if values.shape != shape:
                raise ValueError(f"Слой {name} имеет форму {values.shape}, ожидалась {shape}.")
            values.setflags(write=False)
        return self

    @property
    def dim(self) -> int:
        return len(self.size)

    @property
    def width(self) -> int:
        return self.size[0]

    @property
    def height(self) -> int:
        return self.size[1]

    @property
    def depth(self) -> int:
        return self.size[2] if self.dim == 3 else 1

    @property
    def layer_names(self) -> List[str]:
        return list(self.layers)

    def layer(self, name: str) -> np.ndarray:
        if name not in self.layers:
            raise MissingLayer(f"В образце нет слоя {name}.")
        return self.layers[name]

    def has_layer(self, name: str) -> bool:
        return name in self.layers

    def contains(self, position: Position) -> bool:
        return all(o <= p < o + s for p, o, s in zip(position, self.origin, self.size))

    def at(self, name: str, position: Position) -> int:
        index = tuple(p - o for p, o in zip(position, self.origin))
        return int(self.layer(name)[tuple(reversed(index))])

    def section(self, z: int) -> "Pattern":
        """
        Двумерное сечение трёхмерного образца на уровне z (в мировых координатах).
        """
        if self.dim == 2:
            return self
        k = z - self.origin[2]
        return Pattern(
            origin=self.origin[:2],
            size=self.size[:2],
            layers={name: values[k] for name, values in self.layers.items()},
        )

    def crop(self, x: int, y: int, w: int, h: int) -> "Pattern":
        x0, y0 = self.origin[:2]
        return Pattern(
            origin=(x, y),
            size=(w, h),
            layers={
                name: values[y - y0:y - y0 + h, x - x0:x - x0 + w]
                for name, values in self.layers.items()
            },
        )

    def with_layers(self, **layers: np.ndarray) -> "Pattern":
        merged = dict(self.layers)
        merged.update(layers)
        return Pattern(origin=self.origin, size=self.size, layers=merged)

    def without_layers(self, *names: str) -> "Pattern":
        return Pattern(
            origin=self.origin,
            size=self.size,
            layers={n: v for n, v in self.layers.items() if n not in names},
        )


def stack_sections(sections: List[Pattern], z0: int = 0) -> Pattern:
    """
    Собирает трёхмерный образец из двумерных сечений с одинаковыми опорой и слоями.
    """
    first = sections[0]
    return Pattern(
        origin=tuple(first.origin) + (z0,),
        size=tuple(first.size) + (len(sections),),
        layers={name: np.stack([s.layers[name] for s in sections]) for name in first.layers},
    )


class Box(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    w: int = Field(..., gt=0)
    h: int = Field(..., gt=0)

    def contains(self, x: int, y: int) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h

    def inside(self, other: "Box") -> bool:
        return (
            other.x <= self.x and self.x + self.w <= other.x + other.w
            and other.y <= self.y and self.y + self.h <= other.y + other.h
        )

    def strictly_inside(self, other: "Box") -> bool:
        return (
            other.x < self.x and self.x + self.w < other.x + other.w
            and other.y < self.y and self.y + self.h < other.y + other.h
        )


def pattern_box(p: Pattern) -> Box:
    return Box(x=p.origin[0], y=p.origin[1], w=p.width, h=p.height)


def optional_layer(p: Pattern, name: str) -> Optional[np.ndarray]:
    return p.layers.get(name)
