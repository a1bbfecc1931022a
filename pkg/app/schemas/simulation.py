from typing import Callable, Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.counters import LinearCounterState, SystemCounterState
from app.schemas.pattern import Pattern, stack_sections

Word = Sequence[int]


class EffectiveSystemSpec(BaseModel):
    """
    Эффективная динамическая система (Z, f): оракулы принадлежности цилиндра [w] к Z
    и графу f, генератор префиксов f^c(z) выделенной точки и действие f на префиксе.
    Оракулы получают бюджет шагов и бросают BudgetExceeded при его исчерпании.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(..., description="Имя системы")
    alphabet: Tuple[int, ...] = Field(..., min_length=2, description="Алфавит")
    membership: Callable[[Word, int], bool] = Field(..., description="Оракул принадлежности")
    graph: Callable[[Sequence[Tuple[int, int]], int], bool] = Field(..., description="Оракул графа f")
    point: Callable[[int, int], List[int]] = Field(..., description="(c, n) -> префикс длины n точки f^c(z)")
    apply: Callable[[Word], List[int]] = Field(..., description="Префикс f(x) по префиксу x той же длины")


class StackPhases(BaseModel):
    """
    Начальные фазы: сдвиг по орбите выделенной точки, шаг линейных счётчиков
    первого столбца клеток и шаг системных счётчиков сечения 0.
    """
    model_config = ConfigDict(frozen=True)

    orbit: int = Field(0, ge=0)
    linear: int = Field(0, ge=0)
    system: int = Field(0, ge=0)


class StackSection(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    z: int = Field(..., description="Номер сечения")
    pattern: Pattern = Field(..., description="Двумерное сечение со всеми слоями")
    bits: Dict[int, int] = Field(..., description="Системный бит каждого уровня клеток")
    linear: Dict[Tuple[int, int], LinearCounterState] = Field(
        default_factory=dict, description="Состояние линейного счётчика клетки по её юго-западному углу"
    )
    linear_levels: Dict[Tuple[int, int], int] = Field(default_factory=dict, description="Уровень клетки счётчика")
    system: Dict[int, SystemCounterState] = Field(default_factory=dict, description="Системные счётчики нечётных уровней")


class StackAssembly(BaseModel):
    """
    Конечный стек сечений Z^2_c с общим структурным слоем.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    system: EffectiveSystemSpec
    order: int = Field(..., description="Порядок супертайла окна")
    phases: StackPhases = Field(default_factory=StackPhases)
    sections: List[StackSection] = Field(..., min_length=1)

    @property
    def height(self) -> int:
        return len(self.sections)

    @property
    def pattern(self) -> Pattern:
        return stack_sections([s.pattern for s in self.sections], self.sections[0].z)

    def section(self, c: int) -> StackSection:
        return self.sections[c]

    def with_section(self, c: int, section: StackSection) -> "StackAssembly":
        sections = list(self.sections)
        sections[c] = section
        return self.model_copy(update={"sections": sections})


class SimulationPrefix(BaseModel):
    model_config = ConfigDict(frozen=True)

    bits: List[int] = Field(default_factory=list, description="Префикс точки, бит n - с клеток уровня 2n")
    provenance: List[Tuple[int, int, int]] = Field(
        default_factory=list, description="(уровень, x, y) клетки, давшей бит"
    )
