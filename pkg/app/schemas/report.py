from typing import List

from pydantic import BaseModel, Field

from app.schemas.pattern import RuleViolation

CLEAN = 0
VIOLATIONS = 1


class Report(BaseModel):
    """
    Отчёт команды: эхо команды, время выполнения, строки результата и нарушения.
    """
    command: str = Field(..., description="Эхо команды")
    elapsed: float = Field(0.0, ge=0, description="Время выполнения в секундах")
    lines: List[str] = Field(default_factory=list, description="Строки результата")
    violations: List[RuleViolation] = Field(default_factory=list, description="Нарушения правил")
    failed: bool = Field(False, description="Проверка не пройдена без нарушений правил (например, диаграмма не коммутирует)")

    @property
    def exit_code(self) -> int:
        return VIOLATIONS if self.violations or self.failed else CLEAN

    def render(self) -> str:
        out = [f"command: {self.command}", f"elapsed: {self.elapsed:.3f}s"]
        out.extend(self.lines)
        for v in self.violations:
            positions = " ".join("(" + ",".join(str(c) for c in pos) + ")" for pos in v.positions)
            out.append(f"violation {v.rule_id} {positions} {v.detail}".rstrip())
        out.append(f"violations: {len(self.violations)}")
        return "\n".join(out)
