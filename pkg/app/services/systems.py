"""
Эффективные динамические системы для симуляции.
"""
from typing import List, Sequence, Tuple

from app.core.exceptions import BudgetExceeded
from app.schemas.simulation import EffectiveSystemSpec


def _spend(length: int, budget: int) -> None:
    if length > budget:
        raise BudgetExceeded(f"Слово длины {length} превышает бюджет оракула {budget}.")


def odometer_step(word: Sequence[int]) -> List[int]:
    """
    Прибавление единицы с переносом, младший разряд первым.
    """
    result = list(word)
    for position, bit in enumerate(result):
        result[position] = 1 - bit
        if bit == 0:
            break
    return result


def odometer_point(c: int, length: int) -> List[int]:
    """
    Префикс f^c(0^inf): двоичная запись c, младший разряд первым.
    """
    return [(c >> n) & 1 for n in range(length)]


def _odometer_membership(word: Sequence[int], budget: int) -> bool:
    _spend(len(word), budget)
    return all(bit in (0, 1) for bit in word)


def _odometer_graph(pairs: Sequence[Tuple[int, int]], budget: int) -> bool:
    """
    Закон переноса: y_n = x_n xor c_n, c_0 = 1, c_{n+1} = x_n and c_n.
    """
    _spend(len(pairs), budget)
    carry = 1
    for x, y in pairs:
        if y != x ^ carry:
            return False
        carry &= x
    return True


def odometer_system() -> EffectiveSystemSpec:
    return EffectiveSystemSpec(
        name="odometer",
        alphabet=(0, 1),
        membership=_odometer_membership,
        graph=_odometer_graph,
        point=odometer_point,
        apply=odometer_step,
    )


SYSTEMS = {"odometer": odometer_system}
