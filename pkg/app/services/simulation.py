"""
Функция симуляции phi, проверка коммутативной диаграммы и свидетель возвращаемости.
"""
from typing import Dict, List, Optional, Sequence

from app.core.config import settings
from app.core.exceptions import BoundExceeded, InconsistentBits
from app.core.logger import get_logger
from app.schemas.hierarchy import CellRecord
from app.schemas.pattern import Pattern
from app.schemas.simulation import EffectiveSystemSpec, SimulationPrefix, StackAssembly
from app.services.assembly import BITS_H
from app.services.hierarchy import detect_cells

logger = get_logger(__name__)


def _level_bits(p: Pattern, cells: List[CellRecord]) -> Dict[int, List[tuple]]:
    """
    Биты, прочитанные в юго-западных углах клеток: уровень -> [(бит, x, y)].
    """
    found: Dict[int, List[tuple]] = {}
    for cell in cells:
        code = p.at(BITS_H, (cell.box.x, cell.box.y))
        found.setdefault(cell.order, []).append((code - 1, cell.box.x, cell.box.y))
    return found


def phi(st: StackAssembly, c: int, cells: Optional[List[CellRecord]] = None) -> SimulationPrefix:
    """
    Префикс моделируемой точки в сечении c: бит n берётся с клеток уровня 2n.
    Все клетки одного уровня должны нести один и тот же бит.
    """
    section = st.sections[c].pattern
    if not section.has_layer(BITS_H):
        return SimulationPrefix()
    cells = detect_cells(section) if cells is None else cells
    found = _level_bits(section, cells)
    bits, provenance = [], []
    n = 0
    while 2 * n in found:
        values = {bit for bit, _, _ in found[2 * n]}
        if len(values) != 1 or -1 in values:
            logger.error("Cells of level %s disagree on the system bit in section %s", 2 * n, c)
            raise InconsistentBits(f"Клетки уровня {2 * n} в сечении {c} несут разные биты {sorted(values)}.")
        bit, x, y = found[2 * n][0]
        bits.append(bit)
        provenance.append((2 * n, x, y))
        n += 1
    return SimulationPrefix(bits=bits, provenance=provenance)


def check_commuting(st: StackAssembly) -> bool:
    """
    Для соседних сечений f(phi(c)) согласуется с phi(c+1): пары префиксов
    принимает оракул графа, и действие f на префиксе совпадает с следующим префиксом.
    """
    if st.height < 2:
        return True
    cells = detect_cells(st.sections[0].pattern)
    try:
        prefixes = [phi(st, c, cells).bits for c in range(st.height)]
    except InconsistentBits:
        logger.warning("Simulation map is undefined on an inconsistent stack")
        return False
    budget = settings.oracle_step_budget
    for c in range(st.height - 1):
        a, b = prefixes[c], prefixes[c + 1]
        length = min(len(a), len(b))
        if not st.system.graph(list(zip(a[:length], b[:length])), budget):
            logger.warning("Sections %s and %s break the commuting diagram", c, c + 1)
            return False
        if st.system.apply(a[:length]) != list(b[:length]):
            logger.warning("Sections %s and %s break the commuting diagram", c, c + 1)
            return False
    return True


def _occurs(sys: EffectiveSystemSpec, index: int, word: Sequence[int]) -> bool:
    return sys.point(index, len(word)) == list(word)


def recurrence_witness(sys: EffectiveSystemSpec, p: Sequence[int], n: int, bound: Optional[int] = None) -> int:
    """
    Наименьшее t >= 1, при котором слово p снова начинает точку орбиты с индексом u + n*t,
    где u - первое появление p; для пустого слова 0.
    :param sys: минимальная система
    :param p: слово-префикс
    :param n: шаг по орбите
    :param bound: предел индекса орбиты (по умолчанию settings.recurrence_bound)
    """
    if n < 1:
        raise ValueError("Шаг n должен быть положительным.")
    if not p:
        return 0
    bound = settings.recurrence_bound if bound is None else bound
    first = next((u for u in range(bound + 1) if _occurs(sys, u, p)), None)
    if first is None:
        raise BoundExceeded(f"Слово {list(p)} не встречается на орбите до индекса {bound}.")
    t = 1
    while first + n * t <= bound:
        if _occurs(sys, first + n * t, p):
            return t
        t += 1
    logger.warning("No recurrence of %s within bound %s", list(p), bound)
    raise BoundExceeded(f"Возвращение слова {list(p)} не найдено до индекса {bound}.")
