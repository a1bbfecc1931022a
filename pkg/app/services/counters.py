"""
Линейный и системный счётчики, числа Ферма и проверка минимальности орбит.
"""
import math
from itertools import combinations
from typing import List, Sequence, Tuple, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import LengthMismatch, Overflow, ProductTooLarge, SftException
from app.core.logger import get_logger
from app.models.machine import Move
from app.schemas.counters import (
    CounterParams,
    DecodedLinearDigit,
    FreezeColoring,
    LinearCounterState,
    SystemCounterParams,
    SystemCounterState,
)

logger = get_logger(__name__)

DESK_LIMIT = 2**32
MAX_FERMAT_INDEX = 5
_ORBIT_CHUNK = 1 << 16


# Линейный счётчик

def linear_zero(params: CounterParams) -> LinearCounterState:
    return LinearCounterState(digits=(params.zero,) * params.w)


def _is_linear_max(digits: Sequence[int], params: CounterParams) -> bool:
    return all(d == params.top for d in digits)


def linear_step(st: LinearCounterState, params: CounterParams) -> LinearCounterState:
    """
    Один шаг линейного счётчика: прибавление единицы с переносом от младшего разряда.
    Шаг, достигающий максимального значения, ставит символ заморозки;
    следующий шаг только снимает его.
    """
    if len(st.digits) != params.w:
        raise LengthMismatch(f"Слово счётчика имеет длину {len(st.digits)}, ожидалась {params.w}.")
    if st.frozen:
        return LinearCounterState(digits=st.digits, frozen=False)
    digits = list(st.digits)
    for position, digit in enumerate(digits):
        digits[position] = params.next_digit(digit)
        if digit != params.top:
            break
    return LinearCounterState(digits=tuple(digits), frozen=_is_linear_max(digits, params))


def linear_run(params: CounterParams, steps: int, start: LinearCounterState = None) -> List[LinearCounterState]:
    """
    Состояния после 1..steps шагов.
    """
    state = linear_zero(params) if start is None else start
    states = []
    for _ in range(steps):
        state = linear_step(state, params)
        states.append(state)
    return states


def linear_period(params: CounterParams) -> int:
    """
    Период линейного счётчика D^w + 1, сверенный перебором от нулевого состояния,
    если он не превышает brute_force_cap.
    """
    values = params.digit_count ** params.w
    if values > DESK_LIMIT:
        logger.error("Linear counter with D^w=%s is beyond desk scale", values)
        raise Overflow(f"Счётчик с D^w = {values} превышает 2^32.")
    expected = values + 1
    if expected > settings.brute_force_cap:
        return expected
    zero = linear_zero(params)
    state = linear_step(zero, params)
    measured = 1
    while state != zero:
        state = linear_step(state, params)
        measured += 1
    if measured != expected:
        logger.error("Linear counter period %s differs from %s", measured, expected)
        raise SftException(f"Измеренный период {measured} не равен {expected}.")
    return measured


def format_linear_state(st: LinearCounterState, params: CounterParams) -> str:
    width = max(1, -(-(2**params.k) // 4))
    digits = "".join(f"{d:0{width}x}" for d in st.digits)
    return f"{digits} {'F' if st.frozen else '.'}"


# Цифры линейного счётчика

def encode_digit(digit: DecodedLinearDigit) -> int:
    """
    Индекс цифры по её полям (младшие биты - буква).
    """
    size = digit.field_bits
    value = 0
    shift = 0
    for part in (digit.letter, *digit.states):
        value |= part << shift
        shift += size
    value |= (1 if digit.direction == Move.LEFT else 0) << shift
    value |= int(digit.column_on) << (shift + 1)
    value |= int(digit.row_on) << (shift + 2)
    value |= digit.padding << (shift + 3)
    return value


def decode_digit(index: int, l: int) -> DecodedLinearDigit:
    """
    :param index: индекс цифры в алфавите размера 2^(2^(l+3))
    :param l: показатель алфавитов машины
    """
    size = 2**l
    if not 0 <= index < 2 ** (8 * size):
        raise Overflow(f"Индекс цифры {index} вне алфавита для l={l}.")
    mask = (1 << size) - 1
    parts = [(index >> (size * position)) & mask for position in range(4)]
    shift = 4 * size
    return DecodedLinearDigit(
        l=l,
        letter=parts[0],
        states=tuple(parts[1:]),
        direction=Move.LEFT if (index >> shift) & 1 else Move.RIGHT,
        column_on=bool((index >> (shift + 1)) & 1),
        row_on=bool((index >> (shift + 2)) & 1),
        padding=index >> (shift + 3),
    )


# Системный счётчик

def _rotated(values: Tuple[int, ...], shift: int) -> Tuple[int, ...]:
    size = len(values)
    return tuple(values[(i - shift) % size] for i in range(size))


def canonical_torus(st: SystemCounterState) -> Tuple[int, ...]:
    """
    Значение тора в системе отсчёта, вращающейся вместе с ним.
    """
    return _rotated(st.torus, -st.phase)


def _increment(word: Sequence[int], base: int) -> Tuple[Tuple[int, ...], bool]:
    digits = list(word)
    for position, digit in enumerate(digits):
        if digit + 1 < base:
            digits[position] = digit + 1
            return tuple(digits), False
        digits[position] = 0
    return tuple(digits), True


def _max_prefix(word: Sequence[int], top: int) -> Tuple[bool, ...]:
    return tuple(np.logical_and.accumulate(np.asarray(word) == top).tolist())


def detection_colorings(
    index: Sequence[int], canonical: Sequence[int], params: SystemCounterParams
) -> Tuple[Tuple[bool, ...], ...]:
    """
    Три раскраски обнаружения максимума: по индексному слову, по тору
    и по тору при максимальном индексе.
    """
    index_signal = _max_prefix(index, params.symbol_count**2 - 1)
    torus_signal = _max_prefix(canonical, params.symbol_count - 1)
    index_full = index_signal[-1]
    return index_signal, torus_signal, tuple(index_full and green for green in torus_signal)


def _system_state(index, canonical, phase, frozen, params: SystemCounterParams) -> SystemCounterState:
    return SystemCounterState(
        index=index,
        torus=_rotated(tuple(canonical), phase),
        phase=phase,
        frozen=frozen,
        detection=detection_colorings(index, canonical, params),
    )


def system_zero(params: SystemCounterParams) -> SystemCounterState:
    return _system_state((0,) * params.index_width, (0,) * params.torus_length, 0, False, params)


def system_state(
    index: Sequence[int], torus: Sequence[int], phase: int, frozen: bool, params: SystemCounterParams
) -> SystemCounterState:
    """
    Состояние по слову, прочитанному из образца (тор в физическом положении).
    """
    if len(index) != params.index_width or len(torus) != params.torus_length:
        raise LengthMismatch("Размеры слова не совпадают с параметрами счётчика.")
    canonical = _rotated(tuple(torus), -phase)
    return _system_state(tuple(index), canonical, phase, frozen, params)


def system_step(st: SystemCounterState, params: SystemCounterParams) -> SystemCounterState:
    """
    Шаг системного счётчика: поворот тора на одну позицию и увеличение индекса;
    при переполнении индекса увеличивается значение тора. Когда оба значения
    становятся максимальными, ставится символ заморозки, и следующий шаг только снимает его.
    """
    if len(st.index) != params.index_width or len(st.torus) != params.torus_length:
        raise LengthMismatch("Размеры состояния не совпадают с параметрами счётчика.")
    canonical = canonical_torus(st)
    if st.frozen:
        return _system_state(st.index, canonical, st.phase, False, params)
    phase = (st.phase + 1) % params.torus_length
    index, wrapped = _increment(st.index, params.symbol_count**2)
    if wrapped:
        canonical, _ = _increment(canonical, params.symbol_count)
    detection = detection_colorings(index, canonical, params)
    return _system_state(index, canonical, phase, detection[2][-1], params)


def system_bit_trace(st0: SystemCounterState, steps: int, params: SystemCounterParams) -> List[int]:
    """
    Символ физической позиции 0 тора после каждого из steps шагов.
    """
    if steps < 1:
        raise ValueError("Число шагов должно быть положительным.")
    state = st0
    trace = []
    for _ in range(steps):
        state = system_step(state, params)
        trace.append(state.torus[0])
    return trace


def system_states(params: SystemCounterParams, steps: int, start: SystemCounterState = None) -> List[SystemCounterState]:
    state = system_zero(params) if start is None else start
    states = []
    for _ in range(steps):
        state = system_step(state, params)
        states.append(state)
    return states


def system_period(params: SystemCounterParams) -> int:
    """
    Период системного счётчика от нулевого состояния.
    Значения повторяются каждые N+1 шагов, N = (|E|^2)^w_i * |E|^(2 w_t);
    полный период ждёт ещё и возврата фазы поворота.
    """
    values = params.symbol_count ** (2 * params.index_width + params.torus_length)
    if values > DESK_LIMIT:
        logger.error("System counter with %s values is beyond desk scale", values)
        raise Overflow(f"Системный счётчик с {values} значениями превышает 2^32.")
    length = params.torus_length
    cycles = length // math.gcd(values % length, length)
    expected = cycles * (values + 1)
    if expected > settings.brute_force_cap:
        return expected
    zero = system_zero(params)
    state = system_step(zero, params)
    measured = 1
    while state != zero:
        state = system_step(state, params)
        measured += 1
    if measured != expected:
        logger.error("System counter period %s differs from %s", measured, expected)
        raise SftException(f"Измеренный период {measured} не равен {expected}.")
    return measured


def format_system_state(st: SystemCounterState) -> str:
    index = "".join(f"{d:x}" for d in st.index)
    torus = "".join(f"{d:x}" for d in st.torus)
    return f"{index}:{torus}@{st.phase} {'F' if st.frozen else '.'}"


def spatial_freeze_coloring(
    states: Sequence[Union[LinearCounterState, SystemCounterState]],
    params: Union[CounterParams, SystemCounterParams],
) -> List[FreezeColoring]:
    """
    Раскраска обнаружения и заморозки для последовательности состояний (по одной на клетку).
    """
    colorings = []
    for state in states:
        if isinstance(state, LinearCounterState):
            detection = _max_prefix(state.digits, params.top)
        else:
            detection = detection_colorings(state.index, canonical_torus(state), params)[2]
        colorings.append(FreezeColoring(detection=detection, frozen=state.frozen))
    return colorings


# Параметры счётчиков по уровням клеток

def linear_params_for_level(n: int) -> CounterParams:
    return CounterParams(k=n, w=settings.linear_counter_width)


def system_params_for_level(n: int) -> SystemCounterParams:
    """
    Системный счётчик клеток нечётного уровня n: w_i = w_t = 2^((n-1)/2).
    """
    if n % 2 == 0:
        raise ValueError(f"Системный счётчик есть только у клеток нечётного уровня, получен {n}.")
    width = 2 ** ((n - 1) // 2)
    return SystemCounterParams(m=settings.system_counter_digit_exponent, index_width=width, torus_width=width)


# Числа Ферма и орбиты

def fermat(i: int) -> int:
    if i < 0:
        raise ValueError("Номер числа Ферма неотрицателен.")
    if i > MAX_FERMAT_INDEX:
        raise Overflow(f"F_{i} не помещается в 64 бита.")
    return 2 ** (2**i) + 1


def fermat_pairwise_coprime(up_to: int) -> bool:
    numbers = [fermat(i) for i in range(up_to + 1)]
    return all(math.gcd(a, b) == 1 for a, b in combinations(numbers, 2))


def orbit_is_minimal(moduli: Sequence[int], increments: Sequence[int]) -> Tuple[bool, int]:
    """
    Орбита нулевого набора при одновременном прибавлении приращений.
    Длина ищется перебором времени возврата по блокам.
    :return: (орбита покрывает всё произведение, длина орбиты)
    """
    if len(moduli) != len(increments):
        raise LengthMismatch("Число модулей и приращений должно совпадать.")
    if any(m < 1 for m in moduli):
        raise ValueError("Модули должны быть положительными.")
    product = math.prod(moduli)
    if product > settings.max_orbit_product:
        logger.error("Orbit product %s exceeds cap %s", product, settings.max_orbit_product)
        raise ProductTooLarge(f"Произведение модулей {product} превышает {settings.max_orbit_product}.")
    mod = np.asarray(moduli, dtype=np.int64)
    inc = np.asarray(increments, dtype=np.int64) % mod
    start = 1
    while start <= product:
        times = np.arange(start, min(start + _ORBIT_CHUNK, product + 1), dtype=np.int64)
        returned = np.all((times[:, None] * inc[None, :]) % mod[None, :] == 0, axis=1)
        hits = np.flatnonzero(returned)
        if hits.size:
            length = int(times[hits[0]])
            return length == product, length
        start += _ORBIT_CHUNK
    return False, product


def orbit_by_reachability(moduli: Sequence[int], increments: Sequence[int]) -> Tuple[bool, int]:
    """
    Обход орбиты по множеству достигнутых наборов.
    """
    current = tuple(0 for _ in moduli)
    seen = set()
    while current not in seen:
        seen.add(current)
        current = tuple((c + i) % m for c, i, m in zip(current, increments, moduli))
    return len(seen) == math.prod(moduli), len(seen)
