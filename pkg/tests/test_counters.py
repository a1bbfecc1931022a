import logging
import math
import random

import pytest

from app.core.exceptions import LengthMismatch, Overflow, ProductTooLarge
from app.models.machine import Move
from app.schemas.counters import (
    CounterParams,
    DecodedLinearDigit,
    LinearCounterState,
    SystemCounterParams,
)
from app.services.counters import (
    canonical_torus,
    decode_digit,
    encode_digit,
    fermat,
    fermat_pairwise_coprime,
    format_linear_state,
    linear_period,
    linear_run,
    linear_step,
    linear_zero,
    orbit_by_reachability,
    orbit_is_minimal,
    spatial_freeze_coloring,
    system_bit_trace,
    system_params_for_level,
    system_period,
    system_state,
    system_states,
    system_step,
    system_zero,
)

# Настройка логгирования
logger = logging.getLogger("test_logger")
logger.setLevel(logging.DEBUG)
handler = logging.StreamHandler()
formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
handler.setFormatter(formatter)
logger.addHandler(handler)


def log_result(description: str, payload) -> None:
    """Логирует описание теста и полученный результат."""
    logger.info(f"{description}")
    logger.debug(f"Result: {payload}")


@pytest.mark.parametrize("k, w, period", [(0, 1, 3), (0, 2, 5), (1, 1, 5), (1, 2, 17)])
def test_linear_period(k, w, period):
    """Тест периода линейного счётчика D^w + 1."""
    params = CounterParams(k=k, w=w)
    measured = linear_period(params)
    log_result(f"Период линейного счётчика k={k} w={w}", measured)
    assert measured == period, f"Unexpected period: {measured}"


def test_linear_cycle_freezes_once():
    """Тест: за период счётчик ровно один раз стоит в заморозке, на максимуме."""
    params = CounterParams(k=1, w=2)
    states = linear_run(params, linear_period(params))
    frozen = [state for state in states if state.frozen]
    log_result("Замороженные состояния", [format_linear_state(s, params) for s in frozen])
    assert len(frozen) == 1, f"Unexpected frozen states: {frozen}"
    assert frozen[0].digits == (3, 3), f"Unexpected frozen digits: {frozen[0]}"
    assert states[-1] == linear_zero(params), f"Counter did not return to zero: {states[-1]}"


def test_linear_step_unfreezes_then_wraps():
    """Тест: из заморозки шаг только снимает символ, затем счётчик обнуляется."""
    params = CounterParams(k=0, w=2)
    frozen = LinearCounterState(digits=(1, 1), frozen=True)
    thawed = linear_step(frozen, params)
    assert thawed == LinearCounterState(digits=(1, 1), frozen=False), f"Unexpected state: {thawed}"
    assert linear_step(thawed, params) == linear_zero(params), "Counter must wrap to zero"


def test_linear_step_reaching_max_sets_freeze():
    """Тест: шаг, приводящий к максимуму, ставит заморозку; незамороженный максимум сразу обнуляется."""
    params = CounterParams(k=0, w=2)
    reached = linear_step(LinearCounterState(digits=(0, 1)), params)
    assert reached == LinearCounterState(digits=(1, 1), frozen=True), f"Unexpected state: {reached}"
    unfrozen_max = LinearCounterState(digits=(1, 1), frozen=False)
    assert linear_step(unfrozen_max, params) == LinearCounterState(digits=(0, 0)), "Unfrozen maximum must wrap"
    colorings = spatial_freeze_coloring([reached, unfrozen_max], params)
    assert [c.frozen for c in colorings] == [True, False], f"Unexpected colorings: {colorings}"
    assert colorings[1].detection == (True, True), f"Unexpected detection: {colorings[1]}"


def test_system_step_reaching_max_sets_freeze():
    """Тест: системный счётчик замораживается на шаге к максимуму, следующий шаг только снимает заморозку."""
    params = SystemCounterParams(m=0, index_width=1, torus_width=1)
    before = system_state((2,), (1, 1), 0, False, params)
    reached = system_step(before, params)
    assert reached.frozen, f"Unexpected state: {reached}"
    assert (reached.index, canonical_torus(reached), reached.phase) == ((3,), (1, 1), 1), f"Unexpected state: {reached}"
    thawed = system_step(reached, params)
    assert not thawed.frozen, f"Unexpected state: {thawed}"
    assert (thawed.index, thawed.torus, thawed.phase) == (reached.index, reached.torus, reached.phase), (
        f"Unfreezing must keep the word: {thawed}"
    )
    assert system_step(thawed, params) == system_zero(params), "Counter must wrap to zero"
    unfrozen_max = system_state((3,), (1, 1), 1, False, params)
    assert system_step(unfrozen_max, params) == system_zero(params), "Unfrozen maximum must wrap"


def test_linear_step_length_mismatch():
    """Тест: слово неверной длины отклоняется."""
    with pytest.raises(LengthMismatch):
        linear_step(LinearCounterState(digits=(0,)), CounterParams(k=0, w=2))


def test_linear_custom_successor():
    """Тест счётчика с произвольной циклической перестановкой цифр."""
    params = CounterParams(k=1, w=1, successor=(2, 0, 3, 1))
    assert params.top == 1, f"Unexpected top digit: {params.top}"
    assert params.zero == 0, f"Unexpected zero digit: {params.zero}"
    assert linear_period(params) == 5
    with pytest.raises(ValueError):
        CounterParams(k=1, w=1, successor=(1, 0, 3, 2))


def test_linear_period_overflow():
    """Тест: счётчик с D^w больше 2^32 не считается."""
    with pytest.raises(Overflow):
        linear_period(CounterParams(k=5, w=2))


def test_format_linear_state():
    """Тест текстового вида состояния."""
    params = CounterParams(k=3, w=2)
    state = LinearCounterState(digits=(255, 10), frozen=True)
    assert format_linear_state(state, params) == "ff0a F", f"Unexpected text: {format_linear_state(state, params)}"


def test_system_period_and_trace():
    """Тест системного счётчика: период 17 и след, содержащий все слова длины 2."""
    params = SystemCounterParams(m=0, index_width=1, torus_width=1)
    period = system_period(params)
    trace = system_bit_trace(system_zero(params), period, params)
    log_result("След системного счётчика", trace)
    assert period == 17, f"Unexpected period: {period}"
    text = "".join(str(b) for b in trace)
    for word in ("00", "01", "10", "11"):
        assert word in text, f"Word {word} missing from trace {text}"


def test_system_cycle_freezes_once():
    """Тест: системный счётчик замораживается один раз за период и возвращается в ноль."""
    params = SystemCounterParams(m=0, index_width=1, torus_width=1)
    states = system_states(params, system_period(params))
    frozen = [state for state in states if state.frozen]
    assert len(frozen) == 1, f"Unexpected frozen states: {frozen}"
    assert frozen[0].index == (3,), f"Unexpected frozen index: {frozen[0]}"
    assert canonical_torus(frozen[0]) == (1, 1), f"Unexpected frozen torus: {frozen[0]}"
    assert states[-1] == system_zero(params), "Counter did not return to zero"


def test_system_step_rotates_torus():
    """Тест: каждый шаг поворачивает тор, значение в системе отсчёта тора сохраняется."""
    params = SystemCounterParams(m=0, index_width=1, torus_width=2)
    state = system_zero(params)
    for _ in range(3):
        following = system_step(state, params)
        assert following.phase == (state.phase + 1) % params.torus_length, f"Unexpected phase: {following}"
        assert canonical_torus(following) == canonical_torus(state), "Torus value changed without index wrap"
        state = following


def test_system_trace_requires_steps():
    """Тест: след из нуля шагов не определён."""
    params = SystemCounterParams()
    with pytest.raises(ValueError):
        system_bit_trace(system_zero(params), 0, params)


def test_system_params_for_level():
    """Тест ширины системных счётчиков по уровням клеток."""
    assert system_params_for_level(1).index_width == 1
    assert system_params_for_level(5).torus_width == 4
    with pytest.raises(ValueError):
        system_params_for_level(2)


def test_spatial_freeze_coloring():
    """Тест раскраски обнаружения максимума вдоль разрядов."""
    params = CounterParams(k=0, w=3)
    states = [LinearCounterState(digits=(1, 1, 0)), LinearCounterState(digits=(1, 1, 1), frozen=True)]
    colorings = spatial_freeze_coloring(states, params)
    assert colorings[0].detection == (True, True, False), f"Unexpected coloring: {colorings[0]}"
    assert colorings[1].detection == (True, True, True) and colorings[1].frozen, f"Unexpected coloring: {colorings[1]}"


def test_fermat_numbers():
    """Тест чисел Ферма и их попарной взаимной простоты."""
    assert [fermat(i) for i in range(6)] == [3, 5, 17, 257, 65537, 4294967297]
    for i in range(6):
        for j in range(i):
            assert fermat(i) % fermat(j) == 2, f"Unexpected residue F_{i} mod F_{j}"
    assert fermat_pairwise_coprime(5)
    with pytest.raises(Overflow):
        fermat(6)


@pytest.mark.parametrize(
    "moduli, increments, expected",
    [
        ((3, 5), (1, 1), (True, 15)),
        ((3, 5, 17), (4 % 3, 16 % 5, 1), (True, 255)),
        ((4, 6), (1, 1), (False, 12)),
        ((5,), (0,), (False, 1)),
    ],
)
def test_orbit_is_minimal(moduli, increments, expected):
    """Тест минимальности орбиты произведения циклических групп."""
    result = orbit_is_minimal(moduli, increments)
    log_result(f"Орбита {moduli} {increments}", result)
    assert result == expected, f"Unexpected orbit: {result}"


def test_orbit_agrees_with_reachability():
    """Тест: поиск по времени возврата совпадает с обходом орбиты на 100 случайных наборах."""
    rng = random.Random(17)
    checked = 0
    while checked < 100:
        size = rng.randint(1, 4)
        moduli = [rng.randint(1, 30) for _ in range(size)]
        if math.prod(moduli) > 10**4:
            continue
        increments = [rng.randint(0, 40) for _ in range(size)]
        assert orbit_is_minimal(moduli, increments) == orbit_by_reachability(moduli, increments), (
            f"Unexpected disagreement for {moduli}, {increments}"
        )
        checked += 1


def test_coprime_orbit_takes_all_values():
    """Тест: при взаимно простых модулях и обратимых приращениях орбита покрывает всё произведение."""
    rng = random.Random(5)
    primes = [2, 3, 5, 7, 11, 13, 17]
    for _ in range(20):
        moduli = rng.sample(primes, rng.randint(1, 3))
        increments = [rng.randint(1, m - 1) if m > 2 else 1 for m in moduli]
        result = orbit_is_minimal(moduli, increments)
        assert result == (True, math.prod(moduli)), f"Unexpected orbit for {moduli}, {increments}: {result}"


def test_orbit_product_cap():
    """Тест ограничения произведения модулей."""
    with pytest.raises(ProductTooLarge):
        orbit_is_minimal((65537, 65537), (1, 1))
    with pytest.raises(LengthMismatch):
        orbit_is_minimal((3, 5), (1,))


def test_digit_encoding():
    """Тест раскрытия цифры линейного счётчика по полям."""
    digit = DecodedLinearDigit(
        l=1, letter=2, states=(1, 3, 0), direction=Move.LEFT, padding=5, column_on=False, row_on=True
    )
    index = encode_digit(digit)
    log_result("Индекс цифры", index)
    assert index < 2 ** (2 ** (1 + 3)), f"Unexpected index: {index}"
    assert decode_digit(index, 1) == digit, f"Unexpected digit: {decode_digit(index, 1)}"
    assert decode_digit(0, 0).direction == Move.RIGHT
    with pytest.raises(Overflow):
        decode_digit(256, 0)
    with pytest.raises(ValueError):
        DecodedLinearDigit(l=0, letter=0, states=(0, 0, 0), direction=Move.STAY)
