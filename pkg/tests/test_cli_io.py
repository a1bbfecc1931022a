import logging

import numpy as np
import pytest

from app.core.exceptions import DimensionMismatch, ParseError, UnsupportedLayer
from app.main import main
from app.models.robinson import Corner
from app.schemas.report import Report
from app.services import codes
from app.services.pattern_io import parse_machine, parse_pattern, parse_sides, write_machine, write_pattern
from app.services.render import render_ppm
from app.services.robinson import ROBINSON, generate_supertile

# Настройка логгирования
logger = logging.getLogger("test_logger")
logger.setLevel(logging.DEBUG)
handler = logging.StreamHandler()
formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
handler.setFormatter(formatter)
logger.addHandler(handler)


def log_result(description: str, payload) -> None:
    """Логирует описание теста и полученный результат."""
    logger.info("%s: %s", description, payload)


def test_pattern_text_is_canonical(supertile_3):
    """Тест: повторная запись разобранного образца даёт те же байты."""
    data = write_pattern(supertile_3)
    p = parse_pattern(data)
    log_result("Разобранный образец", (p.size, p.layer_names))
    assert p.size == (15, 15), f"Unexpected size: {p.size}"
    assert np.array_equal(p.layer(ROBINSON), supertile_3.layer(ROBINSON)), "Unexpected robinson layer"
    assert write_pattern(p) == data, "Unexpected canonical text"


def test_three_dimensional_pattern_text(odometer_stack):
    """Тест: трёхмерный образец записывается сечениями по возрастанию z."""
    data = write_pattern(odometer_stack.pattern)
    p = parse_pattern(data)
    assert p.dim == 3, f"Unexpected dimension: {p.dim}"
    assert p.size == (15, 15, 2), f"Unexpected size: {p.size}"
    assert write_pattern(p) == data, "Unexpected canonical text"


def test_truncated_pattern_reports_position(supertile_3):
    """Тест: обрезанный файл даёт ошибку разбора с номером строки."""
    data = b"\n".join(write_pattern(supertile_3).split(b"\n")[:10]) + b"\n"
    with pytest.raises(ParseError) as exc:
        parse_pattern(data)
    log_result("Обрезанный файл", exc.value.detail)
    assert exc.value.line == 11, f"Unexpected line: {exc.value.line}"


def test_unknown_layer_is_rejected():
    """Тест: неизвестный слой отвергается со столбцом, где начинается его имя."""
    data = b"sft-pattern v1\nsupport 0 0 1 1\nlayers robinson,colour\nlayer robinson\n0\n"
    with pytest.raises(ParseError) as exc:
        parse_pattern(data)
    assert (exc.value.line, exc.value.column) == (3, 17), f"Unexpected position: {exc.value.line}, {exc.value.column}"


def test_repeated_layer_is_rejected():
    data = b"sft-pattern v1\nsupport 0 0 1 1\nlayers robinson,alignment,robinson\n"
    with pytest.raises(ParseError) as exc:
        parse_pattern(data)
    assert (exc.value.line, exc.value.column) == (3, 27), f"Unexpected position: {exc.value.line}, {exc.value.column}"


@pytest.mark.parametrize(
    "layer, row, column",
    [
        ("robinson", "1 500", 3),
        ("robinson", f"{codes.CODE_COUNT} 0", 1),
        ("alignment", "0 5", 3),
        ("modularity", "0  7", 4),
        ("function", "-1 0", 1),
        ("linear_freeze", "4 5", 3),
    ],
)
def test_codes_outside_layer_alphabet(layer, row, column):
    """Тест: код вне алфавита слоя отвергается с позицией этого кода."""
    data = f"sft-pattern v1\nsupport 0 0 2 1\nlayers {layer}\nlayer {layer}\n{row}\n".encode("utf-8")
    with pytest.raises(ParseError) as exc:
        parse_pattern(data)
    log_result("Код вне алфавита", exc.value.detail)
    assert (exc.value.line, exc.value.column) == (5, column), f"Unexpected position: {exc.value.line}, {exc.value.column}"


def test_validate_rejects_unknown_robinson_code(tmp_path, capsys):
    """Тест: validate на образце с кодом robinson вне таблицы завершается с кодом 2."""
    target = tmp_path / "bad-code.txt"
    target.write_bytes(b"sft-pattern v1\nsupport 0 0 2 1\nlayers robinson\nlayer robinson\n1 500\n")
    assert main(["validate", "--in", str(target)]) == 2


@pytest.mark.parametrize(
    "data, line",
    [
        (b"sft-pattern v2\n", 1),
        (b"sft-pattern v1\nsupport 0 0 2\n", 2),
        (b"sft-pattern v1\nsupport 0 0 1 1\nlayers robinson\nlayer robinson\nx\n", 5),
        (b"sft-pattern v1\nsupport 0 0 1 1\nlayers robinson\nlayer robinson\n0 0\n", 5),
        (b"sft-pattern v1\nsupport 0 0 1 1\nlayers robinson\nlayer robinson\n0\n0\n", 6),
    ],
)
def test_malformed_patterns(data, line):
    """Тест: ошибки заголовка, опоры, кодов и лишних строк."""
    with pytest.raises(ParseError) as exc:
        parse_pattern(data)
    assert exc.value.line == line, f"Unexpected line: {exc.value.line} ({exc.value.detail})"


def test_machine_text(witness):
    """Тест: запись и разбор машины сохраняют переходы."""
    data = write_machine(witness)
    spec = parse_machine(data)
    log_result("Машина", data.decode("utf-8"))
    assert spec.delta == witness.delta, f"Unexpected delta: {spec.delta}"
    assert (spec.init, spec.error, spec.shadow, spec.blank) == ("q0", "qe", "qs", "#"), f"Unexpected spec: {spec}"
    assert write_machine(spec) == data, "Unexpected canonical text"


def test_machine_with_unknown_move(witness):
    """Тест: неизвестный ход указывает столбец токена."""
    data = write_machine(witness).replace(b"1 q1 -> 1 q0 <", b"1 q1 -> 1 q0 X")
    with pytest.raises(ParseError) as exc:
        parse_machine(data)
    assert exc.value.column == 14, f"Unexpected column: {exc.value.column}"


def test_sides_file():
    """Тест: входы со сторон читаются по строке на активную строку."""
    west, east = parse_sides(b"qs qs\nq0 qs\n\n")
    assert west == ["qs", "q0"], f"Unexpected west: {west}"
    assert east == ["qs", "qs"], f"Unexpected east: {east}"
    with pytest.raises(ParseError):
        parse_sides(b"qs\n")


def test_render_is_deterministic(supertile_3):
    """Тест: отрисовка детерминирована и начинается с заголовка P6."""
    first = render_ppm(supertile_3)
    second = render_ppm(parse_pattern(write_pattern(supertile_3)))
    assert first.startswith(b"P6\n60 60\n255\n"), f"Unexpected header: {first[:16]}"
    assert len(first) == len(b"P6\n60 60\n255\n") + 60 * 60 * 3, f"Unexpected length: {len(first)}"
    assert first == second, "Render must be deterministic"


def test_render_errors(supertile_3, odometer_stack):
    """Тест: трёхмерный образец требует z, неизвестный слой отвергается."""
    with pytest.raises(DimensionMismatch):
        render_ppm(odometer_stack.pattern, ROBINSON)
    with pytest.raises(UnsupportedLayer):
        render_ppm(supertile_3, "channel")
    section = render_ppm(odometer_stack.pattern, ROBINSON, z=1)
    assert section.startswith(b"P6\n"), f"Unexpected header: {section[:8]}"


def test_generate_and_validate(tmp_path, capsys):
    """Тест: сгенерированный супертайл проходит validate с кодом 0."""
    target = tmp_path / "st.txt"
    assert main(["generate-supertile", "--corner", "sw", "--order", "3", "--out", str(target)]) == 0
    assert target.exists(), "Pattern file was not written"
    assert main(["validate", "--in", str(target)]) == 0
    out = capsys.readouterr().out
    log_result("Вывод validate", out)
    assert "violations: 0" in out, f"Unexpected output: {out}"
    assert "command: sft validate" in out, f"Unexpected echo: {out}"


def test_validate_reports_violations(tmp_path, capsys):
    """Тест: испорченный образец даёт код 1 и строки violation."""
    p = generate_supertile(Corner.SW, 3)
    values = p.layer(ROBINSON).copy()
    values[7, 5] = codes.blue_code(Corner.SW)
    target = tmp_path / "broken.txt"
    target.write_bytes(write_pattern(p.with_layers(**{ROBINSON: values})))
    assert main(["validate", "--in", str(target)]) == 1
    out = capsys.readouterr().out
    assert "violation " in out, f"Unexpected output: {out}"


@pytest.mark.parametrize(
    "args",
    [
        ["no-such-command"],
        ["validate", "--in", "/nonexistent/pattern.txt"],
        ["generate-supertile", "--order", "11", "--out", "never.txt"],
        ["counter-trace", "--kind", "linear", "--k", "4", "--w", "1", "--steps", "1"],
    ],
)
def test_usage_errors(args, output_dir):
    """Тест: ошибки использования и предусловий дают код 2."""
    assert main(args) == 2, f"Unexpected exit code for {args}"


def test_codes_command(invoke):
    """Тест: справочник кодов начинается с пустого символа."""
    result = invoke("codes")
    report = result.return_value
    assert isinstance(report, Report), f"Unexpected result: {report}"
    assert report.lines[0] == "0 blank", f"Unexpected first line: {report.lines[0]}"
    assert len(report.lines) == codes.CODE_COUNT, f"Unexpected count: {len(report.lines)}"


def test_counter_trace_command(invoke):
    """Тест: трасса линейного счётчика из нуля, по строке на шаг."""
    report = invoke("counter-trace", "--kind", "linear", "--k", "1", "--w", "2", "--steps", "5").return_value
    log_result("Трасса", report.lines)
    assert report.lines[0] == "00 .", f"Unexpected zero state: {report.lines[0]}"
    assert len(report.lines) == 6, f"Unexpected trace length: {len(report.lines)}"
    assert report.exit_code == 0, f"Unexpected exit code: {report.exit_code}"


def test_machine_run_command(invoke, witness, output_dir):
    """Тест: диаграмма свидетеля записывается в каталог артефактов."""
    spec_path = output_dir / "witness.machine"
    spec_path.write_bytes(write_machine(witness))
    report = invoke(
        "machine-run", "--spec", str(spec_path), "--width", "4", "--height", "3", "--out", "diagram.txt"
    ).return_value
    log_result("Отчёт машины", report.lines)
    p = parse_pattern((output_dir / "diagram.txt").read_bytes())
    assert p.size == (4, 3), f"Unexpected size: {p.size}"
    assert p.layer_names == ["tape", "head"], f"Unexpected layers: {p.layer_names}"
    assert "first-error 4" in report.lines, f"Unexpected lines: {report.lines}"


def test_simulate_command(invoke, output_dir):
    """Тест: стек одометра собирается и коммутирует."""
    report = invoke("simulate", "--order", "3", "--height", "2", "--out", "stack.txt").return_value
    log_result("Отчёт simulate", report.lines)
    assert report.exit_code == 0, f"Unexpected violations: {report.violations[:3]}"
    assert "commuting true" in report.lines, f"Unexpected lines: {report.lines}"
    assert (output_dir / "stack.txt").exists(), "Stack file was not written"


def test_petals_and_cells_commands(invoke, supertile_3, tmp_path):
    """Тест: команды petals и cells перечисляют элементы иерархии St_sw(3)."""
    source = tmp_path / "st3.txt"
    source.write_bytes(write_pattern(supertile_3))
    petals = invoke("petals", "--in", str(source)).return_value.lines
    cells = invoke("cells", "--in", str(source)).return_value.lines
    log_result("Клетки", cells)
    assert len(petals) == 21, f"Unexpected petal count: {len(petals)}"
    assert cells == ["cell 0 1 1 5", "cell 0 1 9 5", "cell 0 9 1 5", "cell 0 9 9 5"], f"Unexpected cells: {cells}"
