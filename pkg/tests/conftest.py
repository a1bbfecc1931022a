import sys
from pathlib import Path

# Добавляем корень проекта в `sys.path`, чтобы Python мог находить пакет app
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))


import pytest
import pytest_asyncio
from click.testing import CliRunner

from app.core.config import settings
from app.main import cli
from app.models.robinson import Corner
from app.schemas.simulation import StackPhases
from app.services.assembly import assemble_stack
from app.services.machine import witness_machine
from app.services.robinson import generate_supertile
from app.services.systems import odometer_system
from app.services.validation import avalidate_stack


@pytest.fixture(scope="session")
def supertile_3():
    """Супертайл St_sw(3) со слоями robinson и alignment."""
    return generate_supertile(Corner.SW, 3)


@pytest.fixture(scope="session")
def supertile_4():
    return generate_supertile(Corner.SW, 4)


@pytest.fixture(scope="session")
def odometer():
    return odometer_system()


@pytest.fixture(scope="session")
def odometer_stack(odometer):
    """Стек одометра на окне St_sw(3) из двух сечений."""
    return assemble_stack(odometer, 3, 2)


@pytest.fixture(scope="session")
def phased_stack(odometer):
    return assemble_stack(odometer, 4, 3, StackPhases(orbit=5, linear=2, system=3))


@pytest.fixture(scope="session")
def section_6(odometer):
    """Единственное сечение стека на окне St_sw(6): клетки уровней 0, 1 и 2."""
    return assemble_stack(odometer, 6, 1).section(0).pattern


@pytest.fixture(scope="session")
def section_8(odometer):
    """Сечение на окне St_sw(8) с клеткой уровня 3; только для тестов slow."""
    return assemble_stack(odometer, 8, 1).section(0).pattern


@pytest_asyncio.fixture(scope="function")
async def stack_violations(odometer_stack):
    """Нарушения правил собранного стека одометра."""
    return await avalidate_stack(odometer_stack)


@pytest.fixture
def witness():
    return witness_machine()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    def run(*args):
        return runner.invoke(cli, list(args), standalone_mode=False, catch_exceptions=False)

    return run


@pytest.fixture
def output_dir(tmp_path):
    """Каталог артефактов команд; восстанавливается после теста."""
    previous = settings.output_dir
    settings.output_dir = str(tmp_path)
    yield tmp_path
    settings.output_dir = previous
