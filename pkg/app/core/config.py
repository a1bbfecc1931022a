import os
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Ограничения на размеры генерируемых окон
    max_supertile_order: int = 10  # супертайл порядка 10 имеет сторону 2047
    max_window_side: int = 4096
    max_chi_order: int = 12
    max_assembly_order: int = 8

    # Ограничения для счётчиков и оракулов
    max_orbit_product: int = 10**7
    oracle_step_budget: int = 100_000
    recurrence_bound: int = 4096
    brute_force_cap: int = 2**20

    # Параметры счётчиков в уменьшенном масштабе
    linear_counter_width: int = 1
    system_counter_digit_exponent: int = 0

    # Вывод
    render_cell_px: int = 4
    color_table_version: str = "1"
    output_dir: str = "."
    threads: int = 4
    log_level: str = "INFO"

    class Config:
        env_file = ".env"
        env_prefix = "SFT_"


def _default_env_file() -> Optional[str]:
    return os.environ.get("SFT_CONFIG")


settings = Settings(_env_file=_default_env_file() or ".env")


def load_settings(path: Optional[str] = None) -> Settings:
    """
    Перечитывает настройки из dotenv-файла и обновляет общий объект settings.
    :param path: путь к файлу; по умолчанию берётся из SFT_CONFIG или .env
    :return: обновлённые настройки
    """
    env_file = path or _default_env_file() or ".env"
    if path is not None and not Path(path).is_file():
        from app.core.exceptions import ParseError

        raise ParseError(f"Файл конфигурации {path} не найден.")
    fresh = Settings(_env_file=env_file)
    for name in Settings.model_fields:
        setattr(settings, name, getattr(fresh, name))
    _check_caps(settings)
    return settings


def _check_caps(current: Settings) -> None:
    caps = (
        "max_supertile_order",
        "max_window_side",
        "max_chi_order",
        "max_assembly_order",
        "max_orbit_product",
        "oracle_step_budget",
        "recurrence_bound",
        "brute_force_cap",
        "linear_counter_width",
        "render_cell_px",
        "threads",
    )
    for name in caps:
        if getattr(current, name) <= 0:
            from app.core.exceptions import ParseError

            raise ParseError(f"Параметр {name} должен быть положительным.")
