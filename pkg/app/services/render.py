"""
Отрисовка слоя образца в двоичный PPM (P6): квадрат render_cell_px на позицию,
север сверху.
"""
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import DimensionMismatch, UnsupportedLayer
from app.schemas.pattern import Pattern
from app.services import codes
from app.services.pattern_io import KNOWN_LAYERS
from app.services.robinson import ROBINSON

SUPPORTED_TABLES = ("1",)

BLACK = (0, 0, 0)
BLUE = (40, 80, 220)
RED = (220, 40, 40)
RED_BRIGHT = (255, 110, 110)

# Общая палитра прочих слоёв, индекс - (код - 1) по модулю длины
PALETTE = (
    (230, 230, 230),
    (40, 160, 70),
    (240, 150, 120),
    (70, 110, 230),
    (230, 200, 40),
    (160, 70, 200),
    (40, 200, 200),
    (150, 150, 150),
)


def _robinson_table() -> np.ndarray:
    table = np.zeros((codes.CODE_COUNT, 3), dtype=np.uint8)
    for code in range(1, codes.CODE_COUNT):
        if codes.IS_BLUE[code]:
            table[code] = BLUE
        elif codes.IS_RED[code]:
            table[code] = RED_BRIGHT if codes.BIT[code] else RED
        else:
            shade = 90 + 25 * (int(codes.KIND[code]) - 2)
            table[code] = (shade, shade, shade)
    return table


ROBINSON_COLORS = _robinson_table()


def _palette_colors(values: np.ndarray) -> np.ndarray:
    palette = np.array(PALETTE, dtype=np.uint8)
    colors = palette[(values.astype(np.int64) - 1) % len(PALETTE)]
    colors[values == 0] = BLACK
    return colors


def render_ppm(p: Pattern, layer: str = ROBINSON, z: Optional[int] = None) -> bytes:
    """
    :param p: образец
    :param layer: имя слоя
    :param z: сечение трёхмерного образца
    :return: байты P6
    """
    if settings.color_table_version not in SUPPORTED_TABLES:
        raise UnsupportedLayer(f"Таблица цветов версии {settings.color_table_version} не поддерживается.")
    if layer not in KNOWN_LAYERS or not p.has_layer(layer):
        raise UnsupportedLayer(f"Слой {layer} нельзя отрисовать для этого образца.")
    if p.dim == 3:
        if z is None:
            raise DimensionMismatch("Для трёхмерного образца нужно выбрать сечение z.")
        p = p.section(z)
    values = p.layer(layer)
    if layer == ROBINSON:
        if values.max() >= codes.CODE_COUNT or values.min() < 0:
            raise UnsupportedLayer("Слой robinson содержит неизвестные коды.")
        colors = ROBINSON_COLORS[values.astype(np.int64)]
    else:
        colors = _palette_colors(values)
    px = settings.render_cell_px
    image = np.repeat(np.repeat(np.flipud(colors), px, axis=0), px, axis=1)
    header = f"P6\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(image, dtype=np.uint8).tobytes()
