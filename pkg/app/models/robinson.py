import enum


class Direction(enum.Enum):
    E = 0
    N = 1
    W = 2
    S = 3

    @property
    def dx(self) -> int:
        return (1, 0, -1, 0)[self.value]

    @property
    def dy(self) -> int:
        return (0, 1, 0, -1)[self.value]

    @property
    def opposite(self) -> "Direction":
        return Direction((self.value + 2) % 4)

    @property
    def is_horizontal(self) -> bool:
        return self in (Direction.E, Direction.W)

    @property
    def degrees(self) -> int:
        return 90 * self.value


class Corner(enum.Enum):
    """
    Ориентация углового символа: значение кодирует (north << 1) | east.
    """
    SW = 0
    SE = 1
    NW = 2
    NE = 3

    @property
    def east(self) -> bool:
        return bool(self.value & 1)

    @property
    def north(self) -> bool:
        return bool(self.value & 2)

    @property
    def petal_directions(self) -> tuple:
        # Лепесток лежит со стороны, противоположной названию угла
        horizontal = Direction.W if self.east else Direction.E
        vertical = Direction.S if self.north else Direction.N
        return horizontal, vertical

    @property
    def degrees(self) -> int:
        return {Corner.SW: 0, Corner.SE: 90, Corner.NE: 180, Corner.NW: 270}[self]

    @property
    def label(self) -> str:
        return self.name.lower()


class SymbolKind(enum.Enum):
    BLUE_CORNER = "blue"
    RED_CORNER = "red"
    ARROW_3 = "3"     # одинарная сквозная, одинарные боковые
    ARROW_4 = "4"     # двойная сквозная, внутренняя сторона N/E
    ARROW_4M = "4m"   # зеркальная к ARROW_4, внутренняя сторона S/W
    ARROW_5 = "5"     # одинарная сквозная, двойные боковые
    ARROW_6 = "6"     # двойная сквозная, двойные боковые, внутренняя N/E
    ARROW_6M = "6m"

    @property
    def is_corner(self) -> bool:
        return self in (SymbolKind.BLUE_CORNER, SymbolKind.RED_CORNER)

    @property
    def double_through(self) -> bool:
        return self in (SymbolKind.ARROW_4, SymbolKind.ARROW_4M, SymbolKind.ARROW_6, SymbolKind.ARROW_6M)

    @property
    def double_sides(self) -> bool:
        return self in (SymbolKind.ARROW_5, SymbolKind.ARROW_6, SymbolKind.ARROW_6M)

    @property
    def mirrored(self) -> bool:
        return self in (SymbolKind.ARROW_4M, SymbolKind.ARROW_6M)

    @property
    def alignable(self) -> bool:
        return self in (SymbolKind.ARROW_3, SymbolKind.ARROW_5)


ARROW_KINDS = (
    SymbolKind.ARROW_3,
    SymbolKind.ARROW_4,
    SymbolKind.ARROW_4M,
    SymbolKind.ARROW_5,
    SymbolKind.ARROW_6,
    SymbolKind.ARROW_6M,
)


class AlignmentMark(enum.Enum):
    BLANK = 0
    SW = 1
    SE = 2
    NW = 3
    NE = 4

    @classmethod
    def from_corner(cls, corner: Corner) -> "AlignmentMark":
        return cls(corner.value + 1)
