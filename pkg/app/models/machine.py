import enum


class Move(enum.Enum):
    LEFT = "<"
    RIGHT = ">"
    STAY = "^"


class HeadEvent(enum.Enum):
    MOVE = "move"
    FUSE = "fuse"
    BORDER_HIT = "border-hit"


class CounterKind(enum.Enum):
    LINEAR = "linear"
    SYSTEM = "system"
