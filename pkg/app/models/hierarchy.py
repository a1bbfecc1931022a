import enum


class PetalRole(enum.Enum):
    SUPPORT = "support"
    TRANSMISSION = "transmission"


class AreaFunction(enum.Enum):
    COMPUTATION = 1
    TRANSFER_H = 2
    TRANSFER_V = 3
    NONE = 4


class OrganiteRole(enum.Enum):
    MACHINE = "machine"
    DEMULTIPLEXER = "demultiplexer"
    LINEAR_INCREMENT = "linear-increment"
    SYSTEM_COUNTER = "system-counter"
    TRANSPORT = "transport"
    NONE = "none"
