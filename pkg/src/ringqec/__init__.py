"""ringqec: single-ancilla ring-connectivity stabilizer-code toolkit.

Subpackages cover Pauli/stabilizer algebra, measurement-circuit synthesis,
tableau verification, dense noisy simulation, sequential-measurement
decoding and an experiment harness with a CLI.
"""

from .pauli import (
    CODES,
    LAFLAMME5,
    REP3,
    REP5,
    SHOR9,
    PauliString,
    StabilizerCode,
    block_extent,
    classify_neighboring_blocks,
    commutes,
    correctable_set_check,
    pauli_multiply,
    validate_generating_set,
)

__version__ = "0.1.0"

__all__ = [
    "CODES",
    "LAFLAMME5",
    "REP3",
    "REP5",
    "SHOR9",
    "PauliString",
    "StabilizerCode",
    "block_extent",
    "classify_neighboring_blocks",
    "commutes",
    "correctable_set_check",
    "pauli_multiply",
    "validate_generating_set",
    "__version__",
]
