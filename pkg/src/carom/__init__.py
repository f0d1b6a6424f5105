"""carom: compile reversible binary Turing machines into planar billiard
tables whose trajectories replay the computation exactly."""

from .ternary import T, TernaryRational
from .machine import (
    Machine,
    ComputationState,
    parse_machine,
    parse_tape,
    check_reversible,
    step,
    run_machine,
    build_graph,
)
from .encoding import (
    EncodedPoint,
    NotACode,
    encode_tape,
    encode_state,
    tau,
    decode,
    shift_point,
    read_digit,
    rewrite_point,
    cantor_blocks,
    head_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
