"""Cycle-level model of the memory controller.

The machine is Moore-style: ``fsm_step`` returns the next state together
with the control outputs of that state. A write is one WRITE cycle; a read
runs three sense phases in order.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class FsmState(Enum):
    RESET = "RESET"
    IDLE = "IDLE"
    WRITE = "WRITE"
    READ_PH1 = "READ_PH1"
    READ_PH2 = "READ_PH2"
    READ_PH3 = "READ_PH3"

    @property
    def is_read(self) -> bool:
        return self in (FsmState.READ_PH1, FsmState.READ_PH2, FsmState.READ_PH3)


class OverlappingOperation(RuntimeError):
    """An operation was requested while another was still in flight."""


@dataclass(frozen=True)
class ControlSignals:
    read: int = 0
    write: int = 0
    dvlp: int = 0
    pre: int = 0
    en_sa: int = 0
    dec_en: int = 0
    io_drive: int = 0

    NAMES = ("read", "write", "dvlp", "pre", "en_sa", "dec_en", "io_drive")

    def as_dict(self) -> dict[str, int]:
        return {n: getattr(self, n) for n in self.NAMES}

    def check(self) -> None:
        if self.read and self.write:
            raise AssertionError("read and write asserted together")
        if self.en_sa and self.dvlp:
            raise AssertionError("EN_SA asserted while DVLP is high")
        if self.io_drive and not self.en_sa:
            raise AssertionError("IO bus driven outside the latch phase")


@dataclass(frozen=True)
class FsmInputs:
    en: int = 0
    rw: int = 0
    reset: int = 0
    x_addr: int = 0
    y_addr: int = 0


IDLE_INPUTS = FsmInputs()

OUTPUTS = {
    FsmState.RESET: ControlSignals(),
    FsmState.IDLE: ControlSignals(),
    FsmState.WRITE: ControlSignals(write=1, dec_en=1),
    FsmState.READ_PH1: ControlSignals(read=1, dvlp=1, dec_en=1),
    FsmState.READ_PH2: ControlSignals(read=1, dvlp=1, pre=1, dec_en=1),
    FsmState.READ_PH3: ControlSignals(read=1, pre=1, en_sa=1, dec_en=1, io_drive=1),
}

_READ_NEXT = {
    FsmState.READ_PH1: FsmState.READ_PH2,
    FsmState.READ_PH2: FsmState.READ_PH3,
    FsmState.READ_PH3: FsmState.IDLE,
}


def fsm_step(s: FsmState, inp: FsmInputs) -> tuple[FsmState, ControlSignals]:
    if inp.reset:
        nxt = FsmState.RESET
    elif s is FsmState.RESET:
        nxt = FsmState.IDLE
    elif s is FsmState.IDLE:
        if inp.en:
            nxt = FsmState.READ_PH1 if inp.rw else FsmState.WRITE
        else:
            nxt = FsmState.IDLE
    elif s is FsmState.WRITE:
        # EN is sampled only in IDLE, so a held EN alternates WRITE/IDLE
        nxt = FsmState.IDLE
    else:
        nxt = _READ_NEXT[s]
    return nxt, OUTPUTS[nxt]


@dataclass(frozen=True)
class TraceStep:
    cycle: int
    state: FsmState
    signals: ControlSignals


def sequence_trace(
    ops: list[tuple[int, FsmInputs]],
    start: FsmState = FsmState.IDLE,
    extra_cycles: int = 4,
) -> list[TraceStep]:
    """Replay ``ops`` (``(cycle, inputs)`` pairs) through the FSM.

    Cycles without an entry see idle inputs. The result lists the state
    occupied in every cycle from 0 to ``extra_cycles`` past the last op.
    """
    cycles = [c for c, _ in ops]
    if any(b <= a for a, b in zip(cycles, cycles[1:])):
        raise ValueError("op cycles must be strictly increasing")
    if cycles and cycles[0] < 0:
        raise ValueError("op cycles must be >= 0")
    by_cycle = dict(ops)
    last = (cycles[-1] if cycles else 0) + extra_cycles

    state = start
    out = [TraceStep(0, state, OUTPUTS[state])]
    for cycle in range(last):
        inp = by_cycle.get(cycle, IDLE_INPUTS)
        if inp.en and not inp.reset and state.is_read:
            raise OverlappingOperation(f"EN asserted at cycle {cycle} during {state.value}")
        state, sig = fsm_step(state, inp)
        out.append(TraceStep(cycle + 1, state, sig))
    return out
