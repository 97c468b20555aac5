"""Line-oriented stimulus scripts for ``rramc simulate``.

One command per line, ``#`` starts a comment::

    reset
    write X Y DATA
    read X Y [EXPECT]
    set_cell X Y OHMS[,OHMS...]
    idle [CYCLES]

DATA and EXPECT accept ``0b``/``0x`` prefixes or decimal. OHMS accepts a
number with an optional ``k``/``M`` suffix or the keywords ``LRS``/``HRS``;
a comma list gives one value per bit, MSB first.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .controller import OverlappingOperation
from .simulator import OpRecord, SimulationError, Simulator


class ScriptError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class Command:
    lineno: int
    op: str
    args: tuple


_ARITY = {"reset": (0, 0), "write": (3, 3), "read": (2, 3), "set_cell": (3, 3), "idle": (0, 1)}
_SUFFIX = {"": 1.0, "k": 1e3, "K": 1e3, "M": 1e6, "meg": 1e6}
_OHMS = re.compile(r"^([0-9.eE+-]+?)(k|K|M|meg)?$")


def _int(tok: str, lineno: int) -> int:
    try:
        v = int(tok, 0)
    except ValueError:
        raise ScriptError(lineno, f"expected an integer, got {tok!r}") from None
    if v < 0:
        raise ScriptError(lineno, f"negative value {tok!r}")
    return v


def _ohms(tok: str, lineno: int):
    if tok in ("LRS", "HRS"):
        return tok
    m = _OHMS.match(tok)
    if not m:
        raise ScriptError(lineno, f"bad resistance {tok!r}")
    try:
        v = float(m.group(1)) * _SUFFIX[m.group(2) or ""]
    except ValueError:
        raise ScriptError(lineno, f"bad resistance {tok!r}") from None
    if not v > 0:
        raise ScriptError(lineno, f"resistance must be > 0, got {tok!r}")
    return v


def parse_script(text: str) -> list[Command]:
    cmds = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        if op not in _ARITY:
            raise ScriptError(lineno, f"unknown command {op!r}")
        lo, hi = _ARITY[op]
        if not lo <= len(args) <= hi:
            raise ScriptError(lineno, f"{op} takes {lo}..{hi} arguments, got {len(args)}")
        if op == "set_cell":
            vals = tuple(_ohms(v, lineno) for v in args[2].split(","))
            parsed = (_int(args[0], lineno), _int(args[1], lineno), vals)
        else:
            parsed = tuple(_int(a, lineno) for a in args)
        cmds.append(Command(lineno, op, parsed))
    return cmds


@dataclass(frozen=True)
class CheckFailure:
    lineno: int
    message: str


def run_script(sim: Simulator, cmds: list[Command]) -> list[CheckFailure]:
    """Execute ``cmds``; returns failed expectations in script order."""
    failures = []
    B = sim.g.B
    for c in cmds:
        try:
            if c.op == "reset":
                sim.reset()
            elif c.op == "idle":
                sim.idle(c.args[0] if c.args else 1)
            elif c.op == "write":
                sim.write(*c.args)
            elif c.op == "set_cell":
                x, y, vals = c.args
                t = sim.nominal
                ohms = [t.r_lrs if v == "LRS" else t.r_hrs if v == "HRS" else v for v in vals]
                sim.set_cell(x, y, ohms[0] if len(ohms) == 1 else ohms)
            elif c.op == "read":
                x, y, *expect = c.args
                res = sim.read(x, y)
                if expect:
                    want = expect[0]
                    reliable = all(s.reliable for s in res.sense)
                    ok = res.data == want and reliable
                    sim.log.append(OpRecord(
                        sim.cycle, "expect", x, y, want, ok=ok,
                        note=f"line{c.lineno}_got=0b{res.data:0{B}b}" + ("" if reliable else "_unreliable"),
                    ))
                    if not ok:
                        failures.append(CheckFailure(
                            c.lineno,
                            f"read ({x}, {y}) expected 0b{want:0{B}b}, got 0b{res.data:0{B}b}"
                            + ("" if reliable else " (unreliable sense)"),
                        ))
        except (OverlappingOperation, SimulationError, IndexError, ValueError) as exc:
            raise ScriptError(c.lineno, str(exc)) from None
    return failures
