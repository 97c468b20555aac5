"""Structural elaboration of a memory instance and netlist emitters.

Net naming is fixed: ``P<col>``/``N<col>`` bitline pairs, ``WL<row>``
wordlines, ``PREF<b>`` reference bitlines, ``PBUS<b>``/``NBUS<b>``/
``PREFBUS<b>`` multiplexer outputs, ``IO<b>`` data pins, ``ZSA<b>`` sense
outputs, ``XSEL<k>``/``XSELB<k>`` word-column selects, and ``*_L`` for
control signals level-shifted into the VDDL domain.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .analog import WORST_CASE_MEMRISTANCE
from .geometry import MemoryGeometry, validate_geometry
from .technology import TechnologyProfile

FORMAT_NAME = "rramc-netlist"
FORMAT_VERSION = 1
SUPPLIES = ("VDDL", "VDDH", "VDDW", "GND")


class CellKind(Enum):
    MemCell1T1R = "MemCell1T1R"
    RefCell = "RefCell"
    MuxSwitch = "MuxSwitch"
    MuxBlock = "MuxBlock"
    WriteDriver = "WriteDriver"
    SenseAmp = "SenseAmp"
    LevelDown = "LevelDown"
    TriStateBuffer = "TriStateBuffer"
    Controller = "Controller"
    DecoderX = "DecoderX"
    DecoderY = "DecoderY"


def port_names(kind: CellKind, g: MemoryGeometry) -> tuple[str, ...]:
    """Ordered port list of ``kind``; some kinds are sized by the geometry."""
    B, X, Y = g.B, g.X, g.Y
    return {
        CellKind.MemCell1T1R: ("P", "N", "WL"),
        CellKind.RefCell: ("D", "WL", "GND"),
        CellKind.MuxSwitch: ("BL", "OUT", "EN", "ENB", "VDDH", "GND"),
        CellKind.MuxBlock: tuple(f"BL{b}" for b in range(B)) + tuple(f"OUT{b}" for b in range(B))
        + ("EN", "ENB", "VDDH", "GND"),
        CellKind.WriteDriver: ("WR_IN", "WE", "P", "N", "VDDL", "VDDW", "GND"),
        CellKind.SenseAmp: ("BL", "BLB", "READ", "DVLP", "PRE", "EN_SA", "VO1", "VDDL", "GND"),
        CellKind.LevelDown: ("IN", "OUT", "VDDH", "VDDL", "GND"),
        CellKind.TriStateBuffer: ("IN", "OE", "OUT", "VDDL", "GND"),
        CellKind.Controller: ("CLK", "RST", "EN", "RW", "READ", "READB", "WRITE", "DVLP", "PRE",
                              "EN_SA", "DEC_EN", "IO_DRIVE", "VDDH", "GND"),
        CellKind.DecoderX: tuple(f"A{i}" for i in range(X)) + ("EN",)
        + tuple(f"SEL{k}" for k in range(1 << X)) + tuple(f"SELB{k}" for k in range(1 << X))
        + ("VDDH", "GND"),
        CellKind.DecoderY: tuple(f"A{i}" for i in range(Y)) + ("EN",)
        + tuple(f"WL{r}" for r in range(1 << Y)) + ("VDDH", "GND"),
    }[kind]


@dataclass(frozen=True)
class Instance:
    name: str
    kind: CellKind
    ports: tuple[tuple[str, str], ...]
    params: tuple[tuple[str, str], ...] = ()
    parent: str | None = None

    def net(self, port: str) -> str:
        return dict(self.ports)[port]

    def param(self, key: str) -> str:
        return dict(self.params)[key]


@dataclass
class Netlist:
    geometry: MemoryGeometry
    nets: dict = field(default_factory=dict)  # name -> "supply" | "signal"
    instances: list = field(default_factory=list)

    def add_net(self, name: str, kind: str = "signal") -> str:
        prev = self.nets.get(name)
        if prev is not None and prev != kind:
            raise ValueError(f"net {name} declared both {prev} and {kind}")
        self.nets[name] = kind
        return name

    def add(self, name, kind, ports: dict, params: dict | None = None, parent=None) -> Instance:
        expected = port_names(kind, self.geometry)
        if tuple(ports) != expected:
            raise ValueError(f"{name}: ports {tuple(ports)} do not match {kind.value} {expected}")
        for net in ports.values():
            if net not in self.nets:
                raise ValueError(f"{name}: undeclared net {net}")
        inst = Instance(
            name, kind, tuple(ports.items()),
            tuple((k, _fmt(v)) for k, v in (params or {}).items()), parent,
        )
        self.instances.append(inst)
        return inst

    def counts(self) -> Counter:
        return Counter(i.kind for i in self.instances)

    def of_kind(self, kind: CellKind) -> list[Instance]:
        return [i for i in self.instances if i.kind is kind]

    def stats(self) -> dict[str, int]:
        c = self.counts()
        g = self.geometry
        out = {k.value: c.get(k, 0) for k in CellKind}
        out.update(
            nets=len(self.nets),
            wordlines=sum(1 for n in self.nets if n.startswith("WL")),
            bitline_pairs=sum(1 for n in self.nets if n[0] == "P" and n[1:].isdigit()),
            capacity_bits=g.capacity_bits,
        )
        return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def elaborate(g: MemoryGeometry, t: TechnologyProfile) -> Netlist:
    n = Netlist(g)
    B, W = g.B, g.word_columns
    for s in SUPPLIES:
        n.add_net(s, "supply")
    ctrl = ("CLK", "RST", "EN", "RW", "READ", "READB", "WRITE", "DVLP", "PRE", "EN_SA",
            "DEC_EN", "IO_DRIVE")
    for s in ctrl:
        n.add_net(s)
    shifted = ("READ", "DVLP", "PRE", "EN_SA", "IO_DRIVE")
    for s in shifted:
        n.add_net(s + "_L")
    for i in range(g.X):
        n.add_net(f"XA{i}")
    for i in range(g.Y):
        n.add_net(f"YA{i}")
    for k in range(W):
        n.add_net(f"XSEL{k}")
        n.add_net(f"XSELB{k}")
    for r in range(g.M):
        n.add_net(f"WL{r}")
    for c in range(g.N):
        n.add_net(f"P{c}")
        n.add_net(f"N{c}")
    for b in range(B):
        for prefix in ("PREF", "PBUS", "NBUS", "PREFBUS", "IO", "ZSA"):
            n.add_net(f"{prefix}{b}")

    # digital control
    n.add("XCTRL", CellKind.Controller, {p: p for p in ctrl} | {"VDDH": "VDDH", "GND": "GND"})
    n.add("XDECX", CellKind.DecoderX,
          {f"A{i}": f"XA{i}" for i in range(g.X)} | {"EN": "DEC_EN"}
          | {f"SEL{k}": f"XSEL{k}" for k in range(W)}
          | {f"SELB{k}": f"XSELB{k}" for k in range(W)} | {"VDDH": "VDDH", "GND": "GND"})
    n.add("XDECY", CellKind.DecoderY,
          {f"A{i}": f"YA{i}" for i in range(g.Y)} | {"EN": "DEC_EN"}
          | {f"WL{r}": f"WL{r}" for r in range(g.M)} | {"VDDH": "VDDH", "GND": "GND"})
    for s in shifted:
        n.add(f"XLVL_{s}", CellKind.LevelDown,
              {"IN": s, "OUT": s + "_L", "VDDH": "VDDH", "VDDL": "VDDL", "GND": "GND"},
              {"delay": t.level_down_delay})

    # arrays
    for r in range(g.M):
        for c in range(g.N):
            n.add(f"XMEM_R{r}_C{c}", CellKind.MemCell1T1R,
                  {"P": f"P{c}", "N": f"N{c}", "WL": f"WL{r}"},
                  {"r_on": t.r_on_access, "r_init": WORST_CASE_MEMRISTANCE})
        for b in range(B):
            n.add(f"XREF_R{r}_B{b}", CellKind.RefCell,
                  {"D": f"PREF{b}", "WL": f"WL{r}", "GND": "GND"}, {"r_ref": t.r_ref})

    # multiplexers: the P side has one extra block for the reference array
    def mux_block(name, lines, outs, en, enb):
        ports = ({f"BL{b}": lines[b] for b in range(B)} | {f"OUT{b}": outs[b] for b in range(B)}
                 | {"EN": en, "ENB": enb, "VDDH": "VDDH", "GND": "GND"})
        n.add(name, CellKind.MuxBlock, ports)
        for b in range(B):
            n.add(f"{name}_S{b}", CellKind.MuxSwitch,
                  {"BL": lines[b], "OUT": outs[b], "EN": en, "ENB": enb, "VDDH": "VDDH", "GND": "GND"},
                  {"r_on": t.r_mux_on}, parent=name)

    pbus = [f"PBUS{b}" for b in range(B)]
    nbus = [f"NBUS{b}" for b in range(B)]
    for k in range(W):
        cols = [g.column(k, b) for b in range(B)]
        mux_block(f"XPMUX_K{k}", [f"P{c}" for c in cols], pbus, f"XSEL{k}", f"XSELB{k}")
    mux_block(f"XPMUX_K{W}", [f"PREF{b}" for b in range(B)],
              [f"PREFBUS{b}" for b in range(B)], "READ", "READB")
    for k in range(W):
        cols = [g.column(k, b) for b in range(B)]
        mux_block(f"XNMUX_K{k}", [f"N{c}" for c in cols], nbus, f"XSEL{k}", f"XSELB{k}")

    # per-bit periphery
    for b in range(B):
        n.add(f"XWD{b}", CellKind.WriteDriver,
              {"WR_IN": f"IO{b}", "WE": "WRITE", "P": f"PBUS{b}", "N": f"NBUS{b}",
               "VDDL": "VDDL", "VDDW": "VDDW", "GND": "GND"},
              {"r_out": t.r_driver})
        n.add(f"XSA{b}", CellKind.SenseAmp,
              {"BL": f"PBUS{b}", "BLB": f"PREFBUS{b}", "READ": "READ_L", "DVLP": "DVLP_L",
               "PRE": "PRE_L", "EN_SA": "EN_SA_L", "VO1": f"ZSA{b}", "VDDL": "VDDL", "GND": "GND"},
              {"r_in": t.r_sense_in})
        n.add(f"XTRI{b}", CellKind.TriStateBuffer,
              {"IN": f"ZSA{b}", "OE": "IO_DRIVE_L", "OUT": f"IO{b}", "VDDL": "VDDL", "GND": "GND"},
              {"r_out": t.r_sense_out})
    return n


# --- structural interchange format -------------------------------------------

def emit_structural(n: Netlist) -> str:
    g = n.geometry
    out = [
        "# rramc structural netlist; see docs/formats.md",
        f"format {FORMAT_NAME} {FORMAT_VERSION}",
        f"geometry M={g.M} N={g.N} B={g.B}",
    ]
    for name, kind in n.nets.items():
        out.append(f"net {name} {kind}")
    for i in n.instances:
        line = f"inst {i.name} {i.kind.value} parent={i.parent or '-'} "
        line += " ".join(f"{p}={net}" for p, net in i.ports)
        if i.params:
            line += " ; " + " ".join(f"{k}={v}" for k, v in i.params)
        out.append(line)
    return "\n".join(out) + "\n"


class NetlistParseError(ValueError):
    pass


def parse_structural(text: str) -> Netlist:
    n = None
    seen_format = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        try:
            if head == "format":
                if rest != [FORMAT_NAME, str(FORMAT_VERSION)]:
                    raise NetlistParseError(f"unsupported format {' '.join(rest)!r}")
                seen_format = True
            elif head == "geometry":
                kv = dict(tok.split("=", 1) for tok in rest)
                n = Netlist(validate_geometry(int(kv["M"]), int(kv["N"]), int(kv["B"])))
            elif head == "net":
                name, kind = rest
                if kind not in ("supply", "signal"):
                    raise NetlistParseError(f"bad net kind {kind!r}")
                n.add_net(name, kind)
            elif head == "inst":
                name, kind = rest[0], CellKind(rest[1])
                body = " ".join(rest[2:])
                ports_txt, _, params_txt = body.partition(";")
                toks = [tok.split("=", 1) for tok in ports_txt.split()]
                parent = toks[0][1] if toks and toks[0][0] == "parent" else "-"
                ports = dict(toks[1:])
                params = dict(tok.split("=", 1) for tok in params_txt.split())
                n.add(name, kind, ports, params, None if parent == "-" else parent)
            else:
                raise NetlistParseError(f"unknown record {head!r}")
        except NetlistParseError as exc:
            raise NetlistParseError(f"line {lineno}: {exc}") from None
        except (ValueError, KeyError, AttributeError) as exc:
            raise NetlistParseError(f"line {lineno}: {exc}") from None
    if not seen_format or n is None:
        raise NetlistParseError("missing format or geometry header")
    return n


# --- SPICE deck --------------------------------------------------------------

# element lines of each leaf subcircuit; MuxBlock is a container of MuxSwitch calls
_SPICE_BODIES = {
    CellKind.MemCell1T1R: [
        "S1 P mid WL 0 SWACC",
        "RMEM mid N {rmem}",
    ],
    CellKind.RefCell: [
        "S1 D mid WL 0 SWACC",
        "RREF mid GND {r_ref}",
    ],
    CellKind.MuxSwitch: [
        "SN BL OUT EN 0 SWMUX",
        "SP BL OUT VDDH ENB SWMUX",
        "SG BL GND ENB 0 SWGND",
    ],
    CellKind.WriteDriver: [
        "BP pi GND V = V(WE) > 0.9 ? (V(WR_IN) < 0.9 ? V(VDDW) : 0) : 0",
        "RP pi P {r_out}",
        "BN ni GND V = V(WE) > 0.9 ? (V(WR_IN) < 0.9 ? 0 : V(VDDW)) : 0",
        "RN ni N {r_out}",
    ],
    CellKind.SenseAmp: [
        "RIN1 BL b1 {r_in}",
        "VB1 b1 GND DC {vbias}",
        "RIN2 BLB b2 {r_in}",
        "VB2 b2 GND DC {vbias}",
        "BOUT VO1 GND V = V(EN_SA) > 0.9 ? (I(VB1) < I(VB2) ? V(VDDL) : 0) : V(VDDL)",
    ],
    CellKind.LevelDown: [
        "BOUT OUT GND V = V(IN) > V(VDDH)/2 ? V(VDDL) : 0",
    ],
    CellKind.TriStateBuffer: [
        "S1 IN OUT OE 0 SWTRI",
    ],
    CellKind.Controller: [],
    CellKind.DecoderX: [],
    CellKind.DecoderY: [],
}

_SPICE_PARAMS = {
    CellKind.MemCell1T1R: ("rmem",),
    CellKind.RefCell: ("r_ref",),
    CellKind.WriteDriver: ("r_out",),
    CellKind.SenseAmp: ("r_in", "vbias"),
}


def spice_expansion_size(kind: CellKind, g: MemoryGeometry) -> int:
    """Primitive elements one instance contributes once fully flattened (containers: 0)."""
    if kind is CellKind.MuxBlock:
        return 0
    return len(_SPICE_BODIES[kind])


def spice_element_count(n: Netlist) -> int:
    return sum(spice_expansion_size(i.kind, n.geometry) for i in n.instances)


def _subckt_name(kind: CellKind) -> str:
    return kind.value.upper()


def emit_spice(n: Netlist, t: TechnologyProfile) -> str:
    g = n.geometry
    vbias = t.read_bias * t.vddl
    defaults = {
        "rmem": repr(WORST_CASE_MEMRISTANCE), "r_ref": repr(t.r_ref), "r_out": repr(t.r_driver),
        "r_in": repr(t.r_sense_in), "vbias": repr(vbias),
    }
    out = [
        f"* rramc behavioral SPICE deck: M={g.M} N={g.N} B={g.B}",
        "* memristors are fixed resistors; transistors are voltage-controlled switches",
        f".model SWACC SW(VT=0.9 VH=0.05 RON={t.r_on_access!r} ROFF=1e12)",
        f".model SWMUX SW(VT=0.9 VH=0.05 RON={2 * t.r_mux_on!r} ROFF=1e12)",
        f".model SWGND SW(VT=0.9 VH=0.05 RON={t.r_mux_on!r} ROFF=1e12)",
        f".model SWTRI SW(VT=0.9 VH=0.05 RON={t.r_sense_out!r} ROFF=1e12)",
    ]
    for kind in CellKind:
        ports = " ".join(port_names(kind, g))
        params = " ".join(f"{p}={defaults[p]}" for p in _SPICE_PARAMS.get(kind, ()))
        out.append(f".subckt {_subckt_name(kind)} {ports}" + (f" params: {params}" if params else ""))
        if kind is CellKind.MuxBlock:
            for b in range(g.B):
                out.append(f"X{b} BL{b} OUT{b} EN ENB VDDH GND {_subckt_name(CellKind.MuxSwitch)}")
        elif not _SPICE_BODIES[kind]:
            out.append("* digital block: modelled by the rramc cycle simulator")
        else:
            out.extend(_SPICE_BODIES[kind])
        out.append(".ends")
    out += [
        f"VVDDL VDDL 0 DC {t.vddl!r}",
        f"VVDDH VDDH 0 DC {t.vddh!r}",
        f"VVDDW VDDW 0 DC {t.vddw!r}",
        "VGND GND 0 DC 0",
    ]
    for i in n.instances:
        if i.parent is not None:
            continue
        nets = " ".join(net for _, net in i.ports)
        line = f"{i.name} {nets} {_subckt_name(i.kind)}"
        if i.kind is CellKind.MemCell1T1R:
            line += f" rmem={i.param('r_init')}"
        out.append(line)
    out.append(".end")
    return "\n".join(out) + "\n"
