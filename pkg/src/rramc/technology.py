"""Electrical, parasitic and floorplan parameters of a target process.

A profile is stored as TOML with a ``schema`` version, a ``[technology]``
table and one ``[corners.<NAME>]`` table per process corner. Unknown or
missing keys are rejected.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomlkit
from tomlkit.exceptions import ParseError

SCHEMA_VERSION = 1
CORNER_NAMES = ("TT", "FS", "SF", "FF")


class ProfileError(ValueError):
    """Profile violates an invariant or has malformed content."""


class ProfileParseError(ProfileError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class CornerProfile:
    name: str
    nmos_strength: float = 1.0
    pmos_strength: float = 1.0
    sense_offset_extra: float = 0.0

    def __post_init__(self):
        for attr in ("nmos_strength", "pmos_strength"):
            v = getattr(self, attr)
            if not 0.5 < v < 2.0:
                raise ProfileError(f"corner {self.name}: {attr} must lie in (0.5, 2.0), got {v}")
        if self.sense_offset_extra < 0:
            raise ProfileError(f"corner {self.name}: sense_offset_extra must be >= 0")
        if self.name == "TT" and (
            self.nmos_strength != 1.0 or self.pmos_strength != 1.0 or self.sense_offset_extra != 0.0
        ):
            raise ProfileError("corner TT must be the identity (1.0, 1.0, 0.0)")


TT = CornerProfile("TT")

_POSITIVE = (
    "r_ref", "r_on_access", "r_driver", "r_line_per_cell", "c_line_per_cell",
    "r_mux_on", "cell_pitch_x", "cell_pitch_y", "sense_min_develop",
    "c_sense", "r_sense_in", "r_sense_out", "c_io_bus",
)


@dataclass(frozen=True)
class TechnologyProfile:
    """All process-dependent knobs, in SI units.

    Resistances on the write path (``r_driver``, ``r_mux_on``,
    ``r_line_per_cell``) and ``c_line_per_cell`` are per-line effective
    values; the floorplan constants feed :func:`rramc.characterize.estimate_area`.
    """

    vddl: float
    vddh: float
    vddw: float
    r_ref: float
    r_on_access: float
    r_driver: float
    r_line_per_cell: float
    c_line_per_cell: float
    r_mux_on: float
    cell_pitch_x: float
    cell_pitch_y: float
    periphery_width: float
    periphery_height: float
    periphery_area_overhead: float
    sense_offset: float
    sense_min_develop: float
    read_bias: float
    c_sense: float
    r_sense_in: float
    r_sense_out: float
    c_io_bus: float
    imbalance_ref_bits: int
    state_ratio: float
    level_down_delay: float
    corners: dict = field(default_factory=lambda: {"TT": TT})

    def __post_init__(self):
        for name in _POSITIVE:
            if not getattr(self, name) > 0:
                raise ProfileError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.vddl <= self.vddh:
            raise ProfileError(f"need 0 < vddl <= vddh, got vddl={self.vddl}, vddh={self.vddh}")
        if not self.vddw > 0:
            raise ProfileError(f"vddw must be > 0, got {self.vddw}")
        if not 0 <= self.periphery_area_overhead < 10:
            raise ProfileError("periphery_area_overhead must lie in [0, 10)")
        if self.periphery_width < 0 or self.periphery_height < 0:
            raise ProfileError("periphery_width and periphery_height must be >= 0")
        if self.sense_offset < 0 or self.level_down_delay < 0:
            raise ProfileError("sense_offset and level_down_delay must be >= 0")
        if not 0 < self.read_bias <= 1:
            raise ProfileError("read_bias must lie in (0, 1]")
        if not 0 < self.state_ratio < 1:
            raise ProfileError("state_ratio must lie in (0, 1)")
        if int(self.imbalance_ref_bits) != self.imbalance_ref_bits or self.imbalance_ref_bits < 1:
            raise ProfileError("imbalance_ref_bits must be a positive integer")
        if "TT" not in self.corners:
            raise ProfileError("profile must define corner TT")
        for key, c in self.corners.items():
            if key != c.name:
                raise ProfileError(f"corner key {key!r} does not match its name {c.name!r}")

    def corner(self, name: str) -> CornerProfile:
        try:
            return self.corners[name]
        except KeyError:
            raise ProfileError(f"unknown corner {name!r}; have {sorted(self.corners)}") from None

    @property
    def r_lrs(self) -> float:
        return self.state_ratio * self.r_ref

    @property
    def r_hrs(self) -> float:
        return self.r_ref / self.state_ratio

    def replace(self, **changes) -> "TechnologyProfile":
        return dataclasses.replace(self, **changes)


def scalar_fields() -> list[str]:
    return [f.name for f in dataclasses.fields(TechnologyProfile) if f.name != "corners"]


def corner_apply(p: TechnologyProfile, c: CornerProfile) -> TechnologyProfile:
    """Return ``p`` as seen at process corner ``c``.

    NMOS devices (access transistor, reference transistor, sense input and
    output pull-down) scale with ``nmos_strength``. The write driver is half
    pull-up, half pull-down. Transmission gates are the parallel combination
    of their NMOS and PMOS halves.
    """
    n, q = c.nmos_strength, c.pmos_strength
    if n == 1.0 and q == 1.0 and c.sense_offset_extra == 0.0:
        return p
    return p.replace(
        r_on_access=p.r_on_access * n,
        r_ref=p.r_ref * n,
        r_sense_in=p.r_sense_in * n,
        r_sense_out=p.r_sense_out * n,
        r_driver=p.r_driver * (n + q) / 2,
        r_mux_on=p.r_mux_on * 2 * n * q / (n + q),
        sense_offset=p.sense_offset + c.sense_offset_extra,
    )


# --- serialization ---------------------------------------------------------

_CORNER_KEYS = ("nmos_strength", "pmos_strength", "sense_offset_extra")


def profile_to_toml(p: TechnologyProfile, header: list[str] | None = None) -> str:
    doc = tomlkit.document()
    for line in header or []:
        doc.add(tomlkit.comment(line))
    doc["schema"] = SCHEMA_VERSION
    tech = tomlkit.table()
    for name in scalar_fields():
        v = getattr(p, name)
        tech[name] = int(v) if name == "imbalance_ref_bits" else float(v)
    doc["technology"] = tech
    corners = tomlkit.table(is_super_table=True)
    for name, c in p.corners.items():
        t = tomlkit.table()
        for k in _CORNER_KEYS:
            t[k] = float(getattr(c, k))
        corners[name] = t
    doc["corners"] = corners
    return tomlkit.dumps(doc)


def _number(section: str, key: str, value, line=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileParseError(f"{section}.{key} must be a number, got {value!r}", line, key)
    return value


def _key_line(text: str, key: str) -> int | None:
    for i, raw in enumerate(text.splitlines(), 1):
        if raw.split("=", 1)[0].strip() == key:
            return i
    return None


def profile_from_toml(text: str) -> TechnologyProfile:
    try:
        data = tomlkit.parse(text).unwrap()
    except ParseError as exc:
        raise ProfileParseError(str(exc), exc.line) from None

    unknown = set(data) - {"schema", "technology", "corners"}
    if unknown:
        k = sorted(unknown)[0]
        raise ProfileParseError(f"unknown top-level key {k!r}", _key_line(text, k), k)
    if data.get("schema") != SCHEMA_VERSION:
        raise ProfileParseError(
            f"unsupported schema {data.get('schema')!r}; expected {SCHEMA_VERSION}",
            _key_line(text, "schema"), "schema",
        )
    tech = data.get("technology")
    if not isinstance(tech, dict):
        raise ProfileParseError("missing [technology] table", key="technology")

    names = scalar_fields()
    for k in tech:
        if k not in names:
            raise ProfileParseError(f"unknown key technology.{k!r}", _key_line(text, k), k)
    kwargs = {}
    for k in names:
        if k not in tech:
            raise ProfileParseError(f"missing required key technology.{k}", key=k)
        kwargs[k] = _number("technology", k, tech[k], _key_line(text, k))

    corners = {}
    for cname, ctab in (data.get("corners") or {}).items():
        if not isinstance(ctab, dict):
            raise ProfileParseError(f"corners.{cname} must be a table", key=cname)
        for k in ctab:
            if k not in _CORNER_KEYS:
                raise ProfileParseError(f"unknown key corners.{cname}.{k}", _key_line(text, k), k)
        for k in _CORNER_KEYS:
            if k not in ctab:
                raise ProfileParseError(f"missing required key corners.{cname}.{k}", key=k)
        corners[cname] = CornerProfile(
            cname, **{k: float(_number(f"corners.{cname}", k, ctab[k])) for k in _CORNER_KEYS}
        )
    kwargs["corners"] = corners
    return TechnologyProfile(**kwargs)


def save_profile(p: TechnologyProfile, path, header: list[str] | None = None) -> None:
    Path(path).write_text(profile_to_toml(p, header))


def load_profile(path) -> TechnologyProfile:
    return profile_from_toml(Path(path).read_text())


def default_profile() -> TechnologyProfile:
    """The calibrated profile shipped with the package."""
    text = resources.files("rramc.data").joinpath("default_profile.toml").read_text()
    return profile_from_toml(text)
