"""Command-line front end: ``rramc {generate,simulate,characterize,calibrate}``.

Exit codes: 0 success, 1 test or expectation failure, 2 usage/validation error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import calibration, characterize
from .geometry import GeometryError, validate_geometry
from .netlist import elaborate, emit_spice, emit_structural
from .script import ScriptError, parse_script, run_script
from .simulator import Simulator, WaveTrace, export_vcd
from .technology import CORNER_NAMES, ProfileError, default_profile, load_profile, scalar_fields

PROFILE_ENV = "RRAMC_PROFILE"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_profile(args):
    path = args.profile or os.environ.get(PROFILE_ENV)
    t = load_profile(path) if path else default_profile()
    overrides = {}
    fields = scalar_fields()
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep or key not in fields:
            raise UsageError(f"--set expects KEY=VALUE with KEY in the profile, got {item!r}")
        try:
            overrides[key] = int(value) if key == "imbalance_ref_bits" else float(value)
        except ValueError:
            raise UsageError(f"--set {key}: not a number: {value!r}") from None
    return t.replace(**overrides) if overrides else t


def _geometry(args):
    if args.M is None or args.N is None or args.B is None:
        raise UsageError("-M, -N and -B are required")
    return validate_geometry(args.M, args.N, args.B)


def _corners(spec: str, t) -> list[str]:
    names = list(t.corners) if spec == "all" else [c.strip() for c in spec.split(",") if c.strip()]
    for c in names:
        t.corner(c)
    return names


def _outdir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    g = _geometry(args)
    t = resolve_profile(args)
    n = elaborate(g, t)
    out = _outdir(args)
    stem = f"rram_{g.M}x{g.N}_b{g.B}"
    (out / f"{stem}.rnl").write_text(emit_structural(n))
    (out / f"{stem}.sp").write_text(emit_spice(n, t))
    stats = n.stats()
    text = "".join(f"{k} {v}\n" for k, v in stats.items())
    (out / f"{stem}.stats").write_text(text)
    print(f"{g}: {stats['MemCell1T1R']} cells, {stats['SenseAmp']} sense amps, "
          f"{stats['MuxSwitch']} mux switches -> {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = _geometry(args)
    t = resolve_profile(args)
    if args.script == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.script).read_text()
    cmds = parse_script(text)
    sim = Simulator(g, t, args.clock, init=args.init, corner=args.corner,
                    phase_cycles=args.phase_cycles)
    failures = run_script(sim, cmds)
    out = _outdir(args)
    trace = sim.trace if cmds else WaveTrace(clock_period=sim.clock_period)
    (out / "run.vcd").write_text(export_vcd(trace))
    log = sim.format_log()
    if failures:
        log += f"FAIL first_failing_line={failures[0].lineno}\n"
    (out / "run.log").write_text(log)
    if failures:
        f = failures[0]
        print(f"FAIL line {f.lineno}: {f.message} ({len(failures)} failing check(s))", file=sys.stderr)
        return EXIT_FAIL
    print(f"{len(cmds)} command(s) ok -> {out}")
    return EXIT_OK


def cmd_characterize(args) -> int:
    t = resolve_profile(args)
    if args.suite == "reference":
        dims = list(characterize.REFERENCE_GEOMETRIES)
    else:
        dims = [(g.M, g.N, g.B) for g in [_geometry(args)]]
    corners = _corners(args.corners, t)
    clocks = args.clock or [12.5e6]
    configs = [(d, f) for f in clocks for d in dims]
    vcds = {} if args.vcd else None
    report = characterize.characterize_sweep(
        configs, t, corners, a=args.ratio, phase_cycles=args.phase_cycles,
        workers=args.workers, vcds=vcds,
    )
    out = _outdir(args)
    table = report.format_table()
    (out / "report.txt").write_text(table)
    (out / "report.jsonl").write_text(report.to_jsonl())
    if vcds:
        vdir = out / "vcd"
        vdir.mkdir(exist_ok=True)
        for (M, N, B, clk, corner), text in vcds.items():
            (vdir / f"rram_{M}x{N}_b{B}_{clk / 1e6:g}MHz_{corner}.vcd").write_text(text)
    print(table, end="")
    return EXIT_OK if report.all_passed() else EXIT_FAIL


def cmd_calibrate(args) -> int:
    out = _outdir(args)
    prof, fix = calibration.write_calibration(out)
    print(f"wrote {prof} and {fix}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rramc", description="RRAM memory compiler")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, geometry=True):
        if geometry:
            sp.add_argument("-M", type=int, help="rows (power of two)")
            sp.add_argument("-N", type=int, help="columns (B * power of two)")
            sp.add_argument("-B", type=int, help="word width in bits")
        sp.add_argument("--profile", help=f"profile TOML (default: ${PROFILE_ENV} or built-in)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one profile field; repeatable")
        sp.add_argument("-o", "--output", default="rramc_out", help="output directory")

    g = sub.add_parser("generate", help="elaborate and emit netlists")
    common(g)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="run a stimulus script")
    common(s)
    s.add_argument("script", help="script file, or - for stdin")
    s.add_argument("--clock", type=float, default=12.5e6, help="clock frequency in Hz")
    s.add_argument("--corner", default="TT", choices=CORNER_NAMES)
    s.add_argument("--init", type=float, default=1e6, help="initial memristance of every cell")
    s.add_argument("--phase-cycles", type=int, default=1)
    s.add_argument("--seed", type=int, default=0, help="accepted for interface symmetry; runs are deterministic")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("characterize", help="run W1/W2/R1/R2 across corners")
    common(c)
    c.add_argument("--suite", choices=("single", "reference"), default="single",
                   help="'reference' sweeps every tested geometry up to 8 kbit")
    c.add_argument("--clock", type=float, action="append", help="clock in Hz; repeatable")
    c.add_argument("--corners", default="all", help="comma list or 'all'")
    c.add_argument("--ratio", type=float, default=characterize.DEFAULT_STATE_RATIO,
                   help="LRS = ratio * R_REF, HRS = R_REF / ratio")
    c.add_argument("--phase-cycles", type=int, default=1)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--vcd", action="store_true", help="also write one VCD per run")
    c.set_defaults(func=cmd_characterize)

    k = sub.add_parser("calibrate", help="re-fit the default profile and calibration fixture")
    common(k, geometry=False)
    k.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GeometryError, ProfileError, UsageError, ScriptError) as exc:
        print(f"rramc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rramc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
