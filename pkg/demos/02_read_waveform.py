"""Replay the R1/R2 read tests on a 32x32, B=4 memory at a 40 ns clock and dump the waveform.

The top-right word is loaded with alternating low/high resistance cells,
read back, then loaded with the complement and read again. The VCD shows
READ, then DVLP, PRE and EN_SA stepping through the three sense phases,
and each sense output (z_sa*) settling before the 0.4 T checkpoint.

Run:  python demos/02_read_waveform.py [OUTDIR]
"""
import sys
from pathlib import Path

from rramc import default_profile, validate_geometry
from rramc.geometry import worst_case_read_address
from rramc.simulator import sim_new

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "waveform"
out.mkdir(parents=True, exist_ok=True)

t = default_profile()
g = validate_geometry(32, 32, 4)
sim = sim_new(g, t, clock_hz=25e6).reset()
x, y = worst_case_read_address(g)
lrs, hrs = t.r_lrs, t.r_hrs
print(f"LRS = {lrs / 1e3:.2f} kOhm, HRS = {hrs / 1e3:.1f} kOhm, R_REF = {t.r_ref / 1e3:.1f} kOhm")

for name, cells, expect in [("R1", [lrs, hrs, lrs, hrs], 0b0101), ("R2", [hrs, lrs, hrs, lrs], 0b1010)]:
    sim.set_cell(x, y, cells)  # MSB first
    res = sim.read(x, y)
    sim.idle()
    margins = ", ".join(f"{s.margin * 1e3:.0f}" for s in reversed(res.sense))
    print(f"{name}: read 0b{res.data:04b} (expected 0b{expect:04b}), sense margins MSB..LSB [{margins}] mV")

for sig in ("read", "dvlp", "pre", "en_sa", "io_drive"):
    edges = " ".join(f"{t_ * 1e9:g}ns->{v}" for t_, v in sim.trace.edges(sig))
    print(f"  {sig:<9}{edges}")

(out / "read_tests.vcd").write_text(sim.export_vcd())
(out / "read_tests.log").write_text(sim.format_log())
print(f"access time {sim.read_access_time * 1e9:.0f} ns; waveform in {out / 'read_tests.vcd'}")
