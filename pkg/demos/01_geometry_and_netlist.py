"""Size a memory, elaborate it, and look at what the compiler produced.

Run:  python demos/01_geometry_and_netlist.py [OUTDIR]
"""
import sys
from pathlib import Path

from rramc import validate_geometry, default_profile
from rramc.geometry import GeometryError, worst_case_read_address
from rramc.netlist import elaborate, emit_spice, emit_structural, spice_element_count

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "netlist"
out.mkdir(parents=True, exist_ok=True)
tech = default_profile()

# A memory is M rows by N columns, read and written B bits at a time.
# M must be a power of two and N/B a power of two of at least 2.
g = validate_geometry(32, 32, 4)
print(f"{g}: X={g.X} address bits across, Y={g.Y} up; {g.word_count} words of {g.B} bits")
print("worst-case read word (top-right corner):", worst_case_read_address(g))

for bad in [(33, 32, 4), (32, 30, 4)]:
    try:
        validate_geometry(*bad)
    except GeometryError as exc:
        print(f"rejected {bad}: {exc}")

# Elaboration is pure: the same geometry always yields the same netlist.
n = elaborate(g, tech)
stats = n.stats()
print("\ninstance counts:")
for kind in ("MemCell1T1R", "RefCell", "MuxBlock", "MuxSwitch", "SenseAmp", "WriteDriver"):
    print(f"  {kind:<12} {stats[kind]:>5}")
print(f"  P-mux blocks = 2^X + 1 = {2**g.X + 1}, N-mux blocks = 2^X = {2**g.X}")

(out / "rram_32x32_b4.rnl").write_text(emit_structural(n))
(out / "rram_32x32_b4.sp").write_text(emit_spice(n, tech))
print(f"\nflattened SPICE deck would hold {spice_element_count(n)} primitive elements")
print("wrote", *sorted(p.name for p in out.iterdir()))
