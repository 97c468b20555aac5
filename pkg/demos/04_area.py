"""Area and density from the linear floorplan model.

Width grows with the column count and height with the row count, each on
top of a fixed periphery strip, so density improves as the array grows.

Run:  python demos/04_area.py
"""
from rramc import default_profile, validate_geometry
from rramc.characterize import REFERENCE_GEOMETRIES, estimate_area

t = default_profile()
print(f"cell pitch {t.cell_pitch_x * 1e6:.3f} um x {t.cell_pitch_y * 1e6:.3f} um, "
      f"periphery {t.periphery_width * 1e6:.1f} um wide, {t.periphery_height * 1e6:.1f} um tall")

a = estimate_area(validate_geometry(64, 64, 8), t)
print(f"64x64/B8 layout: {a.width * 1e6:.1f} um x {a.height * 1e6:.1f} um "
      f"(anchor 524.3 x 353.5), {a.density:.4f} Mb/mm2")

print(f"\n{'M':>4} {'N':>4} {'B':>3} {'area/mm2':>9} {'Mb/mm2':>7}")
seen = set()
for M, N, B in REFERENCE_GEOMETRIES:
    if (M, N) in seen:
        continue  # the floorplan does not depend on B
    seen.add((M, N))
    e = estimate_area(validate_geometry(M, N, B), t)
    print(f"{M:>4} {N:>4} {B:>3} {e.area * 1e6:>9.4f} {e.density:>7.4f}")
