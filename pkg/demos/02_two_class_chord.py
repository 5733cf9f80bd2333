"""
A migration matrix and its chordgraph
=====================================

Twenty points, two classes. Raising ``x1`` by one rank step moves a single
observation from B to A. The resulting 2x2 matrix is drawn as a chordgraph
where each class arc spans its outgoing plus incoming counts.
"""
# %%
import sys
from pathlib import Path

from qsm import RankShift, ShiftSpec, chord_svg, layout, neighborhood_report, run_qsm
from qsm.fixtures import make_twoclass

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-output")
out_dir.mkdir(parents=True, exist_ok=True)

ds, model = make_twoclass()
m = run_qsm(ds, ShiftSpec({"x1": RankShift(1)}), model)
print(m.format_table())

# %%
# Arc sizes: A collects 10 + 11 units and B 10 + 9, so the arcs relate as 21:19.
lay = layout(m)
for arc in lay.arcs:
    print(f"{arc.label}: {arc.units} units, {arc.span:.2f} degrees")

# %%
path = out_dir / "twoclass_chord.svg"
path.write_text(chord_svg(m, title="x1 +1"), encoding="utf-8")
print("wrote", path)

# %%
# The report turns each off-diagonal cell into a neighborhood statement.
print(neighborhood_report(m).text())
