"""
Neighborhoods do not chain
==========================

Ten points where a one-step shift of ``x_l`` sends an A to B and a B to C.
A and C never meet along this shift, which is why findings must not be
chained.
"""
# %%
from qsm import RankShift, ShiftSpec, neighborhood_report, run_qsm
from qsm.fixtures import make_transitivity

ds, model = make_transitivity()
print("predicted:", list(model.predict(ds)))

m = run_qsm(ds, ShiftSpec({"x_l": RankShift(1)}), model)
print(m.format_table())

# %%
report = neighborhood_report(m)
for f in report.findings:
    print(f.sentence())
print("A -> C observed:", m["A", "C"])
print(report.text())
