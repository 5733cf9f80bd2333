"""
Pain levels on two synthetic measurements
=========================================

A rule model assigns "no", "medium" or "high" pain from two features on
(0, 1). Two questions are asked of it: what happens when ``x1`` rises, and
what happens when ``x1`` rises while ``x2`` falls.
"""
# %%
from qsm import neighborhood_report, run_qsm
from qsm.fixtures import make_medical, medical_specs

ds, model = make_medical(n=2500, seed=0)
before = model.predict(ds)
for name in model.class_set:
    print(f"{name:12s} {(before == name).sum():5d}")

# %%
# Raising ``x1`` by 251 rank steps (about a tenth of the scale). Only
# medium-pain observations change: some reach high pain, some no pain.
specs = medical_specs(ds.n)
m1 = run_qsm(ds, specs["raise_x1"], model)
print(m1.format_table())

# %%
# Raising ``x1`` and lowering ``x2`` by 751 steps each. Every high-pain
# observation drops to medium pain and nothing ends up in high pain.
m2 = run_qsm(ds, specs["raise_x1_lower_x2"], model)
print(m2.format_table())
print(neighborhood_report(m2).text())
