"""
Iris: a decision tree and petal width
=====================================

A CART tree on the two petal features is probed by raising petal width
three and six rank steps. Petal width has many ties, so both tie
strategies are compared.
"""
# %%
from qsm import RankShift, RepeatRandom, ShiftSpec, cart_fit, load_iris, run_qsm

iris = load_iris()
tree = cart_fit(iris, ["petal_length", "petal_width"])
print(tree.describe())

# %%
# Shift all ties together: both step sizes give the same six
# versicolor -> virginica changes.
for v in (3, 6):
    m = run_qsm(iris, ShiftSpec({"petal_width": RankShift(v)}), tree)
    print(f"v={v}\n{m.format_table()}\n")

# %%
# Break ties at random, ten times, and sum. The row sums are always ten
# times the class sizes.
for v in (3, 6):
    m = run_qsm(iris, ShiftSpec({"petal_width": RankShift(v)}), tree, RepeatRandom(10, seed=2024))
    print(f"v={v}, 10 random orders\n{m.format_table()}")
    print("row sums:", m.row_sums().tolist(), "\n")
