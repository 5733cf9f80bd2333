"""
Probing a model that lives in another process
=============================================

Any program speaking the line protocol can be explained. Here the
package's own model server wraps the iris tree and the quantile shift
runs against it exactly as it would in-process.
"""
# %%
import sys

from qsm import ExternalModel, RankShift, ShiftSpec, cart_fit, iris_path, load_iris, run_qsm

cmd = [sys.executable, "-m", "qsm.model_server", "--data", str(iris_path()),
       "--label", "species", "--model", "tree:petal_length,petal_width"]

iris = load_iris()
spec = ShiftSpec({"petal_width": RankShift(3)})
local = run_qsm(iris, spec, cart_fit(iris, ["petal_length", "petal_width"]))

with ExternalModel(cmd) as remote:
    print("server classes:", list(remote.class_set))
    over_wire = run_qsm(iris, spec, remote)

print(over_wire.format_table())
print("identical to in-process run:", over_wire == local)

# %%
# The same thing from the shell:
#
#   qsm run --data iris.csv --shift petal_width=+3 \
#       --model "cmd:python3 -m qsm.model_server --data iris.csv --label species --model tree"
