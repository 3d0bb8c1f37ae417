"""
Contracts and the end-to-end budget
===================================

Build the camera contract, fuse it with the sampling contract and check
that the per-hop budgets fit the sensor-to-actuator bound.
"""

from resilisim.contracts import (
    BudgetSet,
    Every,
    IllFormedMerge,
    PortEvent,
    TimedGuarantee,
    Within,
    check_trace,
    compose,
    make_contract,
    validate_decomposition,
)
from resilisim.engine import MS, S, fmt_time

# The camera answers each sample within 400 ms, and samples arrive every 500 ms.
deadline = make_contract("C_c1", "n3", [TimedGuarantee("c1_data", "s1_data", Within(400 * MS))])
sampling = make_contract("C_c1_samp", "n3", [TimedGuarantee("c1_data", "s1_data", Every(500 * MS))])
fused = compose(deadline, sampling, id="C_c1_fused")
print("fused:", fused.guarantees[0])

# A 1 s deadline cannot be fused with a 500 ms period.
try:
    compose(make_contract("slow", "n3", [TimedGuarantee("c1_data", "s1_data", Within(S))]), sampling)
except IllFormedMerge as e:
    print("rejected:", e)

# Offline check of a short trace; the third sample comes late.
trace = [PortEvent(p, t * MS) for p, t in [("s1_data", 0), ("c1_data", 300), ("s1_data", 500),
                                           ("c1_data", 800), ("s1_data", 1700), ("c1_data", 2000)]]
for v in check_trace(fused, trace):
    print(v.guarantee, v.status, v.kind, fmt_time(v.violation_time) if v.violated else "")

# Budgets: 1 + 3 + 3 + 2 s against 10 s, then one hop made too greedy.
for first in (1 * S, 4 * S):
    dec = validate_decomposition(BudgetSet(first, 3 * S, 3 * S, 2 * S, 10 * S, 500 * MS, 50 * MS))
    print(f"T_s1_c1={fmt_time(first)}: total {fmt_time(dec.total)}, ok={dec.ok}, surplus {fmt_time(dec.surplus)}")
