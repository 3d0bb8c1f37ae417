"""
A hanging camera process
========================

c1 takes 1.5 s longer than usual from t = 5 s. Its observer fires, the
manager restarts it and warns the planner c3, which drops to a cheaper
behavior until c1 is back.
"""

from resilisim.engine import fmt_time
from resilisim.scenario import load_builtin
from resilisim.simulation import Simulation

result = Simulation(load_builtin("cbbp_hanging")).run()

interesting = {"Violation", "Action", "FaultMessage", "Reconfiguration", "Recovered", "SuppressedSample"}
for rec in result.trace:
    if rec.kind in interesting:
        detail = rec.get("type") or rec.get("strategy") or rec.get("id") or ""
        print(f"{fmt_time(rec.time):>8}  {rec.entity:<7} {rec.kind:<17} {detail}")

f = result.metrics.fault("hang_c1")
print()
print("detection latency", fmt_time(f.detection_latency))
print("first on-time output", fmt_time(f.restored))
print("downtime", fmt_time(result.metrics.downtime), "mean QoS", float(result.metrics.mean_qos))
