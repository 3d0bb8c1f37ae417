"""
Losing the wired link
=====================

The n3 to n4 wire fails at 4.1 s. Switching to wireless is enough when it is
available; otherwise the layer manager reroutes through n1, and with no path
left the run ends with an infeasibility report.
"""

from resilisim.engine import fmt_time
from resilisim.scenario import load_builtin
from resilisim.simulation import Simulation

for name in ("cbbp_outage_wireless", "cbbp_outage_reroute", "cbbp_infeasible"):
    result = Simulation(load_builtin(name)).run()
    print(f"== {name} (exit {result.exit_code})")
    for rec in result.trace.of_kind("Violation", "Action", "Reconfiguration", "Infeasible")[:6]:
        what = rec.get("type") or rec.get("detail") or rec.get("id")
        print(f"{fmt_time(rec.time):>8}  {rec.entity:<9} {rec.kind:<16} {what}")
    print()
