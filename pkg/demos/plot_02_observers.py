"""
Timed-automaton observers
=========================

Drive the deadline and heartbeat observers by hand and watch them latch.
"""

from resilisim.engine import MS, S, fmt_time
from resilisim.observers import BEAT, IN, OUT, Observer, deadline_template, heartbeat_template

obs = Observer(deadline_template(1 * S), {"in": IN, "out": OUT}, id="obs_c1")
obs.observe("in", 0)
print("output at the bound:", obs.observe("out", 1 * S))

obs.observe("in", 2 * S)
print("no output, advance to 3.5 s:", obs.advance(3500 * MS), obs.violation)
print("latched, later output changes nothing:", obs.observe("out", 4 * S))
obs.reset(4 * S)
print("after reset:", obs.status)

# Heartbeat every 200 ms, three misses tolerated; the link dies at 4.1 s.
hb = Observer(heartbeat_template(200 * MS, 3), {"beat": BEAT}, id="hb_n3_n4")
for t in range(0, 4001 * MS, 200 * MS):
    hb.observe("beat", t)
print("next deadline:", fmt_time(hb.next_deadline()))
hb.advance(5 * S)
print("loss detected at", fmt_time(hb.violation.time))
