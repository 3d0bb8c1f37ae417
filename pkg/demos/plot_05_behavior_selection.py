"""
Choosing a behavior under a budget
==================================

Sweep the budget and see which camera behavior wins: best QoS first, then
the cheaper one.
"""

from fractions import Fraction

from resilisim.engine import MS, fmt_time
from resilisim.resilience import NoFeasibleBehavior, select_behavior
from resilisim.runtime import Behavior

behaviors = [
    Behavior("beh1", "c1", Fraction(1), 800 * MS, 200 * MS),
    Behavior("beh2", "c1", Fraction(4, 5), 500 * MS, 100 * MS),
    Behavior("beh3", "c1", Fraction(3, 5), 300 * MS, 100 * MS),
    Behavior("beh4", "c1", Fraction(2, 5), 150 * MS, 50 * MS),
]

for budget in range(100 * MS, 1101 * MS, 150 * MS):
    try:
        print(f"{fmt_time(budget):>7} -> {select_behavior(behaviors, budget)}")
    except NoFeasibleBehavior:
        print(f"{fmt_time(budget):>7} -> nothing fits")
