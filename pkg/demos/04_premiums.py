"""Repayment rates that meet a solvency target.

A lender asks for the smallest c/u with phi(u) <= eps.  For Poisson and
Gamma-mixed arrivals this inverts a special function; otherwise a root finder
runs on any default-probability evaluator.  The excess over the plain
mortgage rate is the disaster-insurance premium.

Run:  python demos/04_premiums.py
"""
import numpy as np

from repayrisk.calibrate import (
    SolvencyTarget,
    generate_table,
    load_golden,
    min_rate_bisection,
    min_rate_memoryless,
    min_rate_randomized,
    premium_split,
    table_csv,
)
from repayrisk.closedform import phi_erlang2
from repayrisk.model import ArrivalLaw, DisasterModel, SeverityLaw

target = SolvencyTarget(1e-4)

# The shipped memoryless reference table pins the upper gamma tail at eps; its
# values come back under the "table1_legacy" convention.
legacy = SolvencyTarget(1e-4, "table1_legacy")
rows, cols, golden = load_golden("table1")
t1 = generate_table(rows, cols, legacy, "memoryless")
print("c/u, Poisson arrivals (legacy convention)")
print(table_csv(t1, rows, cols))
print(f"max relative deviation from the shipped table: {np.max(np.abs(t1 / golden - 1)):.1e}\n")

rows, cols, golden = load_golden("table2")
t2 = generate_table(rows, cols, target, "randomized")
print("c/u, Gamma(k, 1/k)-mixed arrivals")
print(table_csv(t2, rows, cols, row_name="k"))

# Same mean rate, different arrival regularity.
lam, alpha, u = 1.0, 2.0, 5.0
poisson = min_rate_memoryless(lam, alpha, target).rate
mixed = min_rate_randomized(3.0, alpha, target).rate
erl = DisasterModel(ArrivalLaw.erlang(2, 2 * lam), SeverityLaw(alpha))
erlang = min_rate_bisection(lambda c: phi_erlang2(erl, u, c), u, target).rate
# the plain mortgage asks c0 = 3 per unit of loan and unit time
base = 3.0
print(f"one disaster per unit time, alpha = 2, eps = 1e-4, base rate c0/u = {base:g}")
for name, rate in (("erlang-2", erlang), ("poisson", poisson), ("gamma-mixed k=3", mixed)):
    print(f"  {name:<16} c/u = {rate:.4f}   premium {premium_split(rate, base):.4f}")
