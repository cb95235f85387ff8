"""Default curves from the exact formulas.

A loan of size u is repaid at rate c.  Disasters arrive at random times and
each one shrinks the repayment rate by a factor exp(-X).  The default
probability phi(u) is the chance the loan is never fully repaid.

Run:  python demos/01_closed_forms.py
"""
import numpy as np
from scipy.integrate import trapezoid

from repayrisk.closedform import default_curve, psi_hat_laplace
from repayrisk.model import ArrivalLaw, DisasterModel, SeverityLaw

severity = SeverityLaw(20.0)            # mean loss of repayment rate about 5% per event
c = 1.0

models = {
    "poisson lam=0.2": DisasterModel(ArrivalLaw.exponential(0.2), severity),
    "erlang-2 lam=0.4": DisasterModel(ArrivalLaw.erlang(2, 0.4), severity),
    "gamma-mixed k=1": DisasterModel(ArrivalLaw.randomized(1.0, 0.2), severity),
    "gamma-mixed k=5": DisasterModel(ArrivalLaw.randomized(5.0, 0.04), severity),
}
print("All four laws have one disaster per 5 time units on average.\n")

u_grid = [25, 50, 100, 150, 200]
print(f"{'model':<18}" + "".join(f"u={u:<9g}" for u in u_grid))
for name, model in models.items():
    curve = default_curve(model, c)
    print(f"{name:<18}" + "".join(f"{p:<11.4g}" for p in curve(u_grid)))

# Regular (Erlang) arrivals sit closest to a deterministic schedule and give the
# steepest curve.  Mixing the rate over a Gamma law fattens the tail: 1 - phi
# decays like u^-k instead of exponentially.
print("\nrepayment probability psi = 1 - phi far out in the tail")
for name in ("poisson lam=0.2", "gamma-mixed k=1", "gamma-mixed k=5"):
    curve = default_curve(models[name], c)
    print(f"  {name:<18}" + "  ".join(f"psi({u:g})={curve.psi(u):.3g}" for u in (1e3, 1e4)))

# The Laplace transform of psi is available for any waiting-time law with a
# known transform; for exponential waits it can be compared to the curve.
lam = 0.2
s = 0.05
hat = psi_hat_laplace(lambda z: lam / (lam + z), 20.0, c, s)
u = np.linspace(0, 1500, 30001)
psi = default_curve(models["poisson lam=0.2"], c).psi(u)
direct = trapezoid(np.exp(-s * u) * psi, u)
print(f"\nLaplace transform of psi at s={s}: {hat:.6f} (trapezoid on the curve: {direct:.6f})")
