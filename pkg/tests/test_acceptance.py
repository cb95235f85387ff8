"""Acceptance criteria, one test each.

Every test prints ``ACCEPTANCE <n> PASS|FAIL: <detail>`` (visible even when
pytest captures output).  ``python tests/test_acceptance.py`` prints the same
nine lines without pytest.
"""
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.integrate import trapezoid

from repayrisk.calibrate import SolvencyTarget, generate_table, load_golden, min_rate_memoryless, min_rate_randomized
from repayrisk.cli import main as cli_main
from repayrisk.closedform import phi_erlang2, psi_hat_laplace, psi_memoryless, psi_randomized
from repayrisk.fredholm import (
    OperatorConfig,
    apply_K,
    apply_K_inf,
    decay_bound,
    psi0_finite,
    psi0_infinite,
    solve_psi_finite,
    solve_psi_infinite,
)
from repayrisk.model import ArrivalLaw, DisasterModel, LoanSpec, SeverityLaw
from repayrisk.montecarlo import simulate_algorithm1, simulate_algorithm2
from repayrisk.specfun import reg_gamma_lower


def _model(arrivals, alpha):
    return DisasterModel(arrivals, SeverityLaw(alpha))


def criterion_1():
    start = time.perf_counter()
    rows, cols, golden = load_golden("table1")
    got = generate_table(rows, cols, SolvencyTarget(1e-4, "table1_legacy"), "memoryless")
    elapsed = time.perf_counter() - start
    err = float(np.max(np.abs(got / golden - 1)))
    cell = min_rate_memoryless(1, 1, SolvencyTarget(1e-4, "table1_legacy")).rate
    ok = got.size == 30 and err <= 1e-4 and abs(cell / 0.0850603 - 1) <= 1e-6 and elapsed < 1.0
    return ok, f"table 1, 30 cells, max rel err {err:.2e} (tol 1e-4), lambda=alpha=1 -> {cell:.7f}, {elapsed:.3f}s"


def criterion_2():
    start = time.perf_counter()
    rows, cols, golden = load_golden("table2")
    got = generate_table(rows, cols, SolvencyTarget(1e-4), "randomized")
    elapsed = time.perf_counter() - start
    err = float(np.max(np.abs(got / golden - 1)))
    cell = min_rate_randomized(1, 1, SolvencyTarget(1e-4)).rate
    ok = got.size == 35 and err <= 1e-3 and abs(cell - 99) <= 1e-9 and elapsed < 1.0
    return ok, f"table 2, 35 cells, max rel err {err:.2e} (tol 1e-3), k=alpha=1 -> {cell:.6g}, {elapsed:.3f}s"


def criterion_3():
    start = time.perf_counter()
    model = _model(ArrivalLaw.exponential(0.2), 20.0)
    loan = LoanSpec(50.0, 1.0)
    exact = reg_gamma_lower(21, 10)
    parts, ok = [], True
    for name, sim, seed in (("alg1", simulate_algorithm1, 1), ("alg2", simulate_algorithm2, 2)):
        est = sim(model, loan, 500.0, 10**5, seed=seed)
        z = (est.mean - exact) / est.stderr
        ok &= abs(z) <= 3
        parts.append(f"{name} {est.mean:.5f}+-{est.stderr:.5f} (z={z:+.2f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    return ok, f"exact {exact:.4e}; " + ", ".join(parts) + f", {elapsed:.2f}s"


def criterion_4():
    start = time.perf_counter()
    m1 = _model(ArrivalLaw.exponential(1.0), 1.0)
    top1 = 20 * 1.0 / 1.0 * (1.0 + 1.0)
    psi1 = solve_psi_infinite(m1, 1.0, OperatorConfig.auto(m1, 1.0, extent=top1, tol=1e-12))
    u1 = np.linspace(0.0, top1, 256)
    gap1 = float(np.max(np.abs(psi1(u1) - np.array([psi_memoryless(m1, u, 1.0) for u in u1]))))
    m2 = _model(ArrivalLaw.erlang(2, 1.0), 2.0)
    top2 = 20 * 1.0 / 1.0 * (2.0 + 1.0)
    psi2 = solve_psi_infinite(m2, 1.0, OperatorConfig.auto(m2, 1.0, extent=top2, tol=1e-12))
    u2 = np.linspace(0.0, top2, 256)
    gap2 = float(np.max(np.abs(psi2(u2) - np.array([1 - phi_erlang2(m2, u, 1.0) for u in u2]))))
    elapsed = time.perf_counter() - start
    ok = gap1 <= 1e-3 and gap2 <= 2e-3 and elapsed < 60
    return ok, f"sup gap memoryless {gap1:.2e} (tol 1e-3), erlang-2 {gap2:.2e} (tol 2e-3), {elapsed:.2f}s"


def criterion_5():
    model = _model(ArrivalLaw.exponential(1.0), 1.0)
    c, lam = 1.0, 1.0
    rho = model.severity.discount_moment(1.0)
    cfg = OperatorConfig.auto(model, c, n_u=32769)
    g = psi0_infinite(model, c, cfg)
    worst_inf = 0.0
    for n in range(1, 6):
        g = apply_K_inf(g, model, c, cfg)
        worst_inf = max(worst_inf, abs(g.integral() / (c * rho**n * model.arrivals.mean()) - 1))
    fcfg = OperatorConfig(u_max=6.0, n_u=4097)
    h = psi0_finite(model, c, fcfg, t_max=5.0)
    lhs = apply_K(h, model, c, fcfg).integral()
    t = h.t
    rhs = rho * (c / lam) * (-np.expm1(-lam * t) - lam * t * np.exp(-lam * t))
    keep = t >= 0.5
    worst_fin = float(np.max(np.abs(lhs[keep] / rhs[keep] - 1)))
    ok = worst_inf <= 1e-5 and worst_fin <= 1e-5
    return ok, f"n-fold mass n<=5 max rel err {worst_inf:.2e}, finite-horizon mass max rel err {worst_fin:.2e} (tol 1e-5)"


def criterion_6():
    model = _model(ArrivalLaw.exponential(1.0), 1.0)
    cfg = OperatorConfig.auto(model, 1.0, n_u=257, tol=1e-14, tail_tol=1e-16)
    db = decay_bound(model)
    times = [k / db.rate for k in (5, 10, 20)]
    inf = solve_psi_infinite(model, 1.0, cfg)
    fin = solve_psi_finite(model, 1.0, cfg, t_max=max(times) + 1.0)
    parts, ok = [], True
    for t in times:
        gap = float(trapezoid(np.abs(inf.values - fin(inf.u, t)), inf.u))
        ok &= gap <= 1.2 * db(t)
        parts.append(f"t={t:g}: {gap:.3e} <= {1.2 * db(t):.3e}")
    return ok, "L1 gap vs 1.2*(1/abar)exp(-lam*abar*t); " + ", ".join(parts)


def criterion_7():
    model = _model(ArrivalLaw.exponential(1.0), 1.0)
    worst = 0.0
    for s in (0.5, 1.0, 2.0):
        direct, _ = integrate.quad(lambda u: math.exp(-s * u) * psi_memoryless(model, u, 1.0), 0, np.inf,
                                   epsabs=1e-14, epsrel=1e-12, limit=200)
        hat = psi_hat_laplace(lambda z: 1.0 / (1.0 + z), 1.0, 1.0, s)
        worst = max(worst, abs(hat / direct - 1))
    return worst <= 1e-4, f"transform vs direct integral at s=0.5,1,2: max rel err {worst:.2e} (tol 1e-4)"


def criterion_8():
    u = np.logspace(3, 5, 41)
    parts, ok = [], True
    for k in (1.0, 3.0):
        m = _model(ArrivalLaw.randomized(k, 1.0), 1.0)
        psi = np.array([psi_randomized(m, x, 1.0) for x in u])
        slope = float(np.polyfit(np.log(u), np.log(psi), 1)[0])
        ok &= abs(slope / -k - 1) <= 0.05
        parts.append(f"k={k:g}: slope {slope:.4f}")
    return ok, "log-log tail slope over [1e3, 1e5]; " + ", ".join(parts)


def criterion_9():
    config = ("arrivals: {kind: exponential, lambda: 0.5}\nseverity: {alpha: 20.0}\n"
              "loan: {u: 50.0, c: 1.0}\nsimulate: {t: 100, n: 30000}\n")
    ok, checked = True, 0
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "run.yaml"
        cfg.write_text(config)
        for extra in (["--algorithm", "1"], ["--algorithm", "2"], ["--algorithm", "1", "--antithetic"],
                      ["--algorithm", "2", "--bins", "16"]):
            blobs = []
            for workers in ("1", "2", "4"):
                out = Path(tmp) / f"out{workers}.csv"
                code = cli_main(["simulate", "--config", str(cfg), "--seed", "42", "--workers", workers,
                                 "--out", str(out)] + extra)
                ok &= code == 0
                blobs.append(out.read_bytes())
            ok &= len(set(blobs)) == 1
            checked += 1
    return ok, f"{checked} simulate variants byte-identical across workers 1, 2, 4"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def _report(n, ok, detail, stream=None):
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, file=stream or sys.stdout, flush=True)


def _check(capsys, n):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print()
        _report(n, ok, detail)
    assert ok, detail


def test_acceptance_1_table1(capsys):
    _check(capsys, 1)


def test_acceptance_2_table2(capsys):
    _check(capsys, 2)


def test_acceptance_3_monte_carlo(capsys):
    _check(capsys, 3)


def test_acceptance_4_operator_vs_closed_forms(capsys):
    _check(capsys, 4)


def test_acceptance_5_mass_identities(capsys):
    _check(capsys, 5)


def test_acceptance_6_decay_bound(capsys):
    _check(capsys, 6)


def test_acceptance_7_laplace(capsys):
    _check(capsys, 7)


def test_acceptance_8_tail_order(capsys):
    _check(capsys, 8)


def test_acceptance_9_determinism(capsys):
    _check(capsys, 9)


if __name__ == "__main__":
    failed = 0
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        _report(i, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
