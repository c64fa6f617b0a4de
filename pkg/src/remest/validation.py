"""Cross-validation suites wiring every solver against an independent route.

Each suite returns a list of named pass/fail checks; the CLI surfaces them
and exits nonzero on any failure.  The suites are deliberately redundant
with the test suite: they make the same evidence available from a shipped
install without pytest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dp, solver_a, solver_b
from .reference import BD_REFERENCE, BD_REFERENCE_P
from .simulate import (
    PolicySpec,
    SimConfig,
    periodic_distortion,
    simulate as run_simulation,
)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _check(suite: str, name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


def suite_table(tol: float = 5e-4) -> list[CheckResult]:
    """Solver output vs the published table: 99 cells at the table's rounding."""
    out: list[CheckResult] = []
    for beta, rows in BD_REFERENCE.items():
        spec = solver_a.bd_spec(BD_REFERENCE_P, beta)
        corners = dict(solver_a.corner_lambdas(spec, k_max=10))
        for k, d_ref, n_ref, lam_ref in rows:
            p = solver_a.performance(spec, k)
            out.append(_check(
                "tableI", f"beta={beta} k={k} D",
                abs(p.distortion - d_ref) <= tol,
                f"{p.distortion:.6f} vs {d_ref}",
            ))
            out.append(_check(
                "tableI", f"beta={beta} k={k} N",
                abs(p.transmission_rate - n_ref) <= tol,
                f"{p.transmission_rate:.6f} vs {n_ref}",
            ))
            if lam_ref is None:
                out.append(_check(
                    "tableI", f"beta={beta} k={k} corner",
                    k not in corners,
                    "no corner price at k=0 (distortion does not increase)",
                ))
            else:
                lam = corners.get(k)
                out.append(_check(
                    "tableI", f"beta={beta} k={k} corner",
                    lam is not None and abs(lam - lam_ref) <= tol,
                    f"{lam} vs {lam_ref}",
                ))
    return out


def suite_closed_forms(tol: float = 1e-9) -> list[CheckResult]:
    """Birth-death closed forms vs the generic linear-system route."""
    out: list[CheckResult] = []
    for p in (0.1, 0.2, 0.3):
        for beta in (0.9, 0.95, 1.0):
            spec = solver_a.bd_spec(p, beta)
            worst = 0.0
            for k in range(1, 11):
                a = solver_a.performance(spec, k)
                c = solver_a.bd_closed_form(p, beta, k)
                worst = max(worst, abs(a.distortion - c.distortion),
                            abs(a.transmission_rate - c.transmission_rate))
            out.append(_check(
                "closed_forms", f"p={p} beta={beta} D,N",
                worst <= tol, f"worst |err| = {worst:.2e}",
            ))
            k = 5
            system = solver_a.build_silent_system(spec, k)
            Q = np.linalg.inv(np.eye(2 * k - 1) - beta * system.transition)
            worst_q = max(
                abs(Q[i + k - 1, j + k - 1] - solver_a.bd_q_entry(p, beta, k, i, j))
                for i in range(-(k - 1), k)
                for j in range(-(k - 1), k)
            )
            out.append(_check(
                "closed_forms", f"p={p} beta={beta} inverse entries",
                worst_q <= tol, f"worst |err| = {worst_q:.2e}",
            ))
    return out


def suite_scaling(tolerance: float = 1e-9) -> list[CheckResult]:
    """Gaussian-instance scale identities, plus the price-map monotonicity probe."""
    out: list[CheckResult] = []
    base = solver_b.gauss_markov_spec(1.0)
    for sigma in (0.5, 2.0):
        scaled = solver_b.gauss_markov_spec(sigma)
        s2 = sigma * sigma
        for alpha in (0.2, 0.5):
            eps = 1e-6
            k1, d1 = solver_b.algorithm2_constrained(base, alpha, eps)
            ks, ds = solver_b.algorithm2_constrained(scaled, alpha, eps)
            ok = (abs(ks - sigma * k1) <= 2.0 * tolerance * max(1.0, sigma * k1)
                  and abs(ds - s2 * d1) <= 2.0 * tolerance * max(1.0, s2 * d1))
            out.append(_check(
                "scaling", f"sigma={sigma} alpha={alpha} threshold and distortion",
                ok, f"k: {ks:.9f} vs {sigma * k1:.9f}; D: {ds:.9f} vs {s2 * d1:.9f}",
            ))
        for lam in (0.5, 2.0):
            eps = 1e-6
            k1, c1 = solver_b.algorithm1_costly(base, lam / s2, eps)
            ks, cs = solver_b.algorithm1_costly(scaled, lam, s2 * eps)
            ok = abs(cs - s2 * c1) <= 2.0 * tolerance * max(1.0, s2 * c1)
            out.append(_check(
                "scaling", f"sigma={sigma} lambda={lam} optimal cost",
                ok, f"C: {cs:.9f} vs {s2 * c1:.9f}",
            ))
    lams = [solver_b.lambda_of_k(base, k) for k in (0.5, 1.0, 2.0, 4.0)]
    out.append(_check(
        "scaling", "price map increasing on probe grid",
        all(b > a for a, b in zip(lams, lams[1:])),
        " < ".join(f"{x:.4f}" for x in lams),
    ))
    return out


def suite_renewal(seed: int = 2024, reps: int = 100, horizon: int = 50_000) -> list[CheckResult]:
    """Simulated threshold performance vs the analytic route, three sigma."""
    out: list[CheckResult] = []
    spec = solver_a.bd_spec(0.3, 1.0)
    cfg = SimConfig(horizon=horizon, replications=reps, seed=seed)
    for k in (2, 3, 5):
        ana = solver_a.performance(spec, k)
        res = run_simulation(spec, PolicySpec.threshold(k), cfg)
        ok = (abs(res.d_hat - ana.distortion) <= 3.0 * res.d_se
              and abs(res.n_hat - ana.transmission_rate) <= 3.0 * res.n_se)
        out.append(_check(
            "renewal", f"birth-death k={k}",
            ok,
            f"d={res.d_hat:.5f}±{res.d_se:.5f} vs {ana.distortion:.5f}; "
            f"n={res.n_hat:.5f}±{res.n_se:.5f} vs {ana.transmission_rate:.5f}",
        ))
    gm = solver_b.gauss_markov_spec(1.0)
    for k in (1.0, 2.0):
        ana = solver_b.performance_b(gm, k)
        res = run_simulation(gm, PolicySpec.threshold(k), cfg)
        ok = (abs(res.d_hat - ana.distortion) <= 3.0 * res.d_se
              and abs(res.n_hat - ana.transmission_rate) <= 3.0 * res.n_se)
        out.append(_check(
            "renewal", f"gaussian k={k}",
            ok,
            f"d={res.d_hat:.5f}±{res.d_se:.5f} vs {ana.distortion:.5f}; "
            f"n={res.n_hat:.5f}±{res.n_se:.5f} vs {ana.transmission_rate:.5f}",
        ))
    return out


def suite_dp() -> list[CheckResult]:
    """Value-iteration policies and fixed-point evaluation vs the renewal solver."""
    out: list[CheckResult] = []
    spec = solver_a.bd_spec(0.3, 0.9)
    for lam in (2.0, 10.0, 20.0, 40.0):
        result = dp.value_iterate(spec, lam)
        k_solver, _ = solver_a.optimal_costly(spec, lam)
        out.append(_check(
            "dp", f"lambda={lam} threshold agreement",
            result.threshold == k_solver,
            f"value iteration k={result.threshold}, corner lookup k={k_solver}",
        ))
    for beta in (0.9, 0.95):
        spec = solver_a.bd_spec(0.3, beta)
        worst = 0.0
        for k in range(1, 7):
            d_fp, n_fp = dp.policy_evaluate_fixed_point(spec, k, tol=1e-10)
            ana = solver_a.performance(spec, k)
            worst = max(worst, abs(d_fp - ana.distortion),
                        abs(n_fp - ana.transmission_rate))
        out.append(_check(
            "dp", f"beta={beta} fixed-point evaluation",
            worst <= 1e-6, f"worst |err| = {worst:.2e}",
        ))
    return out


def suite_baselines(seed: int = 4096, reps: int = 100, horizon: int = 50_000) -> list[CheckResult]:
    """State-blind baseline formulas and the policy ordering, by simulation."""
    out: list[CheckResult] = []
    gm = solver_b.gauss_markov_spec(1.0)
    cfg = SimConfig(horizon=horizon, replications=reps, seed=seed)
    for alpha in (0.25, 0.5):
        res = run_simulation(gm, PolicySpec.iid_random(alpha), cfg)
        want = 1.0 / alpha - 1.0
        out.append(_check(
            "baselines", f"random transmissions alpha={alpha}",
            abs(res.d_hat - want) <= 3.0 * res.d_se,
            f"d={res.d_hat:.5f}±{res.d_se:.5f} vs {want:.5f}",
        ))
        period = round(1.0 / alpha)
        res = run_simulation(gm, PolicySpec.periodic_one_in(period), cfg)
        want = periodic_distortion(alpha, 1.0, "one_in_T")
        out.append(_check(
            "baselines", f"periodic one-in-T alpha={alpha}",
            abs(res.d_hat - want) <= 3.0 * res.d_se,
            f"d={res.d_hat:.5f}±{res.d_se:.5f} vs {want:.5f}",
        ))
        period = round(1.0 / (1.0 - alpha))
        if abs(period - 1.0 / (1.0 - alpha)) < 1e-9 and period >= 2:
            res = run_simulation(gm, PolicySpec.periodic_all_but_one(period), cfg)
            want = periodic_distortion(alpha, 1.0, "all_but_one")
            out.append(_check(
                "baselines", f"periodic all-but-one alpha={alpha}",
                abs(res.d_hat - want) <= 3.0 * res.d_se,
                f"d={res.d_hat:.5f}±{res.d_se:.5f} vs {want:.5f}",
            ))
    for alpha in (0.2, 0.5):
        k_opt, d_opt = solver_b.algorithm2_constrained(gm, alpha, 1e-6)
        res_th = run_simulation(gm, PolicySpec.threshold(k_opt), cfg)
        d_per = periodic_distortion(alpha, 1.0, "one_in_T")
        d_rand = 1.0 / alpha - 1.0
        gap = 3.0 * res_th.d_se
        ok = res_th.d_hat + gap < d_per < d_rand
        out.append(_check(
            "baselines", f"ordering threshold < periodic < random at alpha={alpha}",
            ok, f"{res_th.d_hat:.4f} < {d_per:.4f} < {d_rand:.4f}",
        ))
    return out


SUITES = {
    "tableI": suite_table,
    "closed_forms": suite_closed_forms,
    "scaling": suite_scaling,
    "renewal": suite_renewal,
    "dp": suite_dp,
    "baselines": suite_baselines,
}


def run_suite(name: str, **kwargs) -> list[CheckResult]:
    if name == "all":
        out: list[CheckResult] = []
        for fn in SUITES.values():
            out.extend(fn())
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](**kwargs)
