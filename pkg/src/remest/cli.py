"""Command-line front end.

Subcommands: ``table`` (reference-style D/N/corner listing), ``curve``
(trade-off curves as CSV/JSON), ``solve`` (optimal policy for one price or
rate budget), ``simulate`` (Monte-Carlo estimates), ``validate`` (the
cross-check suites).

Output is a flat record: CSV gets only the header and rows (RFC-4180
quoting, LF line endings); JSON additionally carries the command echo and
metadata.  Numeric cells are written with 17 significant digits.  Flags can
be kept in a file and pulled in with ``@file``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import solver_a, solver_b, validation
from .errors import NumericsError, UsageError
from .model import spec_digest
from .simulate import PolicySpec, SimConfig, simulate as run_simulation

SCHEMA_VERSION = "1"


@dataclass
class OutputRecord:
    command: str
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def _cell(self, value) -> str:
        if value is None:
            return "—"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return f"{value:.17g}"
        return str(value)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([self._cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json_text(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "command": self.command,
            "metadata": self.metadata,
            "rows": [
                {c: ("—" if row.get(c) is None else row.get(c)) for c in self.columns}
                for row in self.rows
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv_text() if fmt == "csv" else self.to_json_text()


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems via UsageError (exit 1)."""

    def error(self, message):
        raise UsageError(message)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("A", "B"), default="A")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--p", type=float, default=None, help="birth-death step probability")
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian innovation scale")
    p.add_argument("--distortion", choices=("abs", "quad"), default=None)


def _spec_from_args(args) -> object:
    if args.model == "A":
        if args.p is None:
            raise UsageError("--p is required for model A")
        if not 0.0 < args.p < 1.0 / 3.0:
            raise UsageError(f"--p must lie in (0, 1/3), got {args.p}")
        if args.a != int(args.a):
            raise UsageError("--a must be an integer for model A")
        spec = solver_a.bd_spec(args.p, args.beta, a=int(args.a))
        if args.distortion == "quad":
            from .model import DistortionFn, ModelSpecA

            spec = ModelSpecA(a=spec.a, pmf=spec.pmf,
                              distortion=DistortionFn.quadratic(), beta=args.beta)
        return spec
    if args.distortion == "abs":
        from .model import DistortionFn, ModelSpecB, SmoothPdf

        return ModelSpecB(a=args.a, pdf=SmoothPdf.gaussian(args.sigma),
                          distortion=DistortionFn.absolute(), beta=args.beta)
    return solver_b.gauss_markov_spec(args.sigma, a=args.a, beta=args.beta)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="remest", fromfile_prefix_chars="@")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_table = sub.add_parser("table", help="D, N and corner prices per threshold")
    p_table.add_argument("--p", type=float, required=True)
    p_table.add_argument("--betas", type=str, default="0.9,0.95,1.0")
    p_table.add_argument("--k-max", type=int, default=10)
    _add_output_flags(p_table)

    p_curve = sub.add_parser("curve", help="optimal trade-off curve")
    _add_spec_flags(p_curve)
    p_curve.add_argument("--kind", choices=("costly", "constrained"), required=True)
    p_curve.add_argument("--k-max", type=int, default=10)
    p_curve.add_argument("--alphas", type=str, default=None,
                         help="model B constrained abscissas, comma separated")
    p_curve.add_argument("--lambdas", type=str, default=None,
                         help="model B costly abscissas, comma separated")
    p_curve.add_argument("--epsilon", type=float, default=1e-6)
    _add_output_flags(p_curve)

    p_solve = sub.add_parser("solve", help="optimal policy for one price or budget")
    _add_spec_flags(p_solve)
    p_solve.add_argument("--problem", choices=("costly", "constrained"), required=True)
    p_solve.add_argument("--lambda", dest="lam", type=float, default=None)
    p_solve.add_argument("--alpha", type=float, default=None)
    p_solve.add_argument("--epsilon", type=float, default=1e-6)
    _add_output_flags(p_solve)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo policy evaluation")
    _add_spec_flags(p_sim)
    p_sim.add_argument("--policy", required=True, choices=(
        "threshold", "randomized", "periodic", "iid", "steering", "timesharing"))
    p_sim.add_argument("--k", type=str, default=None, help="threshold (inf allowed)")
    p_sim.add_argument("--theta", type=float, default=None)
    p_sim.add_argument("--pattern", type=str, default=None,
                       help="periodic 0/1 pattern, e.g. 1,0,0,0")
    p_sim.add_argument("--alpha", type=float, default=None)
    p_sim.add_argument("--schedule", type=str, default=None,
                       help="time-sharing cycle counts, e.g. 3:2")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--reps", type=int, default=200)
    p_sim.add_argument("--horizon", type=int, default=100_000)
    p_sim.add_argument("--burn-in", type=int, default=1000)
    p_sim.add_argument("--workers", type=int, default=1)
    _add_output_flags(p_sim)

    p_val = sub.add_parser("validate", help="run a cross-check suite")
    p_val.add_argument("--suite", default="all", choices=(
        "tableI", "closed_forms", "scaling", "renewal", "dp", "baselines", "all"))
    _add_output_flags(p_val)

    return parser


def cmd_table(args) -> OutputRecord:
    betas = _parse_floats(args.betas)
    if not 0.0 < args.p < 1.0 / 3.0:
        raise UsageError(f"--p must lie in (0, 1/3), got {args.p}")
    if args.k_max < 1:
        raise UsageError("--k-max must be >= 1")
    rows = []
    for beta in betas:
        spec = solver_a.bd_spec(args.p, beta)
        corners = dict(solver_a.corner_lambdas(spec, args.k_max))
        for k in range(args.k_max + 1):
            perf = solver_a.performance(spec, k)
            rows.append({
                "beta": beta,
                "k": k,
                "D": perf.distortion,
                "N": perf.transmission_rate,
                "lambda": corners.get(k),
            })
    meta = {"p": args.p, "k_max": args.k_max}
    return OutputRecord(command="table", columns=["beta", "k", "D", "N", "lambda"],
                        rows=rows, metadata=meta)


def cmd_curve(args) -> OutputRecord:
    spec = _spec_from_args(args)
    meta = {"spec": spec_digest(spec), "kind": args.kind}
    if args.model == "A":
        curve = solver_a.tradeoff_curve(spec, args.kind, args.k_max)
        meta["k_max"] = args.k_max
    else:
        grid_text = args.alphas if args.kind == "constrained" else args.lambdas
        if grid_text is None:
            raise UsageError("model B curves need --alphas or --lambdas")
        from .model import CurvePoint, TradeoffCurve

        pts = []
        for x in sorted(_parse_floats(grid_text)):
            if args.kind == "constrained":
                k, d = solver_b.algorithm2_constrained(spec, x, args.epsilon)
                pts.append(CurvePoint(abscissa=x, ordinate=d, threshold=k))
            else:
                k, c = solver_b.algorithm1_costly(spec, x, args.epsilon)
                pts.append(CurvePoint(abscissa=x, ordinate=c, threshold=k))
        curve = TradeoffCurve(kind=args.kind, points=tuple(pts), shape="sampled")
        meta["epsilon"] = args.epsilon
    abscissa = "lambda" if args.kind == "costly" else "alpha"
    ordinate = "C" if args.kind == "costly" else "D"
    rows = [
        {abscissa: p.abscissa, ordinate: p.ordinate, "k": p.threshold}
        for p in curve.points
    ]
    return OutputRecord(command="curve", columns=[abscissa, ordinate, "k"],
                        rows=rows, metadata=meta)


def cmd_solve(args) -> OutputRecord:
    spec = _spec_from_args(args)
    meta = {"spec": spec_digest(spec), "problem": args.problem}
    if args.problem == "costly":
        if args.lam is None:
            raise UsageError("--lambda is required for the costly problem")
        if args.model == "A":
            k, cost = solver_a.optimal_costly(spec, args.lam)
        else:
            k, cost = solver_b.algorithm1_costly(spec, args.lam, args.epsilon)
            meta["epsilon"] = args.epsilon
        perf = (solver_a.performance(spec, k, args.lam) if args.model == "A"
                else solver_b.performance_b(spec, k, args.lam))
        rows = [{
            "k": k, "theta": None, "D": perf.distortion,
            "N": perf.transmission_rate, "C": cost, "lambda": args.lam,
        }]
    else:
        if args.alpha is None:
            raise UsageError("--alpha is required for the constrained problem")
        if args.model == "A":
            policy, d_star = solver_a.optimal_constrained(spec, args.alpha)
            rows = [{
                "k": policy.k_star, "theta": policy.theta_star, "D": d_star,
                "N": args.alpha, "C": None, "lambda": None,
            }]
        else:
            k, d_star = solver_b.algorithm2_constrained(spec, args.alpha, args.epsilon)
            meta["epsilon"] = args.epsilon
            rows = [{
                "k": k, "theta": None, "D": d_star,
                "N": args.alpha, "C": None, "lambda": None,
            }]
    return OutputRecord(command="solve",
                        columns=["k", "theta", "D", "N", "C", "lambda"],
                        rows=rows, metadata=meta)


def _policy_from_args(args) -> PolicySpec:
    def need(value, flag):
        if value is None:
            raise UsageError(f"{flag} is required for policy {args.policy!r}")
        return value

    if args.policy == "threshold":
        raw = need(args.k, "--k")
        k = math.inf if raw in ("inf", "infinity") else float(raw)
        return PolicySpec.threshold(k)
    if args.policy == "randomized":
        k = float(need(args.k, "--k"))
        return PolicySpec.randomized_threshold(int(k), need(args.theta, "--theta"))
    if args.policy == "periodic":
        pattern = [int(x) for x in need(args.pattern, "--pattern").split(",")]
        return PolicySpec.periodic(pattern)
    if args.policy == "iid":
        return PolicySpec.iid_random(need(args.alpha, "--alpha"))
    if args.policy == "steering":
        return PolicySpec.steering(float(need(args.k, "--k")),
                                   need(args.theta, "--theta"))
    sched = []
    for entry in need(args.schedule, "--schedule").split(","):
        a_txt, b_txt = entry.split(":")
        sched.append((int(a_txt), int(b_txt)))
    return PolicySpec.time_sharing(float(need(args.k, "--k")), sched)


def cmd_simulate(args) -> OutputRecord:
    spec = _spec_from_args(args)
    policy = _policy_from_args(args)
    config = SimConfig(horizon=args.horizon, replications=args.reps, seed=args.seed,
                       burn_in=args.burn_in, workers=args.workers)
    result = run_simulation(spec, policy, config)
    meta = {
        "spec": spec_digest(spec),
        "policy": args.policy,
        "seed": args.seed,
        "stream_id": result.stream_id,
        "steps_per_replication": result.steps_per_replication,
    }
    rows = [{
        "d_hat": result.d_hat, "n_hat": result.n_hat,
        "d_se": result.d_se, "n_se": result.n_se,
        "replications": result.replications_used,
    }]
    return OutputRecord(command="simulate",
                        columns=["d_hat", "n_hat", "d_se", "n_se", "replications"],
                        rows=rows, metadata=meta)


def cmd_validate(args) -> tuple[OutputRecord, bool]:
    checks = validation.run_suite(args.suite)
    rows = [{
        "suite": c.suite, "check": c.name,
        "passed": c.passed, "detail": c.detail,
    } for c in checks]
    record = OutputRecord(command="validate",
                          columns=["suite", "check", "passed", "detail"],
                          rows=rows,
                          metadata={"suite": args.suite,
                                    "failed": sum(not c.passed for c in checks)})
    return record, all(c.passed for c in checks)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ok = True
        if args.cmd == "table":
            record = cmd_table(args)
        elif args.cmd == "curve":
            record = cmd_curve(args)
        elif args.cmd == "solve":
            record = cmd_solve(args)
        elif args.cmd == "simulate":
            record = cmd_simulate(args)
        else:
            record, ok = cmd_validate(args)
        text = record.render(args.format)
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0 if ok else 3
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
