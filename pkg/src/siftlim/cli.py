"""Command-line front end: pointwise evaluation, benchmark table, limit search.

Exit codes: 0 on success, 2 on domain/usage errors, 3 on precision faults or
a missing positivity crossing, 4 when the benchmark table fails to reproduce
(some published-point main term does not exceed its truncation bound).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

from .dde_oracle import ToleranceError, solve_j
from .kernel_series import CoverageError
from .main_term_integrals import QuadratureRule, compute_quadratic
from .sieve_function import PrecisionFaultError, SieveEvaluator
from .sifting_optimizer import (
    SUPPORTED_KAPPAS,
    NoCrossingError,
    SiftingResult,
    find_beta,
    table2,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_PRECISION = 3
EXIT_REPRODUCTION = 4

CSV_HEADER = "kappa,u,a,I,err,beta"


@dataclass
class OutputRecord:
    """Machine-readable result of one CLI invocation."""

    command: str
    params: dict
    rows: list
    timing_seconds: float | None = None

    def to_json(self) -> str:
        payload = {"command": self.command, "params": self.params, "rows": self.rows}
        if self.timing_seconds is not None:
            payload["timing_seconds"] = self.timing_seconds
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "OutputRecord":
        data = json.loads(text)
        return cls(
            command=data["command"],
            params=data["params"],
            rows=data["rows"],
            timing_seconds=data.get("timing_seconds"),
        )

    def to_csv(self) -> str:
        lines = []
        if self.rows and "beta" in self.rows[0]:
            lines.append(CSV_HEADER)
            for row in self.rows:
                lines.append(",".join(_fmt17(row[k]) for k in ("kappa", "u", "a", "I", "err", "beta")))
        else:
            keys = list(self.rows[0]) if self.rows else []
            lines.append(",".join(keys))
            for row in self.rows:
                lines.append(",".join(_fmt17(row[k]) for k in keys))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        lines.append("# " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items())))
        for row in self.rows:
            lines.append("  ".join(f"{k}={_fmt6(v)}" for k, v in row.items()))
        if self.timing_seconds is not None:
            lines.append(f"# elapsed {self.timing_seconds:.3f}s")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


def _fmt17(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _fmt6(x) -> str:
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _result_row(result: SiftingResult) -> dict:
    return {
        "kappa": result.kappa,
        "u": result.u,
        "a": result.a,
        "I": result.main_term,
        "err": result.err,
        "beta": result.beta,
        "dhr_beta": result.dhr_beta,
    }


def _common_eval_args(parser: argparse.ArgumentParser, with_kappa_default=None) -> None:
    parser.add_argument("--kappa", type=int, required=with_kappa_default is None,
                        default=with_kappa_default, choices=SUPPORTED_KAPPAS,
                        help="sieve dimension")
    parser.add_argument("--truncation", type=int, default=80, metavar="N",
                        help="series truncation order (default 80)")
    parser.add_argument("--circles", type=int, default=7, metavar="NU",
                        help="highest chain circle index (default 7)")
    parser.add_argument("--panel-order", type=int, default=40,
                        help="Gauss-Legendre nodes per quadrature panel (default 40)")
    parser.add_argument("--format", choices=("text", "csv", "json"), default="text")
    parser.add_argument("--no-timing", action="store_true",
                        help="suppress the timing field for byte-stable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siftlim",
        description="Sifting limits of the quadratic-weight lower-bound sieve "
                    "via rigorously truncated power series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate j or j' at a point")
    p_eval.add_argument("kind", choices=("j", "jprime"))
    p_eval.add_argument("--u", type=float, required=True)
    p_eval.add_argument("--oracle", action="store_true",
                        help="also report the delay-equation cross-check delta")
    _common_eval_args(p_eval)

    p_table = sub.add_parser("table2", help="reproduce the benchmark sifting-limit table")
    p_table.add_argument("--kappa", type=int, default=None, choices=SUPPORTED_KAPPAS,
                         help="restrict to a single dimension")
    p_table.add_argument("--a", type=float, default=None,
                         help="override the shift used at the published u")
    p_table.add_argument("--optimize-u", action="store_true",
                         help="also bisect for the positivity crossing (slower)")
    p_table.add_argument("--u-tol", type=float, default=5e-4)
    p_table.add_argument("--truncation", type=int, default=80, metavar="N")
    p_table.add_argument("--circles", type=int, default=7, metavar="NU")
    p_table.add_argument("--panel-order", type=int, default=40)
    p_table.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p_table.add_argument("--no-timing", action="store_true")

    p_beta = sub.add_parser("find-beta", help="bisect for the certified sifting limit")
    p_beta.add_argument("--u-tol", type=float, default=5e-4)
    _common_eval_args(p_beta)

    return parser


def _build_evaluator(args) -> SieveEvaluator:
    return SieveEvaluator.build(
        args.kappa, N=args.truncation, nu_max=args.circles,
    )


def cmd_eval(args) -> OutputRecord:
    evaluator = _build_evaluator(args)
    fn = evaluator.eval_j if args.kind == "j" else evaluator.eval_j_prime
    res = fn(args.u)
    row = {
        "kind": args.kind,
        "kappa": args.kappa,
        "u": args.u,
        "value": res.value,
        "bound": res.bound,
    }
    if args.oracle:
        solution = solve_j(args.kappa, max(args.u, 1.0) + 1e-9)
        reference = solution.j(args.u) if args.kind == "j" else solution.j_prime(args.u)
        row["oracle_delta"] = res.value - reference
    params = {
        "kappa": args.kappa, "truncation": args.truncation,
        "circles": args.circles, "panel_order": args.panel_order,
    }
    return OutputRecord(command=f"eval {args.kind}", params=params, rows=[row])


def cmd_table2(args) -> tuple[OutputRecord, int]:
    kappas = (args.kappa,) if args.kappa is not None else SUPPORTED_KAPPAS
    evaluators = {}
    rows = table2(kappas, optimize_u=args.optimize_u, u_tol=args.u_tol,
                  panel_order=args.panel_order, evaluators=evaluators,
                  N=args.truncation)
    out_rows = []
    exit_code = EXIT_OK
    for row in rows:
        published = row.published
        if args.a is not None:
            evaluator = evaluators[row.kappa]
            rule = QuadratureRule.for_evaluation(evaluator, published.u, args.panel_order)
            quad = compute_quadratic(row.kappa, published.u, rule, evaluator)
            published = SiftingResult(
                kappa=row.kappa, u=published.u, a=args.a,
                main_term=quad.value_at(args.a), err=quad.err_at(args.a),
                dhr_beta=published.dhr_beta,
            )
        rec = _result_row(published)
        rec["optimized_u"] = row.optimized.u
        rec["optimized_a"] = row.optimized.a
        rec["optimized_I"] = row.optimized.main_term
        out_rows.append(rec)
        if published.main_term <= published.err:
            exit_code = EXIT_REPRODUCTION
    params = {
        "truncation": args.truncation, "circles": args.circles,
        "panel_order": args.panel_order, "u_tol": args.u_tol,
        "optimize_u": args.optimize_u,
    }
    return OutputRecord(command="table2", params=params, rows=out_rows), exit_code


def cmd_find_beta(args) -> OutputRecord:
    evaluator = _build_evaluator(args)
    result = find_beta(args.kappa, u_tol=args.u_tol, evaluator=evaluator,
                       panel_order=args.panel_order)
    params = {
        "kappa": args.kappa, "truncation": args.truncation,
        "circles": args.circles, "panel_order": args.panel_order,
        "u_tol": args.u_tol,
    }
    return OutputRecord(command="find-beta", params=params, rows=[_result_row(result)])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    exit_code = EXIT_OK
    try:
        if args.command == "eval":
            record = cmd_eval(args)
        elif args.command == "table2":
            record, exit_code = cmd_table2(args)
        else:
            record = cmd_find_beta(args)
    except (CoverageError, ValueError) as exc:
        print(f"siftlim: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (PrecisionFaultError, NoCrossingError, ToleranceError) as exc:
        print(f"siftlim: precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    if not args.no_timing:
        record.timing_seconds = time.perf_counter() - started
    sys.stdout.write(record.render(args.format))
    return exit_code


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
