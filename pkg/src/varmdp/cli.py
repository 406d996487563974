"""Command-line front end.

Subcommands cover the whole pipeline: instance generation, expected-value
solving, exact distributions, threshold percentiles, exact and estimated
Pareto fronts, the pair-state transformation, CDF estimation, seeded
simulation, and CDF comparison.  Outputs are deterministic given inputs
and seeds; files are written atomically.

Exit codes: 0 success, 2 parse/validation error, 3 precondition
violation, 4 budget refusal, 5 ergodicity/degeneracy error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import inventory
from .augmented import solve_threshold_var
from .documents import (dump_document, load_document, mdp_from_document,
                        mdp_to_document, mrp_from_document, mrp_to_document)
from .edgeworth import estimate_cdf, pareto_front_long
from .errors import (BudgetExceededError, ConvergenceError, DegenerateVarianceError,
                     ErgodicityError, PreconditionError, ValidationError)
from .mdp import (DeterministicPolicy, exact_total_reward_distribution,
                  expected_backward_induction, simplify_reward)
from .montecarlo import ks_distance, simulate
from .pareto import pareto_front_exact
from .rationals import format_rational, parse_rational
from .transform import transform

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4
EXIT_ERGODICITY = 5

_SCHEMA_NOTE = "Document schemas: mdp-v1 and mrp-v1 (JSON; numerics as exact strings)."


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"input: cannot read {path}: {exc}") from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".varmdp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _dec(value) -> str:
    return f"{float(value):.12g}"


def _exact_pair(q: Fraction) -> str:
    return f"{format_rational(q)} = {_dec(q)}"


def _load_mdp(path: str):
    return mdp_from_document(load_document(_read_text(path)))


def _load_mrp(path: str):
    return mrp_from_document(load_document(_read_text(path)))


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ValidationError(f"grid: expected lo:hi:steps, got {spec!r}") from None
    if steps < 2 or not hi > lo:
        raise ValidationError("grid: need hi > lo and steps >= 2")
    return np.linspace(lo, hi, steps)


def _load_policy(path: str, mdp) -> DeterministicPolicy:
    doc = load_document(_read_text(path))
    raw = doc.get("rules")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("policy: missing 'rules' list")
    rules = []
    for rule in raw:
        if not isinstance(rule, dict):
            raise ValidationError("policy: each rule must map state name to action")
        rules.append({mdp.states.index(str(k)): v for k, v in rule.items()})
    return DeterministicPolicy(rules=tuple(rules),
                               stationary=bool(doc.get("stationary", len(raw) == 1)))


def cmd_gen_inventory(args) -> int:
    try:
        build = inventory.PRESETS[args.preset]
    except KeyError:
        raise ValidationError(f"preset: unknown preset {args.preset!r}") from None
    mdp = build()
    if args.simplify:
        mdp = simplify_reward(mdp)
    _write_text(args.output, dump_document(mdp_to_document(mdp)))
    return EXIT_OK


def cmd_solve_expected(args) -> int:
    mdp = _load_mdp(args.document)
    value, policy = expected_backward_induction(mdp)
    lines = [f"optimal expected total reward = {_exact_pair(value)}"]
    for t, rule in enumerate(policy.rules):
        for x in sorted(rule):
            lines.append(f"t={t} {mdp.states[x]} -> {rule[x]}")
    _write_text(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_dist_exact(args) -> int:
    mdp = _load_mdp(args.document)
    if args.policy:
        policy = _load_policy(args.policy, mdp)
    else:
        _, policy = expected_backward_induction(mdp)
    dist = exact_total_reward_distribution(mdp, policy, path_budget=args.budget)
    rows = [[format_rational(s), _dec(s), format_rational(p), _dec(p)]
            for s, p in zip(dist.support, dist.prob)]
    _write_text(args.output, _csv_text(["value", "value_decimal", "prob", "prob_decimal"],
                                       rows))
    return EXIT_OK


def cmd_var_threshold(args) -> int:
    mdp = _load_mdp(args.document)
    tau = parse_rational(args.tau, "tau")
    solution = solve_threshold_var(mdp, tau, max_states=args.max_aug_states)
    text = (f"eta = {_exact_pair(solution.eta)}\n"
            f"{solution.listing(mdp.states)}\n")
    _write_text(args.output, text)
    return EXIT_OK


def cmd_pareto_short(args) -> int:
    mdp = _load_mdp(args.document)
    front = pareto_front_exact(mdp, max_policies=args.max_policies)
    rows = [[format_rational(t), _dec(t), format_rational(v), _dec(v), w]
            for t, v, w in zip(front.grid, front.value, front.witness)]
    _write_text(args.output, _csv_text(
        ["tau", "tau_decimal", "pareto_value", "pareto_value_decimal",
         "witness_policy_id"], rows))
    if args.policies_out:
        rows = [[pid, listing.replace("\n", "; ")]
                for pid, listing in sorted(front.policies.items())]
        _write_text(args.policies_out, _csv_text(["policy_id", "rules"], rows))
    return EXIT_OK


def cmd_transform(args) -> int:
    mrp = _load_mrp(args.document)
    _write_text(args.output, dump_document(mrp_to_document(transform(mrp))))
    return EXIT_OK


def cmd_estimate_cdf(args) -> int:
    mrp = _load_mrp(args.document)
    cdf = estimate_cdf(mrp, args.n_steps, kappa_start=args.kappa_start,
                       one_sided_kappa=args.one_sided_kappa)
    taus = _parse_grid(args.grid)
    values = cdf.evaluate(taus)
    rows = [[_dec(t), _dec(v)] for t, v in zip(taus, values)]
    _write_text(args.output, _csv_text(["tau", "cdf"], rows))
    if args.sidecar:
        side = {
            "n_steps": cdf.n_steps,
            "zeta": float(cdf.zeta),
            "sigma2": float(cdf.sigma2),
            "kappa": float(cdf.kappa),
            "rhat_start": float(cdf.rhat_start),
            "cond_h": float(cdf.cond_h),
            "truncation": cdf.truncation,
        }
        _write_text(args.sidecar, json.dumps(side, indent=2) + "\n")
    return EXIT_OK


def cmd_pareto_long(args) -> int:
    mdp = _load_mdp(args.document)
    front = pareto_front_long(mdp, args.horizon, _parse_grid(args.grid),
                              max_policies=args.max_policies)
    rows = [[_dec(t), _dec(v), w]
            for t, v, w in zip(front.grid, front.value, front.witness)]
    _write_text(args.output, _csv_text(["tau", "pareto_value", "witness_policy_id"],
                                       rows))
    if args.policies_out:
        rows = [[pid, listing.replace("\n", "; ")]
                for pid, listing in sorted(front.policies.items())]
        _write_text(args.policies_out, _csv_text(["policy_id", "rules"], rows))
    return EXIT_OK


def cmd_simulate(args) -> int:
    mrp = _load_mrp(args.document)
    ecdf = simulate(mrp, samples=args.samples, seed=args.seed,
                    n_steps=args.n, backend=args.backend)
    qs = np.linspace(0.0, 1.0, args.quantiles)
    values = np.quantile(ecdf.samples, qs, method="inverted_cdf")
    rows = [[_dec(q), _dec(v)] for q, v in zip(qs, values)]
    _write_text(args.output, _csv_text(["quantile", "value"], rows))
    return EXIT_OK


def _read_cdf_csv(path: str):
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if len(rows) < 2:
        raise ValidationError(f"{path}: expected a CSV with a header and data rows")
    header = rows[0]
    try:
        ti, vi = 0, 1
        if "tau" in header:
            ti = header.index("tau")
            for name in ("cdf", "pareto_value", "value"):
                if name in header:
                    vi = header.index(name)
                    break
        taus = np.array([float(r[ti]) for r in rows[1:]])
        vals = np.array([float(r[vi]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: cannot parse CDF columns ({exc})") from exc
    order = np.argsort(taus)
    return taus[order], vals[order]


def cmd_compare(args) -> int:
    ta, va = _read_cdf_csv(args.file_a)
    tb, vb = _read_cdf_csv(args.file_b)
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if not hi >= lo:
        raise PreconditionError("compare: the two CDF grids do not overlap")
    grid = np.unique(np.concatenate([ta[(ta >= lo) & (ta <= hi)],
                                     tb[(tb >= lo) & (tb <= hi)]]))
    fa = np.interp(grid, ta, va)
    fb = np.interp(grid, tb, vb)
    distance = ks_distance(lambda t: np.interp(t, grid, fa),
                           lambda t: np.interp(t, grid, fb), grid)
    _write_text(args.output, f"ks_distance = {_dec(distance)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varmdp",
        description="Value-at-Risk solvers for finite-state MDPs.",
        epilog=_SCHEMA_NOTE + " Environment: VARMDP_THREADS sets the simulation "
               "thread count; VARMDP_NO_NUMBA=1 selects the pure-numpy kernels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-inventory", help="write an inventory MDP document")
    p.add_argument("--preset", default="paper-short",
                   choices=sorted(inventory.PRESETS))
    p.add_argument("--simplify", action="store_true",
                   help="emit the SA (successor-averaged) variant")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen_inventory)

    p = sub.add_parser("solve-expected",
                       help="optimal expected total reward and argmax policy")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_solve_expected)

    p = sub.add_parser("dist-exact",
                       help="exact total-reward distribution of a policy "
                            "(default: the expected-optimal policy)")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--policy", default=None, help="policy document (JSON)")
    p.add_argument("--budget", type=int, default=24,
                   help="horizon*states enumeration budget")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_dist_exact)

    p = sub.add_parser("var-threshold",
                       help="best P(total >= tau) and its augmented-state policy")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--tau", required=True)
    p.add_argument("--max-aug-states", type=int, default=200_000)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_var_threshold)

    p = sub.add_parser("pareto-short", help="exact CDF Pareto front (policy enumeration)")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--max-policies", type=int, default=200_000)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--policies-out", default=None)
    p.set_defaults(func=cmd_pareto_short)

    p = sub.add_parser("transform",
                       help="pair-state transformation of a transition-rewarded MRP")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("estimate-cdf",
                       help="normal-plus-correction CDF estimate of a state-rewarded MRP")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--n-steps", type=int, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:steps")
    p.add_argument("--kappa-start", default="stationary",
                   choices=["stationary", "initial"])
    p.add_argument("--one-sided-kappa", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--sidecar", default=None, help="write diagnostics JSON here")
    p.set_defaults(func=cmd_estimate_cdf)

    p = sub.add_parser("pareto-long", help="estimated front over stationary policies")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:steps")
    p.add_argument("--max-policies", type=int, default=10_000)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--policies-out", default=None)
    p.set_defaults(func=cmd_pareto_long)

    p = sub.add_parser("simulate", help="seeded trajectory simulation (quantile CSV)")
    p.add_argument("document", nargs="?", default="-")
    p.add_argument("--n", type=int, default=None, help="epochs (default: horizon)")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--quantiles", type=int, default=1001)
    p.add_argument("--backend", default=None, choices=["numba", "numpy"])
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="max CDF difference between two CSV files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_compare)

    return parser


def _configure_threads() -> None:
    threads = os.environ.get("VARMDP_THREADS", "").strip()
    if threads:
        try:
            import numba
            numba.set_num_threads(int(threads))
        except (ImportError, ValueError):
            pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_threads()
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ErgodicityError, DegenerateVarianceError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERGODICITY


if __name__ == "__main__":
    sys.exit(main())
