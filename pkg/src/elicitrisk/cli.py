"""Command-line front end.

Four verbs:

* ``eval``    evaluate a risk functional on data or an inline law
* ``score``   rank forecast methods by realized mean score
* ``elicit``  run the elicitability diagnostics on a functional
* ``figure``  emit integrated spectral function curves as CSV

Exit codes: 0 success (and, for ``elicit``, a consistent verdict), 1 usage or
input error, 2 reserved for ``elicit`` finding an inconsistency or witness.
Every command is deterministic given its flags, input bytes, and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .distributions import (Distribution, Empirical, FiniteAtomic, Uniform, dirac,
                            empirical_from_csv, two_point)
from .elicit import (bound_check, convex_level_set_test, diagnostic_report,
                     identify_C, spectral_bounds_check)
from .risk import (ES, ExpectileRisk, InfOverFamily, NegMean, RiskFunctional,
                   SpectralRisk, VaR, functional_from_json, functional_to_json)
from .scoring import ExpectileScore, ForecastSeries, QuantileScore, compare
from .spectral import (SpectralMeasure, interval_mass, measure_from_json,
                       mp_measure, uc_measure, uses_quadrature)

__all__ = ["main"]

_FIGURE_POINTS = 512


def _fmt(x) -> str:
    """12 significant digits, locale independent, no negative zero."""
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is taken by elicit
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _dist_from_json(text: str) -> Distribution:
    """Inline law schema: {"type": "atomic"|"two_point"|"uniform"|"dirac", ...}."""
    obj = json.loads(text)
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("inline law must be an object with a 'type' key")
    kind = obj["type"]
    keys = set(obj) - {"type"}
    if kind == "atomic":
        if keys != {"atoms"}:
            raise ValueError("atomic law takes exactly the key 'atoms'")
        atoms = obj["atoms"]
        if not atoms:
            raise ValueError("atomic law needs at least one atom")
        return FiniteAtomic([a[0] for a in atoms], [a[1] for a in atoms])
    if kind == "two_point":
        if keys != {"x1", "x2", "p"}:
            raise ValueError("two_point law takes exactly the keys x1, x2, p")
        return two_point(obj["x1"], obj["x2"], obj["p"])
    if kind == "uniform":
        if keys != {"a", "b"}:
            raise ValueError("uniform law takes exactly the keys a, b")
        return Uniform(obj["a"], obj["b"])
    if kind == "dirac":
        if keys != {"at"}:
            raise ValueError("dirac law takes exactly the key 'at'")
        return dirac(obj["at"])
    raise ValueError(f"unknown law type {kind!r}")


def _functional_from_args(args) -> RiskFunctional:
    if getattr(args, "spec", None) is not None:
        if args.type is not None or args.level is not None or args.measure is not None:
            raise ValueError("--spec replaces --type/--level/--measure")
        return functional_from_json(args.spec)
    if args.type is None:
        raise ValueError("a functional is required: --type or --spec")
    t = args.type
    if t in ("var", "es", "expectile"):
        if args.level is None:
            raise ValueError(f"--type {t} needs --level")
        if t == "var":
            return VaR(alpha=args.level)
        if t == "es":
            return ES(alpha=args.level)
        return ExpectileRisk(tau=args.level)
    if args.level is not None:
        raise ValueError(f"--level does not apply to --type {t}")
    if t == "negmean":
        return NegMean()
    if t == "spectral":
        if args.measure is None:
            raise ValueError("--type spectral needs --measure")
        return SpectralRisk(measure=measure_from_json(args.measure))
    raise ValueError(f"unknown functional type {t!r}")


def _add_functional_flags(p: argparse.ArgumentParser):
    p.add_argument("--type", choices=["var", "es", "expectile", "negmean", "spectral"],
                   help="functional family")
    p.add_argument("--level", type=float, help="level for var/es/expectile")
    p.add_argument("--measure", help="spectral measure as inline JSON")
    p.add_argument("--spec", help="full functional spec as inline JSON")


def _eval_tolerance(rf: RiskFunctional, d: Distribution) -> float:
    # 0 means closed-form arithmetic; otherwise the solver tolerance involved
    if isinstance(rf, ExpectileRisk):
        return 1e-12
    measures = ()
    if isinstance(rf, SpectralRisk):
        measures = (rf.measure,)
    elif isinstance(rf, InfOverFamily):
        measures = rf.measures
    if any(uses_quadrature(m, d) for m in measures):
        return 1e-10
    return 0.0


def cmd_eval(args) -> int:
    if (args.data is None) == (args.dist is None):
        raise ValueError("exactly one of --data and --dist is required")
    if args.data is not None:
        d = empirical_from_csv(args.data)
        n = len(d.samples)
    else:
        d = _dist_from_json(args.dist)
        n = d.n_atoms if isinstance(d, FiniteAtomic) else None
    rf = _functional_from_args(args)
    value = rf.evaluate(d)
    print(_fmt(value))
    report = {
        "value": float(_fmt(value)),
        "spec": functional_to_json(rf),
        "n": n,
        "tolerance": _eval_tolerance(rf, d),
    }
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_score(args) -> int:
    if (args.quantile is None) == (args.expectile is None):
        raise ValueError("exactly one of --quantile and --expectile is required")
    if args.quantile is not None:
        score = QuantileScore(alpha=args.quantile)
    else:
        score = ExpectileScore(tau=args.expectile)
    series = ForecastSeries.from_csv(args.forecasts)
    ranking = compare(series, score)
    width = max(len(r.method) for r in ranking)
    print(f"{'rank':>4}  {'method':<{width}}  mean_score")
    for r in ranking:
        print(f"{r.rank:>4}  {r.method:<{width}}  {_fmt(r.mean_score)}")
    if args.out is not None:
        lines = ["method,mean_score,rank"]
        lines += [f"{r.method},{_fmt(r.mean_score)},{r.rank}" for r in ranking]
        with open(args.out, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


# Fixed evaluation suite for the envelope check: atoms, a sample, a density,
# and a point mass.
def _elicit_test_set():
    return [
        two_point(0.0, 1.0, 0.3),
        two_point(-2.0, 3.0, 0.6),
        Empirical([-1.5, -0.5, 0.0, 2.0, 4.0]),
        Uniform(-1.0, 2.0),
        dirac(1.5),
    ]


def _elicit_measures(rf: RiskFunctional):
    if isinstance(rf, SpectralRisk):
        return [rf.measure]
    if isinstance(rf, InfOverFamily):
        return list(rf.measures)
    return []


def cmd_elicit(args) -> int:
    rf = _functional_from_args(args)
    if args.grid_size < 5:
        raise ValueError("--grid-size must be at least 5")
    grid = tuple(np.linspace(0.05, 0.95, args.grid_size))
    ident = identify_C(rf, grid=grid)
    bounds = None
    spectral_reports = []
    if ident.consistent:
        bounds = bound_check(rf, ident.c_hat, _elicit_test_set(), tol=args.tol)
        for m in _elicit_measures(rf):
            spectral_reports.append(spectral_bounds_check(m, ident.c_hat, grid=grid))
    witness = convex_level_set_test(rf, search_budget=args.budget, seed=args.seed,
                                    tol=args.tol, grid=grid)
    report = diagnostic_report(ident, witness=witness, bound_report=bounds,
                               spectral_reports=spectral_reports,
                               search_budget=args.budget)
    print(json.dumps(report, sort_keys=True))
    return 0 if report["verdict"] == "consistent" else 2


def cmd_figure(args) -> int:
    C = float(args.C)
    if not 0.0 < C <= 1.0:
        raise ValueError(f"--C must lie in (0, 1], got {C!r}")
    try:
        qs = [float(tok) for tok in args.p_list.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"could not parse --p-list {args.p_list!r}") from None
    if not qs or any(not 0.0 < q < 1.0 for q in qs):
        raise ValueError("--p-list needs comma-separated values in (0, 1)")
    uc = uc_measure(C)
    es_measure = SpectralMeasure(atoms=[(C, 1.0)])
    mqs = [(q, mp_measure(q, C)) for q in qs]
    grid = np.linspace(0.0, 1.0, _FIGURE_POINTS)
    # each requested level replaces its nearest grid point, so the emitted
    # rows show the two-atom curves touching the lower envelope exactly
    for q in qs:
        grid[int(np.argmin(np.abs(grid - q)))] = q
    grid.sort()
    lines = ["p,uc_integrated,es_integrated," + ",".join(f"mq_{q:g}" for q, _ in mqs)]
    for p in grid:
        row = [p, interval_mass(uc, p, 1.0), interval_mass(es_measure, p, 1.0)]
        row += [interval_mass(m, p, 1.0) for _, m in mqs]
        lines.append(",".join(_fmt(x) for x in row))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="elicitrisk",
                     description="Coherent risk measures and elicitability diagnostics.")
    parser.add_argument("--threads", type=int, default=1,
                        help="bound on internal parallelism (current code paths "
                             "are single-threaded)")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p_eval = sub.add_parser("eval", help="evaluate a functional on data")
    _add_functional_flags(p_eval)
    p_eval.add_argument("--data", help="CSV file with a 'y' column")
    p_eval.add_argument("--dist", help="inline law JSON")
    p_eval.set_defaults(func=cmd_eval)

    p_score = sub.add_parser("score", help="rank forecast methods")
    p_score.add_argument("forecasts", help="CSV with method,period,forecast,realization")
    p_score.add_argument("--quantile", type=float, help="quantile level alpha")
    p_score.add_argument("--expectile", type=float, help="expectile level tau")
    p_score.add_argument("--out", help="also write the ranking as CSV here")
    p_score.set_defaults(func=cmd_score)

    p_elicit = sub.add_parser("elicit", help="elicitability diagnostics")
    _add_functional_flags(p_elicit)
    p_elicit.add_argument("--budget", type=int, default=10000,
                          help="search budget for the mixture witness hunt")
    p_elicit.add_argument("--seed", type=int, default=0, help="search seed")
    p_elicit.add_argument("--grid-size", type=int, default=19,
                          help="points in the identification grid on [0.05, 0.95]")
    p_elicit.add_argument("--tol", type=float, default=1e-9,
                          help="numeric tolerance for witnesses and margins")
    p_elicit.set_defaults(func=cmd_elicit)

    p_fig = sub.add_parser("figure", help="integrated spectral function curves")
    p_fig.add_argument("--C", required=True, help="bound parameter in (0, 1]")
    p_fig.add_argument("--p-list", default="0.3,0.8", dest="p_list",
                       help="comma-separated levels for the two-atom measures")
    p_fig.add_argument("--out", default="-", help="output CSV path, - for stdout")
    p_fig.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (ValueError, NotImplementedError, ArithmeticError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
