"""Command-line surface for batch estimation, rate queries, and experiments.

Exit codes: 0 success, 1 usage error, 2 data error (malformed input files,
unusable sample sizes), 3 inconsistency (infinite estimand or rate).

Weight specs are one-token strings `kind:param@support_rule`, e.g.
`sobolev:1.5@exclude_origin`, `gaussian:0.5`, `sinc:3`, `constant`,
`custom:weights.csv`. Machine output goes to stdout as JSON or CSV with 9
significant digits; human-oriented notes go to stderr. QUADFUN_THREADS caps
the experiment worker count (0 or unset = one worker per CPU).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .densities import density_from_dict
from .errors import (
    ConfigurationError,
    DataFormatError,
    DomainError,
    EstimationError,
    NonnegativityViolation,
    QuadfunError,
    RateError,
    SolverError,
)
from .estimators import (
    distance_sq,
    inner_product,
    norm_sq,
    select_zeta_closed_form,
    select_zeta_lecam,
)
from .frequency import lattice_ball
from .harness import (
    ExperimentConfig,
    run_mse_study,
    run_worst_case_sweep,
    write_study_csv,
    write_study_sidecar,
)
from .spectral import empirical_cf, load_samples_csv
from .theory import bias_bound, minimax_rate, mse_bound, variance_bound
from .weights import parse_weight_spec

USAGE_ERROR, DATA_ERROR, INCONSISTENCY_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(value):
    """Round floats to 9 significant digits for output; passes infs through as 'INF'."""
    if isinstance(value, float):
        if math.isinf(value):
            return "INF"
        if math.isnan(value):
            return "NAN"
        return float(f"{value:.9g}")
    return value


def _print_json(payload: dict) -> None:
    print(json.dumps({k: _fmt(v) for k, v in payload.items()}))


def _build_parser() -> _Parser:
    parser = _Parser(prog="quadfun", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate an inner product, norm, or distance")
    est.add_argument("--kind", required=True, choices=["inner", "norm", "distance"])
    est.add_argument("--weights", required=True, help="weight spec for the functional (a)")
    est.add_argument(
        "--zeta",
        required=True,
        help="truncation rule: an integer, 'lecam', or 'closed-form'",
    )
    est.add_argument("--b-weights", help="smoothness spec (b); required for lecam/closed-form")
    est.add_argument("--samples-x", required=True, help="CSV of samples from P")
    est.add_argument("--samples-y", help="CSV of samples from Q (inner/distance)")

    rates = sub.add_parser("rates", help="minimax rate-table cell for a weight pair")
    rates.add_argument("--a", required=True)
    rates.add_argument("--b", required=True)
    rates.add_argument("-D", "--dimension", type=int, required=True)

    bounds = sub.add_parser("bounds", help="bias/variance/MSE bounds for given norms")
    bounds.add_argument("--a", required=True)
    bounds.add_argument("--b", required=True)
    bounds.add_argument("--zeta", type=int, required=True)
    bounds.add_argument("-D", "--dimension", type=int, required=True)
    bounds.add_argument("-n", "--samples", type=int, required=True)
    bounds.add_argument("--norm2-p", type=float, required=True)
    bounds.add_argument("--norm2-q", type=float, required=True)
    bounds.add_argument("--normb-p", type=float, required=True)
    bounds.add_argument("--normb-q", type=float, required=True)
    bounds.add_argument("--norma-p", type=float, required=True)
    bounds.add_argument("--norma-q", type=float, required=True)
    bounds.add_argument("--norm-mode", action="store_true", help="norm estimation (Q collapses to P)")

    solve = sub.add_parser("solve-zeta", help="strength-balance truncation radius")
    solve.add_argument("--b", required=True)
    solve.add_argument("-D", "--dimension", type=int, required=True)
    solve.add_argument("-n", "--samples", type=int, required=True)

    lower = sub.add_parser("lowerbound", help="worst-case perturbation family sweep")
    lower.add_argument("--a", required=True)
    lower.add_argument("--b", required=True)
    lower.add_argument("-D", "--dimension", type=int, required=True)
    lower.add_argument("-n", "--samples", type=int, required=True)
    lower.add_argument("--zeta-min", type=int, default=1)
    lower.add_argument("--zeta-max", type=int, required=True)
    lower.add_argument("--regime", choices=["smooth", "unsmooth"], default="smooth")

    exp = sub.add_parser("experiment", help="run an MSE study from a JSON config")
    exp.add_argument("--config", required=True, help="path to the study config JSON")

    return parser


def _zeta_from_rule(args, a, dimension, n) -> int:
    rule = args.zeta.strip().lower().replace("_", "-")
    if rule not in ("lecam", "closed-form"):
        try:
            zeta = int(args.zeta)
        except ValueError:
            raise ConfigurationError(
                f"--zeta must be an integer, 'lecam', or 'closed-form', got {args.zeta!r}"
            ) from None
        if zeta < 0:
            raise ConfigurationError("--zeta must be nonnegative")
        return zeta
    if not args.b_weights:
        raise ConfigurationError(f"--zeta {rule} requires --b-weights")
    b = parse_weight_spec(args.b_weights)
    if rule == "lecam":
        return select_zeta_lecam(b, n, dimension)
    return select_zeta_closed_form(a.kind, b.kind, a.param, b.param, dimension, n)


def _cmd_estimate(args) -> int:
    a = parse_weight_spec(args.weights)
    xs = load_samples_csv(args.samples_x, label="X")
    ys = load_samples_csv(args.samples_y, label="Y") if args.samples_y else None
    if args.kind in ("inner", "distance") and ys is None:
        raise ConfigurationError(f"--kind {args.kind} requires --samples-y")
    dimension = xs.dimension
    zeta = _zeta_from_rule(args, a, dimension, len(xs))
    Z = lattice_ball(zeta, dimension, a.support_rule)
    if args.kind == "norm":
        report = norm_sq(xs, a, Z)
    elif args.kind == "inner":
        report = inner_product(empirical_cf(xs, Z), empirical_cf(ys, Z), a, Z)
    else:
        report = distance_sq(xs, ys, a, Z)
    _print_json(report.to_dict())
    return 0


def _cmd_rates(args) -> int:
    a = parse_weight_spec(args.a)
    b = parse_weight_spec(args.b)
    prediction = minimax_rate(a, b, args.dimension)
    _print_json(
        {
            "exponent": prediction.exponent,
            "regime": prediction.regime,
            "log_factor_note": prediction.log_factor_note,
        }
    )
    return INCONSISTENCY_ERROR if prediction.inconsistent else 0


def _cmd_bounds(args) -> int:
    a = parse_weight_spec(args.a)
    b = parse_weight_spec(args.b)
    Z = lattice_ball(args.zeta, args.dimension, a.support_rule)
    norms = (
        args.norm2_p,
        args.norm2_q,
        args.normb_p,
        args.normb_q,
        args.norma_p,
        args.norma_q,
    )
    bias = bias_bound(args.normb_p, args.normb_q, a, b, args.zeta, args.dimension)
    variance = variance_bound(*norms, a, b, Z, args.samples)
    mse = mse_bound(*norms, a, b, Z, args.samples, norm_mode=args.norm_mode)
    _print_json({"bias_bound": bias, "variance_bound": variance, "mse_bound": mse})
    return INCONSISTENCY_ERROR if math.isinf(bias) else 0


def _cmd_solve_zeta(args) -> int:
    b = parse_weight_spec(args.b)
    zeta = select_zeta_lecam(b, args.samples, args.dimension)
    _print_json({"zeta": zeta})
    return 0


def _cmd_lowerbound(args) -> int:
    a = parse_weight_spec(args.a)
    b = parse_weight_spec(args.b)
    rows = run_worst_case_sweep(
        b,
        a,
        args.dimension,
        range(args.zeta_min, args.zeta_max + 1),
        args.samples,
        regime=args.regime,
    )
    print("zeta,valid,gap,tv_bound,attempts,failures")
    for r in rows:
        print(
            f"{r.zeta},{str(r.valid).lower()},{_fmt(r.gap)},{_fmt(r.tv)},"
            f"{r.attempts},{r.failures}"
        )
    return 0


def _workers_from_env() -> int:
    raw = os.environ.get("QUADFUN_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigurationError(f"QUADFUN_THREADS must be an integer, got {raw!r}") from None
    if cap <= 0:
        return os.cpu_count() or 1
    return cap


def _cmd_experiment(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read config: {exc}") from None
    try:
        density_p = density_from_dict(raw["density_p"])
        density_q = (
            density_from_dict(raw["density_q"]) if raw.get("density_q") else density_p
        )
        config = ExperimentConfig(
            density_p=density_p,
            density_q=density_q,
            a=parse_weight_spec(raw["a"]),
            b=parse_weight_spec(raw["b"]) if raw.get("b") else None,
            n_grid=tuple(int(n) for n in raw["n_grid"]),
            replications=int(raw["replications"]),
            zeta_rule=raw.get("zeta_rule", "fixed"),
            fixed_zeta=raw.get("fixed_zeta"),
            base_seed=int(raw.get("base_seed", 0)),
            estimand_kind=raw.get("estimand_kind", "inner_product"),
        )
    except KeyError as exc:
        raise DataFormatError(f"config missing field {exc}") from None
    result = run_mse_study(config, workers=_workers_from_env())
    output_csv = raw.get("output_csv", "study.csv")
    write_study_csv(result, output_csv)
    sidecar = raw.get("output_sidecar")
    if sidecar:
        write_study_sidecar(result, config, sidecar)
    _print_json(
        {
            "output_csv": output_csv,
            "slope": result.slope,
            "slope_stderr": result.slope_stderr,
            "rows": len(result.rows),
        }
    )
    return 0


_COMMANDS = {
    "estimate": _cmd_estimate,
    "rates": _cmd_rates,
    "bounds": _cmd_bounds,
    "solve-zeta": _cmd_solve_zeta,
    "lowerbound": _cmd_lowerbound,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help exits 0; usage errors exit 1
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (RateError, SolverError) as exc:
        print(f"quadfun: {exc}", file=sys.stderr)
        return INCONSISTENCY_ERROR
    except (
        DataFormatError,
        DomainError,
        EstimationError,
        NonnegativityViolation,
        ConfigurationError,
        FileNotFoundError,
    ) as exc:
        print(f"quadfun: {exc}", file=sys.stderr)
        return DATA_ERROR
    except QuadfunError as exc:
        print(f"quadfun: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
