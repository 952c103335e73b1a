"""Command-line surface: measure, optimize, dsbs, region, fme, simulate.

Outputs are UTF-8 JSON or CSV written atomically (temp file + rename) so a
failed run never leaves a partial file; every emitted record carries the
seeds and rates needed to reproduce it. Exit codes: 0 success, 1 validation
error (including unknown flags), 2 resource-guard or optimizer failure with
diagnostics on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import dsbs_analytic, info_core, protocol_sim, rate_optimizers, rate_regions
from .info_core import AxisMismatchError, DomainError, JointPMF, PMFValidationError
from .protocol_sim import ObliviousFamily, ResourceGuardError
from .rate_optimizers import OptimizerConfig, OptimizerError
from .rate_regions import AccessStructure, RateTuple

SEED_ENV = "COORDRATE_SEED"

_VALIDATION_ERRORS = (
    PMFValidationError,
    AxisMismatchError,
    DomainError,
    rate_regions.MarkovViolationError,
    ValueError,
    KeyError,
    FileNotFoundError,
    json.JSONDecodeError,
)


class _UsageError(SystemExit):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(1)


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_pmf(path: str) -> JointPMF:
    return JointPMF.from_json_dict(_load_json(path))


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".coordrate-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _groups_arg(value: str | None) -> list[tuple[str, ...]]:
    if not value:
        return []
    return [tuple(g.split(",")) for g in value.split(";") if g]


def _parse_rate_tuple(value: str) -> RateTuple:
    parts = [float(v) for v in value.split(",")]
    if not parts:
        raise ValueError("empty rate tuple")
    return RateTuple(parts[0], tuple(parts[1:]))


def _parse_views(value: str) -> list[frozenset[int]]:
    views = []
    for part in value.split(";"):
        part = part.strip()
        views.append(frozenset(int(v) for v in part.split(",") if v))
    return views


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        card_u=args.card_u,
        restarts=args.restarts,
        max_iters=args.max_iters,
        seed=args.seed,
        grid_resolution=getattr(args, "grid_resolution", None),
        threads=args.threads,
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_measure(args) -> str:
    p = _load_pmf(args.pmf)
    groups = _groups_arg(args.groups)
    cond = tuple(args.cond.split(",")) if args.cond else ()
    q = args.quantity
    if q == "entropy":
        value = info_core.entropy(p)
    elif q == "mutual_information":
        a, b = groups if groups else ((p.names[0],), (p.names[1],))
        value = info_core.mutual_information(p, a, b)
    elif q == "conditional_mutual_information":
        if len(groups) != 2:
            raise ValueError("need --groups 'A;B' and --cond")
        value = info_core.conditional_mutual_information(p, groups[0], groups[1], cond)
    elif q == "total_correlation":
        gs = groups if groups else [(n,) for n in p.names]
        value = info_core.total_correlation(p, gs, cond)
    elif q == "dual_total_correlation":
        gs = groups if groups else [(n,) for n in p.names]
        value = info_core.dual_total_correlation(p, gs, cond)
    elif q == "tv_distance":
        if not args.pmf2:
            raise ValueError("tv_distance needs --pmf2")
        value = info_core.tv_distance(p, _load_pmf(args.pmf2))
    else:
        raise ValueError(f"unknown quantity {q!r}")
    if args.format == "csv":
        return _csv_text(["quantity", "value"], [[q, repr(value)]])
    return _json_text({"quantity": q, "value": value})


def _opt_result_dict(res) -> dict:
    return res.to_json_dict()


def _cmd_optimize(args) -> str:
    if args.format == "csv":
        raise ValueError("optimize emits JSON only")
    p = _load_pmf(args.pmf)
    cfg = _optimizer_config(args)
    problem = args.problem
    if problem == "wyner":
        out = _opt_result_dict(rate_optimizers.wyner_ci(p, cfg))
    elif problem == "relaxed":
        if args.gamma is None:
            raise ValueError("relaxed needs --gamma")
        out = _opt_result_dict(rate_optimizers.relaxed_wyner_ci(p, args.gamma, cfg))
    elif problem == "gamma-star":
        gamma, res = rate_optimizers.gamma_star(p, cfg)
        out = {"gamma": gamma, **_opt_result_dict(res)}
    elif problem == "r-opt-two":
        out = _opt_result_dict(rate_optimizers.r_opt_two(p, cfg))
    elif problem == "r-opt-indv":
        out = _opt_result_dict(rate_optimizers.r_opt_indv(p, cfg))
    elif problem == "minmax-check":
        rep = rate_optimizers.minmax_equivalence_check(p, cfg)
        out = {
            "value_minmax": rep.value_minmax,
            "value_halfsum": rep.value_halfsum,
            "difference": rep.difference,
            "seed": cfg.seed,
        }
    elif problem == "correlated":
        if args.hx is None:
            raise ValueError("correlated needs --hx")
        out = _opt_result_dict(rate_regions.correlated_rate(p, args.hx, cfg))
    else:
        raise ValueError(f"unknown problem {problem!r}")
    if isinstance(out, dict) and out.get("converged") is False:
        sys.stderr.write(f"optimizer did not converge: {json.dumps(out.get('per_restart'))}\n")
        raise OptimizerError("optimizer failed to converge")
    return _json_text(out)


def _sweep_values(spec: str) -> np.ndarray:
    start, stop, step = (float(v) for v in spec.split(":"))
    if step <= 0:
        raise ValueError("sweep step must be positive")
    count = int(round((stop - start) / step))
    values = start + step * np.arange(count + 1)
    return values[values <= stop + 1e-12]


def _cmd_dsbs(args) -> str:
    a = args.a
    if args.quantity == "t-star":
        value = dsbs_analytic.t_star(a)
        if args.format == "csv":
            return _csv_text(["a", "t_star"], [[a, repr(value)]])
        return _json_text({"a": a, "t_star": value})
    if args.quantity == "wyner-ci":
        value = dsbs_analytic.dsbs_wyner_ci(a)
        if args.format == "csv":
            return _csv_text(["a", "wyner_ci"], [[a, repr(value)]])
        return _json_text({"a": a, "wyner_ci": value})
    if args.sweep_t:
        ts = _sweep_values(args.sweep_t)
    elif args.t is not None:
        ts = np.array([args.t])
    else:
        raise ValueError("dsbs needs --sweep-t, --t, or --quantity")
    rows = dsbs_analytic.sweep(a, ts)
    if args.format == "csv":
        return _csv_text(
            ["a", "t", "f", "mi_term", "cmi_term"],
            [[r["a"], r["t"], repr(r["f"]), repr(r["mi_term"]), repr(r["cmi_term"])] for r in rows],
        )
    return _json_text(rows)


def _cmd_region(args) -> str:
    rt = _parse_rate_tuple(args.rate_tuple)
    witness: dict = {}
    if args.name == "two-equal":
        member = rate_regions.region_two_equal(args.hx, rt)
    elif args.name == "equal-indv":
        member = rate_regions.region_equal_indv(args.hx, args.t, rt)
    elif args.name == "equal-forehead":
        member = rate_regions.region_equal_forehead(args.hx, args.t, rt)
    elif args.name == "equal-general":
        if not args.views:
            raise ValueError("equal-general needs --views")
        views = _parse_views(args.views)
        acc = AccessStructure(len(views), len(rt.r_shared), tuple(views))
        member = rate_regions.region_equal_general(args.hx, acc, rt)
    elif args.name == "ach-two":
        if not args.pmf:
            raise ValueError("ach-two needs --pmf (auxiliary joint over X,Y,U,U1,U2)")
        aux = _load_pmf(args.pmf)
        member = rate_regions.region_ach_two(aux, rt)
        witness = rate_regions.entropy_bindings(aux, order=("X", "Y", "U", "U1", "U2"))
    elif args.name == "oblivious":
        if not args.pmf or not args.views:
            raise ValueError("oblivious needs --pmf (target joint) and --views")
        q = _load_pmf(args.pmf)
        views = _parse_views(args.views)
        acc = AccessStructure(len(views), len(rt.r_shared), tuple(views))
        res = rate_regions.oblivious_membership(
            q, acc, rt, _optimizer_config(args), card_u=args.card_u, card_ui=args.card_ui
        )
        member = res.achieved
        witness = {
            "status": res.status,
            "marginal_tv": res.marginal_tv,
            "slacks": {",".join(map(str, sorted(k))): v for k, v in res.slacks.items()},
        }
    else:
        raise ValueError(f"unknown region {args.name!r}")
    out = {"region": args.name, "rate_tuple": [rt.r_common, *rt.r_shared], "member": bool(member), "witness": witness}
    if args.format == "csv":
        return _csv_text(["region", "member"], [[args.name, member]])
    return _json_text(out)


def _cmd_fme(args) -> str:
    if args.format == "csv":
        raise ValueError("fme emits JSON only")
    sys_in = rate_regions.LinearSystem.from_json_dict(_load_json(args.system))
    out = rate_regions.fme_eliminate(sys_in, args.eliminate, prune=args.prune)
    return _json_text(out.to_json_dict())


def _family_from_config(cfg: dict) -> ObliviousFamily:
    return ObliviousFamily(
        p_u=np.asarray(cfg["p_u"], dtype=float),
        p_ui=tuple(np.asarray(v, dtype=float) for v in cfg["p_ui"]),
        channels=tuple(np.asarray(v, dtype=float) for v in cfg["channels"]),
    )


def _cmd_simulate(args) -> str:
    if args.scheme == "xor":
        if args.w1 is None or args.w2 is None:
            raise ValueError("xor needs --w1 and --w2")
        res = protocol_sim.xor_scheme(args.w1, args.w2)
        return _json_text(
            {
                "message": res.message,
                "recovered_at_p1": list(res.recovered_at_p1),
                "recovered_at_p2": list(res.recovered_at_p2),
            }
        )
    if not args.config:
        raise ValueError("simulate needs --config (JSON scheme description)")
    cfg = _load_json(args.config)
    scheme = cfg.get("scheme", args.scheme)
    if scheme != args.scheme:
        raise ValueError(f"--scheme {args.scheme} but config says {scheme!r}")
    target = JointPMF.from_json_dict(cfg["target"])
    common: dict = {"scheme": scheme, "q": target}
    if scheme == "wyner":
        d = cfg["decomp"]
        common["decomp"] = (
            np.asarray(d["p_u"], float),
            np.asarray(d["p_x_u"], float),
            np.asarray(d["p_y_u"], float),
        )
        common["rate"] = float(cfg["rate"])
        common["target_from_decomposition"] = bool(cfg.get("target_from_decomposition", False))
    elif scheme == "binned":
        d = cfg["decomp"]
        common["aux"] = (
            np.asarray(d["p_u"], float),
            np.asarray(d["p_x_u"], float),
            np.asarray(d["p_y_u"], float),
        )
        r = cfg["rates"]
        common["rates"] = (r["R0"], r["Rstar"], r["Rtilde1"], r["Rtilde2"])
        common["encoder"] = cfg.get("encoder", "typicality")
        if "eps" in cfg:
            common["eps"] = float(cfg["eps"])
    elif scheme == "oblivious":
        common["family"] = _family_from_config(cfg["family"])
        views = [frozenset(v) for v in cfg["views"]]
        r = cfg["rates"]
        shared = [r[f"R{j}"] for j in range(1, len(views) + 1)]
        common["acc"] = AccessStructure(len(views), len(shared), tuple(views))
        common["rates"] = (r["R"], *shared)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    n_list = [int(v) for v in args.n_list.split(",")] if args.n_list else [int(cfg["n"])]
    if args.seeds:
        if ":" in args.seeds:
            lo, hi = (int(v) for v in args.seeds.split(":"))
            seeds = list(range(lo, hi))
        else:
            seeds = [int(v) for v in args.seeds.split(",")]
    else:
        seeds = [args.seed]
    report = protocol_sim.trend_report(common, n_list, seeds)
    if args.format == "csv":
        return report.to_csv()
    return _json_text(
        {
            "rows": [
                {
                    "scheme": r.scheme,
                    "n": r.n,
                    "seed": r.codebook_seed,
                    "rates": r.rates,
                    "tv": r.tv,
                    "per_f_tv": r.per_f_tv,
                }
                for r in report.rows
            ],
            "aggregates": report.aggregates,
        }
    )


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coordrate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--output", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    def opt_flags(p):
        p.add_argument("--card-u", type=int, default=None)
        p.add_argument("--card-ui", type=int, default=2)
        p.add_argument("--restarts", type=int, default=32)
        p.add_argument("--max-iters", type=int, default=300)
        p.add_argument("--grid-resolution", type=int, default=None)

    p = sub.add_parser("measure", help="evaluate an information measure on a pmf file")
    p.add_argument("--pmf", required=True)
    p.add_argument("--pmf2", default=None)
    p.add_argument(
        "--quantity",
        required=True,
        choices=(
            "entropy",
            "mutual_information",
            "conditional_mutual_information",
            "total_correlation",
            "dual_total_correlation",
            "tv_distance",
        ),
    )
    p.add_argument("--groups", default=None, help="axis groups, e.g. 'X;Y' or 'X,Y;U'")
    p.add_argument("--cond", default=None, help="conditioning axes, e.g. 'U'")
    common(p)
    p.set_defaults(run=_cmd_measure)

    p = sub.add_parser("optimize", help="run a rate optimizer on a pmf file")
    p.add_argument("--pmf", required=True)
    p.add_argument(
        "--problem",
        required=True,
        choices=("wyner", "relaxed", "gamma-star", "r-opt-two", "r-opt-indv", "minmax-check", "correlated"),
    )
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--hx", type=float, default=None)
    opt_flags(p)
    common(p)
    p.set_defaults(run=_cmd_optimize)

    p = sub.add_parser("dsbs", help="closed-form curve and crossing point of the binary example")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--sweep-t", default=None, help="start:stop:step")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--quantity", choices=("f", "t-star", "wyner-ci"), default="f")
    common(p)
    p.set_defaults(run=_cmd_dsbs)

    p = sub.add_parser("region", help="rate-region membership query")
    p.add_argument(
        "--name",
        required=True,
        choices=("two-equal", "equal-indv", "equal-forehead", "equal-general", "ach-two", "oblivious"),
    )
    p.add_argument("--rate-tuple", required=True, help="R,R1,...,Rh")
    p.add_argument("--hx", type=float, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--views", default=None, help="per-processor source lists, e.g. '1;2' or '2,3;1,3;1,2'")
    p.add_argument("--pmf", default=None)
    opt_flags(p)
    common(p)
    p.set_defaults(run=_cmd_region)

    p = sub.add_parser("fme", help="eliminate a rate variable from a linear system file")
    p.add_argument("--system", required=True)
    p.add_argument("--eliminate", required=True)
    p.add_argument("--prune", choices=("lp", "syntactic", "none"), default="lp")
    common(p)
    p.set_defaults(run=_cmd_fme)

    p = sub.add_parser("simulate", help="run a protocol simulation from a JSON config")
    p.add_argument("--scheme", required=True, choices=("xor", "wyner", "binned", "oblivious"))
    p.add_argument("--config", default=None)
    p.add_argument("--w1", default=None)
    p.add_argument("--w2", default=None)
    p.add_argument("--n-list", default=None, help="comma-separated blocklengths")
    p.add_argument("--seeds", default=None, help="'lo:hi' range or comma list")
    common(p)
    p.set_defaults(run=_cmd_simulate)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return int(exc.code or 1)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        text = args.run(args)
        _write_output(text, args.output)
        return 0
    except (ResourceGuardError, OptimizerError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except _VALIDATION_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    raise SystemExit(run())
