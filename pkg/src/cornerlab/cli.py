"""``cornerlab`` command line.

Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, is_dataclass

import numpy as np

from . import corner as cn
from . import entropy as en
from . import graphs as gr
from . import ncgraphs as nc
from . import suites
from .errors import CornerLabError
from .hermlin import matrix_from_json
from .optcore import SolverConfig
from .tensorprod import max_tensor, product_entropy_check

ENV_PREFIX = "CORNERLAB_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def clean(obj):
    """JSON-ready copy: 9 significant digits, infinities as ``"inf"``."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(f"{x:.9g}")
    if isinstance(obj, complex):
        return clean({"re": obj.real, "im": obj.imag})
    if hasattr(obj, "value") and not is_dataclass(obj):
        return obj.value
    if is_dataclass(obj):
        return clean(asdict(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True)


def _config(args) -> SolverConfig:
    def pick(flag, env, cast, default):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        raw = os.environ.get(ENV_PREFIX + env)
        if raw is not None:
            try:
                return cast(raw)
            except ValueError:
                raise UsageError(f"bad value for {ENV_PREFIX + env}: {raw!r}") from None
        return default

    base = SolverConfig()
    return SolverConfig(tol=pick("tol", "TOL", float, base.tol),
                        max_iters=pick("max_iters", "MAX_ITERS", int, base.max_iters),
                        seed=pick("seed", "SEED", int, base.seed))


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _load_graph(path: str) -> gr.Graph:
    with open(path) as fh:
        return gr.parse_graph_text(fh.read())


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")])


def _system(args) -> nc.OperatorSystem:
    if args.builtin:
        return nc.builtin_system(args.builtin)
    if args.graph:
        return nc.opsys_from_graph(_load_graph(args.graph))
    if args.system:
        return nc.OperatorSystem.from_json(_load_json(args.system))
    raise UsageError("ncgraph needs --builtin, --graph or --system")


def cmd_params(args, cfg):
    corner = cn.GeneratedCorner.from_json(_load_json(args.corner))
    rep = cn.param_report(corner, cfg, support_route=args.support_route)
    return rep.as_dict()


def cmd_entropy(args, cfg):
    if args.diag_corner:
        diag = cn.DiagonalCorner.from_json(_load_json(args.diag_corner))
        if args.p is None:
            raise UsageError("--diag-corner needs --p")
        p = _parse_vector(args.p)
        res = (en.vertex_entropy_diag(diag, p, cfg) if diag.is_vgen else en.polytope_entropy_diag(diag, p, cfg))
        out = {"entropy": res.value, "gap": res.gap}
        if args.split:
            out["split"] = en.entropy_split_check(diag, p, cfg)
        return out
    if not args.corner:
        raise UsageError("entropy needs --corner or --diag-corner")
    corner = cn.GeneratedCorner.from_json(_load_json(args.corner))
    if args.max:
        value, state = en.max_entropy_state(corner, cfg)
        return {"max_entropy": value, "state": np.real_if_close(state).real.tolist()}
    if not args.state:
        raise UsageError("entropy --corner needs --state or --max")
    rho = matrix_from_json(_load_json(args.state))
    res = en.corner_entropy(corner, rho, cfg)
    return {"entropy": res.value, "gap": res.gap, "status": res.status.value,
            "von_neumann": en.von_neumann(rho)}


def cmd_graph(args, cfg):
    g = _load_graph(args.graph)
    chosen = {k for k in ("alpha", "omega", "chi", "chi_f", "clique_cover") if getattr(args, k)}
    if not chosen and args.korner is None and args.rates is None:
        chosen = {"alpha", "omega", "chi", "chi_f", "clique_cover"}
    out = {"n": g.n, "edges": len(g.edges())}
    if "alpha" in chosen:
        out["alpha"] = gr.alpha(g)
    if "omega" in chosen:
        out["omega"] = gr.omega(g)
    if "chi" in chosen:
        out["chi"] = gr.chi_exact(g)
    if "clique_cover" in chosen:
        out["clique_cover"] = gr.clique_cover_number(g)
    if "chi_f" in chosen:
        frac = gr.chi_f_lp(g)
        out["chi_f"] = frac.value
        out["chi_f_rational"] = str(frac.rational)
        out["omega_f_weights"] = frac.dual
    if args.korner is not None:
        out["korner_entropy"] = gr.korner_entropy(g, _parse_vector(args.korner), cfg)
    if args.rates is not None:
        out["rates"] = gr.rate_sequences(g, args.rates)
    return out


def cmd_ncgraph(args, cfg):
    s = _system(args)
    out = {"dim": s.dim, "basis_size": len(s.basis)}
    if args.state:
        rho = matrix_from_json(_load_json(args.state))
        out["entropy"] = nc.nc_graph_entropy(s, rho, cfg).value
        return out
    out["params"] = nc.nc_params(s, cfg, budget=args.budget).as_dict()
    if args.capacity:
        out["capacity"] = nc.capacity_bounds(s, 2, cfg)
    return out


def cmd_tensor(args, cfg):
    a = cn.GeneratedCorner.from_json(_load_json(args.left))
    b = cn.GeneratedCorner.from_json(_load_json(args.right))
    prod = max_tensor(a, b)
    ra, rb, rp = (cn.param_report(x, cfg) for x in (a, b, prod))
    out = {"product_dim": prod.dim, "product": rp.as_dict()}
    out["multiplicativity"] = {k: {"product": getattr(rp, k), "factors": getattr(ra, k) * getattr(rb, k)}
                               for k in ("gamma", "n_param", "m_param")}
    if args.state:
        rho = matrix_from_json(_load_json(args.state))
        out["entropy"] = product_entropy_check(a, b, rho, cfg)
    return out


def _table(rows) -> str:
    header = ("system", "parameter", "computed", "reference", "|delta|", "pass")
    body = [(r.system, r.parameter, _num(r.computed), _num(r.expected), _num(r.delta), "pass" if r.passed else "FAIL")
            for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)) for line in [header, *body]]
    return "\n".join(lines)


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.3f}" if abs(x) >= 1e-3 or x == 0 else f"{x:.1e}"


def cmd_reproduce(args, cfg):
    families = [args.family] if args.family else list(suites.BUILTIN_FAMILIES)
    for f in families:
        nc.builtin_system(f)
    rows = suites.builtin_rows(families, cfg)
    if args.format == "table":
        return _table(rows)
    return {"rows": rows, "passed": all(r.passed for r in rows)}


def cmd_selftest(args, cfg):
    lines, ok = [], True
    for res in suites.selftest_suites(cfg, seed=cfg.seed):
        lines.append(res.line())
        ok &= res.passed
    lines.append(f"selftest: {'all passed' if ok else 'FAILURES'}")
    return "\n".join(lines), 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-iters", dest="max_iters", type=int)
    common.add_argument("--output", "-o")

    parser = _Parser(prog="cornerlab", description="Convex corners, corner entropy and graph parameters.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("params", parents=[common], help="gamma, N, M of a generated corner")
    p.add_argument("--corner", required=True)
    p.add_argument("--support-route", action="store_true", help="recompute gamma of the anti-blocker independently")

    p = sub.add_parser("entropy", parents=[common], help="entropy of a state over a corner")
    p.add_argument("--corner")
    p.add_argument("--state")
    p.add_argument("--max", action="store_true")
    p.add_argument("--diag-corner")
    p.add_argument("--p")
    p.add_argument("--split", action="store_true")

    p = sub.add_parser("graph", parents=[common], help="classical graph parameters")
    p.add_argument("--graph", required=True)
    for flag in ("alpha", "omega", "chi", "chi-f", "clique-cover"):
        p.add_argument(f"--{flag}", action="store_true")
    p.add_argument("--korner", metavar="P")
    p.add_argument("--rates", type=int, choices=(1, 2, 3))

    p = sub.add_parser("ncgraph", parents=[common], help="operator-system parameters")
    p.add_argument("--builtin")
    p.add_argument("--graph")
    p.add_argument("--system")
    p.add_argument("--state")
    p.add_argument("--capacity", action="store_true")
    p.add_argument("--budget", type=int, default=50)

    p = sub.add_parser("tensor", parents=[common], help="maximal tensor product of two corners")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--state")

    p = sub.add_parser("reproduce-section9", parents=[common], help="builtin-family reference table")
    p.add_argument("--family")
    p.add_argument("--format", choices=("table", "json"), default="table")

    sub.add_parser("selftest", parents=[common], help="run every property suite at seed 42")
    return parser


COMMANDS = {"params": cmd_params, "entropy": cmd_entropy, "graph": cmd_graph, "ncgraph": cmd_ncgraph,
            "tensor": cmd_tensor, "reproduce-section9": cmd_reproduce, "selftest": cmd_selftest}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        result = COMMANDS[args.verb](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except CornerLabError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1
    code = 0
    if isinstance(result, tuple):
        result, code = result
    text = result if isinstance(result, str) else dumps(result)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
