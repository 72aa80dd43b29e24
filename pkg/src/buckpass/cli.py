"""Command-line interface.

Exit status: 0 on success, 2 on invalid input, 1 when an internal
consistency check fails.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _json
from .chain import parse_stochastic_profile, recurrent_structure, stationary_distribution
from .det_game import (
    NASH_CAP,
    det_cost_vector,
    det_potential,
    enumerate_pure_nash,
    improvement_dynamics,
    is_prior_free,
)
from .errors import (
    BuckPassError,
    CapExceededError,
    ConsistencyError,
    InputError,
    NumericError,
    PreconditionError,
)
from .fairness import fairness_report_det, fairness_report_param, parse_family
from .graph import parse_graph, parse_profile, unicycle_decomposition
from .holding import bhg_dynamics, parse_pagerank_spec, pagerank_equilibrium
from .simulator import SimConfig, simulate
from .stoch_game import epsilon_dynamics, parse_strategy_set, stoch_cost_vector, stoch_potential
from .trees import omega_spectral, stationary_via_trees, tree_volumes


class CliInputError(Exception):
    def __init__(self, path, field, message):
        super().__init__(f"{path}: field '{field}': {message}" if field else f"{path}: {message}")


def plain(obj):
    """Convert results to JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (set, frozenset)):
        return sorted(plain(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _load(path: str, parse, *args):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliInputError(path, None, f"cannot read file ({exc.strerror})") from exc
    try:
        return parse(*args, text)
    except InputError as exc:
        raise CliInputError(path, exc.field, str(exc)) from exc


def _graph(args):
    return _load(args.graph, parse_graph)


def _need_one(args, *names):
    given = [n for n in names if getattr(args, n, None) is not None]
    if len(given) != 1:
        flags = " or ".join("--" + n for n in names)
        raise CliInputError("<arguments>", None, f"exactly one of {flags} is required")
    return given[0]


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args):
    g, mu = _graph(args)
    which = _need_one(args, "s", "pi")
    if which == "s":
        s = _load(args.s, parse_profile, g)
        dec = unicycle_decomposition(g, s)
        return {
            "kind": "deterministic",
            "costs": det_cost_vector(g, mu, s),
            "potential": det_potential(g, s),
            "cycles": [list(c) for _, c in dec.components],
            "unicycles": [sorted(t) for t, _ in dec.components],
        }
    pi = _load(args.pi, parse_stochastic_profile, g)
    an = stoch_cost_vector(g, mu, pi)
    st = an.structure
    return {
        "kind": "stochastic",
        "costs": an.costs,
        "potential": an.potential,
        "classes": [sorted(c) for c in st.classes],
        "closures": [sorted(c) for c in st.closures],
        "residual": sorted(st.residual),
        "class_mass": st.class_mass,
    }


def cmd_nash(args):
    g, mu = _graph(args)
    eqs = enumerate_pure_nash(g, mu, args.cap)
    return {
        "count": len(eqs),
        "equilibria": [
            {"s": list(s), "costs": det_cost_vector(g, mu, s), "prior_free": is_prior_free(g, s)} for s in eqs
        ],
    }


def cmd_dynamics(args):
    g, mu = _graph(args)
    if args.xi is not None:
        xi = _load(args.xi, parse_strategy_set, g)
        start = None
        if args.start_index is not None:
            try:
                start = [int(v) for v in args.start_index.split(",")]
            except ValueError as exc:
                raise CliInputError("<arguments>", "start-index", "expected comma-separated integers") from exc
        path = epsilon_dynamics(g, mu, xi, args.epsilon, start)
        return {
            "length": len(path),
            "indices": path.indices,
            "gains": path.gains,
            "final": path.final,
        }
    if args.start is None:
        raise CliInputError("<arguments>", None, "dynamics needs --start (pure profile) or --xi (strategy set)")
    s = _load(args.start, parse_profile, g)
    cap = None if args.cap == NASH_CAP else args.cap
    path = improvement_dynamics(g, mu, s, args.rule, cap)
    return {
        "length": len(path),
        "steps": [dict(st.deviation.to_json(), profile=list(st.profile)) for st in path.steps],
        "final": list(path.final),
        "potential": [det_potential(g, p) for p in path.profiles],
    }


def cmd_potential(args):
    g, _ = _graph(args)
    which = _need_one(args, "s", "pi")
    if which == "s":
        return {"potential": det_potential(g, _load(args.s, parse_profile, g))}
    return {"potential": stoch_potential(g, _load(args.pi, parse_stochastic_profile, g))}


def cmd_fairness(args):
    g, mu = _graph(args)
    if args.family is None:
        return fairness_report_det(g, mu, args.cap).to_json()
    fam = _load(args.family, lambda text: parse_family(text))
    if args.grid_step is not None:
        fam = type(fam)(fam.params, fam.rows, Fraction(args.grid_step).limit_denominator(10**6))
    return fairness_report_param(g, mu, fam, args.refine, det_cap=args.cap).to_json()


def cmd_tree_theorem(args):
    g, _ = _graph(args)
    pi = _load(args.pi, parse_stochastic_profile, g)
    st = recurrent_structure(pi)
    if st.r != 1:
        raise CliInputError(args.pi, "pi", f"profile has {st.r} recurrent classes; the tree report needs exactly one")
    closure = st.closures[0]
    tv = tree_volumes(pi, closure)
    rho_lin = np.zeros(g.n)
    cls = sorted(st.classes[0])
    rho_lin[cls] = stationary_distribution(pi[np.ix_(cls, cls)])
    return {
        "omega": [dict(zip(tv.vertices, tv.omega)).get(i, 0.0) for i in range(g.n)],
        "omega_V": tv.omega_V,
        "spectral": omega_spectral(pi, closure),
        "rho_trees": stationary_via_trees(pi, closure),
        "rho_linear": rho_lin,
    }


def cmd_simulate(args):
    g, mu = _graph(args)
    which = _need_one(args, "s", "pi")
    prof = _load(args.s, parse_profile, g) if which == "s" else _load(args.pi, parse_stochastic_profile, g)
    try:
        cfg = SimConfig(args.T, args.replicas, args.seed)
    except InputError as exc:
        raise CliInputError("<arguments>", exc.field, str(exc)) from exc
    return simulate(g, mu, np.asarray(prof), cfg).to_json()


def cmd_pagerank(args):
    spec = _load(args.spec, parse_pagerank_spec)
    idx, rank = pagerank_equilibrium(spec, args.cap)
    return {
        "choice": list(idx),
        "link_sets": [list(spec.link_sets[i][k]) for i, k in enumerate(idx)],
        "rank": rank,
    }


def cmd_bhg(args):
    g, mu = _graph(args)
    s = _load(args.start, parse_profile, g)
    res = bhg_dynamics(g, mu, s, args.rule, seed=args.seed)
    return {
        "length": len(res.path),
        "steps": [dict(st.deviation.to_json(), profile=list(st.profile)) for st in res.path.steps],
        "final": list(res.path.final),
        "potential": [det_potential(g, p) for p in res.path.profiles],
        "certification": res.certification,
    }


# ---------------------------------------------------------------------------
# parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("json", "text"), default=d("json"), help="output format")
    p.add_argument("--seed", type=int, default=d(0), help="random seed (unsigned 64-bit)")
    p.add_argument("--cap", type=int, default=d(NASH_CAP), help="enumeration cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buckpass", description="Buck-passing games on digraphs.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("analyze", cmd_analyze, "costs, potential and structure of a profile")
    p.add_argument("--graph", required=True)
    p.add_argument("--s")
    p.add_argument("--pi")

    p = add("nash", cmd_nash, "enumerate pure Nash equilibria")
    p.add_argument("--graph", required=True)

    p = add("dynamics", cmd_dynamics, "run improvement dynamics")
    p.add_argument("--graph", required=True)
    p.add_argument("--start", help="pure start profile file")
    p.add_argument("--rule", choices=("max", "first"), default="max")
    p.add_argument("--xi", help="finite strategy set for epsilon dynamics")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--start-index", help="comma-separated row indices into the strategy set")

    p = add("potential", cmd_potential, "evaluate the potential")
    p.add_argument("--graph", required=True)
    p.add_argument("--s")
    p.add_argument("--pi")

    p = add("fairness", cmd_fairness, "social cost, price of anarchy and stability")
    p.add_argument("--graph", required=True)
    p.add_argument("--family")
    p.add_argument("--grid-step", type=float)
    p.add_argument("--refine", type=int, default=0)

    p = add("tree-theorem", cmd_tree_theorem, "tree volumes and stationary law")
    p.add_argument("--graph", required=True)
    p.add_argument("--pi", required=True)

    p = add("simulate", cmd_simulate, "Monte Carlo holding frequencies")
    p.add_argument("--graph", required=True)
    p.add_argument("--s")
    p.add_argument("--pi")
    p.add_argument("--T", type=int, default=100_000)
    p.add_argument("--replicas", type=int, default=10)

    p = add("pagerank", cmd_pagerank, "best-response equilibrium of the PageRank game")
    p.add_argument("--spec", required=True)

    p = add("bhg", cmd_bhg, "buck-holding improvement dynamics")
    p.add_argument("--graph", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--rule", choices=("max", "first"), default="max")
    return parser


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = plain(args.func(args))
    except CliInputError as exc:
        print(f"error: {exc}", file=err)
        return 2
    except (InputError, PreconditionError, CapExceededError) as exc:
        field = getattr(exc, "field", None)
        where = f"field '{field}': " if field else ""
        print(f"error: {where}{exc}", file=err)
        return 2
    except (ConsistencyError, NumericError) as exc:
        print(f"internal consistency failure: {exc}", file=err)
        return 1
    except BuckPassError as exc:
        print(f"error: {exc}", file=err)
        return 1
    if args.format == "json":
        out.write(_json.dumps(report) + "\n")
    else:
        out.write("\n".join(_json.text_lines(report)) + "\n")
    return 0


def main(argv=None):
    sys.exit(run_cli(argv))


if __name__ == "__main__":
    main()
