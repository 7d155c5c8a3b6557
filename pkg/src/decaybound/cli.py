"""Command-line entry point: ``decaybound <command> [options]``.

Every command writes CSV (one header line, ``#`` metadata lines before it)
to ``--out`` or stdout. Output depends only on the inputs and ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import bounds, ed, loops, validation
from .exceptions import DecayBoundError, DomainError, InputError, ResourceError
from .lattice import make_lattice, perimeter_constant, read_edge_list
from .models import DEFAULT_CORRELATOR, ModelSpec, load_config

DEFAULT_SEED = validation.DEFAULT_SEED

EXIT_CODES = {InputError: 2, DomainError: 3, ResourceError: 4}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


class CsvOut:
    def __init__(self, header, meta=()):
        self.buf = io.StringIO()
        for line in meta:
            self.buf.write(f"# {line}\n")
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(header)

    def row(self, *values):
        self.writer.writerow([_fmt(v) for v in values])

    def text(self) -> str:
        return self.buf.getvalue()


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _betas(args, default=None):
    if args.beta is None:
        if default is None:
            raise InputError("--beta is required for this command")
        return list(default)
    try:
        values = [float(b) for b in args.beta.split(",")]
    except ValueError:
        raise InputError(f"bad --beta list {args.beta!r}") from None
    if any(not b > 0 for b in values):
        raise InputError("every beta must be positive")
    return values


def _spec(args) -> ModelSpec:
    if not args.config:
        raise InputError("--config is required for this command")
    spec = load_config(args.config)
    if spec.graph is None and args.command not in ("xi", "curve"):
        raise InputError(f"{args.config}: this command needs a graph (lattice/dims or graph_file)")
    return spec


def _model_meta(spec: ModelSpec):
    fam = spec.family
    params = {
        "spin_su2": f"s={spec.s} c={','.join(_fmt(c) for c in spec.couplings)}" if fam == "spin_su2" and not isinstance(spec.couplings, dict) else "",
        "loop_tq": f"theta={_fmt(float(spec.theta))} u={_fmt(float(spec.u))}",
        "hubbard": f"t={_fmt(float(spec.t))} alpha={_fmt(float(spec.alpha))} U={_fmt(float(spec.U))} mu={_fmt(float(spec.mu))}",
        "tj": f"t={_fmt(float(spec.t))} J={_fmt(float(spec.J))}",
    }[fam]
    graph = spec.graph.name if spec.graph is not None else "none"
    return f"family={fam} {params} graph={graph}".replace("  ", " ")


# ------------------------------------------------------------------ commands


def cmd_gamma(args) -> str:
    if args.graph_file:
        g = read_edge_list(args.graph_file)
    elif args.lattice:
        dims = tuple(int(v) for v in args.dims.replace("x", ",").split(","))
        g = make_lattice(args.lattice, dims, args.boundary)
    elif args.config:
        g = _spec(args).graph
    else:
        raise InputError("gamma needs a graph file, --lattice/--dims or --config")
    gamma, arg = perimeter_constant(g, return_argmax=True)
    out = CsvOut(["gamma", "gamma_float", "x", "ell"],
                 [f"command=gamma graph={g.name or 'edge_list'} n={g.n_vertices} edges={g.n_edges}"])
    x, ell = arg if arg is not None else ("", "")
    out.row(str(gamma), float(gamma), x, ell)
    return out.text()


def cmd_xi(args) -> str:
    spec = _spec(args)
    corr = args.correlator or DEFAULT_CORRELATOR[spec.family].value
    betas = _betas(args, default=(1.0, 10.0, 100.0, 1e3, 1e4, 1e6))
    gamma = spec.perimeter()
    meta = [
        "command=xi " + _model_meta(spec),
        f"gamma={gamma} correlator={corr}",
        "bound=C_kappa (d+1)^-xi optimised over K=kappa*beta; asymptote=c^2/(8 gamma ||Phi||_0)",
    ]
    if spec.family == "spin_su2":
        meta.append(bounds.SPIN_ASYMPTOTE_NOTE)
    out = CsvOut(["beta", "K_star", "xi", "C", "beta_xi", "asymptote", "flag"], meta)
    try:
        asym = bounds.asymptotic_exponent(spec, corr, gamma)
    except DomainError:
        asym = float("nan")
    for beta in betas:
        try:
            b = bounds.model_bound(spec, beta, corr, gamma)
        except DomainError as exc:
            out.row(beta, "", "", "", "", "", f"domain_error: {exc}")
            continue
        out.row(beta, b.K_star, b.xi, b.prefactor_C, beta * b.xi, asym, "vacuous" if b.vacuous else "ok")
    return out.text()


def cmd_curve(args) -> str:
    spec = _spec(args)
    corr = args.correlator or DEFAULT_CORRELATOR[spec.family].value
    (beta,) = _betas(args, default=(1.0,))[:1]
    b = bounds.model_bound(spec, beta, corr)
    d_max = args.dmax if args.dmax is not None else (spec.graph.diameter() if spec.graph is not None else 20)
    out = CsvOut(["d", "bound"], [
        "command=curve " + _model_meta(spec),
        f"beta={_fmt(beta)} correlator={corr} K_star={_fmt(b.K_star)} xi={_fmt(b.xi)} C={_fmt(b.prefactor_C)}"
        + (" vacuous" if b.vacuous else ""),
    ])
    for d, value in bounds.bound_curve(b, range(0, d_max + 1)):
        out.row(d, value)
    return out.text()


def _pairs(spec: ModelSpec, args):
    g = spec.graph
    x = args.x if args.x is not None else spec.extra.get("x")
    y = args.y if args.y is not None else spec.extra.get("y")
    if x is not None and y is not None:
        return [(x, y)]
    if x is not None:
        return [(x, z) for z in g.vertices if z != x]
    return [(a, b) for a in g.vertices for b in g.vertices if a < b]


def cmd_correlators(args) -> str:
    spec = _spec(args)
    betas = _betas(args, default=(1.0,))
    ops = ed.ModelOperators(spec)
    spectrum = ed.Spectrum(ops.hamiltonian_sparse)
    out = CsvOut(["beta", "x", "y", "d", "correlator_name", "value"],
                 ["command=correlators " + _model_meta(spec), f"dim={ops.dim}"])
    for beta in betas:
        for x, y in _pairs(spec, args):
            d = spec.graph.distance(x, y)
            values = ed.standard_correlators(spec, x, y, beta, ops=ops, spectrum=spectrum)
            for name, value in values.items():
                out.row(beta, x, y, "" if d is None else d, name, float(value.real))
    return out.text()


def cmd_loops(args) -> str:
    spec = _spec(args)
    if spec.family != "loop_tq":
        raise InputError(f"loops needs family=loop_tq, got {spec.family}")
    g = spec.graph
    betas = _betas(args, default=(1.0,))
    n_sweeps = args.sweeps if args.sweeps is not None else 10_000
    x = args.x if args.x is not None else spec.extra.get("x", 0)
    y = args.y if args.y is not None else spec.extra.get("y", g.n_vertices - 1)
    out = CsvOut(["theta", "u", "beta", "x", "y", "P", "stderr", "n_sweeps", "seed"], [
        "command=loops " + _model_meta(spec),
        f"burn_in={args.burn_in} measured_at=time0 error=batch_means",
    ])
    for beta in betas:
        est = loops.estimate_connectivity(g, x, y, float(spec.theta), float(spec.u), beta, n_sweeps,
                                          seed=args.seed, burn_in=args.burn_in)
        out.row(float(spec.theta), float(spec.u), beta, x, y, est.mean, est.std_error, n_sweeps, args.seed)
        for flag in est.flags:
            out.buf.write(f"# warning beta={_fmt(beta)}: {flag}\n")
    if args.dump:
        chain = loops.LoopChain(g, betas[-1], float(spec.theta), float(spec.u), seed=args.seed)
        Path(args.dump).write_text(chain.config().dumps())
    return out.text()


def cmd_validate(args) -> tuple[str, bool]:
    kwargs = {}
    if args.suite in ("symmetry", "rotation") and args.tolerance is not None:
        kwargs["tol"] = args.tolerance
    if args.suite == "correspondence":
        kwargs["seed"] = args.seed
        if args.sweeps is not None:
            kwargs["n_sweeps"] = args.sweeps
            kwargs["n_samples"] = args.sweeps
        if args.tolerance is not None:
            kwargs["n_sigma"] = args.tolerance
    report = validation.run_suite(args.suite, **kwargs)
    n_skip = sum(r.status == "skip" for r in report.results)
    text = f"# command=validate suite={args.suite} checks={len(report.results)} failed={report.n_failed} skipped={n_skip}\n"
    return text + report.to_csv(), report.ok


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="model description in key=value format")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--beta", help="inverse temperature or comma-separated list")
    common.add_argument("--sweeps", type=int, help="Monte Carlo sweeps (or samples)")
    common.add_argument("--tolerance", type=float, help="override the suite tolerance")

    p = argparse.ArgumentParser(prog="decaybound", description="Decay bounds for correlations in quantum lattice systems.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", parents=[common], help="perimeter constant of a graph")
    g.add_argument("graph_file", nargs="?")
    g.add_argument("--lattice")
    g.add_argument("--dims", default="7x7")
    g.add_argument("--boundary", default="open")

    for name, helptext in (("xi", "optimised exponent per beta"), ("curve", "bound as a function of distance")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--correlator")
        if name == "curve":
            c.add_argument("--dmax", type=int)

    c = sub.add_parser("correlators", parents=[common], help="exact Gibbs correlators")
    c.add_argument("--x", type=int)
    c.add_argument("--y", type=int)

    c = sub.add_parser("loops", parents=[common], help="loop-model connectivity by Monte Carlo")
    c.add_argument("--x", type=int)
    c.add_argument("--y", type=int)
    c.add_argument("--burn-in", type=float, default=0.1)
    c.add_argument("--dump", help="write a sampled configuration in text form")

    c = sub.add_parser("validate", parents=[common], help="run a cross-validation suite")
    c.add_argument("suite", choices=validation.SUITES)
    return p


COMMANDS = {
    "gamma": cmd_gamma,
    "xi": cmd_xi,
    "curve": cmd_curve,
    "correlators": cmd_correlators,
    "loops": cmd_loops,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        print("error: InputError: --seed must be a nonnegative integer", file=sys.stderr)
        return 2
    try:
        if args.command == "validate":
            text, ok = cmd_validate(args)
            _emit(text, args.out)
            return 0 if ok else 1
        _emit(COMMANDS[args.command](args), args.out)
        return 0
    except DecayBoundError as exc:
        code = next((v for k, v in EXIT_CODES.items() if isinstance(exc, k)), 1)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
