"""``coupled-align`` command line.

Defaults come from, in increasing precedence: built-in values, a JSON file
given with ``--config`` (top-level keys, then a section named after the
subcommand), and explicit flags.  Exit codes: 0 success, 2 usage or
configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import io as cio
from .embed import Embedding, align_error
from .errors import ConfigError, DataError, NumericError
from .graph import (
    Dataset,
    EpsilonNeighborhood,
    GraphConfig,
    HeatKernel,
    KNearest,
    Simple,
    build_weights,
    median_sq_distance,
)
from .kernel import AlignConfig, GaussianRBF, Linear, Polynomial, align, gram_matrix
from .laplacian import build_laplacian, coupled_weight, indicator
from .pipeline import coupled_embedding, latent_columns
from .plot import render_svg
from .sne import ExponentMode, Kind, RefineConfig, refine
from .verify import run_verification

log = logging.getLogger("coupled_align")

LOG_ENV = "COUPLED_ALIGN_LOG"
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _configure_logging() -> None:
    name = os.environ.get(LOG_ENV, "warn").strip().lower()
    level = LOG_LEVELS.get(name)
    logging.basicConfig(level=level or logging.WARNING, format="%(levelname)s %(name)s: %(message)s", force=True)
    if level is None:
        log.warning("%s=%r not in {error,warn,info,debug}; using warn", LOG_ENV, name)


# ---------------------------------------------------------------- arguments


def _graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["knn", "epsilon"], default="knn")
    p.add_argument("--k", type=int, default=10, help="neighbors for --method knn")
    p.add_argument("--eps", type=float, help="radius for --method epsilon")
    p.add_argument("--weights", choices=["heat", "simple"], default="heat")
    p.add_argument("--t", type=float, help="heat kernel parameter (default: median squared distance)")


def _coupling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x1", required=True, help="dataset 1 CSV")
    p.add_argument("--x2", required=True, help="dataset 2 CSV")
    p.add_argument("--alpha", type=float, default=0.5, help="real part of the coupling; beta = 1 - alpha")
    p.add_argument("--eta", type=float, default=0.5, help="weight of graph 1; mu = 1 - eta")
    _graph_flags(p)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="coupled-align", description=__doc__.splitlines()[0])
    top.add_argument("--config", help="JSON file with default flag values")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-graph", help="weight matrix of one dataset")
    p.add_argument("--x", required=True)
    _graph_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("embed", help="coupled spectral embedding of two datasets")
    _coupling_flags(p)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--include-null", action="store_true", help="keep eigenvalue-zero eigenvectors")
    p.add_argument("--mixer-phase", type=float, default=math.pi / 4,
                   help="initial mixer exp(i phase) I, radians")
    p.add_argument("--out", required=True)

    p = sub.add_parser("refine", help="stochastic-neighbor refinement of an embedding")
    p.add_argument("--embed", required=True)
    p.add_argument("--x1", required=True)
    p.add_argument("--x2", required=True)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--similarity", choices=[k.value for k in Kind], default=Kind.CONDITIONAL_PER_ROW.value,
                   help="per-row perplexity bandwidths or one shared sigma")
    p.add_argument("--sigma", type=float, help="shared bandwidth for --similarity pairwise (default: median distance)")
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--exponent", choices=[m.value for m in ExponentMode], default=ExponentMode.PLAIN.value)
    p.add_argument("--free", action="store_true", help="optimize the coordinates directly")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="objective trace CSV")

    p = sub.add_parser("kernel-align", help="kernel alignment in a shared latent space")
    p.add_argument("--x1", required=True)
    p.add_argument("--x2", required=True)
    p.add_argument("--dim", type=int, default=2, help="latent dimension p")
    p.add_argument("--kernel", choices=["rbf", "linear", "poly"], default="rbf")
    p.add_argument("--kernel-t", type=float, help="input RBF parameter (default: median squared distance)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--offset", type=float, default=1.0)
    p.add_argument("--t", type=float, help="latent RBF parameter (default: median at initialization)")
    p.add_argument("--lambda1", type=float, default=AlignConfig.lambda1)
    p.add_argument("--lambda2", type=float, default=AlignConfig.lambda2)
    p.add_argument("--iters", type=int, default=AlignConfig.max_iters)
    p.add_argument("--step", type=float, default=AlignConfig.step)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict-paper-distortion", action="store_true",
                   help="use ||K - K A* K A|| literally (needs p = n1 = n2)")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="objective trace CSV")

    p = sub.add_parser("verify", help="numerical identity checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out", help="report file (default: stdout)")

    p = sub.add_parser("indicator", help="indicator f of the coupled weight matrix")
    _coupling_flags(p)

    p = sub.add_parser("eval", help="alignment error (FOSCTTM) of an embedding CSV")
    p.add_argument("--embed", required=True)

    p = sub.add_parser("plot", help="SVG scatter plot of an embedding CSV")
    p.add_argument("--embed", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", action="store_true", help="join rows sharing an id")
    top.subcommands = dict(sub.choices)
    return top


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config is None:
        return parser.parse_args(argv)
    try:
        with open(known.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--config: cannot load {known.config}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("--config: top level must be a JSON object")
    subparsers = parser.subcommands
    command = next((a for a in rest if a in subparsers), None)
    if command is None:
        return parser.parse_args(argv)
    every = {a.dest for sp in subparsers.values() for a in sp._actions}
    flat = {k.replace("-", "_"): v for k, v in data.items() if k not in subparsers}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"--config: section {command!r} must be a JSON object")
    section = {k.replace("-", "_"): v for k, v in section.items()}
    mine = {a.dest for a in subparsers[command]._actions}
    unknown = sorted((set(flat) - every) | (set(section) - mine))
    if unknown:
        raise ConfigError(f"--config: unknown keys: {', '.join(unknown)}")
    defaults = {k: v for k, v in {**flat, **section}.items() if k in mine}
    for action in subparsers[command]._actions:
        if action.dest in defaults:
            action.required = False
    subparsers[command].set_defaults(**defaults)
    return parser.parse_args(argv)


# ---------------------------------------------------------------- commands


def _graph_config(args, data: Dataset) -> GraphConfig:
    if args.method == "knn":
        if args.k < 1:
            raise ConfigError("--k must be a positive integer")
        if args.k >= data.n:
            raise ConfigError(f"--k must be below the number of points ({data.n})")
        method = KNearest(args.k)
    else:
        if args.eps is None or not args.eps > 0:
            raise ConfigError("--eps must be given and positive for --method epsilon")
        method = EpsilonNeighborhood(args.eps)
    if args.weights == "simple":
        return GraphConfig(method, Simple())
    if args.t is not None and args.t == 0:
        raise ConfigError("--t must be nonzero")
    return GraphConfig(method, HeatKernel(median_sq_distance(data) if args.t is None else args.t))


def _check_coupling(args) -> None:
    for flag, v in (("--alpha", args.alpha), ("--eta", args.eta)):
        if not 0 < v < 1:
            raise ConfigError(f"{flag} must lie strictly between 0 and 1")


def _read_pair(args) -> tuple[Dataset, Dataset]:
    return cio.read_dataset(args.x1), cio.read_dataset(args.x2)


def cmd_build_graph(args) -> int:
    data = cio.read_dataset(args.x)
    w = build_weights(data, _graph_config(args, data))
    cio.atomic_write(args.out, cio.matrix_csv(data.ids, w.w))
    return 0


def cmd_embed(args) -> int:
    _check_coupling(args)
    if args.dim < 1:
        raise ConfigError("--dim must be a positive integer")
    x1, x2 = _read_pair(args)
    e = coupled_embedding(
        x1, x2, _graph_config(args, x1), _graph_config(args, x2), args.dim,
        eta=args.eta, alpha=args.alpha, include_null=args.include_null, mixer_phase=args.mixer_phase,
    )
    cio.atomic_write(args.out, cio.embedding_csv(x1.ids, e.y1, x2.ids, e.y2))
    return 0


def _matched(ids_a, ids_b, what: str) -> None:
    if tuple(ids_a) != tuple(ids_b):
        raise DataError(f"ids of {what} do not match the embedding rows")


def cmd_refine(args) -> int:
    cfg = RefineConfig(
        zeta=args.zeta, perplexity=args.perplexity, max_iters=args.iters, initial_step=args.step,
        exponent_mode=ExponentMode(args.exponent), free=args.free,
        similarity=Kind(args.similarity), sigma=args.sigma,
    )
    table = cio.read_embedding(args.embed)
    x1, x2 = _read_pair(args)
    _matched(table.ids1, x1.ids, "--x1")
    _matched(table.ids2, x2.ids, "--x2")
    if len(table.y1) != len(table.y2):
        raise DataError("refine needs equally many rows for both datasets")
    y = table.y1 + 1j * table.y2
    # columns of a valid embedding are orthonormal, so Y itself is the basis
    e = Embedding(y, y, np.eye(y.shape[1], dtype=np.complex128))
    if e.orthonormality_residual() > 1e-6 and not cfg.free:
        raise DataError("embedding columns are not orthonormal; use --free or re-run embed")
    res = refine(e, x1, x2, cfg)
    out = res.embedding
    cio.atomic_write(args.out, cio.embedding_csv(x1.ids, out.y1, x2.ids, out.y2))
    if args.trace:
        cio.atomic_write(args.trace, cio.trace_csv(res.trace))
    return 0


def _kernel_spec(args, data: Dataset):
    if args.kernel == "linear":
        return Linear()
    if args.kernel == "poly":
        if args.degree < 1:
            raise ConfigError("--degree must be a positive integer")
        if args.offset < 0:
            raise ConfigError("--offset must be nonnegative")
        return Polynomial(args.degree, args.offset)
    if args.kernel_t is not None and args.kernel_t == 0:
        raise ConfigError("--kernel-t must be nonzero")
    return GaussianRBF(median_sq_distance(data) if args.kernel_t is None else args.kernel_t)


def cmd_kernel_align(args) -> int:
    cfg = AlignConfig(
        p=args.dim, rbf_t=args.t, lambda1=args.lambda1, lambda2=args.lambda2, max_iters=args.iters,
        step=args.step, seed=args.seed, strict_distortion=args.strict_paper_distortion,
    )
    x1, x2 = _read_pair(args)
    model = align(gram_matrix(x1, _kernel_spec(args, x1)), gram_matrix(x2, _kernel_spec(args, x2)), cfg)
    z1, z2 = model.z1, model.z2
    split = bool(np.any(z1.imag) or np.any(z2.imag))
    rows1, rows2 = latent_columns(z1, split), latent_columns(z2, split)
    cio.atomic_write(args.out, cio.embedding_csv(x1.ids, rows1, x2.ids, rows2))
    if args.trace:
        cio.atomic_write(args.trace, cio.trace_csv(model.trace))
    return 0


def cmd_verify(args) -> int:
    report = run_verification(args.seed, args.n, args.trials)
    text = report.text()
    if args.out:
        cio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else EXIT_NUMERIC


def cmd_indicator(args) -> int:
    _check_coupling(args)
    x1, x2 = _read_pair(args)
    if x1.n != x2.n:
        raise DataError("indicator needs equal point counts")
    g = coupled_weight(
        build_weights(x1, _graph_config(args, x1)), build_weights(x2, _graph_config(args, x2)),
        args.eta, 1 - args.eta, args.alpha, 1 - args.alpha,
    )
    lap = build_laplacian(g)
    f = indicator(g.w, g.d, g.theta)
    ref = x1.n * np.exp(1j * g.theta)
    sys.stdout.write(
        f"f_re,f_im,n_exp_re,n_exp_im,theta\n"
        f"{cio.fmt(f.real)},{cio.fmt(f.imag)},{cio.fmt(ref.real)},{cio.fmt(ref.imag)},{cio.fmt(lap.theta)}\n"
    )
    return 0


def cmd_eval(args) -> int:
    table = cio.read_embedding(args.embed)
    if set(table.ids1) == set(table.ids2):
        order = {i: k for k, i in enumerate(table.ids2)}
        y2 = table.y2[[order[i] for i in table.ids1]]
    elif len(table.ids1) == len(table.ids2):
        y2 = table.y2
    else:
        raise DataError("eval needs matching ids or equal row counts")
    sys.stdout.write(f"align_error,{cio.fmt(align_error(table.y1, y2))}\n")
    return 0


def cmd_plot(args) -> int:
    table = cio.read_embedding(args.embed)
    cio.atomic_write(args.out, render_svg(table, pairs=args.pairs))
    return 0


COMMANDS = {
    "build-graph": cmd_build_graph,
    "embed": cmd_embed,
    "refine": cmd_refine,
    "kernel-align": cmd_kernel_align,
    "verify": cmd_verify,
    "indicator": cmd_indicator,
    "eval": cmd_eval,
    "plot": cmd_plot,
}


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    try:
        args = _apply_config(build_parser(), argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
