"""Command-line entry point for pathcalc."""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pathcalc import __version__
from pathcalc.config import LOG_LEVEL, PATHCALC_THREADS
from pathcalc.csv_io import path_frame, read_path_csv, write_path_csv, write_table
from pathcalc.errors import InvalidArgument, PathcalcError
from pathcalc.finance import BsParams, binomial_gap, binomial_price, hedge
from pathcalc.generators import (
    FourierPairSpec, KonoSpec, brownian_dyadic, fbm_cholesky, first_passage_skeleton,
    fourier_pair_paths, kono_path, nonexistence_growth, step_path,
)
from pathcalc.messages import get_text
from pathcalc.paths import STYLES, PartitionSequence, SampledPath, make_dyadic_sequence
from pathcalc.product import (
    BACKWARD, FORWARD, doleans, duality_roundtrip, lambda_generator, linear_equation_residual,
)
from pathcalc.stieltjes import (
    LEFT, NAMED_MAPS, RIGHT, chain_rule, chain_rule_residual_path, improper_lc_tail,
    indefinite_integral, lambda_integral,
)
from pathcalc.variation import (
    gladyshev_index, p_variation, quadratic_covariation, quadratic_variation, sigma_p,
    sp_sum,
)
from pathcalc.verify import IdentityVerifier

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_UNEXPECTED = 3
EXIT_USAGE = 2

GEN_KINDS = ("brownian", "fbm", "kono", "step", "skeleton", "fourier")
SIDE_NAMES = {"lc": LEFT, "left": LEFT, "rc": RIGHT, "right": RIGHT}


class Emission(NamedTuple):
    payload: Union[SampledPath, pd.DataFrame]
    status: int = EXIT_OK


@dataclass(frozen=True)
class RunConfig:
    """Options shared by every subcommand."""

    subcommand: str
    input: Optional[str] = None
    output: Optional[str] = None
    depth: Optional[int] = None
    base: Optional[int] = None
    T: Optional[float] = None
    seeds: Tuple[int, ...] = (0,)
    rtol: Optional[float] = None
    fmt: str = "csv"
    style: Optional[str] = None
    lambda_file: Optional[str] = None
    threads: int = PATHCALC_THREADS

    def __post_init__(self):
        if self.depth is not None and self.depth < 1:
            raise InvalidArgument(f"depth must be at least 1, got {self.depth}")
        if not self.seeds:
            raise InvalidArgument("the seed range is empty")
        if self.threads < 1:
            raise InvalidArgument(f"threads must be at least 1, got {self.threads}")
        if self.output is not None and self.output != "-":
            parent = Path(self.output).resolve().parent
            if not parent.is_dir():
                raise InvalidArgument(f"output directory {parent} does not exist")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        seeds = (getattr(args, "seed", None) or 0,)
        if getattr(args, "seeds", None):
            seeds = parse_seed_range(args.seeds)
        return cls(
            subcommand=args.command,
            input=getattr(args, "input", None),
            output=args.output,
            depth=getattr(args, "depth", None),
            base=getattr(args, "base", None),
            T=getattr(args, "T", None),
            seeds=seeds,
            rtol=getattr(args, "rtol", None),
            fmt=args.format,
            style=getattr(args, "style", None),
            lambda_file=getattr(args, "lambda_file", None),
            threads=args.threads or PATHCALC_THREADS,
        )


def parse_seed_range(text: str) -> Tuple[int, ...]:
    """'a:b' is the half-open range a..b-1; a bare integer is one seed."""
    try:
        if ":" not in text:
            return (int(text),)
        a, b = (int(part) for part in text.split(":", 1))
    except ValueError as e:
        raise InvalidArgument(get_text("bad_seed_range", text=text)) from e
    if a < 0 or b <= a:
        raise InvalidArgument(get_text("bad_seed_range", text=text))
    return tuple(range(a, b))


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InvalidArgument(get_text("bad_int_list", text=text)) from e


def _jump_list(text: str) -> List[Tuple[float, float]]:
    jumps = []
    for item in text.split(","):
        if not item.strip():
            continue
        try:
            t, delta = item.split(":")
            jumps.append((float(t), float(delta)))
        except ValueError as e:
            raise InvalidArgument(f"jump '{item}' must look like time:size") from e
    return jumps


def _read_input(config: RunConfig, source: Optional[str] = None) -> SampledPath:
    source = source or config.input
    if source is None:
        raise InvalidArgument(get_text("missing_input", command=config.subcommand))
    if source == "-":
        return read_path_csv(sys.stdin, style=config.style)
    return read_path_csv(source, style=config.style)


def resolve_sequence(config: RunConfig, path: Optional[SampledPath] = None,
                     default_base: int = 2) -> PartitionSequence:
    """The partition sequence from --lambda, from --depth, or inferred from a uniform path grid."""
    if config.lambda_file:
        try:
            text = Path(config.lambda_file).read_text()
            return PartitionSequence.from_json(text)
        except OSError as e:
            raise InvalidArgument(f"cannot read {config.lambda_file}: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise InvalidArgument(f"{config.lambda_file} is not valid JSON: {e}") from e
    base = config.base or default_base
    T = config.T if config.T is not None else (path.grid.end if path is not None else 1.0)
    depth = config.depth
    if depth is None:
        if path is None:
            raise InvalidArgument(get_text("missing_lambda"))
        n = path.grid.n
        guess = int(round(np.log(n) / np.log(base))) if n > 1 else 0
        if guess < 1 or base ** guess != n or path.grid.start != 0.0:
            raise InvalidArgument(get_text("missing_lambda"))
        depth = guess
    return make_dyadic_sequence(T, base, depth)


def _per_level_frame(lam: PartitionSequence, values: Sequence[float], column: str) -> pd.DataFrame:
    return pd.DataFrame({
        "level": np.arange(1, lam.depth + 1),
        "intervals": lam.counts().astype(int),
        column: np.asarray(values, dtype=float),
    })


# Subcommand handlers


def cmd_gen(args: argparse.Namespace, config: RunConfig) -> Emission:
    kind = args.kind
    seed = config.seeds[0]
    T = config.T if config.T is not None else 1.0
    if kind == "brownian":
        path, _ = brownian_dyadic(T, config.depth or 10, seed)
    elif kind == "fbm":
        path = fbm_cholesky(args.H if args.H is not None else 0.5, args.n or 1024, T, seed)
    elif kind == "kono":
        base = config.base or 4
        x = _int_list(args.x) if args.x else [1, 1, 1, -1]
        spec = KonoSpec(base, args.H if args.H is not None else 0.5, tuple(x), config.depth or 7)
        path = kono_path(spec, T)
    elif kind == "step":
        lam = make_dyadic_sequence(T, config.base or 2, config.depth or 4)
        path = step_path(_jump_list(args.jumps or ""), lam, start=args.start)
    elif kind == "skeleton":
        m = args.m or 4
        bridge_seed = None
        if config.input:
            B = _read_input(config)
        else:
            B, _ = brownian_dyadic(2.0 * T, config.depth or _skeleton_depth(m, 2.0 * T), seed)
            bridge_seed = seed
        skeleton = first_passage_skeleton(B, m, bridge_seed=bridge_seed)
        frame = pd.DataFrame({
            "k": np.arange(skeleton.tau.size),
            "calendar": skeleton.calendar,
            "tau": skeleton.tau,
            "level": skeleton.levels,
        })
        return Emission(frame)
    else:
        spec = FourierPairSpec(args.n or 64, args.kmax or 4096, seed)
        X, Y = fourier_pair_paths(spec)
        path = X if args.component == "X" else Y
    logger.info(f"Generated {kind} path with {path.grid.points.size} points")
    return Emission(path)


def cmd_pvar(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    result = p_variation(f, args.p)
    try:
        lam = resolve_sequence(config, f)
        levels = [(m, lam.level(m).n, sp_sum(f, lam.level(m), args.p))
                  for m in range(1, lam.depth + 1)]
    except InvalidArgument:
        if config.lambda_file or config.depth:
            raise
        logger.info("no partition sequence; reporting the sampling grid only")
        levels = [(0, f.grid.n, sp_sum(f, f.grid, args.p))]
    frame = pd.DataFrame(levels, columns=["level", "intervals", "s_p"])
    frame["v_p"] = result.value
    frame["sigma_p"] = sigma_p(f, args.p)
    frame["partition_points"] = result.points.size
    frame["grid_fallback"] = result.fine_partition_fallback
    return Emission(frame)


def cmd_bracket(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    lam = resolve_sequence(config, f)
    result = quadratic_variation(f, lam, rtol=config.rtol)
    if not result.converged:
        logger.warning("bracket is not Cauchy over the last levels")
    if args.per_level:
        frame = _per_level_frame(lam, result.level_finals(), "s_2")
        frame["converged"] = result.converged
        return Emission(frame)
    return Emission(pd.DataFrame({
        "t": result.grid.points,
        "bracket": result.total,
        "continuous": result.continuous_part,
        "jump": result.jump_part,
    }))


def cmd_cov(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    g = _read_input(config, args.other)
    lam = resolve_sequence(config, f)
    result = quadratic_covariation(f, g, lam, rtol=config.rtol)
    if not result.converged:
        logger.warning("covariation is not Cauchy over the last levels")
    return Emission(pd.DataFrame({
        "t": result.grid.points,
        "covariation": result.total,
        "continuous": result.continuous_part,
        "jump": result.jump_part,
    }))


def cmd_index(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    lam = resolve_sequence(config, f)
    kwargs = {} if args.window is None else {"window": args.window}
    estimate = gladyshev_index(f, lam, **kwargs)
    frame = pd.DataFrame(estimate.per_level, columns=["level", "intervals", "s_2", "estimate"])
    frame["fitted"] = estimate.fitted
    frame["window"] = estimate.window
    return Emission(frame)


def cmd_integrate(args: argparse.Namespace, config: RunConfig) -> Emission:
    integrand = _read_input(config)
    integrator = _read_input(config, args.by)
    side = SIDE_NAMES[args.side]
    lam = resolve_sequence(config, integrator)
    if args.indefinite:
        return Emission(indefinite_integral(integrand, integrator, lam, side))
    rtol = {} if config.rtol is None else {"rtol": config.rtol}
    if args.improper:
        estimate = improper_lc_tail(integrand, integrator, lam, **rtol)
    else:
        estimate = lambda_integral(integrand, integrator, lam, side, args.s, args.t, **rtol)
    for check in estimate.jump_checks:
        logger.info(
            f"jump at t={check.time}: predicted {check.predicted_minus:.6g}, "
            f"observed {check.observed_minus:.6g}"
        )
    frame = _per_level_frame(lam, estimate.level_values(), "sum")
    frame["converged"] = estimate.converged
    frame["side"] = "lc" if estimate.side == LEFT else "rc"
    return Emission(frame)


def cmd_chainrule(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    lam = resolve_sequence(config, f)
    phi = NAMED_MAPS[args.phi]
    side = SIDE_NAMES[args.side]
    if args.residual_path:
        residual = chain_rule_residual_path(phi, f, lam, side)
        return Emission(pd.DataFrame({"t": lam.finest.points, "residual": residual}))
    report = chain_rule(phi, f, lam, args.z, args.y, side)
    return Emission(pd.DataFrame([{
        "phi": phi.name,
        "side": "lc" if side == LEFT else "rc",
        "lhs": report.lhs,
        "integral": report.integral_term.value,
        "bracket_term": report.bracket_term,
        "jump_minus": report.jump_correction[0],
        "jump_plus": report.jump_correction[1],
        "residual": report.residual,
        "converged": report.integral_term.converged,
    }]))


def cmd_doleans(args: argparse.Namespace, config: RunConfig) -> Emission:
    f = _read_input(config)
    lam = resolve_sequence(config, f)
    E = doleans(f, lam, args.direction)
    frame = pd.DataFrame({
        "t": E.grid.points,
        "E": E.values,
        "E_right": E.right_limits,
        "jump_product": E.jump_product_part,
    })
    if args.direction == FORWARD:
        frame["residual"] = linear_equation_residual(f, lam).residual
    return Emission(frame)


def cmd_duality(args: argparse.Namespace, config: RunConfig) -> Emission:
    g = _read_input(config)
    lam = resolve_sequence(config, g)
    price = _read_input(config, args.price) if args.price else None
    report = duality_roundtrip(g, lam, price)
    return Emission(pd.DataFrame([{
        "generator_gap": report.generator_gap,
        "ratio_gap": report.ratio_gap,
    }]))


def cmd_generator(args: argparse.Namespace, config: RunConfig) -> Emission:
    U0 = _read_input(config)
    lam = resolve_sequence(config, U0)
    L = lambda_generator(U0, lam)
    if args.per_level:
        return Emission(_per_level_frame(lam, [v for _, v in L.evolution_sums], "evolution_sum"))
    return Emission(pd.DataFrame({"t": L.grid.points, "generator": L.values}))


def cmd_hedge(args: argparse.Namespace, config: RunConfig) -> Emission:
    P = _read_input(config)
    lam = resolve_sequence(config, P)
    kwargs = {} if args.bracket_rtol is None else {"bracket_rtol": args.bracket_rtol}
    params = BsParams(args.K, args.r, args.sigma, lam.T)
    report = hedge(params, P, lam, **kwargs)
    if args.summary:
        return Emission(pd.DataFrame([{
            "sup_residual": report.sup_residual,
            "scale": report.scale,
            "terminal_payoff_gap": report.terminal_payoff_gap,
            "bracket_gap": report.bracket_gap,
            "gain_tail": report.gain_tail.value,
            "gain_tail_converged": report.gain_tail.converged,
        }]))
    return Emission(pd.DataFrame({
        "t": report.grid.points,
        "P": report.P,
        "V": report.V,
        "G": report.G,
        "alpha": report.alpha,
        "beta": report.beta,
        "residual": report.residual,
    }))


def _skeleton_depth(m: int, horizon: float) -> int:
    """Smallest base-2 depth whose mesh on [0, horizon] is at most 2**(-2m-6)."""
    return int(np.ceil(2 * m + 6 + np.log2(horizon)))


def cmd_binomial(args: argparse.Namespace, config: RunConfig) -> Emission:
    T = config.T if config.T is not None else 1.0
    m = args.m
    depth = config.depth or _skeleton_depth(m, 2.0 * T)

    def one(seed: int):
        B, _ = brownian_dyadic(2.0 * T, depth, seed)
        skeleton = first_passage_skeleton(B, m, bridge_seed=seed)
        return skeleton, B

    if len(config.seeds) == 1 and args.price_path:
        skeleton, _ = one(config.seeds[0])
        return Emission(binomial_price(skeleton, T=T))

    rows = []
    for seed in config.seeds:
        skeleton, B = one(seed)
        gap = binomial_gap(skeleton, B, T=T)
        rows.append({"seed": seed, "m": m, "steps": gap.steps,
                     "calendar_gap": gap.calendar_gap, "coupled_gap": gap.coupled_gap})
    return Emission(pd.DataFrame(rows))


def cmd_nonex(args: argparse.Namespace, config: RunConfig) -> Emission:
    n_list = _int_list(args.n_list)
    seed = config.seeds[0]
    reps = args.reps
    if getattr(args, "seeds", None):
        reps = len(config.seeds)
    summary = nonexistence_growth(n_list, args.kmax, reps, seed=seed, threads=config.threads)
    return Emission(pd.DataFrame({
        "n": summary.n_list,
        "ln_n": np.log(np.array(summary.n_list, dtype=float)),
        "exact_mean": summary.exact_means,
        "lower_bound": summary.lower_bounds,
        "sample_mean": summary.sample_means,
        "sample_var": summary.sample_vars,
        "slope": summary.slope,
    }))


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> Emission:
    only = [name.strip() for name in args.only.split(",")] if args.only else None
    verifier = IdentityVerifier(quick=args.quick, threads=config.threads, only=only)
    results = verifier.run()
    passed = sum(r.passed for r in results)
    logger.info(get_text("verify_summary", passed=passed, total=len(results),
                         mode="quick" if args.quick else "full",
                         elapsed=sum(r.elapsed for r in results)))
    frame = pd.DataFrame([{"check": r.name, "passed": r.passed, "detail": r.detail,
                           "seconds": r.elapsed} for r in results])
    status = EXIT_OK if passed == len(results) else EXIT_FAILED_CHECKS
    return Emission(frame, status)


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], Emission]] = {
    "gen": cmd_gen,
    "pvar": cmd_pvar,
    "bracket": cmd_bracket,
    "cov": cmd_cov,
    "index": cmd_index,
    "integrate": cmd_integrate,
    "chainrule": cmd_chainrule,
    "doleans": cmd_doleans,
    "duality": cmd_duality,
    "generator": cmd_generator,
    "hedge": cmd_hedge,
    "binomial": cmd_binomial,
    "nonex": cmd_nonex,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="overrides PATHCALC_LOG_LEVEL")
    common.add_argument("--threads", type=int, default=None,
                        help="overrides PATHCALC_THREADS")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("-i", "--input", help="path CSV ('-' for stdin)")
    source.add_argument("--style", choices=STYLES, help="overrides the style declared in the file")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--lambda", dest="lambda_file", help="partition sequence JSON descriptor")
    grid.add_argument("--T", type=float, default=None, help="interval end")
    grid.add_argument("--base", type=int, default=None)
    grid.add_argument("--depth", "--levels", dest="depth", type=int, default=None)
    grid.add_argument("--rtol", type=float, default=None,
                      help="relative tolerance of the Cauchy-in-level verdict")

    seeding = argparse.ArgumentParser(add_help=False)
    seeding.add_argument("--seed", type=int, default=0)
    seeding.add_argument("--seeds", default=None, help="seed range a:b")

    parser = argparse.ArgumentParser(
        prog="pathcalc", allow_abbrev=False,
        description="Pathwise quadratic-variation calculus on sampled paths",
        epilog="exit codes: 0 ok, 1 failed checks, 2 usage or input error, 3 internal error",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, parents: list, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common] + parents, help=help_text, allow_abbrev=False)

    p = add("gen", [source, grid, seeding], "generate a path")
    p.add_argument("kind", choices=GEN_KINDS)
    p.add_argument("--H", type=float, default=None, help="Hurst or scale exponent")
    p.add_argument("--n", type=int, default=None, help="fBm grid size or Fourier grid size")
    p.add_argument("--kmax", type=int, default=None, help="Fourier truncation")
    p.add_argument("--x", default=None, help="Kono signs, e.g. 1,1,1,-1")
    p.add_argument("--jumps", default=None, help="step jumps as time:size,...")
    p.add_argument("--start", type=float, default=0.0, help="step path start value")
    p.add_argument("--m", type=int, default=None, help="skeleton level")
    p.add_argument("--component", choices=("X", "Y"), default="X")

    p = add("pvar", [source, grid], "p-variation and level sums")
    p.add_argument("--p", type=float, required=True)

    p = add("bracket", [source, grid], "quadratic lambda-variation")
    p.add_argument("--per-level", action="store_true", help="emit s_2 per level")

    p = add("cov", [source, grid], "quadratic lambda-covariation")
    p.add_argument("--with", dest="other", required=True, help="second path CSV")

    p = add("index", [source, grid], "p-variation index estimate")
    p.add_argument("--window", type=int, default=None)

    p = add("integrate", [source, grid], "Left/Right Cauchy lambda-integral")
    p.add_argument("--by", required=True, help="integrator path CSV")
    p.add_argument("--side", choices=sorted(SIDE_NAMES), default="lc")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--indefinite", action="store_true", help="emit the indefinite integral path")
    p.add_argument("--improper", action="store_true",
                   help="Left Cauchy integral up to the last interior level point")

    p = add("chainrule", [source, grid], "chain rule decomposition")
    p.add_argument("--phi", choices=sorted(NAMED_MAPS), default="square")
    p.add_argument("--side", choices=sorted(SIDE_NAMES), default="lc")
    p.add_argument("--z", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--residual-path", action="store_true")

    p = add("doleans", [source, grid], "Doleans exponential")
    p.add_argument("--direction", choices=(FORWARD, BACKWARD), default=FORWARD)

    p = add("duality", [source, grid], "return/price round trips")
    p.add_argument("--price", default=None, help="price path CSV (default E(g))")

    p = add("generator", [source, grid], "evolution lambda-generator")
    p.add_argument("--per-level", action="store_true", help="emit raw evolution sums")

    p = add("hedge", [source, grid], "Black-Scholes hedge along a price path")
    p.add_argument("--path", dest="input", help="price path CSV")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--bracket-rtol", type=float, default=None)
    p.add_argument("--summary", action="store_true")

    p = add("binomial", [grid, seeding], "binomial price on a first-passage skeleton")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--price-path", action="store_true", help="emit P_m for a single seed")

    p = add("nonex", [seeding], "growth of the Fourier pair Cauchy sums")
    p.add_argument("--n-list", default="16,64,256,1024")
    p.add_argument("--kmax", type=int, default=2 ** 14)
    p.add_argument("--reps", type=int, default=500)

    p = add("verify", [], "run the identity suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", default=None, help="comma-separated check names")

    return parser


def emit(payload: Union[SampledPath, pd.DataFrame], config: RunConfig) -> None:
    """Write a path or a table to -o or stdout."""
    target = sys.stdout if config.output in (None, "-") else config.output
    if isinstance(payload, SampledPath):
        if config.fmt == "csv":
            write_path_csv(target, payload)
        else:
            write_table(target, path_frame(payload), "json")
        rows = payload.grid.points.size
    else:
        write_table(target, payload, config.fmt)
        rows = len(payload)
    if target is not sys.stdout:
        logger.info(get_text("written", rows=rows, target=target))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, dispatch and emit; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    logging.basicConfig(
        format="[%(asctime)s] [%(levelname)s] [%(name)s] - %(message)s",
        level=args.log_level or LOG_LEVEL,
        stream=sys.stderr,
        force=True,
    )

    try:
        config = RunConfig.from_args(args)
        result = COMMANDS[args.command](args, config)
        emit(result.payload, config)
        return result.status
    except PathcalcError as e:
        print(get_text("error", detail=e), file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        print(get_text("unexpected_error", detail=e), file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
