"""Command-line front end: ``python -m ssdiag <command> ...``.

Exit codes: 0 success or agreement, 1 validation failure or mismatch,
2 usage error, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import tempfile
from pathlib import Path

from . import diagnose, generators, oracle
from .compile import compile_consequence
from .errors import CapExceededError, ParseError, SsdiagError
from .jointree import assign_components, build_jointree, parse_jointree, stats, validate_jointree
from .logic import Instantiation
from .nnf import DEFAULT_MODEL_CAP
from .ssd import SSD, cut_arcs, deshare_assumables, format_observation, format_ssd, parse_observation, parse_ssd, shared_assumables, validate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the same directory, so failures leave nothing behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args) -> tuple[SSD, Instantiation]:
    ssd = parse_ssd(_read(args.ssd))
    obs_path = getattr(args, "obs", None)
    obs = parse_observation(_read(obs_path), ssd) if obs_path else Instantiation()
    return ssd, obs


def _cost(choice: str, ssd: SSD) -> diagnose.CostFunction:
    if choice == "card":
        return diagnose.make_cardinality(ssd.assumables)
    if choice.startswith("kappa:"):
        return diagnose.make_kappa(ssd.assumables, _read(choice[len("kappa:"):]))
    raise UsageError(f"unknown cost function {choice!r}; use 'card' or 'kappa:<path>'")


def _compile(args, ssd: SSD, obs: Instantiation):
    jt = assignment = pivot = None
    if args.jointree:
        if args.cut_arcs:
            raise UsageError("--jointree cannot be combined with --cut-arcs")
        jt, assignment = parse_jointree(_read(args.jointree), ssd)
        report = validate_jointree(ssd, jt)
        if not report.ok:
            raise SsdiagError(f"invalid jointree:\n{report}")
        assignment = assign_components(ssd, jt, assignment)
        report = validate_jointree(ssd, jt, assignment)
        if not report.ok:
            raise SsdiagError(f"invalid component assignment:\n{report}")
    if args.pivot is not None:
        if jt is None:
            raise UsageError("--pivot needs --jointree")
        try:
            pivot = jt.clique_index(args.pivot)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
    return compile_consequence(
        ssd, obs, jointree=jt, assignment=assignment, pivot=pivot,
        cut=args.cut_arcs, simplify=args.simplify, cap=args.cap,
    )


# -- commands -------------------------------------------------------------------


def cmd_validate(args) -> int:
    ssd = parse_ssd(_read(args.ssd))
    report = validate(ssd, args.level, cap=args.cap)
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_stats(args) -> int:
    ssd, obs = _load(args)
    if shared_assumables(ssd):
        ssd = deshare_assumables(ssd)
    observed = set(obs.variables)
    jt = build_jointree(ssd)
    st = stats(jt, observed)
    print(f"cliques {st.cliques}")
    print(f"width {st.width}")
    print(f"predicted_cost {st.predicted_cost}")
    if args.cut_arcs:
        pieces = cut_arcs(ssd, obs)
        piece_stats = [stats(build_jointree(p), {v for v in po.variables}) for p, po in pieces]
        print(f"pieces {len(pieces)}")
        print(f"cut_width {max(s.width for s in piece_stats)}")
        print(f"cut_predicted_cost {sum(s.predicted_cost for s in piece_stats)}")
    return EXIT_OK


def cmd_compile(args) -> int:
    ssd, obs = _load(args)
    result = _compile(args, ssd, obs)
    if args.output:
        write_atomic(args.output, result.graph.serialize())
    else:
        sys.stdout.write(result.graph.serialize())
    report = result.report()
    if args.stats:
        write_atomic(args.stats, report)
    else:
        sys.stderr.write(report)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    ssd, obs = _load(args)
    cf = _cost(args.cost, ssd)
    result = _compile(args, ssd, obs)
    found = diagnose.minimal_diagnoses(ssd.assumables, result.graph, cf)
    sys.stdout.write(found.format())
    return EXIT_OK


def cmd_oracle(args) -> int:
    ssd, obs = _load(args)
    if args.cost:
        sys.stdout.write(oracle.brute_minimal(ssd, obs, _cost(args.cost, ssd), cap=args.cap).format())
    else:
        found = oracle.brute_diagnoses(ssd, obs, cap=args.cap)
        lines = sorted(str(d) for d in found)
        sys.stdout.write("\n".join([f"diagnoses {len(lines)}"] + lines) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    ssd, obs = _load(args)
    cf = _cost(args.cost, ssd)
    result = _compile(args, ssd, obs)
    g = result.graph
    checks = []
    models = g.enumerate_models(ssd.assumables, cap=args.cap)
    checks.append(("models equal brute-force diagnoses", models == oracle.brute_diagnoses(ssd, obs, cap=args.cap)))
    checks.append(("consequence is decomposable", g.is_decomposable()))
    extracted = diagnose.minimal_diagnoses(ssd.assumables, g, cf)
    brute = oracle.brute_minimal(ssd, obs, cf, cap=args.cap)
    checks.append(("extracted minimal diagnoses equal brute force", extracted == brute))
    violations = result.cache_bound_violations()
    checks.append(("per-edge cache bound holds", not violations))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    for v in violations:
        print(f"  {v}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_FAIL


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    if args.kind == "chain-inverters":
        ssd = generators.chain_inverters(args.n)
        obs = Instantiation()
    elif args.kind == "adder":
        ssd = generators.ripple_adder(args.n)
        if args.observation == "phi1":
            obs = generators.adder_observation(ssd, args.n, [0])
        elif args.observation == "phi2":
            obs = generators.adder_observation(ssd, args.n, range(args.n))
        else:
            obs = Instantiation()
    else:
        ssd = generators.random_ssd(rng)
        obs = generators.random_observation(ssd, rng)
    ssd_text, obs_text = format_ssd(ssd), format_observation(obs)
    write_atomic(f"{args.prefix}.ssd", ssd_text)
    write_atomic(f"{args.prefix}.obs", obs_text)
    print(f"wrote {args.prefix}.ssd {args.prefix}.obs")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssdiag", description="Compile system descriptions and extract diagnoses.")
    parser.add_argument("--cap", type=int, default=DEFAULT_MODEL_CAP, help="enumeration cap (default %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_inputs(p, obs_required=True):
        p.add_argument("ssd", help="system description file")
        if obs_required:
            p.add_argument("obs", help="observation file")
        else:
            p.add_argument("obs", nargs="?", help="observation file")

    def with_compile(p):
        p.add_argument("--jointree", help="jointree file (clique/edge/assign lines)")
        p.add_argument("--pivot", help="pivot clique id (requires --jointree)")
        p.add_argument("--cut-arcs", action="store_true", help="cut outgoing arcs of observed nodes first")
        p.add_argument("--simplify", action="store_true", help="fold constants in the output graph")

    p = sub.add_parser("validate", help="check a system description")
    p.add_argument("ssd")
    p.add_argument("--level", choices=("structural", "full"), default="full")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="jointree width and predicted cost")
    with_inputs(p, obs_required=False)
    p.add_argument("--cut-arcs", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compile", help="write the consequence as a DNNF file")
    with_inputs(p)
    with_compile(p)
    p.add_argument("-o", "--output", help="DNNF output path (default stdout)")
    p.add_argument("--stats", help="write the session report here (default stderr)")
    p.set_defaults(func=cmd_compile)

    for name, func, helptext in (
        ("diagnose", cmd_diagnose, "minimal diagnoses via compilation"),
        ("check", cmd_check, "compare compilation against brute force"),
    ):
        p = sub.add_parser(name, help=helptext)
        with_inputs(p)
        with_compile(p)
        p.add_argument("--cost", default="card", help="card or kappa:<ranks-file>")
        p.set_defaults(func=func)

    p = sub.add_parser("oracle", help="brute-force diagnoses")
    with_inputs(p)
    p.add_argument("--cost", help="card or kappa:<ranks-file>; omit to list all diagnoses")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate a system and observation")
    p.add_argument("kind", choices=("chain-inverters", "adder", "random"))
    p.add_argument("prefix", help="writes <prefix>.ssd and <prefix>.obs")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observation", choices=("none", "phi1", "phi2"), default="none",
                   help="adder observation: phi1 = only s0 high, phi2 = all sums high")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cap <= 0:
        parser.error("--cap must be positive")
    if getattr(args, "n", 1) < 1:
        parser.error("--n must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SsdiagError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
