"""
Command-line front end.

Exit codes: 0 success, 1 semantic failure (oracle disagreement, counter
bound violation, failed round trip), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from detrelay.gf2 import rank
from detrelay.mdfs import RANK_SAFE, ARRIVING_EDGE, unicast_capacity
from detrelay.network import (
    InvalidNetworkError,
    LayeredNetwork,
    NetworkParseError,
    check_valid,
    gen_random,
    load,
    serialize,
)
from detrelay.oracle import (
    DEFAULT_CUT_BOUND,
    DEFAULT_PATH_BOUND,
    OracleSizeError,
    max_independent_paths_bruteforce,
    min_cut_capacity,
    verify_paths_independent,
)
from detrelay.scheme import (
    decode,
    extract_scheme,
    parse_scheme,
    serialize_scheme,
    simulate,
    transfer_matrix,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REPORT_SCHEMA = 1

log = logging.getLogger("detrelay")


class UsageError(Exception):
    """Bad input; maps to exit 2."""


def _load_network(path: str) -> LayeredNetwork:
    try:
        net = load(path)
        check_valid(net)
        return net
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except InvalidNetworkError as exc:
        raise UsageError(f"{path}: invalid network: " + "; ".join(exc.violations)) from None
    except NetworkParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None


def _dump_instance(net: LayeredNetwork, reason: str, dump_dir: str | None, tag: str) -> None:
    print(f"FAIL {tag}: {reason}", file=sys.stderr)
    if dump_dir:
        out = Path(dump_dir) / f"{tag}.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(serialize(net))
        print(f"instance written to {out}", file=sys.stderr)
    else:
        sys.stderr.write(serialize(net))


# --- capacity -------------------------------------------------------------


def run_report(net: LayeredNetwork, result, wall: float, oracle: dict | None = None) -> dict:
    """Schema-stable report of one capacity run."""
    n_tx = len(net.transmitting_nodes)
    violations = [v for c in result.counters for v in c.bound_violations(n_tx)]
    return {
        "schema": REPORT_SCHEMA,
        "capacity": result.capacity,
        "iterations": len(result.counters),
        "transmitting_levels": n_tx,
        "wall_time_s": round(wall, 6),
        "counters": [c.as_dict() for c in result.counters],
        "bound_violations": violations,
        "oracle": oracle,
    }


def cmd_capacity(args) -> int:
    net = _load_network(args.file)
    t0 = time.perf_counter()
    result = unicast_capacity(net, debug=args.debug, type3_rule=args.type3_rule)
    wall = time.perf_counter() - t0
    print(result.capacity)
    if args.paths_out:
        _write(args.paths_out, serialize_scheme(net, extract_scheme(net, result.paths)))
    report = run_report(net, result, wall)
    if args.report_json:
        _write(args.report_json, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if report["bound_violations"]:
        for v in report["bound_violations"]:
            print(f"counter bound exceeded: {v}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- check ----------------------------------------------------------------


def check_instance(net: LayeredNetwork, cut_bound: int, path_bound: int,
                   debug: bool = False) -> tuple[list[str], dict]:
    """Compare the search with both oracles; returns (problems, verdict)."""
    result = unicast_capacity(net, debug=debug)
    cut_value, _ = min_cut_capacity(net, bound=cut_bound)
    try:
        brute = max_independent_paths_bruteforce(net, bound=path_bound)
    except OracleSizeError:
        brute = None
    problems = []
    if result.capacity != cut_value:
        problems.append(f"search found {result.capacity}, min cut is {cut_value}")
    if brute is not None and brute != cut_value:
        problems.append(f"path enumeration found {brute}, min cut is {cut_value}")
    if not verify_paths_independent(net, list(result.paths)):
        problems.append("returned paths are not independent")
    n_tx = len(net.transmitting_nodes)
    for c in result.counters:
        problems.extend(c.bound_violations(n_tx))
    verdict = {"search": result.capacity, "min_cut": cut_value, "path_enumeration": brute,
               "agree": not problems}
    return problems, verdict


def cmd_check(args) -> int:
    if args.fuzz:
        return _fuzz(args)
    if not args.file:
        raise UsageError("check needs a network file or --fuzz N")
    net = _load_network(args.file)
    try:
        problems, verdict = check_instance(net, args.oracle_bound, args.path_bound, args.debug)
    except OracleSizeError as exc:
        raise UsageError(str(exc)) from None
    if problems:
        _dump_instance(net, "; ".join(problems), args.dump_dir, Path(args.file).stem)
        return EXIT_FAIL
    print(f"ok capacity={verdict['min_cut']} path_enumeration={verdict['path_enumeration']}")
    return EXIT_OK


def _fuzz(args) -> int:
    densities = args.density if args.density else [0.2, 0.5, 0.8]

    def one(n: int):
        seed = args.seed + n
        net = gen_random(args.layers or 2 + n % 4, args.max_supernodes, args.max_levels,
                         densities[n % len(densities)], seed)
        problems, _ = check_instance(net, args.oracle_bound, args.path_bound, args.debug)
        return seed, net, problems

    failures = 0
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for seed, net, problems in pool.map(one, range(args.fuzz)):
            if problems:
                failures += 1
                _dump_instance(net, "; ".join(problems), args.dump_dir, f"seed{seed}")
    print(f"{args.fuzz - failures}/{args.fuzz} instances agree")
    return EXIT_FAIL if failures else EXIT_OK


# --- gen ------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.layers < 2:
        raise UsageError("--layers must be at least 2")
    if args.max_supernodes < 1 or args.max_levels < 1:
        raise UsageError("--max-supernodes and --max-levels must be positive")
    if not 0.0 <= args.density <= 1.0:
        raise UsageError("--density must lie in [0, 1]")
    net = gen_random(args.layers, args.max_supernodes, args.max_levels, args.density, args.seed)
    text = serialize(net)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- scheme / simulate ----------------------------------------------------


def cmd_scheme(args) -> int:
    net = _load_network(args.file)
    result = unicast_capacity(net)
    s = extract_scheme(net, result.paths)
    tm = transfer_matrix(net, s)
    if rank(tm) != s.k:
        _dump_instance(net, f"transfer matrix has rank {rank(tm)} < {s.k}", args.dump_dir, Path(args.file).stem)
        return EXIT_FAIL
    text = serialize_scheme(net, s)
    if args.output:
        _write(args.output, text)
        print(f"rate {s.k} scheme written to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bits(text: str) -> list[int]:
    if any(ch not in "01" for ch in text):
        raise UsageError(f"message must be a string of 0s and 1s, got {text!r}")
    return [int(ch) for ch in text]


def _fmt(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def cmd_simulate(args) -> int:
    try:
        net, s = parse_scheme(Path(args.scheme).read_text())
        check_valid(net)
    except OSError as exc:
        raise UsageError(f"{args.scheme}: {exc.strerror or exc}") from None
    except InvalidNetworkError as exc:
        raise UsageError(f"{args.scheme}: invalid network: " + "; ".join(exc.violations)) from None
    except NetworkParseError as exc:
        raise UsageError(f"{args.scheme}: {exc}") from None
    if not verify_paths_independent(net, s.paths):
        raise UsageError(f"{args.scheme}: paths are not an independent S-D path set")
    try:
        tm = transfer_matrix(net, s)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.scheme}: inconsistent relay maps ({exc})") from None
    if rank(tm) != s.k:
        _dump_instance(net, f"transfer matrix has rank {rank(tm)} < {s.k}", None, Path(args.scheme).stem)
        return EXIT_FAIL

    if args.message is not None:
        msg = _bits(args.message)
        if len(msg) != s.k:
            raise UsageError(f"message has {len(msg)} bits, scheme rate is {s.k}")
        messages = [msg]
    else:
        if args.random < 0:
            raise UsageError("--random must be non-negative")
        rng = np.random.default_rng(args.seed)
        messages = rng.integers(0, 2, size=(args.random, s.k)).tolist()

    ok = 0
    for msg in messages:
        received = simulate(net, s, msg)
        decoded = decode(s, received, tm)
        good = decoded == list(msg)
        ok += good
        if args.message is not None or args.verbose:
            print(f"sent {_fmt(msg)} received {_fmt(received)} decoded {_fmt(decoded)} "
                  f"{'ok' if good else 'FAIL'}")
    if args.message is None:
        print(f"{ok}/{len(messages)} round trips ok")
    return EXIT_OK if ok == len(messages) else EXIT_FAIL


# --- bench ----------------------------------------------------------------


def cmd_bench(args) -> int:
    """Time the search on generated instances and check the counter bounds."""
    rows = []
    violations = 0
    for n in range(args.instances):
        net = gen_random(args.layers, args.max_supernodes, args.max_levels, args.density, args.seed + n)
        t0 = time.perf_counter()
        result = unicast_capacity(net)
        wall = time.perf_counter() - t0
        report = run_report(net, result, wall)
        violations += len(report["bound_violations"])
        rows.append((result.capacity, wall, sum(c.explorations for c in result.counters)))
    walls = np.array([r[1] for r in rows]) if rows else np.zeros(1)
    caps = [r[0] for r in rows]
    print(f"instances {len(rows)}  total {walls.sum():.3f}s  mean {walls.mean() * 1e3:.2f}ms  "
          f"max {walls.max() * 1e3:.2f}ms")
    if caps:
        print(f"capacity mean {np.mean(caps):.2f} max {max(caps)}  "
              f"explorations mean {np.mean([r[2] for r in rows]):.1f}")
    print(f"counter bound violations {violations}")
    return EXIT_FAIL if violations else EXIT_OK


# --- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="detrelay",
                                description="Unicast capacity of layered linear deterministic relay networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log search progress")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", help="print the unicast capacity of a network file")
    c.add_argument("file")
    c.add_argument("--paths-out", help="write the paths and relay maps as a scheme file")
    c.add_argument("--report-json", help="write the run report (counters, timing) as JSON")
    c.add_argument("--debug", action="store_true", help="run with invariant and shadow checks")
    c.add_argument("--type3-rule", choices=[RANK_SAFE, ARRIVING_EDGE], default=RANK_SAFE,
                   help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_capacity)

    k = sub.add_parser("check", help="cross-check the search against the exhaustive oracles")
    k.add_argument("file", nargs="?")
    k.add_argument("--oracle-bound", type=int, default=DEFAULT_CUT_BOUND,
                   help="max relays for cut enumeration (default %(default)s)")
    k.add_argument("--path-bound", type=int, default=DEFAULT_PATH_BOUND,
                   help="max S-D paths for subset search (default %(default)s)")
    k.add_argument("--debug", action="store_true")
    k.add_argument("--dump-dir", help="write failing instances here instead of stderr")
    k.add_argument("--fuzz", type=int, default=0, metavar="N", help="check N generated instances")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--jobs", type=int, default=1)
    k.add_argument("--layers", type=int, default=0, help="fixed layer count (default cycles 2..5)")
    k.add_argument("--max-supernodes", type=int, default=3)
    k.add_argument("--max-levels", type=int, default=3)
    k.add_argument("--density", type=float, action="append",
                   help="edge probability; repeat to cycle (default 0.2, 0.5, 0.8)")
    k.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate a random layered network")
    g.add_argument("--layers", type=int, default=4)
    g.add_argument("--max-supernodes", type=int, default=3)
    g.add_argument("--max-levels", type=int, default=3)
    g.add_argument("--density", type=float, default=0.5, help="edge probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("scheme", help="export the capacity-achieving relay scheme")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.add_argument("--dump-dir")
    s.set_defaults(func=cmd_scheme)

    m = sub.add_parser("simulate", help="send messages through a scheme file and decode them")
    m.add_argument("scheme")
    grp = m.add_mutually_exclusive_group(required=True)
    grp.add_argument("--message", help="bits to send, e.g. 101")
    grp.add_argument("--random", type=int, metavar="N", help="send N random messages")
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="time the search on generated networks")
    b.add_argument("--instances", type=int, default=100)
    b.add_argument("--layers", type=int, default=5)
    b.add_argument("--max-supernodes", type=int, default=3)
    b.add_argument("--max-levels", type=int, default=3)
    b.add_argument("--density", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"detrelay {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
