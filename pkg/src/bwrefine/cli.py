"""Command-line front end.

Exit codes: 0 success, 1 invalid input or decomposition, 2 rankwidth above the
target, 3 a size guard refused the instance.
"""
import argparse
import sys
from dataclasses import dataclass

from .branchwidth import approximate_branchwidth
from .connectivity import BorderSize, CutRank, Graph
from .decomposition import bits, format_decomposition, parse_decomposition, side_masks, width_of
from .errors import (InternalInvariantFailure, InvalidGraph, NoDecomposition, ParseError,
                     RankwidthExceedsK, RefusedEnumeration, WidthCapExceeded)
from .oracle import MAX_ENUM_LEAVES, exact_width
from .rankwidth.structure import DEFAULT_CAP, approximate_rankwidth

EXIT_OK, EXIT_INVALID, EXIT_EXCEEDS, EXIT_GUARD = 0, 1, 2, 3
MODES = ("branchwidth", "rankwidth")


@dataclass
class RunConfig:
    mode: str
    input: str
    output: str = None
    target_k: int = None
    assert_invariants: bool = False
    trace: str = None
    oracle_max: int = MAX_ENUM_LEAVES
    cap: int = DEFAULT_CAP
    dump_reps: str = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.target_k is not None and self.target_k < 0:
            raise ValueError("target k must be non-negative")


def parse_graph_text(text):
    """Edge list with 1-indexed vertex ids; `#` lines are comments."""
    edges = []
    n = 0
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise ParseError(no, f"expected 'u v', got {s!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(no, f"non-integer vertex in {s!r}") from None
        if u < 1 or v < 1:
            raise ParseError(no, "vertex ids start at 1")
        edges.append((u - 1, v - 1))
        n = max(n, u, v)
    return Graph(n, edges)


def parse_graph(path):
    with open(path) as fh:
        return parse_graph_text(fh.read())


def _ground(g, mode):
    """Connectivity oracle and label -> element map for the mode."""
    if mode == "branchwidth":
        return BorderSize(g), {g.edge_label(i): i for i in range(len(g.edges))}
    return CutRank(g), {g.labels[v]: v for v in range(g.n)}


def _labels(g, mode):
    if mode == "branchwidth":
        return [g.edge_label(i) for i in range(len(g.edges))]
    return g.labels


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def format_reps(aug):
    """Augmentation dump: `rep <i> <j> : v1 v2 ...` per directed edge."""
    T = aug.tree
    ren = {x: i for i, x in enumerate(T.nodes())}
    lines = []
    for (a, b), R in sorted(aug.reps.items(), key=lambda kv: (ren[kv[0][0]], ren[kv[0][1]])):
        lines.append(f"rep {ren[a]} {ren[b]} : " + " ".join(aug.g.labels[v] for v in bits(R)))
    return "\n".join(lines) + "\n"


def cmd_compute(cfg):
    g = parse_graph(cfg.input)
    trace = [] if cfg.trace else None
    code = EXIT_OK
    try:
        if cfg.mode == "branchwidth":
            T, w, flag = approximate_branchwidth(g, check=cfg.assert_invariants, trace=trace)
            aug = None
        else:
            aug, w, flag = approximate_rankwidth(g, k=cfg.target_k, cap=cfg.cap,
                                                 check=cfg.assert_invariants, trace=trace)
            T = aug.tree
    except RankwidthExceedsK as e:
        print(f"exceeds_k k={e.k} width={e.width}")
        T = None
        code = EXIT_EXCEEDS
    except (WidthCapExceeded, NoDecomposition) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GUARD
    if trace is not None:
        _write(cfg.trace, "\n".join(trace) + ("\n" if trace else ""))
    if T is None:
        return code
    _write(cfg.output, format_decomposition(T, cfg.mode, _labels(g, cfg.mode)))
    if cfg.dump_reps and aug is not None:
        _write(cfg.dump_reps, format_reps(aug))
    print(f"width={w} two_approx={str(flag).lower()}")
    return code


def cmd_verify(cfg, decomposition):
    g = parse_graph(cfg.input)
    f, index = _ground(g, cfg.mode)
    with open(decomposition) as fh:
        text = fh.read()
    try:
        mode, T = parse_decomposition(text, index)
        if mode != cfg.mode:
            raise ValueError(f"decomposition is for {mode}, not {cfg.mode}")
        if T.n_elements != len(index):
            raise ValueError(f"{T.n_elements} leaves for {len(index)} elements")
        T.validate()
    except (ValueError, InternalInvariantFailure) as e:
        print(f"invalid: {e}")
        return EXIT_INVALID
    w, _ = width_of(T, f)
    # from-scratch recomputation on every edge
    sides = side_masks(T)
    w2 = max(f(sides[(a, b)]) for a, b in T.edges())
    if w != w2:
        print("invalid: width recomputation disagrees")
        return EXIT_INVALID
    print(f"valid width={w}")
    return EXIT_OK


def cmd_oracle(cfg):
    g = parse_graph(cfg.input)
    f, _ = _ground(g, cfg.mode)
    if f.n > min(cfg.oracle_max, MAX_ENUM_LEAVES):
        print(f"error: oracle limited to {min(cfg.oracle_max, MAX_ENUM_LEAVES)} elements, got {f.n}",
              file=sys.stderr)
        return EXIT_GUARD
    try:
        w, T = exact_width(f)
    except RefusedEnumeration as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GUARD
    _write(cfg.output, format_decomposition(T, cfg.mode, _labels(g, cfg.mode)))
    print(f"width={w}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="bwrefine", description="Branchwidth and rankwidth 2-approximation.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--mode", required=True, choices=MODES)
        sp.add_argument("--input", required=True, help="edge list, one 'u v' per line")

    c = sub.add_parser("compute", help="run the approximator")
    common(c)
    c.add_argument("--output", help="decomposition file (default stdout)")
    c.add_argument("--target-k", type=int)
    c.add_argument("--assert", dest="assert_invariants", action="store_true",
                   help="check every invariant from scratch (slow)")
    c.add_argument("--trace", help="write the refinement trace here")
    c.add_argument("--cap", type=int, default=DEFAULT_CAP, help="rankwidth structure width cap")
    c.add_argument("--dump-reps", help="write stored representatives (rankwidth)")

    v = sub.add_parser("verify", help="check a decomposition file and print its width")
    common(v)
    v.add_argument("decomposition")

    o = sub.add_parser("oracle", help="exact width by enumeration (small inputs)")
    common(o)
    o.add_argument("--output", help="witness decomposition file (default stdout)")
    o.add_argument("--max-elements", type=int, default=MAX_ENUM_LEAVES)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            if args.target_k is not None and args.target_k < 0:
                print("error: --target-k must be non-negative", file=sys.stderr)
                return EXIT_INVALID
            cfg = RunConfig(args.mode, args.input, args.output, args.target_k,
                            args.assert_invariants, args.trace, cap=args.cap, dump_reps=args.dump_reps)
            return cmd_compute(cfg)
        if args.command == "verify":
            return cmd_verify(RunConfig(args.mode, args.input), args.decomposition)
        return cmd_oracle(RunConfig(args.mode, args.input, args.output, oracle_max=args.max_elements))
    except (ParseError, InvalidGraph, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
