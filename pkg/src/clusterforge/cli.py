"""Command-line front end.

Exit codes: 0 success, 1 I/O or format error, 2 domain rejection
(non-bipartite graph, rank-deficient G), 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import graphs
from .errors import (
    ClusterForgeError,
    DimensionMismatch,
    ExtractionInconsistency,
    FormatError,
    InvalidParam,
    NotBipartite,
    NotPositiveDefinite,
    NotSymmetric,
    PartitionMismatch,
    PivotFailure,
    RankDeficient,
)
from .extraction import extract_cluster, resynthesis_check
from .gaussian import nullifier_report, sweep_alpha
from .graphs import ClusterGraph, TMSGraph, bipartite_partition, block_adjacency, partition_from_plus_set
from .spectral import RANK_TOL, spectral_norm, split_signed
from .synthesis import SynthesisFreedom, gpm_from_choice, synthesize_G, verify_orthogonality, verify_sufficiency

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

DEFAULT_ALPHA = 3.0
DEMO_ALPHAS = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
SQUARE_REL_TOL = 1e-9
GHZ_ALPHA, GHZ_MAX_VARIANCE = 10.0, 1e-6
ZERO_LIMIT_ALPHA = 12.0
EXTRACT_RESIDUAL_MAX = 1e-6
ORTHOGONALITY_REL_MAX = 1e-10


class VerificationFailed(ClusterForgeError):
    pass


def default_tol() -> float:
    raw = os.environ.get("CLUSTERFORGE_TOL")
    if raw is None:
        return RANK_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InvalidParam(f"CLUSTERFORGE_TOL must be a number, got {raw!r}") from None
    if not tol > 0:
        raise InvalidParam(f"CLUSTERFORGE_TOL must be positive, got {raw!r}")
    return tol


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text: str, path: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[k]) for r in rows)) for k, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _parse_alphas(text: str) -> list[float]:
    try:
        alphas = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidParam(f"--alphas must be a comma-separated list of numbers, got {text!r}") from None
    if not alphas:
        raise InvalidParam("--alphas is empty")
    return alphas


def _parse_plus(text: str | None, g: ClusterGraph):
    if text is None:
        return None
    try:
        nodes = [int(x) - 1 for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidParam(f"--plus must list 1-based node labels, got {text!r}") from None
    return partition_from_plus_set(g, nodes)


def _graph_partition(text: str, g: ClusterGraph, plus_flag: str | None):
    """Partition from --plus, else an optional "plus_set" key in the graph file, else two-coloring."""
    explicit = _parse_plus(plus_flag, g)
    if explicit is not None:
        return explicit
    data = json.loads(text)
    if "plus_set" in data:
        plus = data["plus_set"]
        if not isinstance(plus, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in plus):
            raise FormatError("'plus_set' must be a list of 1-based node labels")
        return partition_from_plus_set(g, [i - 1 for i in plus])
    return bipartite_partition(g)


def _freedom(spec: str, L: int, m: int) -> SynthesisFreedom:
    if spec == "identity":
        return SynthesisFreedom.identity(L, m)
    if spec == "paper-half":
        return SynthesisFreedom.half(L, m)
    if spec.startswith("file="):
        return SynthesisFreedom.from_json(Path(spec[5:]).read_text())
    raise InvalidParam(f"unknown --freedom {spec!r}; use identity, paper-half or file=PATH")


# --- commands -------------------------------------------------------------


def cmd_partition(args) -> int:
    g = graphs.parse_graph(_read(args.input))
    p = bipartite_partition(g)
    if args.format == "text":
        out = "\n".join(
            [
                f"plus_set:  {[i + 1 for i in p.plus_set]}",
                f"minus_set: {[i + 1 for i in p.minus_set]}",
                f"perm:      {[i + 1 for i in p.perm]}",
                f"A0 ({p.L}x{p.n - p.L}):",
                *("  " + " ".join(_fmt(x) for x in row) for row in p.A0),
            ]
        )
    else:
        out = _dumps(p.to_dict())
    _emit(out, args.output)
    return EXIT_OK


def synthesis_payload(g: ClusterGraph, freedom_spec: str) -> dict:
    """G in the input graph's labeling plus the verification block."""
    p = bipartite_partition(g)
    freedom = _freedom(freedom_spec, p.L, p.n - p.L)
    G_canon = synthesize_G(p.A0, freedom)
    g_plus, g_minus = gpm_from_choice(p.A0, freedom)
    canon_graph, _ = graphs.canonical_permute(g, p)
    ortho = verify_orthogonality(p.A0, g_plus, g_minus)
    suff = {a: verify_sufficiency(canon_graph, G_canon, a) for a in (1.0, 3.0, 5.0)}
    G = G_canon.permuted(np.argsort(p.perm))
    norm = spectral_norm(G.matrix)
    ok = ortho <= ORTHOGONALITY_REL_MAX * max(norm, 1.0) and all(map(math.isfinite, suff.values()))
    ok = ok and suff[1.0] > suff[3.0] > suff[5.0]
    payload = json.loads(graphs.serialize_tms(G))
    payload["plus_set"] = [i + 1 for i in p.plus_set]
    payload["freedom"] = freedom.to_dict()
    payload["verification"] = {
        "orthogonality_residual": ortho,
        "sufficiency_residual": {repr(a): r for a, r in suff.items()},
        "passed": bool(ok),
    }
    return payload


def cmd_synthesize(args) -> int:
    g = graphs.parse_graph(_read(args.input))
    payload = synthesis_payload(g, args.freedom)
    _emit(_dumps(payload), args.output)
    if not payload["verification"]["passed"]:
        raise VerificationFailed("synthesis verification residuals above threshold")
    return EXIT_OK


def cmd_extract(args) -> int:
    G = graphs.parse_tms(_read(args.input))
    result = extract_cluster(G, tol=args.tol)
    residual = resynthesis_check(G, result)
    payload = result.to_dict()
    payload["residual"] = residual
    A = result.cluster_graph_original_order()
    graph_payload = json.loads(graphs.serialize_graph(A))
    graph_payload["plus_set"] = [i + 1 for i in result.plus_modes]
    payload["graph"] = graph_payload
    _emit(_dumps(payload), args.output)
    if args.graph_output:
        _emit(_dumps(graph_payload), args.graph_output)
    if not residual <= EXTRACT_RESIDUAL_MAX:
        raise VerificationFailed(f"resynthesis residual {residual:.3e} above {EXTRACT_RESIDUAL_MAX}")
    return EXIT_OK


def _load_system(args):
    text = _read(args.input)
    g = graphs.parse_graph(text)
    G = graphs.parse_tms(Path(args.tms).read_text())
    if G.n != g.n:
        raise DimensionMismatch(f"graph has {g.n} nodes but G has {G.n} modes")
    p = _graph_partition(text, g, args.plus)
    L = split_signed(G, rank_tol=args.tol).rank_plus
    if L != p.L:
        print(
            f"warning: {p.L} '+' modes but G has {L} positive eigenvalues; pass --plus to choose the shifted modes",
            file=sys.stderr,
        )
    return g, p, G


def _report_text(reports) -> str:
    n = len(reports[0].variances)
    header = ["alpha", *(f"var[{i + 1}]" for i in range(n)), "max"]
    rows = [[_fmt(r.alpha), *(_fmt(v) for v in r.variances), _fmt(r.max_variance)] for r in reports]
    return _table(header, rows)


def cmd_simulate(args) -> int:
    g, p, G = _load_system(args)
    alpha = DEFAULT_ALPHA if args.alpha is None else args.alpha
    report = nullifier_report(g, p, G, alpha)
    if args.format == "text":
        out = _report_text([report])
    elif args.format == "csv":
        out = sweep_alpha(g, p, G, [alpha]).to_csv()
    else:
        out = _dumps(report.to_dict())
    _emit(out, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    g, p, G = _load_system(args)
    alphas = _parse_alphas(args.alphas) if args.alphas else DEMO_ALPHAS
    sweep = sweep_alpha(g, p, G, alphas)
    rate = "n/a" if sweep.decay_rate is None else _fmt(sweep.decay_rate)
    if args.format == "csv":
        out = sweep.to_csv()
    elif args.format == "text":
        out = _report_text(sweep.reports) + f"\ndecay rate: {rate}"
    else:
        out = _dumps(sweep.to_dict())
    _emit(out, args.output)
    print(f"fitted decay rate: {rate}", file=sys.stderr)
    return EXIT_OK


# --- demos ----------------------------------------------------------------


def _demo_square() -> tuple[str, bool]:
    s = 1 / math.sqrt(2)
    A0 = np.array([[-s, s], [s, s]])
    A = ClusterGraph(block_adjacency(A0))
    p = bipartite_partition(A)
    G = synthesize_G(p.A0, SynthesisFreedom.half(2, 2))
    rows, ok = [], True
    for a in DEMO_ALPHAS:
        r = nullifier_report(A, p, G, a)
        expected = 2 * math.exp(-2 * a)
        err = float(np.max(np.abs(r.variances - expected)) / expected)
        ok &= err <= SQUARE_REL_TOL
        rows.append([_fmt(a), *(_fmt(v) for v in r.variances), _fmt(expected), f"{err:.1e}"])
    header = ["alpha", "var[1]", "var[2]", "var[3]", "var[4]", "2exp(-2a)", "rel_err"]
    lines = [
        "square cluster, G = A (B = C = I/2)",
        f"max |G - A| = {_fmt(float(np.max(np.abs(G.matrix - A.adjacency))))}",
        _table(header, rows),
    ]
    return "\n".join(lines), ok


def _demo_ghz(n: int) -> tuple[str, bool]:
    G = TMSGraph(graphs.complete(n).adjacency)
    A = graphs.star(n)
    p = partition_from_plus_set(A, [0])
    alphas = DEMO_ALPHAS + [GHZ_ALPHA]
    reports = [nullifier_report(A, p, G, a) for a in alphas]
    maxes = [r.max_variance for r in reports]
    ok = all(b < a for a, b in zip(maxes, maxes[1:])) and maxes[-1] < GHZ_MAX_VARIANCE
    lines = [
        f"complete TMS graph K{n} -> star cluster centered on mode 1",
        _report_text(reports),
        f"max variance at alpha={_fmt(GHZ_ALPHA)}: {_fmt(maxes[-1])} (threshold {_fmt(GHZ_MAX_VARIANCE)})",
    ]
    return "\n".join(lines), ok


def _demo_synthesized(kind: str, n: int) -> tuple[str, bool]:
    A = graphs.generate(kind, n)
    p = bipartite_partition(A)
    G = synthesize_G(p.A0)
    canon, _ = graphs.canonical_permute(A, p)
    cp = partition_from_plus_set(canon, range(p.L))
    alphas = DEMO_ALPHAS + [ZERO_LIMIT_ALPHA]
    reports = [nullifier_report(canon, cp, G, a) for a in alphas]
    maxes = [r.max_variance for r in reports]
    ok = all(b < a for a, b in zip(maxes, maxes[1:])) and maxes[-1] < GHZ_MAX_VARIANCE
    lines = [
        f"{kind}({n}) cluster, synthesized G (B = I, C = I), canonical order {[i + 1 for i in p.order]}",
        _report_text(reports),
    ]
    return "\n".join(lines), ok


def run_demo(name: str) -> tuple[str, bool]:
    name = name.strip().lower()
    if name == "square":
        return _demo_square()
    if name == "ghz4":
        return _demo_ghz(4)
    m = re.fullmatch(r"(star|chain)\s*[(:]?\s*(\d+)\s*\)?", name)
    if m:
        kind, n = m.group(1), int(m.group(2))
        if n < 1:
            raise InvalidParam("demo size must be >= 1")
        return _demo_synthesized(kind, n)
    raise InvalidParam(f"unknown demo {name!r}; choose square, ghz4, star(n) or chain(n)")


def cmd_demo(args) -> int:
    text, ok = run_demo(args.name)
    _emit(text + f"\nresult: {'PASS' if ok else 'FAIL'}", args.output)
    return EXIT_OK if ok else EXIT_VERIFY


# --- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterforge",
        description="Map bipartite CV cluster graphs to multimode squeezing matrices and back.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "text")):
        p.add_argument("-i", "--input", help="input file (default: stdin)")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")

    p = sub.add_parser("partition", help="two-color a cluster graph")
    common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("synthesize", help="build G for a bipartite cluster graph")
    common(p, ("json",))
    p.add_argument("--freedom", default="identity", help="identity | paper-half | file=PATH")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("extract", help="recover a cluster graph from a full-rank G")
    common(p, ("json",))
    p.add_argument("--graph-output", help="also write the extracted cluster graph here")
    p.set_defaults(func=cmd_extract)

    for name, func in (("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} nullifier variances for a (graph, G) pair")
        common(p, ("json", "csv", "text"))
        p.add_argument("--tms", required=True, help="TMS matrix JSON file")
        p.add_argument("--plus", help="comma-separated 1-based '+' modes (others get the phase shift)")
        if name == "simulate":
            p.add_argument("--alpha", type=float, default=None)
        else:
            p.add_argument("--alphas", default=None, help="comma-separated alpha list")
        p.set_defaults(func=func)

    p = sub.add_parser("demo", help="run a built-in example")
    p.add_argument("name", help="square | ghz4 | star(n) | chain(n)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_demo, tol=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = default_tol()
        elif not args.tol > 0:
            raise InvalidParam("--tol must be positive")
        return args.func(args)
    except (NotBipartite, RankDeficient) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NotBipartite):
            payload["cycle"] = exc.cycle
        print(json.dumps(payload), file=sys.stderr)
        return EXIT_DOMAIN
    except (VerificationFailed, PivotFailure, ExtractionInconsistency) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (
        OSError,
        FormatError,
        InvalidParam,
        NotSymmetric,
        NotPositiveDefinite,
        DimensionMismatch,
        PartitionMismatch,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
