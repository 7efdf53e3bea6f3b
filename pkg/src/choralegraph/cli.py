"""Command-line pipeline over the library: ingest, build-graph, walks, train,
query, agree, classify, experiment.

Every artifact-writing stage also writes a small manifest (inputs, params,
seed, content hash) next to its output so a pipeline run can be audited and
reruns verified byte-for-byte. Exit codes: 0 success, 1 validation error,
2 runtime/numeric error.
"""

import argparse
import hashlib
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import chords as chords_mod
from . import classify as classify_mod
from . import evaluate as evaluate_mod
from . import graph as graph_mod
from . import walks as walks_mod
from .corpus import Selector, load_corpus
from .embedding import TrainConfig, load_encoder, save_encoder, top_k_similar, train_node_embedding

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    # usage mistakes are validation errors: exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float(text: str) -> float:
    value = float(text)
    return value


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _grid(text: str) -> list[tuple[float, float]]:
    """Parse "1,1;0.7,1;1,0.7" into (p, q) pairs."""
    points = []
    for chunk in text.split(";"):
        parts = [p for p in chunk.split(",") if p.strip()]
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"grid point {chunk!r} is not 'p,q'")
        points.append((float(parts[0]), float(parts[1])))
    if not points:
        raise argparse.ArgumentTypeError("empty grid")
    return points


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(stage: str, inputs, params: dict, seed, outputs, manifest_path=None) -> None:
    """One JSON line per output artifact; overwrites so reruns are idempotent."""
    outputs = [str(o) for o in outputs]
    if manifest_path is None:
        manifest_path = outputs[0] + ".manifest"
    entries = []
    for out in outputs:
        entries.append(
            json.dumps(
                {
                    "stage": stage,
                    "inputs": [str(i) for i in inputs],
                    "params": params,
                    "seed": seed,
                    "output": out,
                    "sha256": file_sha256(out),
                },
                sort_keys=True,
            )
        )
    Path(manifest_path).write_text("\n".join(entries) + "\n", encoding="utf-8")


def load_config_file(path) -> dict:
    """key=value lines; '#' starts a comment; keys use flag names."""
    config = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def apply_config(parser: argparse.ArgumentParser, config: dict) -> None:
    """Install config values as parser defaults so explicit flags still win."""
    known = {}
    for action in parser._actions:
        known[action.dest] = action
    for key, raw in config.items():
        if key in ("config",):
            continue
        action = known.get(key)
        if action is None:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            action.default = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            action.default = action.type(raw)
        else:
            action.default = raw
        action.required = False


# ---------------------------------------------------------------- subcommands


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus)
    mode_counts = Counter(rec.mode for rec in corpus.records)
    print(f"{len(corpus.records)} records")
    print(f"{len(corpus.tokens)} vocabulary tokens")
    for mode in ("major", "minor"):
        print(f"{mode}: {mode_counts.get(mode, 0)}")
    return 0


def _chord_embeddings_for(args, corpus):
    if args.chord_embeddings:
        return chords_mod.load_embeddings(args.chord_embeddings)
    return chords_mod.train_chord_embeddings(
        corpus,
        method=args.chord_method,
        dim=args.chord_dim,
        window=args.chord_window,
        epochs=args.chord_epochs,
        lr=args.chord_lr,
        seed=args.seed,
    )


def _xi_tag(xi: float) -> str:
    return repr(xi).replace(".", "p")


def cmd_build_graph(args) -> int:
    if args.out and len(args.xi) != 1:
        raise ValueError("--out takes exactly one --xi value; use --out-prefix for batches")
    if not args.out and not args.out_prefix:
        raise ValueError("one of --out / --out-prefix is required")
    corpus = load_corpus(args.corpus)
    selector = Selector.from_string(args.selector)
    embeddings = _chord_embeddings_for(args, corpus)
    if args.save_chord_embeddings:
        chords_mod.save_embeddings(embeddings, args.save_chord_embeddings)
        write_manifest(
            "chord-embeddings",
            [args.corpus],
            {"method": args.chord_method, "dim": args.chord_dim, "window": args.chord_window,
             "epochs": args.chord_epochs, "lr": args.chord_lr},
            args.seed,
            [args.save_chord_embeddings],
        )
    outputs = []
    for xi in args.xi:
        g = graph_mod.build_graph(corpus, embeddings, selector, xi)
        out = Path(args.out) if args.out else Path(f"{args.out_prefix}_xi{_xi_tag(xi)}.graph")
        graph_mod.save_graph(g, out)
        stats = graph_mod.graph_stats(g)
        print(
            f"graph {out}: xi={xi!r} nodes={stats.num_nodes} edges={stats.num_edges} "
            f"avg_degree={stats.avg_degree:.2f}"
        )
        outputs.append(out)
    write_manifest(
        "build-graph",
        [args.corpus] + ([args.chord_embeddings] if args.chord_embeddings else []),
        {"selector": str(selector), "xi": [repr(x) for x in args.xi],
         "chord_method": args.chord_method, "chord_dim": args.chord_dim,
         "chord_window": args.chord_window, "chord_epochs": args.chord_epochs,
         "chord_lr": args.chord_lr},
        args.seed,
        outputs,
        args.manifest,
    )
    return 0


def cmd_walks(args) -> int:
    g = graph_mod.load_graph(args.graph)
    ws = walks_mod.generate_walks(
        g,
        walks_per_node=args.walks_per_node,
        walk_length=args.walk_length,
        p=args.p,
        q=args.q,
        seed=args.seed,
    )
    walks_mod.save_walks(ws, args.out)
    print(f"{len(ws.walks)} walks over {g.num_nodes} nodes -> {args.out}")
    write_manifest(
        "walks",
        [args.graph],
        {"p": args.p, "q": args.q, "walk_length": args.walk_length,
         "walks_per_node": args.walks_per_node},
        args.seed,
        [args.out],
        args.manifest,
    )
    return 0


def cmd_train(args) -> int:
    g = graph_mod.load_graph(args.graph)
    walks = walks_mod.load_walks(args.walks)
    for walk in walks:
        for node in walk:
            if not 0 <= node < g.num_nodes:
                raise ValueError(f"walk node {node} out of range for graph {args.graph}")
    cfg = TrainConfig(
        dim=args.dim, epochs=args.epochs, lr=args.lr,
        negatives=args.negatives, window=args.window, seed=args.seed,
    )
    model = train_node_embedding(g, walks, args.method, cfg)
    save_encoder(model, args.out)
    print(
        f"trained {args.method} encoder: {model.num_nodes} nodes, dim {model.dim}, "
        f"final epoch loss {model.epoch_losses[-1]:.4f} -> {args.out}"
    )
    write_manifest(
        "train",
        [args.graph, args.walks],
        {"method": args.method, "dim": args.dim, "epochs": args.epochs, "lr": args.lr,
         "negatives": args.negatives, "window": args.window},
        args.seed,
        [args.out],
        args.manifest,
    )
    return 0


def cmd_query(args) -> int:
    g = graph_mod.load_graph(args.graph)
    model = load_encoder(args.embeddings)
    if model.num_nodes != g.num_nodes:
        raise ValueError(
            f"embeddings cover {model.num_nodes} nodes but graph has {g.num_nodes}"
        )
    u = g.node_index(args.node)
    for rank, (v, cos) in enumerate(top_k_similar(model, u, args.k), start=1):
        print(f"{rank:2d} {g.ids[v]} {cos:.4f}")
    return 0


def cmd_agree(args) -> int:
    corpus = load_corpus(args.corpus)
    g = graph_mod.load_graph(args.graph)
    selector = Selector.from_string(args.selector)
    embeddings = _chord_embeddings_for(args, corpus)
    cfg = TrainConfig(
        dim=args.dim, epochs=args.epochs, lr=args.lr,
        negatives=args.negatives, window=args.window, seed=args.seed,
    )
    reports = evaluate_mod.run_agreement_study(
        g, corpus, embeddings, selector,
        grid=args.grid, cfg=cfg,
        walks_per_node=args.walks_per_node, walk_length=args.walk_length,
        top_k=args.top_k,
    )
    print(evaluate_mod.format_agreement_table(reports))
    if args.out:
        evaluate_mod.write_agreement_csv(reports, args.out)
        write_manifest(
            "agree",
            [args.corpus, args.graph],
            {"grid": [list(pq) for pq in args.grid], "selector": str(selector),
             "dim": args.dim, "epochs": args.epochs, "lr": args.lr,
             "negatives": args.negatives, "window": args.window,
             "walks_per_node": args.walks_per_node, "walk_length": args.walk_length,
             "top_k": args.top_k},
            args.seed,
            [args.out],
            args.manifest,
        )
    return 0


def cmd_classify(args) -> int:
    g = graph_mod.load_graph(args.graph)
    report = classify_mod.run_experiment(
        [g],
        rates=[args.missing_rate],
        iterations=args.iterations,
        repeats=args.repeats,
        seed=args.seed,
        names=[Path(args.graph).stem],
        hard_threshold=args.hard_threshold,
        class1_thr=args.class1_thr,
        class0_thr=args.class0_thr,
    )
    cell = report.cells[0]
    for it, (mean, std) in enumerate(zip(cell.mean_by_iteration, cell.std_by_iteration)):
        print(f"iteration {it}: accuracy {mean:.4f} +- {std:.4f}")
    if args.out:
        classify_mod.write_experiment_csv(report, args.out)
        write_manifest(
            "classify",
            [args.graph],
            {"missing_rate": args.missing_rate, "iterations": args.iterations,
             "repeats": args.repeats, "hard_threshold": args.hard_threshold},
            args.seed,
            [args.out],
            args.manifest,
        )
    return 0


def cmd_experiment(args) -> int:
    graphs = [graph_mod.load_graph(p) for p in args.graphs]
    names = [Path(p).stem for p in args.graphs]
    report = classify_mod.run_experiment(
        graphs,
        rates=args.rates,
        iterations=args.iterations,
        repeats=args.repeats,
        seed=args.seed,
        names=names,
        hard_threshold=args.hard_threshold,
        class1_thr=args.class1_thr,
        class0_thr=args.class0_thr,
    )
    classify_mod.write_experiment_csv(report, args.out)
    outputs = [args.out]
    if args.curves_out:
        classify_mod.write_curves_csv(report, args.curves_out)
        outputs.append(args.curves_out)
    for c in report.cells:
        print(
            f"{c.graph_name} rate={c.missing_rate:g}: final accuracy "
            f"{c.final_mean:.4f} +- {c.std_by_iteration[-1]:.4f}"
        )
    write_manifest(
        "experiment",
        list(args.graphs),
        {"rates": [repr(r) for r in args.rates], "iterations": args.iterations,
         "repeats": args.repeats, "hard_threshold": args.hard_threshold},
        args.seed,
        outputs,
        args.manifest,
    )
    return 0


# ------------------------------------------------------------------ wiring


def _add_common(sub, seed_default=42):
    sub.add_argument("--seed", type=int, default=seed_default, help="stage seed")
    sub.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest)")
    sub.add_argument("--config", default=None, help="key=value config file; flags override")


def _add_chord_params(sub):
    sub.add_argument("--chord-embeddings", default=None, help="load chord vectors instead of training")
    sub.add_argument("--chord-method", choices=chords_mod.CHORD_METHODS, default="cbow")
    sub.add_argument("--chord-dim", type=int, default=32)
    sub.add_argument("--chord-window", type=int, default=4)
    sub.add_argument("--chord-epochs", type=int, default=50)
    sub.add_argument("--chord-lr", type=float, default=0.025)


def _add_train_params(sub):
    sub.add_argument("--dim", type=int, default=64)
    sub.add_argument("--epochs", type=int, default=100)
    sub.add_argument("--lr", type=float, default=0.025)
    sub.add_argument("--negatives", type=int, default=5)
    sub.add_argument("--window", type=int, default=5)


def build_parser() -> CliParser:
    parser = CliParser(prog="choralegraph", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    sub = subs.add_parser("ingest", help="validate a corpus file and print summary stats")
    sub.add_argument("corpus")
    _add_common(sub)
    sub.set_defaults(func=cmd_ingest)

    sub = subs.add_parser("build-graph", help="build similarity graph(s) from a corpus")
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--out", default=None, help="graph output path (single xi)")
    sub.add_argument("--out-prefix", default=None, help="prefix for one graph file per xi")
    sub.add_argument("--xi", type=_float_list, required=True,
                     help="comma-separated similarity thresholds; -inf allowed")
    sub.add_argument("--selector", default="intro:6",
                     help="intro:N | cadence | intro_and_cadence:N")
    sub.add_argument("--save-chord-embeddings", default=None)
    _add_chord_params(sub)
    _add_common(sub)
    sub.set_defaults(func=cmd_build_graph)

    sub = subs.add_parser("walks", help="generate biased random walks over a graph")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--p", type=float, default=1.0)
    sub.add_argument("--q", type=float, default=1.0)
    sub.add_argument("--walk-length", type=int, default=10)
    sub.add_argument("--walks-per-node", type=int, default=10)
    _add_common(sub)
    sub.set_defaults(func=cmd_walks)

    sub = subs.add_parser("train", help="train a node encoder from walks")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--walks", required=True)
    sub.add_argument("--method", choices=("sgns", "sg", "cbow"), required=True)
    sub.add_argument("--out", required=True)
    _add_train_params(sub)
    _add_common(sub)
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("query", help="top-k similar chorales for a node")
    sub.add_argument("--embeddings", required=True)
    sub.add_argument("--graph", required=True)
    sub.add_argument("--node", required=True, help="chorale id, e.g. BWV269")
    sub.add_argument("--k", type=int, default=10)
    _add_common(sub)
    sub.set_defaults(func=cmd_query)

    sub = subs.add_parser("agree", help="three-model agreement study over a (p,q) grid")
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--graph", required=True)
    sub.add_argument("--grid", type=_grid, default=[(1.0, 1.0), (0.7, 1.0), (1.0, 0.7)],
                     help="semicolon-separated p,q pairs")
    sub.add_argument("--selector", default="intro:6")
    sub.add_argument("--walks-per-node", type=int, default=10)
    sub.add_argument("--walk-length", type=int, default=10)
    sub.add_argument("--top-k", type=int, default=10)
    sub.add_argument("--out", default=None, help="CSV output path")
    _add_chord_params(sub)
    _add_train_params(sub)
    _add_common(sub)
    sub.set_defaults(func=cmd_agree)

    sub = subs.add_parser("classify", help="label-propagation trials on one graph")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--missing-rate", type=float, required=True)
    sub.add_argument("--iterations", type=int, default=5)
    sub.add_argument("--repeats", type=int, default=30)
    sub.add_argument("--hard-threshold", action="store_true",
                     help="snap the propagating state each iteration")
    sub.add_argument("--class1-thr", type=float, default=0.5)
    sub.add_argument("--class0-thr", type=float, default=0.5)
    sub.add_argument("--out", default=None, help="CSV output path")
    _add_common(sub)
    sub.set_defaults(func=cmd_classify)

    sub = subs.add_parser("experiment", help="full missing-label grid over several graphs")
    sub.add_argument("--graphs", nargs="+", required=True)
    sub.add_argument("--rates", type=_float_list, default=[0.1, 0.3, 0.5, 0.7, 0.9])
    sub.add_argument("--iterations", type=int, default=5)
    sub.add_argument("--repeats", type=int, default=30)
    sub.add_argument("--hard-threshold", action="store_true")
    sub.add_argument("--class1-thr", type=float, default=0.5)
    sub.add_argument("--class0-thr", type=float, default=0.5)
    sub.add_argument("--out", required=True, help="summary CSV path")
    sub.add_argument("--curves-out", default=None, help="per-repeat trajectory CSV")
    _add_common(sub)
    sub.set_defaults(func=cmd_experiment)

    return parser


def _find_subparser(parser: CliParser, argv) -> CliParser | None:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for token in argv:
                if token in action.choices:
                    return action.choices[token]
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        if "--config" in argv:
            config_path = argv[argv.index("--config") + 1]
            config = load_config_file(config_path)
            target = _find_subparser(parser, argv)
            if target is not None:
                apply_config(target, config)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, KeyError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ArithmeticError, OverflowError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
