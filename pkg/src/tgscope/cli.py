"""Command-line front end: batch runs that write CSV reports under --out.

Option precedence, lowest to highest: built-in defaults, the TGSCOPE_THREADS
environment variable (thread count only), the --config file, explicit flags.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import os
import struct
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .data_model import (
    CHANNEL_CLASSES,
    STAT_METRICS,
    DataError,
    channel_stats,
    is_violated_terms,
    parse_dataset,
    write_dataset,
)
from .features import FEATURE_NAMES
from .reports import Table, emit_report

log = logging.getLogger("tgscope")

ENV_THREADS = "TGSCOPE_THREADS"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# Report headers per subcommand. They are written verbatim and listed in --help.
HEADERS: dict[str, dict[str, tuple[str, ...]]] = {
    "ingest-check": {
        "summary": ("key", "value"),
        "languages": ("channel_id", "language"),
    },
    "graph-stats": {
        "graph_summary": ("key", "value"),
        "edges": ("src", "dst", "weight"),
        "scc": ("channel_id", "component_id"),
        "stats_cdf": ("class", "metric", "value", "cum_fraction"),
        "stats_means": ("class", "metric", "mean"),
        "pagerank": ("channel_id", "class", "pagerank"),
        "pagerank_cdf": ("class", "value", "cum_fraction"),
        "hops": ("source_id", "target_id", "hops"),
    },
    "clones": {
        "clones": ("original_id", "clone_id", "shared", "eligible", "ratio", "kind"),
        "copied_ratio": ("channel_id", "max_copied_ratio"),
        "copied_ratio_cdf": ("ratio", "cum_fraction"),
    },
    "topics": {
        "topic_scores": ("k", "umass"),
        "topics": ("topic_id", "keyword_rank", "keyword", "phi"),
        "channel_topics": ("channel_id", "cluster", "dominant_topic"),
        "dropped_documents": ("channel_id",),
    },
    "train-fakes": {
        "features": ("channel_id", "label") + FEATURE_NAMES,
        "cv_folds": ("fold", "accuracy", "weighted_f1", "n_test"),
        "cv_summary": ("key", "value"),
        "train_loss": ("epoch", "loss"),
    },
    "classify": {
        "predictions": ("channel_id", "probability", "label"),
    },
    "shapley": {
        "shapley": ("channel_id", "feature", "value"),
        "shapley_base": ("channel_id", "probability", "base_probability"),
    },
    "communities": {
        "communities": ("channel_id", "community_id"),
        "community_sizes": ("community_id", "size"),
        "community_summary": ("key", "value"),
        "anchor_members": ("channel_id",),
    },
    "coordination": {
        "members": ("channel_id",),
        "reuse_summary": ("key", "value"),
        "reuse_top": ("rank", "occurrences", "fingerprint", "text"),
        "delays": ("fingerprint", "origin_time", "first", "mean", "last", "copies"),
        "delay_cdf": ("delay_seconds", "cum_fraction", "kind"),
        "coverage_histogram": ("band", "count"),
        "core": ("channel_id", "in_degree"),
        "coordination_summary": ("key", "value"),
    },
    "synth": {
        "universe_summary": ("key", "value"),
    },
    "crawl-sim": {
        "crawl_iterations": ("iteration", "processed", "new_channels", "explored_fraction", "idle_fraction"),
        "crawl_summary": ("key", "value"),
    },
}

EXTRA_FILES = {
    "train-fakes": "also writes model.bin (binary MLP weights)",
    "synth": "also writes channels.jsonl, messages.jsonl, ground_truth.csv, ground_truth_stats.csv",
    "crawl-sim": "also writes the crawled archive as channels.jsonl and messages.jsonl",
}


@dataclass
class Opt:
    flags: tuple[str, ...]
    dest: str
    type: Callable = str
    default: object = None
    help: str = ""
    action: Optional[str] = None


COMMON = [
    Opt(("--channels",), "channels", str, None, "channels JSONL file"),
    Opt(("--messages",), "messages", str, None, "messages JSONL file"),
    Opt(("--out",), "out", str, None, "output directory for reports"),
    Opt(("--seed",), "seed", int, 0, "random seed"),
    Opt(("--threshold",), "threshold", float, 0.30, "clone ratio threshold"),
    Opt(("--ref-time",), "ref_time", int, None, "reference time (epoch seconds); default latest message"),
    Opt(("--threads",), "threads", int, 1, f"worker threads (default ${ENV_THREADS} or 1)"),
    Opt(("--config",), "config", str, None, "INI file of option defaults ([run] and [<subcommand>] sections)"),
]

SPECIFIC: dict[str, list[Opt]] = {
    "ingest-check": [],
    "graph-stats": [
        Opt(("--damping",), "damping", float, 0.85, "PageRank damping"),
    ],
    "clones": [],
    "topics": [
        Opt(("--k-min",), "k_min", int, 10, "smallest topic count"),
        Opt(("--k-max",), "k_max", int, 25, "largest topic count"),
        Opt(("--iters",), "iters", int, 500, "Gibbs sweeps per model"),
        Opt(("--min-df",), "min_df", int, 5, "minimum document frequency"),
        Opt(("--clusters",), "clusters", int, None, "K-means clusters over topic mixtures (default: selected K)"),
        Opt(("--top-n",), "top_n", int, 10, "keywords per topic"),
        Opt(("--language",), "language", str, "en", "channel language to model ('all' keeps every channel)"),
    ],
    "train-fakes": [
        Opt(("--labels",), "labels", str, None, "CSV with channel_id and label (fake/official or 1/0) or role"),
        Opt(("--folds",), "folds", int, 5, "cross-validation folds"),
        Opt(("--epochs",), "epochs", int, 50, "training epochs"),
    ],
    "classify": [
        Opt(("--model",), "model", str, None, "model file from train-fakes"),
        Opt(("--all",), "all", None, False, "score every channel, not only candidates", "store_true"),
    ],
    "shapley": [
        Opt(("--model",), "model", str, None, "model file from train-fakes"),
        Opt(("--ids",), "ids", str, None, "channel ids (comma list or @file); default candidates"),
    ],
    "communities": [
        Opt(("--resolution",), "resolution", float, 1.0, "modularity resolution"),
        Opt(("--anchors",), "anchors", str, None, "anchor channel ids (comma list or @file)"),
    ],
    "coordination": [
        Opt(("--members",), "members", str, None, "channel set (comma list or @file)"),
        Opt(("--anchors",), "anchors", str, None, "derive the channel set from the anchors' communities"),
        Opt(("--resolution",), "resolution", float, 1.0, "modularity resolution when using anchors"),
        Opt(("--min-in-coverage",), "min_in_coverage", float, 0.5, "core channel in-coverage"),
        Opt(("--top-k",), "top_k", int, 10, "most reused contents to list"),
    ],
    "synth": [
        Opt(("--spec",), "spec", str, None, "universe spec file (INI)"),
    ],
    "crawl-sim": [
        Opt(("--seeds",), "seeds", str, None, "seed channel ids (comma list or @file)"),
        Opt(("--window",), "window", int, 10_000, "messages downloaded per channel"),
        Opt(("--max-iterations",), "max_iterations", int, 100, "crawl rounds"),
    ],
}

NEEDS_ARCHIVE = {name for name in HEADERS if name != "synth"}
DESCRIPTIONS = {
    "ingest-check": "validate an archive and summarize it",
    "graph-stats": "forward graph, SCCs, PageRank, hop distances and per-class CDFs",
    "clones": "detect clone channels",
    "topics": "LDA topic model with UMass-selected K and K-means channel groups",
    "train-fakes": "train the fake-channel classifier with cross-validation",
    "classify": "score channels with a trained classifier",
    "shapley": "exact Shapley attributions for classifier outputs",
    "communities": "Leiden communities of the forward graph",
    "coordination": "reuse, delays, coverage and core channels of a channel set",
    "synth": "generate a synthetic universe with ground truth",
    "crawl-sim": "simulate a snowball crawl over an archive",
}


def _epilog(cmd: str) -> str:
    lines = ["reports (CSV headers):"]
    for name, header in HEADERS[cmd].items():
        lines.append(f"  {name}.csv: {','.join(header)}")
    if cmd in EXTRA_FILES:
        lines.append(f"  {EXTRA_FILES[cmd]}")
    lines.append("  every run also writes config.json and manifest.json")
    lines.append(f"precedence: defaults < ${ENV_THREADS} < --config < flags")
    return "\n".join(lines)


def build_parser() -> _Parser:
    p = _Parser(prog="tgscope", description="Analytics over messaging-channel archives.")
    p.add_argument("--version", action="version", version=f"tgscope {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for cmd in HEADERS:
        sp = sub.add_parser(cmd, help=DESCRIPTIONS[cmd], description=DESCRIPTIONS[cmd], epilog=_epilog(cmd),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        for o in COMMON + SPECIFIC[cmd]:
            kw = {"dest": o.dest, "default": argparse.SUPPRESS, "help": o.help}
            if o.action:
                kw["action"] = o.action
            else:
                kw["type"] = o.type
            sp.add_argument(*o.flags, **kw)
    return p


def _coerce(opt: Opt, raw: str):
    if opt.action == "store_true":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    try:
        return opt.type(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {opt.dest}: {raw!r}") from exc


def read_config(path: str, cmd: str, opts: Sequence[Opt]) -> dict:
    """Flat ``key = value`` pairs from [run] then [<cmd>]; keys may use - or _."""
    cp = configparser.ConfigParser()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise DataError(f"{path}: {exc}") from exc
    known = {o.dest: o for o in opts}
    out = {}
    for section in ("run", cmd):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in known or dest == "config":
                raise UsageError(f"{path}: unknown option {key!r} in [{section}]")
            out[dest] = _coerce(known[dest], raw)
    return out


def resolve(cmd: str, explicit: dict, environ=os.environ) -> dict:
    opts = COMMON + SPECIFIC[cmd]
    cfg = {o.dest: o.default for o in opts}
    env = environ.get(ENV_THREADS)
    if env:
        try:
            cfg["threads"] = int(env)
        except ValueError as exc:
            raise UsageError(f"{ENV_THREADS} must be an integer, got {env!r}") from exc
    if explicit.get("config"):
        cfg.update(read_config(explicit["config"], cmd, opts))
    cfg.update(explicit)
    cfg["command"] = cmd
    if cfg["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    missing = [f"--{k}" for k in ("channels", "messages") if cmd in NEEDS_ARCHIVE and not cfg.get(k)]
    if not cfg.get("out"):
        missing.append("--out")
    if missing:
        raise UsageError(f"tgscope {cmd}: missing required option(s): {' '.join(missing)}")
    return cfg


def parse_ids(value: Optional[str]) -> list[int]:
    if not value:
        return []
    if value.startswith("@"):
        try:
            text = Path(value[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read id list {value[1:]}: {exc}") from exc
        parts = [line.split(",")[0].strip() for line in text.splitlines()]
    else:
        parts = [p.strip() for p in value.split(",")]
    ids = []
    for p in parts:
        if not p or not p.lstrip("-").isdigit():
            if p and p != "channel_id":
                raise DataError(f"bad channel id {p!r}")
            continue
        ids.append(int(p))
    return ids


def _known(ds, ids, what):
    missing = [c for c in ids if c not in ds.channels]
    if missing:
        raise DataError(f"{what} not in archive: {missing[:5]}")
    return ids


def _load(cfg):
    return parse_dataset(cfg["channels"], cfg["messages"], reference_time=cfg.get("ref_time"))


def _tables(cmd: str, **rows) -> dict[str, Table]:
    return {name: Table(HEADERS[cmd][name], rows.get(name, [])) for name in HEADERS[cmd]}


def _cdf_rows(prefix, cdf):
    return [(*prefix, v, f) for v, f in cdf.points()]


# ---------------------------------------------------------------------------
# subcommands; each returns (tables, extra files already written to --out)

def cmd_ingest_check(cfg):
    from .language import channel_languages
    ds = _load(cfg)
    msgs = [m for c in ds.channels for m in ds.channel_messages(c)]
    kinds = {k: sum(1 for c in ds.channels.values() if c.kind == k) for k in CHANNEL_CLASSES}
    summary = [
        ("channels", len(ds.channels)),
        ("messages", len(msgs)),
        ("text_messages", sum(1 for m in msgs if m.kind == "text")),
        ("media_messages", sum(1 for m in msgs if m.kind == "media")),
        ("forwarded_messages", sum(1 for m in msgs if m.fwd is not None)),
        ("violated_terms_messages", sum(1 for m in msgs if m.kind == "text" and is_violated_terms(m.text))),
        *((f"{k}_channels", v) for k, v in kinds.items()),
        ("reference_time", ds.reference_time),
    ]
    langs = channel_languages(ds)
    return _tables("ingest-check", summary=summary, languages=sorted(langs.items())), []


def cmd_graph_stats(cfg):
    from .graph import build_forward_graph, degree_extremes, hop_distances, is_acyclic, pagerank, strongly_connected_components
    from .data_model import Cdf
    ds = _load(cfg)
    g = build_forward_graph(ds)
    cond = strongly_connected_components(g)
    summary = [
        ("nodes", len(g)),
        ("edges", g.n_edges),
        ("total_weight", g.total_weight),
        ("external_forwards", g.external_forwards),
        ("self_forwards", g.self_forwards),
        ("scc_count", cond.n_components),
        ("largest_scc", cond.largest),
        ("multi_node_sccs", cond.multi_node),
        ("isolated_nodes", cond.isolated),
        ("condensation_acyclic", is_acyclic(cond.dag)),
    ]
    if len(g):
        ext = degree_extremes(g)
        summary += [("max_out_node", ext.max_out_node), ("max_out_degree", ext.max_out_degree),
                    ("max_in_node", ext.max_in_node), ("max_in_degree", ext.max_in_degree)]
    stats = channel_stats(ds)
    cdf_rows, mean_rows = [], []
    for cls in CHANNEL_CLASSES:
        for metric in STAT_METRICS:
            cdf_rows += _cdf_rows((cls, metric), stats.cdfs[(cls, metric)])
            mean_rows.append((cls, metric, stats.means[(cls, metric)]))
    pr = pagerank(g, damping=cfg["damping"]) if len(g) else {}
    pr_rows = [(c, ds.channels[c].kind, pr[c]) for c in g.nodes]
    pr_cdf = []
    for cls in CHANNEL_CLASSES:
        pr_cdf += _cdf_rows((cls,), Cdf.of([s for c, s in pr.items() if ds.channels[c].kind == cls]))
    verified = [c for c in g.nodes if ds.channels[c].kind == "verified"]
    scam = [c for c in g.nodes if ds.channels[c].kind == "scam"]
    hops = hop_distances(g, verified, scam) if verified and scam else {}
    hop_rows = [(s, t, d) for s in sorted(hops) for t, d in sorted(hops[s].items())]
    comp = [(c, int(cond.component[i])) for i, c in enumerate(g.nodes)]
    return _tables("graph-stats", graph_summary=summary, edges=list(g.edges()), scc=comp,
                   stats_cdf=cdf_rows, stats_means=mean_rows, pagerank=pr_rows,
                   pagerank_cdf=pr_cdf, hops=hop_rows), []


def cmd_clones(cfg):
    from .clones import copied_ratio_cdf, find_clones, scan
    ds = _load(cfg)
    st = scan(ds, workers=cfg["threads"])
    found = find_clones(ds, cfg["threshold"], prescan=st)
    best, cdf = copied_ratio_cdf(ds, prescan=st)
    rows = [(e.original_id, e.clone_id, e.shared, e.eligible, e.ratio, e.kind) for e in found]
    return _tables("clones", clones=rows, copied_ratio=sorted(best.items()),
                   copied_ratio_cdf=_cdf_rows((), cdf)), []


def cmd_topics(cfg):
    from .topics import channel_texts, kmeans_cluster, preprocess_corpus, select_topic_count, top_keywords, top_word_ids
    ds = _load(cfg)
    lang = None if cfg["language"] == "all" else cfg["language"]
    texts = channel_texts(ds, lang)
    corpus = preprocess_corpus(texts, min_df=cfg["min_df"])
    k_max = min(cfg["k_max"], len(corpus.vocab))
    best_k, model, table = select_topic_count(corpus, cfg["k_min"], k_max, seed=cfg["seed"],
                                              iters=cfg["iters"], top_n=cfg["top_n"])
    n = min(cfg["top_n"], len(corpus.vocab))
    topic_rows = []
    for k, words in enumerate(top_keywords(model, n)):
        ids = top_word_ids(model.phi[k], n)
        topic_rows += [(k, r, w, float(model.phi[k, i])) for r, (w, i) in enumerate(zip(words, ids))]
    clusters = min(cfg["clusters"] or best_k, corpus.n_docs)
    km = kmeans_cluster(model.theta, clusters, seed=cfg["seed"])
    dominant = model.theta.argmax(axis=1)
    ch_rows = [(c, int(km.labels[i]), int(dominant[i])) for i, c in enumerate(corpus.doc_ids)]
    log.info("selected K=%d", best_k)
    return _tables("topics", topic_scores=table, topics=topic_rows, channel_topics=ch_rows,
                   dropped_documents=[(c,) for c in corpus.dropped]), []


def read_labels(path: str) -> dict[int, int]:
    names = {"fake": 1, "official": 0, "1": 1, "0": 0}
    out = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read labels {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        col = "label" if reader.fieldnames and "label" in reader.fieldnames else "role"
        if not reader.fieldnames or "channel_id" not in reader.fieldnames or col not in reader.fieldnames:
            raise DataError(f"{path}: need channel_id and label (or role) columns")
        for line, row in enumerate(reader, start=2):
            value = row[col].strip().lower()
            if value not in names:
                if col == "role":
                    continue  # ground-truth files carry other roles too
                raise DataError(f"{path}:{line}: unknown label {row[col]!r}")
            try:
                out[int(row["channel_id"])] = names[value]
            except ValueError as exc:
                raise DataError(f"{path}:{line}: bad channel id") from exc
    return out


def cmd_train_fakes(cfg):
    from .features import feature_matrix
    from .mlp import cross_validate, save_model, train_mlp
    if not cfg.get("labels"):
        raise UsageError("tgscope train-fakes: missing required option: --labels")
    ds = _load(cfg)
    labels = read_labels(cfg["labels"])
    ids = _known(ds, sorted(labels), "labelled channels")
    X = feature_matrix(ds, ids)
    y = np.array([labels[c] for c in ids], dtype=float)
    cv = cross_validate(X, y, folds=cfg["folds"], seed=cfg["seed"], epochs=cfg["epochs"])
    model, tlog = train_mlp(X, y, epochs=cfg["epochs"], seed=cfg["seed"])
    save_model(model, Path(cfg["out"]) / "model.bin")
    feats = [(c, int(labels[c]), *X[i].tolist()) for i, c in enumerate(ids)]
    folds = [(f.fold, f.accuracy, f.weighted_f1, f.n_test) for f in cv.folds]
    summary = [("channels", len(ids)), ("fake", int(y.sum())), ("official", int((1 - y).sum())),
               ("accuracy", cv.accuracy), ("weighted_f1", cv.weighted_f1)]
    return _tables("train-fakes", features=feats, cv_folds=folds, cv_summary=summary,
                   train_loss=list(enumerate(tlog.losses, start=1))), ["model.bin"]


def _model(cfg):
    from .mlp import load_model
    if not cfg.get("model"):
        raise UsageError(f"tgscope {cfg['command']}: missing required option: --model")
    try:
        return load_model(cfg["model"])
    except (OSError, ValueError, struct.error) as exc:
        raise DataError(f"cannot load model {cfg['model']}: {exc}") from exc


def _candidates(ds):
    from .features import select_candidates
    titles = [c.title for c in ds.channels.values() if c.verified]
    return sorted(select_candidates(ds, titles))


def cmd_classify(cfg):
    from .features import feature_matrix
    model = _model(cfg)
    ds = _load(cfg)
    ids = sorted(ds.channels) if cfg["all"] else _candidates(ds)
    X = feature_matrix(ds, ids)
    p = model.predict_proba(X) if ids else np.zeros(0)
    rows = [(c, float(pi), "fake" if pi > 0.5 else "official") for c, pi in zip(ids, p)]
    return _tables("classify", predictions=rows), []


def cmd_shapley(cfg):
    from .features import feature_matrix
    from .mlp import exact_shapley
    model = _model(cfg)
    ds = _load(cfg)
    ids = _known(ds, parse_ids(cfg.get("ids")), "channels") if cfg.get("ids") else _candidates(ds)
    X = feature_matrix(ds, ids)
    base = float(model.predict_proba(model.mean[None, :])[0])
    rows, base_rows = [], []
    for c, x in zip(ids, X):
        phi = exact_shapley(model, x, model.mean)
        rows += [(c, name, float(v)) for name, v in zip(FEATURE_NAMES, phi)]
        base_rows.append((c, float(model.predict_proba(x[None, :])[0]), base))
    return _tables("shapley", shapley=rows, shapley_base=base_rows), []


def cmd_communities(cfg):
    from .community import community_of, leiden, modularity
    from .graph import build_forward_graph
    ds = _load(cfg)
    g = build_forward_graph(ds)
    if len(g) == 0:
        return _tables("communities"), []
    a = leiden(g, resolution=cfg["resolution"], seed=cfg["seed"])
    summary = [("communities", a.n_communities), ("modularity", modularity(g, a, cfg["resolution"]))]
    members = []
    anchors = _known(ds, parse_ids(cfg.get("anchors")), "anchors")
    if anchors:
        match = community_of(a, anchors)
        summary += [("anchor_communities", len(match.communities)), ("anchor_members", len(match.nodes))]
        members = [(c,) for c in sorted(match.nodes)]
    sizes = [(i, len(m)) for i, m in enumerate(a.communities())]
    return _tables("communities", communities=sorted(a.membership.items()), community_sizes=sizes,
                   community_summary=summary, anchor_members=members), []


def cmd_coordination(cfg):
    from .community import community_of, leiden
    from .coordination import find_core_channels, forwarding_delays, message_reuse, network_coverage
    from .graph import build_forward_graph, strongly_connected_components
    ds = _load(cfg)
    g = build_forward_graph(ds)
    if cfg.get("members"):
        members = sorted(set(_known(ds, parse_ids(cfg["members"]), "members")))
    elif cfg.get("anchors"):
        anchors = _known(ds, parse_ids(cfg["anchors"]), "anchors")
        members = sorted(community_of(leiden(g, cfg["resolution"], seed=cfg["seed"]), anchors).nodes)
    else:
        raise UsageError("tgscope coordination: give --members or --anchors")
    if not members:
        raise DataError("empty channel set")
    reuse = message_reuse(ds, members, cfg["top_k"])
    delays = forwarding_delays(ds, members)
    cover = network_coverage(ds, members)
    sub = g.subgraph(members)
    core = find_core_channels(sub, cfg["min_in_coverage"])
    cond = strongly_connected_components(sub)
    delay_cdf = []
    for kind in ("first", "mean", "last"):
        delay_cdf += [(v, f, kind) for v, f in delays.cdfs[kind].points()]
    summary = [
        ("members", len(members)),
        ("fast_first_fraction", delays.fast_first_fraction),
        ("covered_within_day", delays.covered_within_day),
        ("origin_mismatches", delays.origin_mismatches),
        ("never_forwarded", len(cover.never_forwarded)),
        ("scc_count", cond.n_components),
        ("scc_sizes", " ".join(map(str, core.component_sizes))),
    ]
    return _tables(
        "coordination",
        members=[(c,) for c in members],
        reuse_summary=[("total", reuse.total), ("distinct", reuse.distinct),
                       ("reuse_factor", reuse.total / reuse.distinct if reuse.distinct else 0.0)],
        reuse_top=[(i + 1, n, fp, text) for i, (fp, n, text) in enumerate(reuse.top)],
        delays=[(d.fingerprint, d.origin_time, d.first, d.mean, d.last, d.n_copies) for d in delays.messages],
        delay_cdf=delay_cdf,
        coverage_histogram=list(cover.histogram.items()),
        core=[(c, core.in_degree[c]) for c in core.core],
        coordination_summary=summary,
    ), []


def cmd_synth(cfg):
    from .synth import UniverseSpec, generate_universe, write_universe
    spec = UniverseSpec.from_config(cfg["spec"]) if cfg.get("spec") else UniverseSpec()
    if cfg.get("spec") is None or "seed" in cfg.get("_explicit", ()):
        spec.seed = cfg["seed"]
    ds, truth = generate_universe(spec)
    paths = write_universe(ds, truth, cfg["out"])
    roles = {}
    for r in truth.roles.values():
        roles[r] = roles.get(r, 0) + 1
    summary = [("seed", spec.seed), ("channels", len(ds.channels)), ("messages", ds.n_messages),
               ("clone_pairs", len(truth.clone_pairs)), ("network_size", len(truth.network)),
               *((f"role_{k}", v) for k, v in sorted(roles.items()))]
    return _tables("synth", universe_summary=summary), [p.name for p in paths.values()]


def cmd_crawl_sim(cfg):
    from .synth import simulate_crawl
    ds = _load(cfg)
    seeds = _known(ds, parse_ids(cfg.get("seeds")), "seeds")
    if not seeds:
        raise UsageError("tgscope crawl-sim: missing required option: --seeds")
    res = simulate_crawl(ds, seeds, window=cfg["window"], max_iterations=cfg["max_iterations"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(res.dataset, out / "channels.jsonl", out / "messages.jsonl")
    its = [(i.iteration, i.processed, i.new_channels, i.explored_fraction, i.idle_fraction) for i in res.iterations]
    summary = [("seeds", len(seeds)), ("crawled", len(res.dataset.channels)),
               ("discovered", len(res.discovered)), ("iterations", len(res.iterations)),
               ("fixed_point", res.reached_fixed_point)]
    return _tables("crawl-sim", crawl_iterations=its, crawl_summary=summary), ["channels.jsonl", "messages.jsonl"]


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "graph-stats": cmd_graph_stats,
    "clones": cmd_clones,
    "topics": cmd_topics,
    "train-fakes": cmd_train_fakes,
    "classify": cmd_classify,
    "shapley": cmd_shapley,
    "communities": cmd_communities,
    "coordination": cmd_coordination,
    "synth": cmd_synth,
    "crawl-sim": cmd_crawl_sim,
}


def _data_errors():
    from .mlp import TrainingError
    from .synth import SpecError
    from .topics import CorpusError
    return (DataError, SpecError, CorpusError, TrainingError, OSError)


def dispatch(argv: Sequence[str], environ=os.environ) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
        if not ns.command:
            raise UsageError(parser.format_usage() + "tgscope: error: a subcommand is required")
        logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
        explicit = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose")}
        cfg = resolve(ns.command, explicit, environ)
        cfg["_explicit"] = sorted(explicit)
        Path(cfg["out"]).mkdir(parents=True, exist_ok=True)
        tables, extra = COMMANDS[ns.command](cfg)
        record = {k: v for k, v in cfg.items() if not k.startswith("_")}
        emit_report(tables, cfg["out"], record, extra)
        return EXIT_OK
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except _data_errors() as exc:
        print(f"tgscope: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyError as exc:
        print(f"tgscope: error: unknown id {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"tgscope: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
