"""Content reuse, forwarding delays, coverage and core channels within a channel set."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .data_model import Cdf, Dataset, text_fingerprint
from .graph import ForwardGraph, strongly_connected_components

FAST_FORWARD = 600        # 10 minutes
NETWORK_WINDOW = 86_400   # 24 hours
COVERAGE_BANDS = ("0%", "(0,20%]", "(20,40%]", "(40,60%]", "(60,80%]", "(80,100%]")


@dataclass
class Occurrence:
    channel_id: int
    date: int
    forward_origin_date: int | None


def _occurrences(dataset: Dataset, channels: Iterable[int]) -> tuple[dict[bytes, list[Occurrence]], dict[bytes, str]]:
    occ: dict[bytes, list[Occurrence]] = defaultdict(list)
    sample: dict[bytes, str] = {}
    for cid in sorted(set(channels)):
        if cid not in dataset.channels:
            raise KeyError(f"unknown channel {cid}")
        for m in dataset.channel_messages(cid):
            if m.kind != "text":
                continue
            fp = text_fingerprint(m.text)
            occ[fp].append(Occurrence(cid, m.date, None if m.fwd is None else m.fwd.from_date))
            sample.setdefault(fp, m.text)
    return occ, sample


@dataclass
class ReuseReport:
    total: int
    distinct: int
    counts: dict[bytes, int]
    top: list[tuple[bytes, int, str]]


def message_reuse(dataset: Dataset, channels: Iterable[int], top_k: int = 10) -> ReuseReport:
    """Text-message placements versus distinct contents (forwards included)."""
    channels = list(channels)
    if not channels:
        raise ValueError("empty channel set")
    occ, sample = _occurrences(dataset, channels)
    counts = {fp: len(v) for fp, v in occ.items()}
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return ReuseReport(sum(counts.values()), len(counts), counts, [(fp, n, sample[fp]) for fp, n in ranked])


@dataclass
class MessageDelay:
    fingerprint: bytes
    origin_time: int
    first: float
    mean: float
    last: float
    n_copies: int


@dataclass
class DelayProfile:
    messages: list[MessageDelay]
    cdfs: dict[str, Cdf]
    fast_first_fraction: float      # first copy within FAST_FORWARD seconds
    covered_within_day: float       # last copy within NETWORK_WINDOW seconds
    origin_mismatches: int          # forward metadata disagreeing with the earliest copy
    extra: dict = field(default_factory=dict)


def forwarding_delays(dataset: Dataset, channels: Iterable[int]) -> DelayProfile:
    """Delays of repeated contents relative to their earliest observed occurrence.

    Averages run over copies, not channels. Contents seen once are skipped.
    """
    channels = list(channels)
    if not channels:
        raise ValueError("empty channel set")
    occ, _ = _occurrences(dataset, channels)
    rows: list[MessageDelay] = []
    mismatches = 0
    for fp in sorted(occ):
        items = occ[fp]
        if len(items) < 2:
            continue
        items = sorted(items, key=lambda o: (o.date, o.channel_id))
        origin = items[0].date
        delays = np.array([o.date - origin for o in items[1:]], dtype=float)
        mismatches += sum(1 for o in items if o.forward_origin_date is not None and o.forward_origin_date != origin)
        rows.append(MessageDelay(fp, origin, float(delays.min()), float(delays.mean()), float(delays.max()), delays.size))
    cdfs = {
        "first": Cdf.of([r.first for r in rows]),
        "mean": Cdf.of([r.mean for r in rows]),
        "last": Cdf.of([r.last for r in rows]),
    }
    n = len(rows)
    fast = sum(1 for r in rows if r.first <= FAST_FORWARD) / n if n else 0.0
    day = sum(1 for r in rows if r.last <= NETWORK_WINDOW) / n if n else 0.0
    return DelayProfile(rows, cdfs, fast, day, mismatches)


@dataclass
class CoverageReport:
    coverage: dict[bytes, float]
    occurrences: dict[bytes, int]
    histogram: dict[str, int]
    never_forwarded: set[bytes]


def coverage_band(fraction: float, occurrences: int) -> str:
    if occurrences <= 1:
        return COVERAGE_BANDS[0]
    i = min(5, max(1, int(np.ceil(fraction * 5 - 1e-12))))
    return COVERAGE_BANDS[i]


def network_coverage(dataset: Dataset, channels: Iterable[int]) -> CoverageReport:
    """Fraction of the channel set carrying each distinct content.

    Contents occurring exactly once are flagged as never forwarded and fill
    the "0%" band; the others are binned by coverage in steps of 20%.
    """
    channels = sorted(set(channels))
    if not channels:
        raise ValueError("empty channel set")
    occ, _ = _occurrences(dataset, channels)
    cover, counts = {}, {}
    hist = dict.fromkeys(COVERAGE_BANDS, 0)
    never = set()
    for fp, items in occ.items():
        n_chan = len({o.channel_id for o in items})
        cover[fp] = n_chan / len(channels)
        counts[fp] = len(items)
        if len(items) == 1:
            never.add(fp)
        hist[coverage_band(cover[fp], len(items))] += 1
    return CoverageReport(cover, counts, hist, never)


@dataclass
class CoreReport:
    core: list[int]
    n_components: int
    component_sizes: list[int]
    in_degree: dict[int, int]


def find_core_channels(g: ForwardGraph, min_in_coverage: float = 0.5) -> CoreReport:
    """Channels that never forward yet are forwarded by at least
    ``min_in_coverage`` of the other channels in ``g``."""
    if len(g) == 0:
        raise ValueError("empty graph")
    need = min_in_coverage * (len(g) - 1)
    core = [node for i, node in enumerate(g.nodes) if not g.out_adj[i] and len(g.in_adj[i]) >= need - 1e-12]
    cond = strongly_connected_components(g)
    sizes = sorted(cond.sizes.tolist(), reverse=True)
    return CoreReport(core, cond.n_components, sizes, {n: len(g.in_adj[i]) for i, n in enumerate(g.nodes)})
