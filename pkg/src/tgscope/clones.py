"""Clone-channel detection over exact (normalized) message identity."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .data_model import Cdf, Dataset, MessageRecord, fingerprint, is_violated_terms, normalize_text
from .language import channel_languages
from .textdist import levenshtein

MIN_WORDS = 6
DEFAULT_THRESHOLD = 0.30
# ratios are compared with a small slack so that e.g. 3/10 >= 0.30 holds in floating point
_RATIO_SLACK = 1e-12


@dataclass(frozen=True)
class CloneEntry:
    original_id: int
    clone_id: int
    shared: int
    eligible: int
    ratio: float
    kind: str  # perfect | titled | plain


def eligible_messages(messages: Iterable[MessageRecord]) -> dict[bytes, int]:
    """Distinct fingerprints of original, long enough, non-service text messages.

    Maps each fingerprint to its earliest posting date in the channel.
    """
    out: dict[bytes, int] = {}
    for m in messages:
        if m.kind != "text" or m.fwd is not None:
            continue
        norm = normalize_text(m.text)
        if norm.count(" ") < MIN_WORDS - 1 or is_violated_terms(norm):
            continue
        fp = fingerprint(norm)
        prev = out.get(fp)
        if prev is None or m.date < prev:
            out[fp] = m.date
    return out


def copied_ratio(a: Mapping[bytes, int], b: Mapping[bytes, int]) -> tuple[float, bool]:
    """Share of b's eligible messages also found in a, and whether b posted every one later."""
    if not b:
        raise ValueError("channel b has no eligible messages")
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    shared = [fp for fp in small if fp in large]
    all_later = bool(shared) and all(b[fp] > a[fp] for fp in shared)
    return len(shared) / len(b), all_later


def clone_kind(original, clone) -> str:
    if original.title == clone.title and original.description == clone.description:
        return "perfect"
    if levenshtein(original.title, clone.title) < 3:
        return "titled"
    return "plain"


def _eligible_all(dataset: Dataset, workers: int) -> dict[int, dict[bytes, int]]:
    ids = list(dataset.channels)
    if workers <= 1 or len(ids) < 2:
        return {cid: eligible_messages(dataset.channel_messages(cid)) for cid in ids}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda c: eligible_messages(dataset.channel_messages(c)), ids)
        return dict(zip(ids, results))


def shared_counts(eligible: Mapping[int, Mapping[bytes, int]], languages: Mapping[int, str]) -> dict[tuple[int, int], int]:
    """Count shared fingerprints for every same-language channel pair (a < b) via an inverted index."""
    index: dict[bytes, list[int]] = {}
    for cid in sorted(eligible):
        for fp in eligible[cid]:
            posting = index.get(fp)
            if posting is None:
                index[fp] = [cid]
            else:
                posting.append(cid)
    counts: dict[tuple[int, int], int] = {}
    for posting in index.values():
        if len(posting) < 2:
            continue
        for i, a in enumerate(posting):
            la = languages[a]
            for b in posting[i + 1:]:
                if languages[b] == la:
                    counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts


@dataclass
class CloneScan:
    """Intermediate state shared by :func:`find_clones` and :func:`copied_ratio_cdf`."""

    eligible: dict[int, dict[bytes, int]]
    languages: dict[int, str]
    pairs: dict[tuple[int, int], int]


def scan(dataset: Dataset, languages: Optional[Mapping[int, str]] = None, workers: int = 1) -> CloneScan:
    langs = dict(languages) if languages is not None else channel_languages(dataset)
    elig = _eligible_all(dataset, workers)
    return CloneScan(elig, langs, shared_counts(elig, langs))


def find_clones(
    dataset: Dataset,
    threshold: float = DEFAULT_THRESHOLD,
    languages: Optional[Mapping[int, str]] = None,
    workers: int = 1,
    prescan: Optional[CloneScan] = None,
) -> list[CloneEntry]:
    """B is a clone of A when they share a language, at least ``threshold`` of
    B's eligible messages also appear in A, and B posted every shared one later.

    Candidate pairs come from an inverted fingerprint index, so only pairs with
    at least one shared message are examined. Entries are sorted by
    (original_id, clone_id).
    """
    st = prescan or scan(dataset, languages, workers)
    out: list[CloneEntry] = []
    for (a, b), shared in st.pairs.items():
        for orig, clone in ((a, b), (b, a)):
            elig_c = st.eligible[clone]
            if shared / len(elig_c) < threshold - _RATIO_SLACK:
                continue
            ratio, later = copied_ratio(st.eligible[orig], elig_c)
            if not later:
                continue
            kind = clone_kind(dataset.channels[orig], dataset.channels[clone])
            out.append(CloneEntry(orig, clone, shared, len(elig_c), ratio, kind))
    out.sort(key=lambda e: (e.original_id, e.clone_id))
    return out


def copied_counts(a: Mapping[bytes, int], b: Mapping[bytes, int]) -> int:
    """Number of b's eligible messages that appeared strictly earlier in a."""
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    return sum(1 for fp in small if fp in large and b[fp] > a[fp])


def copied_ratio_cdf(
    dataset: Dataset,
    languages: Optional[Mapping[int, str]] = None,
    workers: int = 1,
    prescan: Optional[CloneScan] = None,
) -> tuple[dict[int, float], Cdf]:
    """Per channel, the largest fraction of its eligible messages copied from a
    single same-language channel (i.e. posted there strictly earlier).

    Channels without eligible messages count as 0.
    """
    st = prescan or scan(dataset, languages, workers)
    best = dict.fromkeys(dataset.channels, 0.0)
    for a, b in st.pairs:
        ea, eb = st.eligible[a], st.eligible[b]
        best[b] = max(best[b], copied_counts(ea, eb) / len(eb))
        best[a] = max(best[a], copied_counts(eb, ea) / len(ea))
    return best, Cdf.of(list(best.values()))
