"""Thirteen per-channel features used by the fake-channel classifier."""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .data_model import ChannelRecord, Dataset, MessageRecord, text_fingerprint
from .textdist import levenshtein

FEATURE_NAMES = (
    "avg_message_length",       # w1
    "avg_emojis",               # w2
    "avg_non_alnum",            # w3
    "non_alnum_title_desc",     # w4
    "non_alnum_title_fraction",  # w5
    "text_last_90d",            # t1
    "text_last_180d",           # t2
    "text_last_270d",           # t3
    "mean_gap_seconds",         # t4
    "forwarded",                # e1
    "forward_source_std",       # e2
    "links",                    # e3
    "duplicate_link_messages",  # e4
)
N_FEATURES = len(FEATURE_NAMES)
DAY = 86_400
WINDOWS_DAYS = (90, 180, 270)

EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x2600, 0x27BF),
    (0x1F1E6, 0x1F1FF),
)
LINK_RE = re.compile(r"[a-z][a-z0-9+.\-]*://\S+|t\.me/\S+", re.IGNORECASE)


def is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in EMOJI_RANGES)


def count_emojis(text: str) -> int:
    return sum(1 for ch in text if ord(ch) >= 0x2600 and is_emoji(ch))


def count_non_alnum(text: str) -> int:
    """Characters that are neither alphanumeric nor whitespace."""
    return sum(1 for ch in text if not ch.isalnum() and not ch.isspace())


def count_links(text: str) -> int:
    return len(LINK_RE.findall(text))


def extract_features(channel: ChannelRecord, messages: Sequence[MessageRecord], reference_time: int) -> np.ndarray:
    """Feature vector in :data:`FEATURE_NAMES` order. An empty channel yields zeros
    apart from the title/description statistics."""
    x = np.zeros(N_FEATURES)
    title_desc = channel.title + channel.description
    x[3] = count_non_alnum(title_desc)
    x[4] = count_non_alnum(channel.title) / len(channel.title) if channel.title else 0.0

    texts = [m for m in messages if m.kind == "text"]
    if texts:
        x[0] = np.mean([len(m.text) for m in texts])
        x[1] = np.mean([count_emojis(m.text) for m in texts])
        x[2] = np.mean([count_non_alnum(m.text) for m in texts])
    for col, days in enumerate(WINDOWS_DAYS, start=5):
        lo = reference_time - days * DAY
        x[col] = sum(1 for m in texts if lo < m.date <= reference_time)
    if len(messages) > 1:
        dates = sorted(m.date for m in messages)
        x[8] = (dates[-1] - dates[0]) / (len(dates) - 1)

    sources: Counter = Counter()
    for m in messages:
        if m.fwd is not None:
            key = m.fwd.from_channel_id if m.fwd.from_channel_id is not None else ("name", m.fwd.from_name)
            sources[key] += 1
    x[9] = sum(sources.values())
    if len(sources) > 1:
        x[10] = float(np.std(list(sources.values())))

    link_counts = [count_links(m.text) for m in texts]
    x[11] = sum(link_counts)
    with_links = [m for m, n in zip(texts, link_counts) if n]
    if with_links:
        fps = Counter(text_fingerprint(m.text) for m in texts)
        x[12] = sum(1 for m in with_links if fps[text_fingerprint(m.text)] >= 2)
    return x


def feature_matrix(dataset: Dataset, ids: Iterable[int], reference_time=None) -> np.ndarray:
    ref = dataset.reference_time if reference_time is None else reference_time
    ids = list(ids)
    if not ids:
        return np.zeros((0, N_FEATURES))
    return np.vstack([extract_features(dataset.channels[c], dataset.channel_messages(c), ref) for c in ids])


CLAIM_RE = re.compile(r"(?<![^\W_])(?:real|official|verified)(?![^\W_])")


def claims_authenticity(*fields) -> bool:
    """Whole-word "real" / "official" / "verified" in any field (underscores separate words)."""
    return any(f and CLAIM_RE.search(f.casefold()) for f in fields)


def select_candidates(dataset: Dataset, verified_titles: Sequence[str], max_distance: int = 3) -> list[int]:
    """Channels claiming authenticity by wording, plus those whose title is
    within edit distance < ``max_distance`` of a verified title."""
    refs = [t.casefold() for t in verified_titles]
    out = []
    for cid, ch in dataset.channels.items():
        if claims_authenticity(ch.title, ch.description, ch.username):
            out.append(cid)
            continue
        title = ch.title.casefold()
        if any(abs(len(title) - len(r)) < max_distance and levenshtein(title, r) < max_distance for r in refs):
            out.append(cid)
    return out
