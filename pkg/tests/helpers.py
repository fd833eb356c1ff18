"""Small builders for hand-made archives."""

import numpy as np

from tgscope.data_model import ChannelRecord, Dataset, ForwardOrigin, MessageRecord
from tgscope.graph import ForwardGraph


def channel(cid, title=None, description="", verified=False, scam=False, language="en",
            subscribers=10, username=None):
    return ChannelRecord(cid, username, title if title is not None else f"channel {cid}", description,
                         1_000, subscribers, verified, scam, language)


def text(cid, mid, date, body, fwd_from=None, fwd_date=None, fwd_name=None):
    fwd = None
    if fwd_from is not None or fwd_name is not None:
        fwd = ForwardOrigin(fwd_from, fwd_name, date if fwd_date is None else fwd_date)
    return MessageRecord(cid, mid, date, "text", text=body, fwd=fwd)


def media(cid, mid, date, title="clip", fmt="mp4", fwd_from=None):
    fwd = ForwardOrigin(fwd_from, None, date) if fwd_from is not None else None
    return MessageRecord(cid, mid, date, "media", media_title=title, media_format=fmt, fwd=fwd)


def dataset(channels, messages, reference_time=None):
    return Dataset.build(channels, messages, reference_time)


def random_digraph(rng: np.random.Generator, n: int, p: float) -> ForwardGraph:
    edges = [(u, v, int(rng.integers(1, 4))) for u in range(n) for v in range(n)
             if u != v and rng.random() < p]
    return ForwardGraph.from_edges(range(n), edges)


def sentence(rng, vocab, k):
    return " ".join(vocab[i] for i in rng.integers(0, len(vocab), size=k))
