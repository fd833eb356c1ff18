"""Channel-level LDA (collapsed Gibbs), UMass coherence and K-means grouping."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numba
import numpy as np

log = logging.getLogger(__name__)

URL_RE = re.compile(r"(?:[a-z][a-z0-9+.\-]*://|www\.|t\.me/)\S*", re.IGNORECASE)
WORD_RE = re.compile(r"[^\W\d_]+")

DEFAULT_STOPWORDS = frozenset(
    """a about above after again against all am an and any are as at be because been before being
    below between both but by can could did do does doing down during each few for from further had
    has have having he her here hers herself him himself his how i if in into is it its itself just
    me more most my myself no nor not now of off on once only or other our ours ourselves out over
    own same she should so some such than that the their theirs them themselves then there these they
    this those through to too under until up very was we were what when where which while who whom why
    will with would you your yours yourself yourselves also get got one like may might must shall still
    yet via""".split()
)


class CorpusError(ValueError):
    pass


@dataclass
class Corpus:
    doc_ids: list[int]             # channel id per document
    docs: list[np.ndarray]         # token ids per document
    vocab: list[str]               # sorted
    df: np.ndarray                 # document frequency per token id
    dropped: list[int] = field(default_factory=list)  # channels with no surviving tokens

    @property
    def n_docs(self) -> int:
        return len(self.docs)

    @property
    def n_tokens(self) -> int:
        return int(sum(d.size for d in self.docs))

    def doc_sets(self) -> list[set]:
        return [set(d.tolist()) for d in self.docs]


def tokenize(text: str, stopwords: frozenset = DEFAULT_STOPWORDS) -> list[str]:
    text = URL_RE.sub(" ", text.lower())
    return [t for t in WORD_RE.findall(text) if len(t) >= 3 and t not in stopwords]


def channel_texts(dataset, language: Optional[str] = "en", languages: Optional[Mapping[int, str]] = None) -> dict[int, list[str]]:
    """Text messages per channel, restricted to channels detected as ``language``
    (``None`` keeps every channel). Channels without text are left out."""
    if language is not None and languages is None:
        from .language import channel_languages
        languages = channel_languages(dataset)
    out = {}
    for cid in dataset.channels:
        if language is not None and languages.get(cid) != language:
            continue
        texts = [m.text for m in dataset.channel_messages(cid) if m.kind == "text"]
        if texts:
            out[cid] = texts
    return out


def preprocess_corpus(
    channel_texts: Mapping[int, Iterable[str]],
    min_df: int = 5,
    stopwords: frozenset = DEFAULT_STOPWORDS,
) -> Corpus:
    """One document per channel: lowercased tokens without URLs, punctuation,
    stopwords, tokens shorter than 3 characters or in fewer than ``min_df``
    documents. Documents left empty are dropped and listed in ``dropped``.
    """
    raw: dict[int, list[str]] = {}
    df: dict[str, int] = {}
    for cid in sorted(channel_texts):
        toks: list[str] = []
        for text in channel_texts[cid]:
            toks.extend(tokenize(text, stopwords))
        raw[cid] = toks
        for t in set(toks):
            df[t] = df.get(t, 0) + 1
    vocab = sorted(t for t, n in df.items() if n >= min_df)
    index = {t: i for i, t in enumerate(vocab)}
    doc_ids, docs, dropped = [], [], []
    for cid, toks in raw.items():
        ids = np.array([index[t] for t in toks if t in index], dtype=np.int64)
        if ids.size == 0:
            dropped.append(cid)
            continue
        doc_ids.append(cid)
        docs.append(ids)
    if dropped:
        log.info("dropped %d empty documents", len(dropped))
    if not docs:
        raise CorpusError("corpus is empty after filtering")
    dfs = np.zeros(len(vocab), dtype=np.int64)
    for d in docs:
        dfs[np.unique(d)] += 1
    return Corpus(doc_ids, docs, vocab, dfs, dropped)


@dataclass
class TopicModel:
    K: int
    phi: np.ndarray    # K x V
    theta: np.ndarray  # D x K
    alpha: float
    beta: float
    seed: int
    vocab: list[str]
    doc_ids: list[int]


@numba.njit(cache=True)
def _gibbs_sweep(words, doc_of, z, ndk, nkw, nk, alpha, beta, vbeta, u, probs):
    K = nk.size
    for i in range(words.size):
        w = words[i]
        d = doc_of[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            probs[t] = total
        r = u[i] * total
        k = 0
        while k < K - 1 and probs[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


def lda_gibbs(
    corpus: Corpus,
    K: int,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iters: int = 500,
    seed: int = 0,
    debug: bool = False,
) -> TopicModel:
    """Collapsed Gibbs sampling; alpha defaults to 50/K.

    Point estimates come from the final count tables. With ``debug`` the
    count tables are checked against the token total after every sweep.
    """
    V = len(corpus.vocab)
    if K < 2:
        raise ValueError("K must be >= 2")
    if K > V:
        raise ValueError(f"K={K} exceeds vocabulary size {V}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if alpha is None:
        alpha = 50.0 / K
    rng = np.random.default_rng(seed)
    D = corpus.n_docs
    words = np.concatenate(corpus.docs).astype(np.int64)
    doc_of = np.repeat(np.arange(D, dtype=np.int64), [d.size for d in corpus.docs])
    z = rng.integers(0, K, size=words.size).astype(np.int64)
    ndk = np.zeros((D, K), dtype=np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    np.add.at(ndk, (doc_of, z), 1)
    np.add.at(nkw, (z, words), 1)
    nk = nkw.sum(axis=1)
    probs = np.empty(K)
    n = words.size
    for sweep in range(iters):
        u = rng.random(n)
        _gibbs_sweep(words, doc_of, z, ndk, nkw, nk, float(alpha), float(beta), V * beta, u, probs)
        if debug and (ndk.sum() != n or nkw.sum() != n or nk.sum() != n or (nkw.sum(axis=1) != nk).any()):
            raise AssertionError(f"count tables out of sync after sweep {sweep}")
    phi = (nkw + beta) / (nk[:, None] + V * beta)
    phi /= phi.sum(axis=1, keepdims=True)
    theta = (ndk + alpha) / (ndk.sum(axis=1, keepdims=True) + K * alpha)
    theta /= theta.sum(axis=1, keepdims=True)
    return TopicModel(K, phi, theta, float(alpha), float(beta), seed, list(corpus.vocab), list(corpus.doc_ids))


def top_word_ids(phi_row: np.ndarray, n: int) -> list[int]:
    # vocab is sorted, so ascending id breaks ties lexicographically
    order = np.lexsort((np.arange(phi_row.size), -phi_row))
    return order[:n].tolist()


def top_keywords(model: TopicModel, n: int = 10) -> list[list[str]]:
    if n > len(model.vocab):
        raise ValueError("n exceeds vocabulary size")
    return [[model.vocab[i] for i in top_word_ids(row, n)] for row in model.phi]


def umass_topic(word_ids: Sequence[int], doc_sets: Sequence[set], df: np.ndarray) -> float:
    """Mean over ordered pairs j < i of log((D(w_i, w_j) + 1) / D(w_j))."""
    n = len(word_ids)
    total = 0.0
    for i in range(1, n):
        wi = word_ids[i]
        for j in range(i):
            wj = word_ids[j]
            if df[wj] == 0:
                raise ValueError(f"word id {wj} has zero document frequency")
            co = sum(1 for s in doc_sets if wi in s and wj in s)
            total += np.log((co + 1.0) / df[wj])
    return total / (n * (n - 1) / 2)


def umass_coherence(model: TopicModel, corpus: Corpus, top_n: int = 10) -> float:
    """Average UMass score over topics; values nearer 0 mean more coherent topics."""
    if top_n > len(corpus.vocab):
        raise ValueError("top_n exceeds vocabulary size")
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    sets = corpus.doc_sets()
    scores = [umass_topic(top_word_ids(row, top_n), sets, corpus.df) for row in model.phi]
    return float(np.mean(scores))


def select_topic_count(
    corpus: Corpus,
    k_min: int = 10,
    k_max: int = 25,
    seed: int = 0,
    iters: int = 500,
    top_n: int = 10,
    beta: float = 0.01,
) -> tuple[int, TopicModel, list[tuple[int, float]]]:
    """Train one model per K and keep the highest UMass score (smaller K on ties)."""
    if k_min > k_max:
        raise ValueError("k_min > k_max")
    table = []
    best = None
    for K in range(k_min, k_max + 1):
        model = lda_gibbs(corpus, K, beta=beta, iters=iters, seed=seed + K)
        score = umass_coherence(model, corpus, min(top_n, len(corpus.vocab)))
        table.append((K, score))
        if best is None or score > best[1]:
            best = (K, score, model)
    return best[0], best[2], table


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int
    history: list[float]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_cluster(X: np.ndarray, clusters: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-8) -> KMeansResult:
    """k-means++ seeding followed by Lloyd iterations.

    Stops when no centroid moves more than ``tol`` or after ``max_iter``
    rounds. An emptied cluster is re-seeded at the point farthest from its
    current centroid.
    """
    X = np.asarray(X, dtype=float)
    if clusters < 1:
        raise ValueError("clusters must be >= 1")
    if clusters > X.shape[0]:
        raise ValueError("more clusters than points")
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    C = np.empty((clusters, X.shape[1]))
    C[0] = X[rng.integers(n)]
    closest = ((X - C[0]) ** 2).sum(axis=1)
    for c in range(1, clusters):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        C[c] = X[idx]
        closest = np.minimum(closest, ((X - C[c]) ** 2).sum(axis=1))

    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    it = 0
    for it in range(1, max_iter + 1):
        d = _sq_dists(X, C)
        labels = d.argmin(axis=1)
        history.append(float(d[np.arange(n), labels].sum()))
        new = C.copy()
        for c in range(clusters):
            members = labels == c
            if members.any():
                new[c] = X[members].mean(axis=0)
        for c in range(clusters):
            if not (labels == c).any():
                far = int(d[np.arange(n), labels].argmax())
                new[c] = X[far]
                labels[far] = c
                d[far, :] = 0.0
        shift = np.sqrt(((new - C) ** 2).sum(axis=1)).max()
        C = new
        if shift < tol:
            break
    d = _sq_dists(X, C)
    labels = d.argmin(axis=1)
    inertia = float(d[np.arange(n), labels].sum())
    history.append(inertia)
    return KMeansResult(labels, C, inertia, it, history)
